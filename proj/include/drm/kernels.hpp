#pragma once

#include <vector>

#include "drm/tensor.hpp"

// Dense inner loops used by training and evaluation.
//
// drm::kernels::* are the OpenMP versions; drm::kernels::serial::* are the
// plain reference loops kept for testing and benchmarking. Each output element
// is accumulated by one thread in the same order as the reference, so the two
// agree bit for bit regardless of thread count.
namespace drm::kernels {

/// A·B.
Tensor matmul(const Tensor& a, const Tensor& b);
/// Aᵀ·B.
Tensor matmul_tn(const Tensor& a, const Tensor& b);
/// A·Bᵀ.
Tensor matmul_nt(const Tensor& a, const Tensor& b);

/// Entry (i,j) = exp(-‖aᵢ - bⱼ‖² / (2σ²)).
Tensor gaussian_kernel(const Tensor& a, const Tensor& b, double sigma);
/// Mean over all (i,j) of the Gaussian kernel between rows of a and b.
double gaussian_kernel_mean(const Tensor& a, const Tensor& b, double sigma);
/// Pairwise Euclidean distances between rows of a and b, flattened.
std::vector<double> pairwise_distances(const Tensor& a, const Tensor& b);

/// log p̂(q) for each query row under an isotropic Gaussian KDE with
/// bandwidth h over `points`; densities below `floor` are floored.
std::vector<double> kde_log_density(const Tensor& points, const Tensor& queries, double h,
                                    double floor);

namespace serial {
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor matmul_tn(const Tensor& a, const Tensor& b);
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor gaussian_kernel(const Tensor& a, const Tensor& b, double sigma);
double gaussian_kernel_mean(const Tensor& a, const Tensor& b, double sigma);
std::vector<double> pairwise_distances(const Tensor& a, const Tensor& b);
std::vector<double> kde_log_density(const Tensor& points, const Tensor& queries, double h,
                                    double floor);
}  // namespace serial

}  // namespace drm::kernels
