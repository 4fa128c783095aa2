#pragma once

#include <functional>
#include <span>
#include <vector>

#include "drm/datasets.hpp"
#include "drm/ratio_model.hpp"
#include "drm/tensor.hpp"

namespace drm {

/// exp(−‖x−μ_p‖²/2 + ‖x−μ_q‖²/2).
double gaussian_true_ratio(std::span<const double> x, const GaussianPairSpec& spec);
/// ‖μ_p − μ_q‖²/2.
double gaussian_kl(const GaussianPairSpec& spec);

enum class L2Side { Forward, Inverse };

using RatioFn = std::function<RatioValues(const Tensor&)>;

/// Forward: mean (r̂(z) − r*(z))² over Q-samples. Inverse: mean (1/r̂(x) − 1/r*(x))²
/// over P-samples.
double l2_error(const RatioFn& model, const GaussianPairSpec& spec, const Tensor& eval_points, L2Side side);

struct DrmEstimate {
  double likelihood = 0.0;  // λ·mean log r(X) − (1−λ)·mean log r(Z)
  double khat = 0.0;        // full stratified objective
};

DrmEstimate drm_estimate(const RatioFn& model, double lambda, const Tensor& X_eval, const Tensor& Z_eval);

/// Biased V-statistic MMD² with a Gaussian kernel.
double mmd2(const Tensor& a, const Tensor& b, double sigma);
/// Median pairwise distance among the rows of `points`.
double median_bandwidth(const Tensor& points);

/// −mean log p̂(v) under a Gaussian KDE fitted on `generated`. Densities are
/// floored at 1e-300.
double kde_nll(const Tensor& generated, const Tensor& validation, double bandwidth);
/// Scott's rule: mean per-coordinate std times n^(−1/(d+4)).
double scott_bandwidth(const Tensor& points);

struct Summary {
  double mean = 0.0;
  double median = 0.0;
  double std = 0.0;  // population std
  std::size_t count = 0;
};

/// Non-finite values are skipped. Throws RangeError if nothing remains.
Summary summarize(std::span<const double> values);

}  // namespace drm
