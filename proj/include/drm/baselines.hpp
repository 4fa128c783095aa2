#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "drm/ratio_model.hpp"
#include "drm/tensor.hpp"

namespace drm {

/// Dense SPD solve by Cholesky. Throws SingularSystem when a pivot is not
/// positive relative to the matrix scale.
Tensor solve_spd(const Tensor& a, const Tensor& rhs);

struct UlsifSolution {
  Tensor theta;  // raw solution of (Ĥ + reg·I)θ = ĥ
  double sigma = 1.0;
  double reg = 0.0;
  double alpha = 0.0;
  Tensor centers;
  double residual = 0.0;  // ‖(Ĥ + reg·I)θ − ĥ‖∞

  /// Prediction model with negative θ entries clamped to zero.
  KernelRatioModel model() const;
};

/// uLSIF: Ĥ = (1/m)Φ_ZᵀΦ_Z, ĥ = (1/n)Φ_Xᵀ1.
UlsifSolution ulsif_fit(const Tensor& X, const Tensor& Z, const Tensor& centers, double sigma, double reg);

/// RuLSIF: Ĥ = α(1/n)Φ_XᵀΦ_X + (1−α)(1/m)Φ_ZᵀΦ_Z. Estimates p / (αp + (1−α)q).
UlsifSolution rulsif_fit(const Tensor& X, const Tensor& Z, double alpha, const Tensor& centers, double sigma,
                         double reg);

/// J(θ) = ½θᵀĤθ − ĥᵀθ on the given samples.
double ulsif_criterion(const Tensor& X, const Tensor& Z, double alpha, const Tensor& centers, double sigma,
                       std::span<const double> theta);

/// Up to `max_centers` rows of X chosen without replacement.
Tensor choose_centers(const Tensor& X, std::size_t max_centers, std::uint64_t seed);

/// Median pairwise distance over a pooled subsample of at most `max_points` rows.
double median_heuristic(const Tensor& X, const Tensor& Z, std::uint64_t seed, std::size_t max_points = 300);

struct CvResult {
  double sigma = 0.0;
  double reg = 0.0;
  double score = 0.0;  // mean held-out J
};

/// k-fold selection (fold of row i is i mod k) of the (σ, reg) pair with the
/// smallest mean held-out criterion, using clamped θ. Ties go to the larger reg,
/// then the larger σ.
CvResult cv_select(const Tensor& X, const Tensor& Z, std::span<const double> sigma_grid,
                   std::span<const double> reg_grid, std::size_t k_folds, const Tensor& centers,
                   double alpha = 0.0);

struct UlsifRecipe {
  double alpha = 0.0;
  std::size_t max_centers = 100;
  std::vector<double> sigma_factors{0.5, 1.0, 2.0, 5.0};
  std::vector<double> reg_grid{1e-3, 1e-2, 1e-1, 1.0};
  std::size_t folds = 5;
};

/// Centers, median-heuristic σ grid, cross-validation, final fit.
UlsifSolution fit_ulsif_cv(const Tensor& X, const Tensor& Z, const UlsifRecipe& recipe, std::uint64_t seed);

}  // namespace drm
