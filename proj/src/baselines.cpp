#include "drm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "drm/error.hpp"
#include "drm/kernels.hpp"
#include "drm/rng.hpp"

namespace drm {
namespace {

// Unnormalized second-moment and mean accumulators of a feature matrix over a
// subset of rows.
struct Moments {
  Tensor gram;  // Σ φφᵀ
  Tensor sum;   // Σ φ
  std::size_t count = 0;
};

Moments moments(const Tensor& phi, std::size_t fold, std::size_t k) {
  const std::size_t b = phi.cols();
  Moments mo{Tensor(b, b), Tensor(b, 1), 0};
  for (std::size_t i = 0; i < phi.rows(); ++i) {
    if (k != 0 && i % k != fold) continue;
    const auto row = phi.row(i);
    for (std::size_t a = 0; a < b; ++a) {
      mo.sum[a] += row[a];
      for (std::size_t c = 0; c < b; ++c) mo.gram(a, c) += row[a] * row[c];
    }
    ++mo.count;
  }
  return mo;
}

Moments minus(const Moments& total, const Moments& part) {
  Moments out = total;
  for (std::size_t i = 0; i < out.gram.size(); ++i) out.gram[i] -= part.gram[i];
  for (std::size_t i = 0; i < out.sum.size(); ++i) out.sum[i] -= part.sum[i];
  out.count -= part.count;
  return out;
}

// Ĥ and ĥ from moments of Φ_X and Φ_Z.
std::pair<Tensor, Tensor> system(const Moments& mx, const Moments& mz, double alpha) {
  const std::size_t b = mz.gram.rows();
  Tensor H(b, b), h(b, 1);
  const double n = static_cast<double>(mx.count), m = static_cast<double>(mz.count);
  for (std::size_t i = 0; i < b * b; ++i) {
    H[i] = (1.0 - alpha) * mz.gram[i] / m;
    if (alpha != 0.0) H[i] += alpha * mx.gram[i] / n;
  }
  for (std::size_t i = 0; i < b; ++i) h[i] = mx.sum[i] / n;
  return {std::move(H), std::move(h)};
}

double criterion(const Tensor& H, const Tensor& h, std::span<const double> theta) {
  const std::size_t b = h.rows();
  double quad = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < b; ++j) row += H(i, j) * theta[j];
    quad += theta[i] * row;
    lin += h[i] * theta[i];
  }
  return 0.5 * quad - lin;
}

UlsifSolution solve(Tensor H, const Tensor& h, double reg, double sigma, double alpha, const Tensor& centers) {
  if (!(reg >= 0.0)) throw Error(ErrorCode::RangeError, "reg must be >= 0");
  const std::size_t b = h.rows();
  for (std::size_t i = 0; i < b; ++i) H(i, i) += reg;
  UlsifSolution sol;
  sol.theta = solve_spd(H, h);
  sol.sigma = sigma;
  sol.reg = reg;
  sol.alpha = alpha;
  sol.centers = centers;
  for (std::size_t i = 0; i < b; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < b; ++j) row += H(i, j) * sol.theta[j];
    sol.residual = std::max(sol.residual, std::abs(row - h[i]));
  }
  return sol;
}

}  // namespace

Tensor solve_spd(const Tensor& a, const Tensor& rhs) {
  const std::size_t n = a.rows();
  if (a.cols() != n || rhs.rows() != n) throw Error(ErrorCode::ShapeMismatch, "solve_spd shapes");
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a(i, i)));
  const double tol = std::max(scale, 1e-300) * 1e-13;

  Tensor L(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
    if (!(d > tol)) throw Error(ErrorCode::SingularSystem, "matrix is singular or not positive definite at pivot " + std::to_string(j));
    L(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / L(j, j);
    }
  }
  Tensor x(n, rhs.cols());
  for (std::size_t c = 0; c < rhs.cols(); ++c) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = rhs(i, c);
      for (std::size_t k = 0; k < i; ++k) s -= L(i, k) * y[k];
      y[i] = s / L(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = y[i];
      for (std::size_t k = i + 1; k < n; ++k) s -= L(k, i) * x(k, c);
      x(i, c) = s / L(i, i);
    }
  }
  return x;
}

KernelRatioModel UlsifSolution::model() const {
  KernelRatioModel m{centers, theta, sigma};
  for (double& t : m.theta.data()) t = std::max(t, 0.0);
  return m;
}

UlsifSolution ulsif_fit(const Tensor& X, const Tensor& Z, const Tensor& centers, double sigma, double reg) {
  return rulsif_fit(X, Z, 0.0, centers, sigma, reg);
}

UlsifSolution rulsif_fit(const Tensor& X, const Tensor& Z, double alpha, const Tensor& centers, double sigma,
                         double reg) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw Error(ErrorCode::RangeError, "alpha must lie in [0, 1)");
  const Tensor phi_X = kernel_design_matrix(X, centers, sigma);
  const Tensor phi_Z = kernel_design_matrix(Z, centers, sigma);
  auto [H, h] = system(moments(phi_X, 0, 0), moments(phi_Z, 0, 0), alpha);
  return solve(std::move(H), h, reg, sigma, alpha, centers);
}

double ulsif_criterion(const Tensor& X, const Tensor& Z, double alpha, const Tensor& centers, double sigma,
                       std::span<const double> theta) {
  const Tensor phi_X = kernel_design_matrix(X, centers, sigma);
  const Tensor phi_Z = kernel_design_matrix(Z, centers, sigma);
  auto [H, h] = system(moments(phi_X, 0, 0), moments(phi_Z, 0, 0), alpha);
  return criterion(H, h, theta);
}

Tensor choose_centers(const Tensor& X, std::size_t max_centers, std::uint64_t seed) {
  if (X.rows() <= max_centers) return X;
  Rng rng(seed);
  auto perm = rng.permutation(X.rows());
  perm.resize(max_centers);
  return X.gather_rows(perm);
}

double median_heuristic(const Tensor& X, const Tensor& Z, std::uint64_t seed, std::size_t max_points) {
  Tensor pooled(X.rows() + Z.rows(), X.cols());
  std::copy(X.data().begin(), X.data().end(), pooled.data().begin());
  std::copy(Z.data().begin(), Z.data().end(), pooled.data().begin() + static_cast<long>(X.size()));
  const Tensor sub = choose_centers(pooled, max_points, seed);
  std::vector<double> dist;
  const auto all = kernels::pairwise_distances(sub, sub);
  for (std::size_t i = 0; i < sub.rows(); ++i)
    for (std::size_t j = i + 1; j < sub.rows(); ++j) dist.push_back(all[i * sub.rows() + j]);
  if (dist.empty()) return 1.0;
  std::nth_element(dist.begin(), dist.begin() + static_cast<long>(dist.size() / 2), dist.end());
  const double med = dist[dist.size() / 2];
  return med > 0.0 ? med : 1.0;
}

CvResult cv_select(const Tensor& X, const Tensor& Z, std::span<const double> sigma_grid,
                   std::span<const double> reg_grid, std::size_t k_folds, const Tensor& centers, double alpha) {
  if (sigma_grid.empty() || reg_grid.empty()) throw Error(ErrorCode::RangeError, "empty CV grid");
  if (k_folds < 2) throw Error(ErrorCode::RangeError, "k_folds must be >= 2");
  if (X.rows() < k_folds || Z.rows() < k_folds) throw Error(ErrorCode::RangeError, "fewer samples than folds");

  CvResult best;
  best.score = std::numeric_limits<double>::infinity();
  bool have = false;
  for (double sigma : sigma_grid) {
    const Tensor phi_X = kernel_design_matrix(X, centers, sigma);
    const Tensor phi_Z = kernel_design_matrix(Z, centers, sigma);
    const Moments tot_X = moments(phi_X, 0, 0), tot_Z = moments(phi_Z, 0, 0);
    std::vector<Moments> fold_X, fold_Z;
    for (std::size_t f = 0; f < k_folds; ++f) {
      fold_X.push_back(moments(phi_X, f, k_folds));
      fold_Z.push_back(moments(phi_Z, f, k_folds));
    }
    for (double reg : reg_grid) {
      double score = 0.0;
      for (std::size_t f = 0; f < k_folds; ++f) {
        auto [H, h] = system(minus(tot_X, fold_X[f]), minus(tot_Z, fold_Z[f]), alpha);
        UlsifSolution sol;
        try {
          sol = solve(std::move(H), h, reg, sigma, alpha, centers);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::SingularSystem) throw;
          score = std::numeric_limits<double>::infinity();
          break;
        }
        for (double& t : sol.theta.data()) t = std::max(t, 0.0);
        auto [Ht, ht] = system(fold_X[f], fold_Z[f], alpha);
        score += criterion(Ht, ht, sol.theta.data());
      }
      score /= static_cast<double>(k_folds);
      const bool better = !have || score < best.score ||
                          (score == best.score && (reg > best.reg || (reg == best.reg && sigma > best.sigma)));
      if (better) {
        best = {sigma, reg, score};
        have = true;
      }
    }
  }
  return best;
}

UlsifSolution fit_ulsif_cv(const Tensor& X, const Tensor& Z, const UlsifRecipe& recipe, std::uint64_t seed) {
  const Tensor centers = choose_centers(X, recipe.max_centers, derive_seed(seed, 1));
  const double med = median_heuristic(X, Z, derive_seed(seed, 2));
  std::vector<double> sigmas;
  for (double f : recipe.sigma_factors) sigmas.push_back(f * med);
  const CvResult cv = cv_select(X, Z, sigmas, recipe.reg_grid, recipe.folds, centers, recipe.alpha);
  return rulsif_fit(X, Z, recipe.alpha, centers, cv.sigma, cv.reg);
}

}  // namespace drm
