#include "drm/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "drm/error.hpp"
#include "drm/kernels.hpp"
#include "drm/objectives.hpp"

namespace drm {

double gaussian_true_ratio(std::span<const double> x, const GaussianPairSpec& spec) {
  if (x.size() != spec.d) throw Error(ErrorCode::ShapeMismatch, "point dimension does not match spec");
  double dp = 0.0, dq = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    dp += (x[k] - spec.mu_p[k]) * (x[k] - spec.mu_p[k]);
    dq += (x[k] - spec.mu_q[k]) * (x[k] - spec.mu_q[k]);
  }
  return std::exp(-0.5 * dp + 0.5 * dq);
}

double gaussian_kl(const GaussianPairSpec& spec) {
  double s = 0.0;
  for (std::size_t k = 0; k < spec.d; ++k) s += (spec.mu_p[k] - spec.mu_q[k]) * (spec.mu_p[k] - spec.mu_q[k]);
  return 0.5 * s;
}

double l2_error(const RatioFn& model, const GaussianPairSpec& spec, const Tensor& eval_points, L2Side side) {
  if (eval_points.rows() == 0) throw Error(ErrorCode::RangeError, "no evaluation points");
  const RatioValues rv = model(eval_points);
  double acc = 0.0;
  for (std::size_t i = 0; i < eval_points.rows(); ++i) {
    const double truth = gaussian_true_ratio(eval_points.row(i), spec);
    const double diff = side == L2Side::Forward ? rv.r[i] - truth : 1.0 / rv.r[i] - 1.0 / truth;
    acc += diff * diff;
  }
  return acc / static_cast<double>(eval_points.rows());
}

DrmEstimate drm_estimate(const RatioFn& model, double lambda, const Tensor& X_eval, const Tensor& Z_eval) {
  const RatioValues rx = model(X_eval);
  const RatioValues rz = model(Z_eval);
  ObjectiveSpec spec;
  spec.lambda = lambda;
  return {likelihood_part(lambda, rx.logr, rz.logr), khat(spec, rx.r, rx.logr, rz.r, rz.logr)};
}

double mmd2(const Tensor& a, const Tensor& b, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::RangeError, "bandwidth must be > 0");
  if (a.cols() != b.cols()) throw Error(ErrorCode::ShapeMismatch, "mmd2 dimension mismatch");
  const double v = kernels::gaussian_kernel_mean(a, a, sigma) + kernels::gaussian_kernel_mean(b, b, sigma) -
                   2.0 * kernels::gaussian_kernel_mean(a, b, sigma);
  return std::max(v, 0.0);
}

double median_bandwidth(const Tensor& points) {
  const auto all = kernels::pairwise_distances(points, points);
  std::vector<double> d;
  const std::size_t n = points.rows();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d.push_back(all[i * n + j]);
  if (d.empty()) return 1.0;
  std::nth_element(d.begin(), d.begin() + static_cast<long>(d.size() / 2), d.end());
  return d[d.size() / 2] > 0.0 ? d[d.size() / 2] : 1.0;
}

double kde_nll(const Tensor& generated, const Tensor& validation, double bandwidth) {
  if (!(bandwidth > 0.0)) throw Error(ErrorCode::RangeError, "bandwidth must be > 0");
  const auto logp = kernels::kde_log_density(generated, validation, bandwidth, 1e-300);
  double s = 0.0;
  for (double v : logp) s += v;
  return -s / static_cast<double>(logp.size());
}

double scott_bandwidth(const Tensor& points) {
  const std::size_t n = points.rows(), d = points.cols();
  if (n < 2) return 1.0;
  double mean_std = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    double mu = 0.0;
    for (std::size_t i = 0; i < n; ++i) mu += points(i, k);
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (points(i, k) - mu) * (points(i, k) - mu);
    mean_std += std::sqrt(var / static_cast<double>(n - 1));
  }
  mean_std /= static_cast<double>(d);
  const double h = mean_std * std::pow(static_cast<double>(n), -1.0 / (static_cast<double>(d) + 4.0));
  return h > 0.0 ? h : 1.0;
}

Summary summarize(std::span<const double> values) {
  std::vector<double> v;
  for (double x : values)
    if (std::isfinite(x)) v.push_back(x);
  if (v.empty()) throw Error(ErrorCode::RangeError, "no finite values to summarize");
  Summary s;
  s.count = v.size();
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  for (double x : v) s.std += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(s.std / static_cast<double>(v.size()));
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  s.median = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
  return s;
}

}  // namespace drm
