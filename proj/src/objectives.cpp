#include "drm/objectives.hpp"

#include <cmath>
#include <string>

#include "drm/error.hpp"

namespace drm {
namespace {

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void require_positive(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!(x > 0.0)) throw Error(ErrorCode::NonPositiveRatio, std::string(what) + " contains " + std::to_string(x));
  }
}

void require_nonempty(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::ShapeMismatch, "empty batch");
}

}  // namespace

const char* to_string(Variant v) {
  switch (v) {
    case Variant::UklP: return "ukl_p";
    case Variant::UklQ: return "ukl_q";
    case Variant::Stratified: return "stratified";
    case Variant::StratifiedExp: return "stratified_exp";
    case Variant::StratifiedExpUnweighted: return "stratified_exp_unweighted";
    case Variant::NnStratified: return "nn_stratified";
    case Variant::LikelihoodOnly: return "likelihood_only";
  }
  return "?";
}

Variant variant_from_string(const std::string& s) {
  for (Variant v : {Variant::UklP, Variant::UklQ, Variant::Stratified, Variant::StratifiedExp,
                    Variant::StratifiedExpUnweighted, Variant::NnStratified, Variant::LikelihoodOnly}) {
    if (s == to_string(v)) return v;
  }
  throw Error(ErrorCode::ParseError, "unknown objective variant '" + s + "'");
}

void ObjectiveSpec::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(ErrorCode::RangeError, "lambda must lie in [0, 1]");
  if (!(C >= 0.0)) throw Error(ErrorCode::RangeError, "C must be non-negative");
  if (!(clip_bound > 1.0)) throw Error(ErrorCode::RangeError, "clip_bound must exceed 1");
}

BatchStats batch_stats(std::span<const double> r_X, std::span<const double> logr_X,
                       std::span<const double> r_Z, std::span<const double> logr_Z) {
  require_nonempty(r_X, r_Z);
  BatchStats s;
  s.n = r_X.size();
  s.m = r_Z.size();
  s.mean_log_r_X = mean(logr_X);
  s.mean_log_r_Z = mean(logr_Z);
  double inv = 0.0;
  for (double r : r_X) inv += 1.0 / r;
  s.mean_inv_r_X = inv / static_cast<double>(s.n);
  s.mean_r_Z = mean(r_Z);
  return s;
}

double ukl_loss(std::span<const double> r_X, std::span<const double> r_Z) {
  require_nonempty(r_X, r_Z);
  require_positive(r_X, "r_X");
  require_positive(r_Z, "r_Z");
  double log_sum = 0.0;
  for (double r : r_X) log_sum += std::log(r);
  return -log_sum / static_cast<double>(r_X.size()) + mean(r_Z);
}

double khat(const ObjectiveSpec& spec, std::span<const double> r_X, std::span<const double> logr_X,
            std::span<const double> r_Z, std::span<const double> logr_Z) {
  require_positive(r_X, "r_X");
  require_positive(r_Z, "r_Z");
  const BatchStats s = batch_stats(r_X, logr_X, r_Z, logr_Z);
  const double lam = spec.lambda;
  return lam * s.mean_log_r_X - (1.0 - lam) * s.mean_log_r_Z - (1.0 - lam) * s.mean_inv_r_X -
         lam * s.mean_r_Z;
}

double khat_exp(double lambda, std::span<const double> g_X, std::span<const double> g_Z,
                bool weighted_penalties) {
  require_nonempty(g_X, g_Z);
  double pen_X = 0.0, pen_Z = 0.0;
  for (double g : g_X) pen_X += std::exp(-g);
  for (double g : g_Z) pen_Z += std::exp(g);
  pen_X /= static_cast<double>(g_X.size());
  pen_Z /= static_cast<double>(g_Z.size());
  const double w_X = weighted_penalties ? 1.0 - lambda : 1.0;
  const double w_Z = weighted_penalties ? lambda : 1.0;
  const double v = lambda * mean(g_X) - (1.0 - lambda) * mean(g_Z) - w_X * pen_X - w_Z * pen_Z;
  if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "khat_exp overflowed");
  return v;
}

double likelihood_part(double lambda, std::span<const double> logr_X, std::span<const double> logr_Z) {
  require_nonempty(logr_X, logr_Z);
  return lambda * mean(logr_X) - (1.0 - lambda) * mean(logr_Z);
}

Branches nn_branch(const ObjectiveSpec& spec, double sum_r_X, double sum_r_Z, double sum_inv_r_X,
                   double sum_inv_r_Z, std::size_t n, std::size_t m) {
  const double dn = spec.sum_form ? 1.0 : static_cast<double>(n);
  const double dm = spec.sum_form ? 1.0 : static_cast<double>(m);
  Branches b;
  b.forward = sum_r_Z / dm - spec.C * (sum_r_X / dn) >= 0.0;
  b.inverse = sum_inv_r_X / dn - spec.C * (sum_inv_r_Z / dm) >= 0.0;
  return b;
}

double nnukl_loss(std::span<const double> r_X, std::span<const double> logr_X, std::span<const double> r_Z,
                  double C, Normalization norm) {
  require_nonempty(r_X, r_Z);
  require_positive(r_X, "r_X");
  require_positive(r_Z, "r_Z");
  double fit = 0.0, sum_X = 0.0, sum_Z = 0.0;
  for (std::size_t i = 0; i < r_X.size(); ++i) {
    fit += logr_X[i] - C * r_X[i];
    sum_X += r_X[i];
  }
  for (double r : r_Z) sum_Z += r;
  if (norm == Normalization::Mean) {
    fit /= static_cast<double>(r_X.size());
    sum_X /= static_cast<double>(r_X.size());
    sum_Z /= static_cast<double>(r_Z.size());
  }
  return -fit + std::max(0.0, sum_Z - C * sum_X);
}

namespace {

ad::NodeId reduce(ad::Graph& g, ad::NodeId a, bool sum_form) { return sum_form ? g.sum(a) : g.mean(a); }

// One side of the corrected objective: the nnUKL of (fit_log, fit_r) against
// `other_r` when the margin holds, else descent on the negated margin.
ad::NodeId nn_side(ad::Graph& g, const ObjectiveSpec& spec, ad::NodeId log_own, ad::NodeId r_own,
                   ad::NodeId r_other, bool margin_ok) {
  const ad::NodeId margin = g.sub(reduce(g, r_other, spec.sum_form), g.scale(reduce(g, r_own, spec.sum_form), spec.C));
  if (!margin_ok) return g.negate(margin);
  const ad::NodeId fit = g.negate(reduce(g, g.sub(log_own, g.scale(r_own, spec.C)), spec.sum_form));
  return g.add(fit, g.maximum(margin, 0.0));
}

}  // namespace

Branches branches_for(const ad::Graph& graph, const ObjectiveSpec& spec, const RatioNodes& x,
                      const RatioNodes& z) {
  const Tensor& r_X = graph.value(x.r);
  const Tensor& r_Z = graph.value(z.r);
  double s_rX = 0.0, s_rZ = 0.0, s_iX = 0.0, s_iZ = 0.0;
  for (double r : r_X.data()) {
    s_rX += r;
    s_iX += 1.0 / r;
  }
  for (double r : r_Z.data()) {
    s_rZ += r;
    s_iZ += 1.0 / r;
  }
  return nn_branch(spec, s_rX, s_rZ, s_iX, s_iZ, r_X.size(), r_Z.size());
}

ad::NodeId build_loss(ad::Graph& g, const ObjectiveSpec& spec, const RatioNodes& x, const RatioNodes& z,
                      Branches branches) {
  const double lam = spec.lambda;
  switch (spec.variant) {
    case Variant::UklP:
      return g.add(g.negate(g.mean(x.logr)), g.mean(z.r));
    case Variant::UklQ:
      return g.add(g.mean(z.logr), g.mean(g.reciprocal(x.r)));
    case Variant::Stratified: {
      // The term layout mirrors nn_side so that C = 0 reproduces it bit for bit.
      const ad::NodeId fwd = g.add(g.negate(g.mean(x.logr)), g.mean(z.r));
      const ad::NodeId inv = g.add(g.mean(z.logr), g.mean(g.reciprocal(x.r)));
      return g.add(g.scale(fwd, lam), g.scale(inv, 1.0 - lam));
    }
    case Variant::StratifiedExp:
    case Variant::StratifiedExpUnweighted: {
      const bool weighted = spec.variant == Variant::StratifiedExp;
      const ad::NodeId lik = g.sub(g.scale(g.mean(x.logr), lam), g.scale(g.mean(z.logr), 1.0 - lam));
      const ad::NodeId pen_X = g.mean(g.exp(g.negate(x.logr)));
      const ad::NodeId pen_Z = g.mean(g.exp(z.logr));
      const ad::NodeId pen = g.add(g.scale(pen_X, weighted ? 1.0 - lam : 1.0), g.scale(pen_Z, weighted ? lam : 1.0));
      return g.sub(pen, lik);
    }
    case Variant::NnStratified: {
      const ad::NodeId inv_X = g.reciprocal(x.r);
      const ad::NodeId inv_Z = g.reciprocal(z.r);
      const ad::NodeId fwd = nn_side(g, spec, x.logr, x.r, z.r, branches.forward);
      const ad::NodeId inv = nn_side(g, spec, g.negate(z.logr), inv_Z, inv_X, branches.inverse);
      return g.add(g.scale(fwd, lam), g.scale(inv, 1.0 - lam));
    }
    case Variant::LikelihoodOnly:
      return g.sub(g.scale(g.mean(z.logr), 1.0 - lam), g.scale(g.mean(x.logr), lam));
  }
  throw Error(ErrorCode::ParseError, "unhandled variant");
}

}  // namespace drm
