#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "drm/autodiff.hpp"
#include "drm/ratio_model.hpp"

namespace drm {

enum class Variant {
  UklP,                // ordinary sampling from P: -mean log r(X) + mean r(Z)
  UklQ,                // ordinary sampling from Q, inverse-ratio form
  Stratified,          // -K̂
  StratifiedExp,       // -K̂ written in g = log r, λ-weighted penalties
  StratifiedExpUnweighted,  // as above with unweighted penalty terms
  NnStratified,        // non-negative corrected, branch-switched
  LikelihoodOnly,      // -(λ mean log r(X) - (1-λ) mean log r(Z)), no penalties
};

const char* to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct ObjectiveSpec {
  double lambda = 0.5;
  Variant variant = Variant::Stratified;
  double C = 0.0;            // nn correction constant; 0 disables it
  double clip_bound = 1e6;   // shared with the model
  bool sum_form = false;     // nn terms as raw sums instead of per-sample means

  /// Throws RangeError on λ ∉ [0,1] or C < 0.
  void validate() const;
  /// C = 1/R̄, the default when the correction is switched on.
  static double default_C(double clip_bound) { return 1.0 / clip_bound; }
};

struct BatchStats {
  double mean_log_r_X = 0.0;
  double mean_log_r_Z = 0.0;
  double mean_inv_r_X = 0.0;
  double mean_r_Z = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;
};

BatchStats batch_stats(std::span<const double> r_X, std::span<const double> logr_X,
                       std::span<const double> r_Z, std::span<const double> logr_Z);

/// -(1/n)Σ log r(Xᵢ) + (1/m)Σ r(Zⱼ). Throws NonPositiveRatio.
double ukl_loss(std::span<const double> r_X, std::span<const double> r_Z);

/// K̂ = λ·mean log r(X) − (1−λ)·mean log r(Z) − (1−λ)·mean 1/r(X) − λ·mean r(Z).
/// Maximization form. Throws NonPositiveRatio.
double khat(const ObjectiveSpec& spec, std::span<const double> r_X, std::span<const double> logr_X,
            std::span<const double> r_Z, std::span<const double> logr_Z);

/// K̂ for r = exp(g). With `weighted_penalties` false the two penalty terms
/// drop their λ weights. Throws NonFiniteValue.
double khat_exp(double lambda, std::span<const double> g_X, std::span<const double> g_Z,
                bool weighted_penalties = true);

/// The λ-weighted likelihood part, λ·mean log r(X) − (1−λ)·mean log r(Z).
double likelihood_part(double lambda, std::span<const double> logr_X, std::span<const double> logr_Z);

struct Branches {
  bool forward = true;  // Σ r(Z) − C·Σ r(X) ≥ 0
  bool inverse = true;  // Σ 1/r(X) − C·Σ 1/r(Z) ≥ 0
};

/// Branch selection for the non-negative correction. In mean form (the
/// default, spec.sum_form false) the sums are divided by n and m first.
Branches nn_branch(const ObjectiveSpec& spec, double sum_r_X, double sum_r_Z, double sum_inv_r_X,
                   double sum_inv_r_Z, std::size_t n, std::size_t m);

enum class Normalization { Sum, Mean };

/// −Σ(log r(Xᵢ) − C·r(Xᵢ)) + max(0, Σ r(Zⱼ) − C·Σ r(Xᵢ)), raw sums by default.
double nnukl_loss(std::span<const double> r_X, std::span<const double> logr_X, std::span<const double> r_Z,
                  double C, Normalization norm = Normalization::Sum);

/// Minimization loss for `spec` on a minibatch, added to `graph`.
/// `branches` only matters for NnStratified; use branches_for() to fill it.
ad::NodeId build_loss(ad::Graph& graph, const ObjectiveSpec& spec, const RatioNodes& x,
                      const RatioNodes& z, Branches branches = {});

/// Evaluates nn_branch on the forward values already in the graph.
Branches branches_for(const ad::Graph& graph, const ObjectiveSpec& spec, const RatioNodes& x,
                      const RatioNodes& z);

}  // namespace drm
