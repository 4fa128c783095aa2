#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "drm/autodiff.hpp"
#include "drm/rng.hpp"
#include "drm/tensor.hpp"

namespace drm {

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t t = 0;
  std::vector<Tensor> m;  // lazily sized on the first step
  std::vector<Tensor> v;
};

/// One bias-corrected Adam descent step, in place. Callers wanting ascent
/// negate the gradients. Throws ShapeMismatch when the lists disagree.
void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state);

/// Power-iteration estimates of the leading singular vectors of a weight.
struct SpectralState {
  Tensor u;  // rows(W) × 1, unit norm
  Tensor v;  // cols(W) × 1, unit norm
  int n_power_iters = 1;

  static SpectralState random(std::size_t rows, std::size_t cols, Rng& rng, int n_power_iters = 1);
};

struct SpectralResult {
  Tensor normalized;  // W / sigma
  double sigma = 0.0;
  SpectralState state;
};

/// Runs state.n_power_iters power iterations from the stored u, then returns
/// W / sigma with sigma = uᵀWv. Throws ZeroMatrix for an all-zero W.
SpectralResult spectral_normalize(const Tensor& w, SpectralState state);

/// In-place form used by the training loops.
double power_iterate(const Tensor& w, SpectralState& state);

/// sigma = uᵀWv for the stored vectors, without iterating.
double spectral_sigma(const Tensor& w, const SpectralState& state);

/// Graph node for W / (uᵀWv) with u and v held constant, so the gradient
/// flows through W in both the numerator and the bilinear sigma.
ad::NodeId spectral_normalize(ad::Graph& graph, ad::NodeId w, const SpectralState& state);

}  // namespace drm
