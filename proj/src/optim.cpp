#include "drm/optim.hpp"

#include <cmath>
#include <string>

#include "drm/error.hpp"

namespace drm {

void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state) {
  if (params.size() != grads.size()) {
    throw Error(ErrorCode::ShapeMismatch, "adam_step: " + std::to_string(params.size()) +
                                              " params vs " + std::to_string(grads.size()) + " grads");
  }
  if (state.m.empty()) {
    for (const Tensor& p : params) {
      state.m.emplace_back(p.rows(), p.cols());
      state.v.emplace_back(p.rows(), p.cols());
    }
  }
  if (state.m.size() != params.size()) throw Error(ErrorCode::ShapeMismatch, "adam_step: state size");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!params[k].same_shape(grads[k]) || !params[k].same_shape(state.m[k])) {
      throw Error(ErrorCode::ShapeMismatch, "adam_step: parameter " + std::to_string(k));
    }
  }

  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = params[k];
    Tensor& m = state.m[k];
    Tensor& v = state.v[k];
    const Tensor& g = grads[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

namespace {

double norm2(const Tensor& t) {
  double s = 0.0;
  for (double x : t.data()) s += x * x;
  return std::sqrt(s);
}

void normalize(Tensor& t, double n) {
  for (double& x : t.data()) x /= n;
}

// Wᵀu for W rows×cols and u rows×1.
Tensor wt_u(const Tensor& w, const Tensor& u) {
  Tensor out(w.cols(), 1);
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (std::size_t j = 0; j < w.cols(); ++j) out[j] += w(i, j) * u[i];
  return out;
}

Tensor w_v(const Tensor& w, const Tensor& v) {
  Tensor out(w.rows(), 1);
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (std::size_t j = 0; j < w.cols(); ++j) out[i] += w(i, j) * v[j];
  return out;
}

}  // namespace

SpectralState SpectralState::random(std::size_t rows, std::size_t cols, Rng& rng, int n_power_iters) {
  SpectralState s;
  s.u = Tensor(rows, 1);
  for (double& x : s.u.data()) x = rng.normal();
  normalize(s.u, norm2(s.u));
  s.v = Tensor(cols, 1, 1.0 / std::sqrt(static_cast<double>(cols)));
  s.n_power_iters = n_power_iters;
  return s;
}

double power_iterate(const Tensor& w, SpectralState& state) {
  if (norm2(w) == 0.0) throw Error(ErrorCode::ZeroMatrix, "spectral normalization of a zero matrix");
  if (state.u.rows() != w.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "spectral state u has length " +
                                              std::to_string(state.u.rows()) + ", W has " +
                                              std::to_string(w.rows()) + " rows");
  }
  for (int it = 0; it < std::max(1, state.n_power_iters); ++it) {
    Tensor v = wt_u(w, state.u);
    double nv = norm2(v);
    if (nv == 0.0) {
      // u is orthogonal to the range of W; restart from the first nonzero row.
      for (std::size_t i = 0; i < w.rows(); ++i) {
        Tensor u(w.rows(), 1);
        u[i] = 1.0;
        v = wt_u(w, u);
        nv = norm2(v);
        if (nv > 0.0) break;
      }
    }
    normalize(v, nv);
    Tensor u = w_v(w, v);
    normalize(u, norm2(u));
    state.u = std::move(u);
    state.v = std::move(v);
  }
  return spectral_sigma(w, state);
}

double spectral_sigma(const Tensor& w, const SpectralState& state) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (std::size_t j = 0; j < w.cols(); ++j) s += state.u[i] * w(i, j) * state.v[j];
  return s;
}

SpectralResult spectral_normalize(const Tensor& w, SpectralState state) {
  const double sigma = power_iterate(w, state);
  Tensor out = w;
  for (double& x : out.data()) x /= sigma;
  return {std::move(out), sigma, std::move(state)};
}

ad::NodeId spectral_normalize(ad::Graph& graph, ad::NodeId w, const SpectralState& state) {
  const Tensor& wv = graph.value(w);
  Tensor outer(wv.rows(), wv.cols());
  for (std::size_t i = 0; i < wv.rows(); ++i)
    for (std::size_t j = 0; j < wv.cols(); ++j) outer(i, j) = state.u[i] * state.v[j];
  const ad::NodeId uv = graph.constant(std::move(outer));
  const ad::NodeId sigma = graph.sum(graph.mul(w, uv));
  return graph.mul_scalar(w, graph.reciprocal(sigma));
}

}  // namespace drm
