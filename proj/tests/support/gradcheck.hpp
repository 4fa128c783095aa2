#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "drm/autodiff.hpp"
#include "drm/optim.hpp"
#include "drm/rng.hpp"
#include "oracles.hpp"

namespace gradcheck {

using drm::Tensor;
using drm::ad::Graph;
using drm::ad::NodeId;

inline Tensor random_tensor(drm::Rng& rng, std::size_t r, std::size_t c, double lo, double hi) {
  Tensor t(r, c);
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

// Pushes every entry at least `gap` away from `kink`.
inline void avoid(Tensor& t, double kink, double gap) {
  for (double& v : t.data())
    if (std::abs(v - kink) < gap) v = kink + (v < kink ? -gap : gap) * 2;
}

// A random scalar graph exercising one operator kind. `build` maps a
// parameter value to the output node of a fresh graph.
struct Case {
  std::string op;
  Tensor x;
  std::function<NodeId(Graph&, const Tensor&)> build;
};

inline Case make_case(const std::string& op, drm::Rng& rng) {
  const std::size_t r = 2 + rng.uniform_index(3), c = 2 + rng.uniform_index(3);
  const Tensor R = random_tensor(rng, r, c, -1, 1);
  auto weighted = [R](Graph& g, NodeId y) { return g.sum(g.mul(y, g.constant(R))); };
  Case k{op, random_tensor(rng, r, c, -1.5, 1.5), {}};

  if (op == "matmul") {
    const Tensor K = random_tensor(rng, c, 3, -1, 1);
    const Tensor R3 = random_tensor(rng, r, 3, -1, 1);
    k.build = [K, R3](Graph& g, const Tensor& x) {
      return g.sum(g.mul(g.matmul(g.parameter(x, 0), g.constant(K)), g.constant(R3)));
    };
  } else if (op == "add") {
    const Tensor K = random_tensor(rng, r, c, -1, 1);
    k.build = [=](Graph& g, const Tensor& x) {
      const NodeId p = g.parameter(x, 0);
      return weighted(g, g.mul(g.add(p, g.constant(K)), g.add(p, p)));
    };
  } else if (op == "add_bias") {
    const Tensor K = random_tensor(rng, r, c, -1, 1);
    k.x = random_tensor(rng, 1, c, -1, 1);
    k.build = [=](Graph& g, const Tensor& x) {
      const NodeId y = g.add_bias(g.constant(K), g.parameter(x, 0));
      return weighted(g, g.mul(y, y));
    };
  } else if (op == "relu") {
    avoid(k.x, 0.0, 1e-3);
    k.build = [=](Graph& g, const Tensor& x) { return weighted(g, g.relu(g.parameter(x, 0))); };
  } else if (op == "exp") {
    k.build = [=](Graph& g, const Tensor& x) { return weighted(g, g.exp(g.parameter(x, 0))); };
  } else if (op == "log") {
    k.x = random_tensor(rng, r, c, 0.3, 3);
    k.build = [=](Graph& g, const Tensor& x) { return weighted(g, g.log(g.parameter(x, 0))); };
  } else if (op == "reciprocal") {
    k.x = random_tensor(rng, r, c, 0.3, 3);
    k.build = [=](Graph& g, const Tensor& x) { return weighted(g, g.reciprocal(g.parameter(x, 0))); };
  } else if (op == "mul") {
    const Tensor K = random_tensor(rng, r, c, -1, 1);
    k.build = [=](Graph& g, const Tensor& x) {
      const NodeId p = g.parameter(x, 0);
      return weighted(g, g.mul(g.mul(p, g.constant(K)), p));
    };
  } else if (op == "mul_scalar") {
    const Tensor K = random_tensor(rng, r, c, -1, 1);
    k.x = random_tensor(rng, 1, 1, 0.5, 2);
    k.build = [=](Graph& g, const Tensor& x) {
      const NodeId s = g.parameter(x, 0);
      return weighted(g, g.mul_scalar(g.mul_scalar(g.constant(K), s), s));
    };
  } else if (op == "scale") {
    const double a = rng.uniform(-2, 2);
    k.build = [=](Graph& g, const Tensor& x) {
      const NodeId p = g.parameter(x, 0);
      return weighted(g, g.mul(g.scale(p, a), p));
    };
  } else if (op == "sum") {
    k.build = [=](Graph& g, const Tensor& x) {
      const NodeId s = g.sum(g.mul(g.parameter(x, 0), g.constant(R)));
      return g.sum(g.mul(s, s));
    };
  } else if (op == "mean") {
    k.build = [=](Graph& g, const Tensor& x) {
      const NodeId s = g.mean(g.mul(g.parameter(x, 0), g.constant(R)));
      return g.mean(g.exp(s));
    };
  } else if (op == "maximum") {
    const double cst = rng.uniform(-0.5, 0.5);
    avoid(k.x, cst, 1e-3);
    k.build = [=](Graph& g, const Tensor& x) {
      const NodeId p = g.parameter(x, 0);
      return weighted(g, g.mul(g.maximum(p, cst), p));
    };
  } else if (op == "clamp") {
    const double lo = rng.uniform(-1, -0.2), hi = rng.uniform(0.2, 1);
    avoid(k.x, lo, 1e-3);
    avoid(k.x, hi, 1e-3);
    k.build = [=](Graph& g, const Tensor& x) {
      const NodeId p = g.parameter(x, 0);
      return weighted(g, g.mul(g.clamp(p, lo, hi), p));
    };
  } else if (op == "negate") {
    k.build = [=](Graph& g, const Tensor& x) {
      const NodeId p = g.parameter(x, 0);
      return weighted(g, g.mul(g.negate(p), g.exp(p)));
    };
  } else if (op == "spectral_normalize") {
    const drm::SpectralState st = [&] {
      drm::Rng srng(rng.next_u64());
      return drm::SpectralState::random(r, c, srng, 1);
    }();
    k.build = [=](Graph& g, const Tensor& x) {
      return weighted(g, drm::spectral_normalize(g, g.parameter(x, 0), st));
    };
  }
  return k;
}

inline const std::vector<std::string>& operator_kinds() {
  static const std::vector<std::string> ops{"matmul", "add",  "add_bias", "relu",    "exp",   "log",
                                            "reciprocal", "mul", "mul_scalar", "scale", "sum", "mean",
                                            "maximum", "clamp", "negate", "spectral_normalize"};
  return ops;
}

// Max over coordinates of |ad − fd| / max(|ad|, |fd|, floor).
inline double max_relative_error(const Case& k, double h = 1e-5, double floor = 1e-6) {
  Graph g;
  const NodeId out = k.build(g, k.x);
  const auto ad = g.backward(out).at(0);
  const auto fd = oracle::central_diff(
      [&](const Tensor& x) {
        Graph gg;
        return gg.value(k.build(gg, x)).item();
      },
      k.x, h);
  double worst = 0;
  for (std::size_t i = 0; i < fd.size(); ++i) {
    const double denom = std::max({std::abs(ad[i]), std::abs(fd[i]), floor});
    worst = std::max(worst, std::abs(ad[i] - fd[i]) / denom);
  }
  return worst;
}

}  // namespace gradcheck
