#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "drm/tensor.hpp"

namespace drm {

/// P = N(μ_p, I), Q = N(μ_q, I).
struct GaussianPairSpec {
  std::size_t d = 2;
  std::vector<double> mu_p;
  std::vector<double> mu_q;

  /// μ_p = 0, μ_q = e₁.
  static GaussianPairSpec unit_shift(std::size_t d);
  /// μ_p = δ·e₁, μ_q = 0.
  static GaussianPairSpec shifted(std::size_t d, double delta_p, double delta_q = 0.0);
  void validate() const;
};

/// X drawn from P, Z drawn from Q.
struct SamplePair {
  Tensor X;
  Tensor Z;
  std::string source;
  std::uint64_t seed = 0;

  std::size_t dim() const { return X.cols(); }
};

/// X uses stream derive_seed(seed, 0) and Z uses derive_seed(seed, 1), so m
/// never affects X.
SamplePair sample_gaussian_pair(const GaussianPairSpec& spec, std::size_t n, std::size_t m,
                                std::uint64_t seed);
/// n draws from N(mean, I) on its own stream.
Tensor sample_gaussian(std::span<const double> mean, std::size_t n, std::uint64_t seed);

enum class Shape2D { MoG, Banana, Rings, Square, Cosine, Funnel };

const char* to_string(Shape2D s);
/// Case-insensitive; "ring" is accepted for Rings. Throws UnknownShape.
Shape2D shape_from_string(const std::string& s);

/// Samples are clamped into this box [xmin, xmax] × [ymin, ymax].
std::array<double, 4> bounding_box(Shape2D s);

Tensor sample_shape2d(Shape2D shape, std::size_t n, std::uint64_t seed);

/// CSV with header dim0,...,dim{d-1},source and source ∈ {P, Q}.
void write_pair_csv(std::ostream& os, const SamplePair& pair);
SamplePair read_pair_csv(std::istream& is);

}  // namespace drm
