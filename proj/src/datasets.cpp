#include "drm/datasets.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "drm/error.hpp"
#include "drm/rng.hpp"

namespace drm {

GaussianPairSpec GaussianPairSpec::unit_shift(std::size_t d) { return shifted(d, 0.0, 1.0); }

GaussianPairSpec GaussianPairSpec::shifted(std::size_t d, double delta_p, double delta_q) {
  GaussianPairSpec s;
  s.d = d;
  s.mu_p.assign(d, 0.0);
  s.mu_q.assign(d, 0.0);
  if (d > 0) {
    s.mu_p[0] = delta_p;
    s.mu_q[0] = delta_q;
  }
  return s;
}

void GaussianPairSpec::validate() const {
  if (d < 1) throw Error(ErrorCode::RangeError, "dimension must be >= 1");
  if (mu_p.size() != d || mu_q.size() != d) throw Error(ErrorCode::ShapeMismatch, "mean length != d");
}

Tensor sample_gaussian(std::span<const double> mean, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Tensor out(n, mean.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < mean.size(); ++j) out(i, j) = mean[j] + rng.normal();
  return out;
}

SamplePair sample_gaussian_pair(const GaussianPairSpec& spec, std::size_t n, std::size_t m,
                                std::uint64_t seed) {
  spec.validate();
  if (n < 1 || m < 1) throw Error(ErrorCode::RangeError, "sample sizes must be >= 1");
  SamplePair pair;
  pair.X = sample_gaussian(spec.mu_p, n, derive_seed(seed, 0));
  pair.Z = sample_gaussian(spec.mu_q, m, derive_seed(seed, 1));
  pair.source = "gaussian";
  pair.seed = seed;
  return pair;
}

const char* to_string(Shape2D s) {
  switch (s) {
    case Shape2D::MoG: return "MoG";
    case Shape2D::Banana: return "Banana";
    case Shape2D::Rings: return "Rings";
    case Shape2D::Square: return "Square";
    case Shape2D::Cosine: return "Cosine";
    case Shape2D::Funnel: return "Funnel";
  }
  return "?";
}

Shape2D shape_from_string(const std::string& s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "mog") return Shape2D::MoG;
  if (lower == "banana") return Shape2D::Banana;
  if (lower == "rings" || lower == "ring") return Shape2D::Rings;
  if (lower == "square") return Shape2D::Square;
  if (lower == "cosine") return Shape2D::Cosine;
  if (lower == "funnel") return Shape2D::Funnel;
  throw Error(ErrorCode::UnknownShape, "unknown 2-D shape '" + s + "'");
}

std::array<double, 4> bounding_box(Shape2D s) {
  switch (s) {
    case Shape2D::MoG: return {-3.0, 3.0, -3.0, 3.0};
    case Shape2D::Banana: return {-4.0, 4.0, -3.0, 9.0};
    case Shape2D::Rings: return {-3.0, 3.0, -3.0, 3.0};
    case Shape2D::Square: return {-1.5, 1.5, -1.5, 1.5};
    case Shape2D::Cosine: return {-2.0, 2.0, -2.0, 2.0};
    case Shape2D::Funnel: return {-5.0, 5.0, -5.0, 5.0};
  }
  return {0, 0, 0, 0};
}

// Recipes (all noise terms are standard normals from the same stream):
//   MoG     8 equally weighted N(2(cos θₖ, sin θₖ), 0.1²I), θₖ = 2πk/8
//   Banana  (z₁, 0.5 z₂ + 0.5(z₁² − 1))
//   Rings   radius 1 or 2 with probability ½ each, angle uniform, radial noise 0.05
//   Square  uniform on the boundary of [−1,1]², plus N(0, 0.05²I)
//   Cosine  x ~ U(−2, 2), y = cos(πx) + 0.1 z
//   Funnel  v = 1.5 z₁, x = exp(v/2) z₂, point (x, v)
// followed by clamping into bounding_box().
Tensor sample_shape2d(Shape2D shape, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::RangeError, "sample size must be >= 1");
  Rng rng(seed);
  Tensor out(n, 2);
  constexpr double pi = std::numbers::pi;
  for (std::size_t i = 0; i < n; ++i) {
    double x = 0.0, y = 0.0;
    switch (shape) {
      case Shape2D::MoG: {
        const double theta = 2.0 * pi * static_cast<double>(rng.uniform_index(8)) / 8.0;
        x = 2.0 * std::cos(theta) + 0.1 * rng.normal();
        y = 2.0 * std::sin(theta) + 0.1 * rng.normal();
        break;
      }
      case Shape2D::Banana: {
        const double z1 = rng.normal(), z2 = rng.normal();
        x = z1;
        y = 0.5 * z2 + 0.5 * (z1 * z1 - 1.0);
        break;
      }
      case Shape2D::Rings: {
        const double radius = rng.uniform_index(2) == 0 ? 1.0 : 2.0;
        const double theta = rng.uniform(0.0, 2.0 * pi);
        const double r = radius + 0.05 * rng.normal();
        x = r * std::cos(theta);
        y = r * std::sin(theta);
        break;
      }
      case Shape2D::Square: {
        const double t = rng.uniform(0.0, 8.0);  // perimeter position, side length 2
        const int side = static_cast<int>(t / 2.0);
        const double s = t - 2.0 * side - 1.0;
        switch (side) {
          case 0: x = s, y = -1.0; break;
          case 1: x = 1.0, y = s; break;
          case 2: x = -s, y = 1.0; break;
          default: x = -1.0, y = -s; break;
        }
        x += 0.05 * rng.normal();
        y += 0.05 * rng.normal();
        break;
      }
      case Shape2D::Cosine: {
        x = rng.uniform(-2.0, 2.0);
        y = std::cos(pi * x) + 0.1 * rng.normal();
        break;
      }
      case Shape2D::Funnel: {
        const double v = 1.5 * rng.normal();
        x = std::exp(0.5 * v) * rng.normal();
        y = v;
        break;
      }
    }
    const auto box = bounding_box(shape);
    out(i, 0) = std::clamp(x, box[0], box[1]);
    out(i, 1) = std::clamp(y, box[2], box[3]);
  }
  return out;
}

void write_pair_csv(std::ostream& os, const SamplePair& pair) {
  const std::size_t d = pair.dim();
  for (std::size_t j = 0; j < d; ++j) os << "dim" << j << ',';
  os << "source\n";
  char buf[40];
  auto emit = [&](const Tensor& t, const char* tag) {
    for (std::size_t i = 0; i < t.rows(); ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", t(i, j));
        os << buf << ',';
      }
      os << tag << '\n';
    }
  };
  emit(pair.X, "P");
  emit(pair.Z, "Q");
}

SamplePair read_pair_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::ParseError, "empty dataset file");
  std::size_t d = 0;
  {
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cols;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    if (cols.empty() || cols.back() != "source") throw Error(ErrorCode::ParseError, "line 1: last column must be 'source'");
    d = cols.size() - 1;
    for (std::size_t j = 0; j < d; ++j) {
      if (cols[j] != "dim" + std::to_string(j)) throw Error(ErrorCode::ParseError, "line 1: bad column '" + cols[j] + "'");
    }
  }
  std::vector<double> xs, zs;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    for (std::size_t j = 0; j < d; ++j) {
      if (!std::getline(ss, cell, ',')) throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": too few columns");
      char* end = nullptr;
      row.push_back(std::strtod(cell.c_str(), &end));
      if (end == cell.c_str() || *end != '\0') throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad number");
    }
    std::getline(ss, cell);
    if (cell == "P") {
      xs.insert(xs.end(), row.begin(), row.end());
    } else if (cell == "Q") {
      zs.insert(zs.end(), row.begin(), row.end());
    } else {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": source must be P or Q");
    }
  }
  if (xs.empty() || zs.empty()) throw Error(ErrorCode::ParseError, "dataset needs rows from both P and Q");
  SamplePair pair;
  const std::size_t n = xs.size() / d, m = zs.size() / d;
  pair.X = Tensor(n, d, std::move(xs));
  pair.Z = Tensor(m, d, std::move(zs));
  pair.source = "csv";
  return pair;
}

}  // namespace drm
