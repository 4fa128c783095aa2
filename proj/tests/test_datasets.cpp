#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "drm/datasets.hpp"
#include "drm/error.hpp"
#include "drm/rng.hpp"

using drm::Tensor;

TEST_CASE("tensor basics") {
  const Tensor t = Tensor::from_rows({{1, 2, 3}, {4, 5, 6}});
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK(t(1, 2) == 6);
  CHECK(t.transposed()(2, 1) == 6);
  const std::vector<std::size_t> idx{1, 0, 1};
  const Tensor g = t.gather_rows(idx);
  CHECK(g(0, 0) == 4);
  CHECK(g(2, 2) == 6);
  CHECK_THROWS_AS(Tensor(2, 2, std::vector<double>{1, 2, 3}), drm::Error);
  CHECK_THROWS_AS(t.item(), drm::Error);
  CHECK(Tensor::scalar(4).item() == 4);
}

TEST_CASE("rng: reproducible, split streams differ") {
  drm::Rng a(9), b(9);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  drm::Rng c(9);
  const auto s1 = c.split(1), s2 = c.split(2);
  auto x1 = s1, x2 = s2;
  CHECK(x1.next_u64() != x2.next_u64());
  CHECK(drm::derive_seed(5, 0) != drm::derive_seed(5, 1));
}

TEST_CASE("rng: uniform and normal moments") {
  drm::Rng r(17);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    CHECK_FALSE((u < 0 || u >= 1));
    su += u;
    const double z = r.normal();
    sn += z;
    sn2 += z * z;
  }
  CHECK(std::abs(su / n - 0.5) < 3 * std::sqrt(1.0 / 12 / n) * 2);
  CHECK(std::abs(sn / n) < 4 / std::sqrt(double(n)));
  CHECK(std::abs(sn2 / n - 1) < 4 * std::sqrt(2.0 / n));
}

TEST_CASE("rng: uniform_index and permutation") {
  drm::Rng r(3);
  std::vector<int> counts(5);
  for (int i = 0; i < 50000; ++i) ++counts[r.uniform_index(5)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 4 * std::sqrt(50000 * 0.2 * 0.8));
  auto p = r.permutation(100);
  std::sort(p.begin(), p.end());
  for (std::size_t i = 0; i < 100; ++i) CHECK(p[i] == i);
}

TEST_CASE("gaussian pair shapes and determinism") {
  const auto spec = drm::GaussianPairSpec::unit_shift(10);
  const auto a = drm::sample_gaussian_pair(spec, 1000, 1000, 42);
  CHECK(a.X.rows() == 1000);
  CHECK(a.X.cols() == 10);
  CHECK(a.Z.rows() == 1000);
  CHECK(a.Z.cols() == 10);
  const auto b = drm::sample_gaussian_pair(spec, 1000, 1000, 42);
  CHECK(a.X == b.X);
  CHECK(a.Z == b.Z);
  const auto c = drm::sample_gaussian_pair(spec, 1000, 37, 42);
  CHECK(c.X == a.X);
}

TEST_CASE("gaussian pair sample mean") {
  const auto spec = drm::GaussianPairSpec::unit_shift(2);
  const auto p = drm::sample_gaussian_pair(spec, 100000, 100000, 7);
  for (std::size_t k = 0; k < 2; ++k) {
    double mx = 0, mz = 0;
    for (std::size_t i = 0; i < 100000; ++i) {
      mx += p.X(i, k);
      mz += p.Z(i, k);
    }
    CHECK(std::abs(mx / 1e5 - spec.mu_p[k]) < 0.02);
    CHECK(std::abs(mz / 1e5 - spec.mu_q[k]) < 0.02);
  }
}

TEST_CASE("square shape is centred") {
  const Tensor s = drm::sample_shape2d(drm::Shape2D::Square, 50000, 1);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    mx += s(i, 0);
    my += s(i, 1);
  }
  CHECK(std::abs(mx / 5e4) < 0.05);
  CHECK(std::abs(my / 5e4) < 0.05);
}

TEST_CASE("mog mode counts") {
  const Tensor s = drm::sample_shape2d(drm::Shape2D::MoG, 8000, 2);
  std::vector<int> counts(8);
  for (std::size_t i = 0; i < s.rows(); ++i) {
    double best = 1e9;
    int arg = 0;
    for (int k = 0; k < 8; ++k) {
      const double th = 2 * std::numbers::pi * k / 8;
      const double dx = s(i, 0) - 2 * std::cos(th), dy = s(i, 1) - 2 * std::sin(th);
      if (dx * dx + dy * dy < best) best = dx * dx + dy * dy, arg = k;
    }
    ++counts[arg];
  }
  const double tol = 3 * std::sqrt(8000 * (1.0 / 8) * (7.0 / 8));
  for (int c : counts) CHECK(std::abs(c - 1000) <= tol);
}

TEST_CASE("shapes: determinism, bounding boxes, names") {
  for (auto shape : {drm::Shape2D::MoG, drm::Shape2D::Banana, drm::Shape2D::Rings, drm::Shape2D::Square,
                     drm::Shape2D::Cosine, drm::Shape2D::Funnel}) {
    CAPTURE(drm::to_string(shape));
    const Tensor a = drm::sample_shape2d(shape, 3000, 5);
    CHECK(a == drm::sample_shape2d(shape, 3000, 5));
    const auto box = drm::bounding_box(shape);
    for (std::size_t i = 0; i < a.rows(); ++i) {
      CHECK_FALSE((a(i, 0) < box[0] || a(i, 0) > box[1] || a(i, 1) < box[2] || a(i, 1) > box[3]));
    }
    CHECK(drm::shape_from_string(drm::to_string(shape)) == shape);
  }
  try {
    drm::shape_from_string("hexagon");
    FAIL("no throw");
  } catch (const drm::Error& e) {
    CHECK(e.code() == drm::ErrorCode::UnknownShape);
  }
}

TEST_CASE("pair csv round trip") {
  const auto p = drm::sample_gaussian_pair(drm::GaussianPairSpec::unit_shift(3), 5, 4, 1);
  std::stringstream ss;
  drm::write_pair_csv(ss, p);
  const std::string text = ss.str();
  CHECK(text.rfind("dim0,dim1,dim2,source\n", 0) == 0);
  const auto q = drm::read_pair_csv(ss);
  CHECK(q.X == p.X);
  CHECK(q.Z == p.Z);
}
