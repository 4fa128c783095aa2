#include <doctest.h>

#include <cmath>
#include <vector>

#include "drm/error.hpp"
#include "drm/objectives.hpp"
#include "drm/rng.hpp"

using Vec = std::vector<double>;

namespace {

Vec logs(const Vec& r) {
  Vec out;
  for (double v : r) out.push_back(std::log(v));
  return out;
}

Vec inv(const Vec& r) {
  Vec out;
  for (double v : r) out.push_back(1.0 / v);
  return out;
}

Vec positives(drm::Rng& rng, std::size_t n) {
  Vec v(n);
  for (double& x : v) x = std::exp(rng.uniform(-2, 2));
  return v;
}

drm::ObjectiveSpec lam(double l) {
  drm::ObjectiveSpec s;
  s.lambda = l;
  return s;
}

double mean(const Vec& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / v.size();
}

// K̂ written out term by term.
double khat_ref(double l, const Vec& rX, const Vec& rZ) {
  return l * mean(logs(rX)) - (1 - l) * mean(logs(rZ)) - (1 - l) * mean(inv(rX)) - l * mean(rZ);
}

}  // namespace

TEST_CASE("ukl examples") {
  CHECK(drm::ukl_loss(Vec{1, 1}, Vec{1}) == 1.0);
  CHECK(drm::ukl_loss(Vec{std::exp(1.0)}, Vec{2}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(drm::ukl_loss(Vec{1, std::exp(2.0)}, Vec{0.5, 1.5})) < 1e-15);
  CHECK_THROWS_AS(drm::ukl_loss(Vec{0.0}, Vec{1}), drm::Error);
}

TEST_CASE("khat examples") {
  const Vec one{1, 1, 1}, zero{0, 0, 0};
  for (double l : {0.0, 0.3, 0.5, 1.0}) CHECK(drm::khat(lam(l), one, zero, one, zero) == doctest::Approx(-1.0));
  Vec neg{-1};
  CHECK_THROWS_AS(drm::khat(lam(0.5), neg, Vec{0}, one, zero), drm::Error);
}

TEST_CASE("khat matches its term-by-term definition") {
  drm::Rng rng(1);
  for (int rep = 0; rep < 100; ++rep) {
    const double l = rng.uniform();
    const Vec rX = positives(rng, 7), rZ = positives(rng, 5);
    CHECK(std::abs(drm::khat(lam(l), rX, logs(rX), rZ, logs(rZ)) - khat_ref(l, rX, rZ)) < 1e-12);
  }
}

TEST_CASE("endpoint reductions and swap symmetry") {
  drm::Rng rng(2);
  for (int rep = 0; rep < 1000; ++rep) {
    const Vec rX = positives(rng, 1 + rng.uniform_index(10)), rZ = positives(rng, 1 + rng.uniform_index(10));
    const double k1 = drm::khat(lam(1), rX, logs(rX), rZ, logs(rZ));
    CHECK(std::abs(k1 + drm::ukl_loss(rX, rZ)) < 1e-12);
    const double k0 = drm::khat(lam(0), rX, logs(rX), rZ, logs(rZ));
    CHECK(std::abs(k0 + drm::ukl_loss(inv(rZ), inv(rX))) < 1e-12);
    const double a = drm::khat(lam(0.5), rX, logs(rX), rZ, logs(rZ));
    const double b = drm::khat(lam(0.5), inv(rZ), logs(inv(rZ)), inv(rX), logs(inv(rX)));
    CHECK(std::abs(a - b) < 1e-12);
  }
}

TEST_CASE("khat is concave in each log-ratio value and in each r(X)") {
  drm::Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const double l = rng.uniform();
    Vec rX = positives(rng, 4), rZ = positives(rng, 4);
    const bool onX = rep % 2 == 0;
    Vec& v = onX ? rX : rZ;
    const std::size_t i = rng.uniform_index(v.size());
    const double t0 = v[i];
    auto f = [&](double t) {
      v[i] = t;
      const double k = drm::khat(lam(l), rX, logs(rX), rZ, logs(rZ));
      v[i] = t0;
      return k;
    };
    const double g0 = std::log(t0), h = 1e-3;
    CHECK(f(std::exp(g0 + h)) + f(std::exp(g0 - h)) - 2 * f(t0) <= 1e-12);
    if (onX) CHECK(f(t0 * (1 + h)) + f(t0 * (1 - h)) - 2 * f(t0) <= 1e-12);
  }
  // In r(Z) the log term is convex.
  Vec rX{1.0}, rZ{1.0};
  auto fz = [&](double t) {
    rZ[0] = t;
    return drm::khat(lam(0.2), rX, logs(rX), rZ, logs(rZ));
  };
  CHECK(fz(1.1) + fz(0.9) - 2 * fz(1.0) > 0);
}

TEST_CASE("khat_exp") {
  const Vec g0{0, 0};
  for (double l : {0.0, 0.5, 1.0}) CHECK(drm::khat_exp(l, g0, g0) == doctest::Approx(-1.0));
  CHECK(drm::khat_exp(0.5, Vec{1}, Vec{-1}) == doctest::Approx(1 - std::exp(-1.0)).epsilon(1e-15));
  drm::Rng rng(4);
  for (int rep = 0; rep < 100; ++rep) {
    const double l = rng.uniform();
    Vec gX(6), gZ(4);
    for (double& g : gX) g = rng.uniform(-3, 3);
    for (double& g : gZ) g = rng.uniform(-3, 3);
    Vec rX, rZ;
    for (double g : gX) rX.push_back(std::exp(g));
    for (double g : gZ) rZ.push_back(std::exp(g));
    CHECK(std::abs(drm::khat_exp(l, gX, gZ) - drm::khat(lam(l), rX, gX, rZ, gZ)) < 1e-12);
    // Unweighted penalties.
    const double ref = l * mean(gX) - (1 - l) * mean(gZ) - mean(inv(rX)) - mean(rZ);
    CHECK(std::abs(drm::khat_exp(l, gX, gZ, false) - ref) < 1e-12);
  }
  CHECK_THROWS_AS(drm::khat_exp(0.5, Vec{0}, Vec{1000}), drm::Error);
}

TEST_CASE("nn branches") {
  drm::ObjectiveSpec s;
  s.C = 1;
  s.sum_form = true;
  auto b = drm::nn_branch(s, 2, 2, 2, 2, 2, 2);
  CHECK(b.forward);
  CHECK(b.inverse);
  b = drm::nn_branch(s, 20, 2, 0.2, 2, 2, 2);
  CHECK_FALSE(b.forward);
  CHECK(b.inverse == false);
  s.C = 0;
  b = drm::nn_branch(s, 1e9, 1e-9, 1e-9, 1e9, 2, 2);
  CHECK(b.forward);
  CHECK(b.inverse);
}

TEST_CASE("nnukl examples") {
  CHECK(drm::nnukl_loss(Vec{1}, Vec{0}, Vec{1}, 0) == 1.0);
  CHECK(drm::nnukl_loss(Vec{2}, Vec{std::log(2.0)}, Vec{3}, 1) ==
        doctest::Approx(-(std::log(2.0) - 2) + 1).epsilon(1e-15));
  CHECK(drm::nnukl_loss(Vec{2}, Vec{std::log(2.0)}, Vec{3}, 1) == doctest::Approx(2.3069).epsilon(1e-4));
  // Hinge inactive: Σr(Z) < C·Σr(X); the loss does not depend on r(Z).
  const double a = drm::nnukl_loss(Vec{5}, Vec{std::log(5.0)}, Vec{1}, 1);
  const double b = drm::nnukl_loss(Vec{5}, Vec{std::log(5.0)}, Vec{1.5}, 1);
  CHECK(a == b);
  CHECK_THROWS_AS(drm::nnukl_loss(Vec{-1}, Vec{0}, Vec{1}, 1), drm::Error);
}

TEST_CASE("validation") {
  drm::ObjectiveSpec s;
  s.lambda = 1.5;
  CHECK_THROWS_AS(s.validate(), drm::Error);
  s.lambda = 0.5;
  s.C = -1;
  CHECK_THROWS_AS(s.validate(), drm::Error);
  CHECK(drm::ObjectiveSpec::default_C(1e6) == 1e-6);
  for (auto v : {drm::Variant::UklP, drm::Variant::UklQ, drm::Variant::Stratified, drm::Variant::StratifiedExp,
                 drm::Variant::StratifiedExpUnweighted, drm::Variant::NnStratified, drm::Variant::LikelihoodOnly})
    CHECK(drm::variant_from_string(drm::to_string(v)) == v);
}

TEST_CASE("graph losses agree with the scalar objectives") {
  drm::Rng rng(8);
  for (auto variant : {drm::Variant::Stratified, drm::Variant::StratifiedExp, drm::Variant::UklP,
                       drm::Variant::LikelihoodOnly}) {
    const double l = rng.uniform();
    Vec gX(5), gZ(6);
    for (double& g : gX) g = rng.uniform(-2, 2);
    for (double& g : gZ) g = rng.uniform(-2, 2);
    drm::ad::Graph graph;
    auto node = [&](const Vec& g) {
      const auto logr = graph.constant(drm::Tensor(g.size(), 1, g));
      return drm::RatioNodes{logr, logr, graph.exp(logr)};
    };
    const auto x = node(gX), z = node(gZ);
    drm::ObjectiveSpec s = lam(l);
    s.variant = variant;
    const double loss = graph.value(drm::build_loss(graph, s, x, z)).item();
    Vec rX, rZ;
    for (double g : gX) rX.push_back(std::exp(g));
    for (double g : gZ) rZ.push_back(std::exp(g));
    double expect = 0;
    if (variant == drm::Variant::UklP) expect = drm::ukl_loss(rX, rZ);
    else if (variant == drm::Variant::LikelihoodOnly) expect = -drm::likelihood_part(l, gX, gZ);
    else expect = -khat_ref(l, rX, rZ);
    CHECK(std::abs(loss - expect) < 1e-12);
  }
}
