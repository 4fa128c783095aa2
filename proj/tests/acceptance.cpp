// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any of them fails. `acceptance 3 7` runs a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "drm/baselines.hpp"
#include "drm/cli.hpp"
#include "drm/datasets.hpp"
#include "drm/metrics.hpp"
#include "drm/objectives.hpp"
#include "drm/ratio_model.hpp"
#include "drm/slogan.hpp"
#include "drm/trainers.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using drm::Tensor;
using Vec = std::vector<double>;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Vec positives(drm::Rng& rng, std::size_t n) {
  Vec v(n);
  for (double& x : v) x = std::exp(rng.uniform(-2, 2));
  return v;
}

Vec logs(const Vec& v) {
  Vec o;
  for (double x : v) o.push_back(std::log(x));
  return o;
}

Vec inv(const Vec& v) {
  Vec o;
  for (double x : v) o.push_back(1 / x);
  return o;
}

drm::ObjectiveSpec lam(double l) {
  drm::ObjectiveSpec s;
  s.lambda = l;
  return s;
}

// log r* for unit-shift Gaussians, P = N(0, I), Q = N(e1, I).
double log_oracle(const double* x) { return 0.5 - x[0]; }

drm::RatioValues oracle_values(const Tensor& x, double alpha = 1.0) {
  drm::RatioValues rv;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double g = log_oracle(&x(i, 0)) + std::log(alpha);
    rv.logr.push_back(g);
    rv.r.push_back(std::exp(g));
  }
  return rv;
}

double median(Vec v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const Vec& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

Outcome gradients() {
  drm::Rng rng(1);
  double worst = 0;
  std::string worst_op;
  for (const auto& op : gradcheck::operator_kinds()) {
    for (int rep = 0; rep < 100; ++rep) {
      const double e = gradcheck::max_relative_error(gradcheck::make_case(op, rng));
      if (!(e <= worst)) {
        worst = e;
        worst_op = op;
      }
    }
  }
  return {worst < 1e-5, fmt("%zu operators x 100 graphs, max relative error %.3g (%s)",
                            gradcheck::operator_kinds().size(), worst, worst_op.c_str())};
}

Outcome spectral() {
  drm::Rng rng(2);
  double worst = 0;
  int misses = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t r = 1 + rng.uniform_index(16), c = 1 + rng.uniform_index(16);
    Tensor W(r, c);
    for (double& v : W.data()) v = rng.normal();
    const auto st = drm::SpectralState::random(r, c, rng, 50);
    const double err = std::abs(drm::spectral_normalize(W, st).sigma - oracle::largest_singular_value(W));
    worst = std::max(worst, err);
    if (!(err < 1e-6)) ++misses;
  }
  return {misses == 0, fmt("%d/100 matrices outside 1e-6 after 50 iterations, max |sigma - svd| %.3g", misses, worst)};
}

Outcome identities() {
  drm::Rng rng(3);
  double worst = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const Vec rX = positives(rng, 1 + rng.uniform_index(64)), rZ = positives(rng, 1 + rng.uniform_index(64));
    const double k1 = drm::khat(lam(1), rX, logs(rX), rZ, logs(rZ));
    const double k0 = drm::khat(lam(0), rX, logs(rX), rZ, logs(rZ));
    const double a = drm::khat(lam(0.5), rX, logs(rX), rZ, logs(rZ));
    const double b = drm::khat(lam(0.5), inv(rZ), logs(inv(rZ)), inv(rX), logs(inv(rX)));
    worst = std::max({worst, std::abs(k1 + drm::ukl_loss(rX, rZ)), std::abs(k0 + drm::ukl_loss(inv(rZ), inv(rX))),
                      std::abs(a - b)});
  }
  return {worst <= 1e-12, fmt("1000 batches, max deviation %.3g", worst)};
}

Outcome khat_optimality() {
  const auto spec = drm::GaussianPairSpec::unit_shift(2);
  const auto data = drm::sample_gaussian_pair(spec, 100000, 100000, 4);
  std::string detail;
  bool pass = true;
  for (double l : {0.1, 0.5, 0.9}) {
    double best = -std::numeric_limits<double>::infinity(), arg = 0;
    for (int k = 0; k <= 20; ++k) {
      const double alpha = 0.5 + 0.05 * k;
      const auto x = oracle_values(data.X, alpha), z = oracle_values(data.Z, alpha);
      const double v = drm::khat(lam(l), x.r, x.logr, z.r, z.logr);
      if (v > best) {
        best = v;
        arg = alpha;
      }
    }
    pass = pass && std::abs(arg - 1.0) < 1e-9;
    detail += fmt("%sargmax at lambda %.1g: %.2f", detail.empty() ? "" : ", ", l, arg);
  }
  return {pass, detail};
}

Outcome kl_recovery() {
  const auto spec = drm::GaussianPairSpec::unit_shift(2);
  const auto held = drm::sample_gaussian_pair(spec, 100000, 100000, 5);
  const drm::RatioFn fn = [](const Tensor& x) { return oracle_values(x); };
  const double a = drm::drm_estimate(fn, 1.0, held.X, held.Z).likelihood;
  const double b = drm::drm_estimate(fn, 0.5, held.X, held.Z).likelihood;
  return {std::abs(a - 0.5) <= 0.05 && std::abs(b - 0.5) <= 0.05,
          fmt("lambda 1: %.4f, lambda 1/2: %.4f (closed form 0.5)", a, b)};
}

Outcome self_normalization() {
  const auto spec = drm::GaussianPairSpec::unit_shift(2);
  int hits = 0;
  std::string vals;
  for (int s = 0; s < 10; ++s) {
    const std::uint64_t seed = drm::derive_seed(6, static_cast<std::uint64_t>(s));
    const auto data = drm::sample_gaussian_pair(spec, 1000, 1000, drm::derive_seed(seed, 0));
    drm::TrainConfig cfg;
    cfg.epochs = 200;
    cfg.seed = drm::derive_seed(seed, 4);
    cfg.eval_every = 200;
    const auto res = drm::train_dre(drm::mlp_init(2, drm::derive_seed(seed, 3)), data, cfg);
    const double m = mean(drm::ratio_forward(res.model, data.Z).r);
    if (m >= 0.85 && m <= 1.15) ++hits;
    vals += fmt("%s%.3f", vals.empty() ? "" : " ", m);
  }
  return {hits >= 8, fmt("%d/10 seeds in [0.85, 1.15]; mean r(Z): %s", hits, vals.c_str())};
}

Outcome table_ordering() {
  auto cfg = drm::cli::default_config();
  bool pass = true;
  std::string detail;
  for (std::size_t d : {2u, 10u}) {
    Vec u, d1, d5;
    for (int t = 0; t < 10; ++t) {
      const auto seed = drm::cli::trial_seed(cfg.seed, d, t);
      u.push_back(drm::cli::run_trial(cfg, "ulsif", std::nan(""), d, seed).sq_error_fwd);
      d1.push_back(drm::cli::run_trial(cfg, "drm", 0.1, d, seed).sq_error_fwd);
      d5.push_back(drm::cli::run_trial(cfg, "drm", 0.5, d, seed).sq_error_fwd);
    }
    const double mu = mean(u), m1 = mean(d1), m5 = mean(d5);
    pass = pass && std::isfinite(mu) && m1 <= 0.5 * mu && m5 <= 0.5 * mu;
    detail += fmt("%sd=%zu uLSIF %.3f DRM(0.1) %.3f DRM(0.5) %.3f", detail.empty() ? "" : "; ", d, mu, m1, m5);
  }
  return {pass, detail};
}

Outcome sample_size() {
  auto cfg = drm::cli::default_config();
  Vec med;
  for (std::size_t n : {250u, 4000u}) {
    cfg.data.n = cfg.data.m = n;
    Vec e;
    for (int t = 0; t < 10; ++t) e.push_back(drm::cli::run_trial(cfg, "drm", 0.5, 2, drm::cli::trial_seed(8, 2, t)).sq_error_fwd);
    med.push_back(median(e));
  }
  return {med[1] < med[0], fmt("median error n=250: %.4f, n=4000: %.4f", med[0], med[1])};
}

Outcome separation() {
  auto cfg = drm::cli::default_config();
  cfg.data.n = cfg.data.m = 2000;
  int same = 0, apart = 0;
  Vec vs, va;
  for (int t = 0; t < 10; ++t) {
    const auto seed = drm::cli::trial_seed(9, 2, t);
    cfg.data.shift = 0.0;
    const double a = drm::cli::run_trial(cfg, "drm", 0.5, 2, seed).drm_estimate_likelihood;
    cfg.data.shift = 1.0;
    const double b = drm::cli::run_trial(cfg, "drm", 0.5, 2, seed).drm_estimate_likelihood;
    vs.push_back(a);
    va.push_back(b);
    if (a < 0.05) ++same;
    if (b > 0.2) ++apart;
  }
  return {same >= 8 && apart >= 8,
          fmt("P = Q below 0.05 in %d/10 (median %.4f), unit shift above 0.2 in %d/10 (median %.4f)", same, median(vs),
              apart, median(va))};
}

Outcome nn_reduction() {
  const auto data = drm::sample_gaussian_pair(drm::GaussianPairSpec::unit_shift(2), 1000, 1000, 10);
  bool same = true;
  for (int epochs = 1; epochs <= 10 && same; ++epochs) {
    drm::TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.seed = 11;
    auto nn = cfg;
    nn.spec.variant = drm::Variant::NnStratified;
    nn.spec.C = 0.0;
    const auto a = drm::train_dre(drm::mlp_init(2, 12), data, cfg);
    const auto b = drm::train_dre(drm::mlp_init(2, 12), data, nn);
    same = a.model.net().parameters() == b.model.net().parameters();
  }
  return {same, same ? "parameters bit-identical after each of 10 epochs" : "trajectories diverge"};
}

Outcome ulsif_grid() {
  drm::Rng rng(12);
  double worst = -std::numeric_limits<double>::infinity();
  const int instances = 5, steps = 12;
  for (int rep = 0; rep < instances; ++rep) {
    const Tensor X = gradcheck::random_tensor(rng, 30, 2, -1, 1);
    const Tensor Z = gradcheck::random_tensor(rng, 30, 2, -1, 1);
    const Tensor C = gradcheck::random_tensor(rng, 5, 2, -1, 1);
    const double sigma = 0.8, reg = 0.3;
    const auto sol = drm::ulsif_fit(X, Z, C, sigma, reg);
    Tensor H;
    Vec h;
    oracle::ulsif_system(X, Z, 0.0, C, sigma, H, h);
    for (std::size_t a = 0; a < 5; ++a) H(a, a) += reg;
    const double j_star = oracle::ulsif_J(H, h, sol.theta.data().data());
    double best = std::numeric_limits<double>::infinity(), t[5];
    for (int i = 0; i < 371293; ++i) {
      int k = i;
      for (double& v : t) {
        v = -3 + 6.0 * (k % (steps + 1)) / steps;
        k /= steps + 1;
      }
      best = std::min(best, oracle::ulsif_J(H, h, t));
    }
    worst = std::max(worst, j_star - best);
  }
  return {worst <= 1e-9, fmt("%d instances, 13^5 grid, max J(closed form) - J(grid) = %.3g", instances, worst)};
}

Outcome gan_smoke() {
  int improved = 0;
  bool finite = true;
  std::string detail;
  for (int s = 0; s < 5; ++s) {
    drm::GanConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(s);
    cfg.eval_every = 250;
    const auto res = drm::train_slogan(drm::Shape2D::MoG, cfg);
    const auto& h = res.history;
    for (const auto& row : h) finite = finite && std::isfinite(row.drm_estimate) && std::isfinite(row.mmd);
    if (h.back().mmd < h.front().mmd) ++improved;
    detail += fmt("%s%.3g->%.3g", detail.empty() ? "" : ", ", h.front().mmd, h.back().mmd);
  }
  return {improved >= 4 && finite, fmt("improved in %d/5, traces %s; MMD2 %s", improved, finite ? "finite" : "NOT finite",
                                       detail.c_str())};
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "drm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return drm::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "drm_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = root / "run.cfg";
  std::ofstream(cfg) << "[data]\nn = 300\nm = 300\neval_points = 1000\n[train]\nepochs = 20\n"
                        "[benchmark]\nmethods = ulsif,rulsif,kliep,ukl,wd,drm,nndrm\ndims = 2,10\nlambdas = 0.5,0.1\ntrials = 2\n"
                        "[baselines]\nkliep_iterations = 200\n[drm]\ntrials = 2\n"
                        "[gan]\nepochs = 20\nn_real = 2000\nn_validation = 500\neval_samples = 500\neval_every = 5\n";
  int files = 0;
  std::string bad;
  for (const char* cmd : {"estimate", "benchmark", "drm", "gan"}) {
    for (const char* run : {"a", "b"}) {
      if (cli({cmd, "--config", cfg.string(), "--seed", "13", "--no-walltime", "--out", (root / cmd / run).string()}) != 0)
        bad += fmt(" %s exit", cmd);
    }
    for (const auto& e : fs::directory_iterator(root / cmd / "a")) {
      if (e.path().extension() != ".csv") continue;
      ++files;
      if (slurp(e.path()) != slurp(root / cmd / "b" / e.path().filename())) bad += fmt(" %s/%s", cmd, e.path().filename().c_str());
    }
  }
  return {bad.empty() && files > 0, bad.empty() ? fmt("%d CSV files byte-identical across reruns", files) : "differs:" + bad};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradients},
      {"spectral normalization vs SVD", spectral},
      {"objective identities", identities},
      {"oracle optimality of khat", khat_optimality},
      {"KL recovery", kl_recovery},
      {"self-normalization", self_normalization},
      {"ordering against uLSIF", table_ordering},
      {"sample-size monotonicity", sample_size},
      {"divergence separation", separation},
      {"nn reduction at C = 0", nn_reduction},
      {"uLSIF grid optimality", ulsif_grid},
      {"GAN smoke", gan_smoke},
      {"determinism", determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
