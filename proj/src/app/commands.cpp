#include "drm/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "drm/error.hpp"
#include "drm/metrics.hpp"
#include "drm/rng.hpp"
#include "drm/svg.hpp"

namespace drm::cli {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '\n') {
      out += ' ';
      continue;
    }
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

bool is_neural(const std::string& method) {
  return method == "drm" || method == "nndrm" || method == "ukl" || method == "wd";
}

ObjectiveSpec objective_for(const RunConfig& cfg, const std::string& method, double lambda) {
  ObjectiveSpec spec = cfg.train.spec;
  spec.lambda = lambda;
  spec.clip_bound = cfg.model.clip_bound;
  if (method == "nndrm") {
    spec.variant = Variant::NnStratified;
    if (spec.C == 0.0) spec.C = ObjectiveSpec::default_C(spec.clip_bound);
  } else if (method == "ukl") {
    spec.variant = Variant::UklP;
  } else if (method == "wd") {
    spec.variant = Variant::LikelihoodOnly;
  }
  return spec;
}

std::string cell_label(const RunRecord& r) {
  if (r.method == "ulsif") return "uLSIF";
  if (r.method == "rulsif") return "RuLSIF";
  if (r.method == "kliep") return "KLIEP";
  if (r.method == "wd") return "WD";
  if (r.method == "ukl") return "UKL";
  std::string name = r.method == "drm" ? "DRM" : "nnDRM";
  return name + "(" + format_double(r.lambda) + ")";
}

struct TrialOutput {
  RunRecord record;
  TrainHistory history;
  std::optional<AnyRatioModel> model;
};

TrialOutput execute_trial(const RunConfig& cfg, const std::string& method, double lambda, std::size_t d,
                          std::uint64_t seed) {
  TrialOutput out;
  RunRecord& rec = out.record;
  rec.method = method;
  rec.lambda = is_neural(method) ? lambda : kNaN;
  rec.d = d;
  rec.seed = seed;
  rec.sq_error_fwd = rec.sq_error_inv = rec.drm_estimate_likelihood = rec.drm_estimate_khat = kNaN;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const bool gaussian = cfg.data.input.empty();
    GaussianPairSpec spec = GaussianPairSpec::shifted(d, 0.0, cfg.data.shift);
    SamplePair data;
    Tensor eval_X, eval_Z;
    if (gaussian) {
      data = sample_gaussian_pair(spec, cfg.data.n, cfg.data.m, derive_seed(seed, 0));
      eval_X = sample_gaussian(spec.mu_p, cfg.data.eval_points, derive_seed(seed, 1));
      eval_Z = sample_gaussian(spec.mu_q, cfg.data.eval_points, derive_seed(seed, 2));
    } else {
      std::ifstream in(cfg.data.input);
      if (!in) throw Error(ErrorCode::IoError, "cannot open " + cfg.data.input);
      data = read_pair_csv(in);
      eval_X = data.X;
      eval_Z = data.Z;
      rec.d = data.dim();
    }
    rec.n = data.X.rows();
    rec.m = data.Z.rows();

    AnyRatioModel model;
    if (is_neural(method)) {
      TrainConfig tc = cfg.train;
      tc.seed = derive_seed(seed, 4);
      tc.spec = objective_for(cfg, method, lambda);
      TrainResult res = train_dre(mlp_init(data.dim(), derive_seed(seed, 3), cfg.model), data, tc);
      out.history = std::move(res.history);
      model = std::move(res.model);
    } else if (method == "kliep") {
      const Tensor centers = choose_centers(data.X, cfg.baseline.max_centers, derive_seed(seed, 5));
      const double sigma = median_heuristic(data.X, data.Z, derive_seed(seed, 6));
      KernelRatioModel init{centers, Tensor(centers.rows(), 1, 1.0), sigma};
      model = train_kliep(init, data, cfg.kliep);
    } else {
      UlsifRecipe recipe = cfg.baseline;
      if (method == "ulsif") recipe.alpha = 0.0;
      model = fit_ulsif_cv(data.X, data.Z, recipe, derive_seed(seed, 5)).model();
    }

    const RatioFn fn = [&model](const Tensor& x) { return ratio_forward(model, x); };
    if (gaussian) {
      rec.sq_error_fwd = l2_error(fn, spec, eval_Z, L2Side::Forward);
      rec.sq_error_inv = l2_error(fn, spec, eval_X, L2Side::Inverse);
    }
    const DrmEstimate est = drm_estimate(fn, is_neural(method) ? lambda : 0.5, eval_X, eval_Z);
    rec.drm_estimate_likelihood = est.likelihood;
    rec.drm_estimate_khat = est.khat;
    out.model = std::move(model);
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

struct Task {
  std::string method;
  double lambda;
  std::size_t d;
  std::uint64_t seed;
};

// Trials run concurrently; rows come back in task order.
std::vector<RunRecord> run_tasks(const RunConfig& cfg, const std::vector<Task>& tasks, int jobs) {
  std::vector<RunRecord> rows(tasks.size());
  const long count = static_cast<long>(tasks.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs) if (jobs > 1)
  for (long i = 0; i < count; ++i) {
    const Task& t = tasks[static_cast<std::size_t>(i)];
    rows[static_cast<std::size_t>(i)] = execute_trial(cfg, t.method, t.lambda, t.d, t.seed).record;
  }
  return rows;
}

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  bool print_config = false;
  bool no_walltime = false;
  int jobs = 1;
};

std::filesystem::path prepare_out(const Options& opt) {
  std::filesystem::path dir(opt.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return os;
}

int count_errors(std::span<const RunRecord> rows, std::ostream& err) {
  int errors = 0;
  for (const auto& r : rows)
    if (!r.error.empty()) {
      ++errors;
      err << "trial failed: " << r.method << " seed " << r.seed << ": " << r.error << '\n';
    }
  return errors;
}

int cmd_estimate(const RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err) {
  const auto dir = prepare_out(opt);
  const std::uint64_t seed = trial_seed(cfg.seed, cfg.data.d, 0);
  TrialOutput res = execute_trial(cfg, cfg.method, cfg.train.spec.lambda, cfg.data.d, seed);
  const std::vector<RunRecord> rows{res.record};
  {
    auto os = open_out(dir / "runs.csv");
    write_run_records(os, rows, !opt.no_walltime);
  }
  if (!res.history.rows.empty()) {
    auto os = open_out(dir / "history.csv");
    write_history_csv(os, res.history);
  }
  if (res.model) {
    auto os = open_out(dir / "checkpoint.txt");
    save_checkpoint(os, *res.model);
  }
  write_run_records(out, rows, !opt.no_walltime);
  return count_errors(rows, err) ? 1 : 0;
}

int cmd_benchmark(const RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err) {
  const auto dir = prepare_out(opt);
  std::vector<Task> tasks;
  for (std::size_t d : cfg.benchmark.dims)
    for (const auto& method : cfg.benchmark.methods) {
      std::vector<double> lambdas{0.5};
      if (method == "drm" || method == "nndrm") lambdas = cfg.benchmark.lambdas;
      for (double lambda : lambdas)
        for (int t = 0; t < cfg.benchmark.trials; ++t) tasks.push_back({method, lambda, d, trial_seed(cfg.seed, d, t)});
    }
  const std::vector<RunRecord> rows = run_tasks(cfg, tasks, opt.jobs);
  {
    auto os = open_out(dir / "runs.csv");
    write_run_records(os, rows, !opt.no_walltime);
  }
  std::ostringstream summary;
  write_summary(summary, rows);
  {
    auto os = open_out(dir / "summary.txt");
    os << summary.str();
  }
  out << summary.str();

  for (std::size_t d : cfg.benchmark.dims) {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> groups;
    for (const auto& r : rows) {
      if (r.d != d) continue;
      const std::string label = cell_label(r);
      auto it = std::find(labels.begin(), labels.end(), label);
      if (it == labels.end()) {
        labels.push_back(label);
        groups.emplace_back();
        it = labels.end() - 1;
      }
      groups[static_cast<std::size_t>(it - labels.begin())].push_back(r.sq_error_fwd);
    }
    auto os = open_out(dir / ("boxplot_d" + std::to_string(d) + ".svg"));
    svg::boxplot(os, "squared L2 error, d = " + std::to_string(d), labels, groups);
  }
  return count_errors(rows, err) ? 1 : 0;
}

int cmd_drm(const RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err) {
  const auto dir = prepare_out(opt);
  std::vector<Task> tasks;
  for (int t = 0; t < cfg.drm_trials; ++t)
    tasks.push_back({"drm", cfg.train.spec.lambda, cfg.data.d, trial_seed(cfg.seed, cfg.data.d, t)});
  const std::vector<RunRecord> rows = run_tasks(cfg, tasks, opt.jobs);
  {
    auto os = open_out(dir / "runs.csv");
    write_run_records(os, rows, !opt.no_walltime);
  }
  std::vector<double> lik, kh;
  for (const auto& r : rows) {
    lik.push_back(r.drm_estimate_likelihood);
    kh.push_back(r.drm_estimate_khat);
  }
  char buf[256];
  if (cfg.data.input.empty()) {
    const double kl = 0.5 * cfg.data.shift * cfg.data.shift;
    std::snprintf(buf, sizeof buf, "reference: lambda*KL + (1-lambda)*KL_inv = %.6g\n", kl);
    out << buf;
  }
  try {
    const Summary a = summarize(lik), b = summarize(kh);
    std::snprintf(buf, sizeof buf, "drm (likelihood part): mean %.6g med %.6g std %.6g\n", a.mean, a.median, a.std);
    out << buf;
    std::snprintf(buf, sizeof buf, "drm (khat):            mean %.6g med %.6g std %.6g\n", b.mean, b.median, b.std);
    out << buf;
  } catch (const Error&) {
    out << "no successful trials\n";
  }
  return count_errors(rows, err) ? 1 : 0;
}

int cmd_gan(const RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream&) {
  const auto dir = prepare_out(opt);
  GanConfig gc = cfg.gan;
  gc.seed = cfg.seed;
  const GanResult res = train_slogan(cfg.gan_shape, gc);
  {
    auto os = open_out(dir / "gan_history.csv");
    write_gan_history_csv(os, res.history);
  }
  {
    auto os = open_out(dir / "gan_samples.csv");
    write_points_csv(os, res.final_samples);
  }
  const double first = res.history.front().mmd, last = res.history.back().mmd;
  {
    auto os = open_out(dir / "gan_summary.csv");
    os << "shape,seed,initial_mmd,final_mmd,improved\n"
       << to_string(cfg.gan_shape) << ',' << cfg.seed << ',' << fmt(first) << ',' << fmt(last) << ','
       << (last < first ? "true" : "false") << '\n';
  }
  std::vector<double> x, drm, mmd;
  for (const auto& h : res.history) {
    x.push_back(h.epoch);
    drm.push_back(h.drm_estimate);
    mmd.push_back(h.mmd);
  }
  {
    auto os = open_out(dir / "gan_curve.svg");
    svg::line_chart(os, std::string("SLoGAN on ") + to_string(cfg.gan_shape),
                    {{"DRM estimate (smoothed)", x, smooth_curve(drm)}, {"MMD^2 (smoothed)", x, smooth_curve(mmd)}});
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "initial MMD^2 %.6g, final MMD^2 %.6g, improved: %s\n", first, last,
                last < first ? "yes" : "no");
  out << buf;
  return 0;
}

}  // namespace

void write_run_records(std::ostream& os, std::span<const RunRecord> rows, bool wall_time) {
  os << kRunRecordHeader << '\n';
  for (const auto& r : rows) {
    os << csv_field(r.method) << ',' << fmt(r.lambda) << ',' << r.d << ',' << r.n << ',' << r.m << ',' << r.seed
       << ',' << fmt(r.sq_error_fwd) << ',' << fmt(r.sq_error_inv) << ',' << fmt(r.drm_estimate_likelihood) << ','
       << fmt(r.drm_estimate_khat) << ',' << (wall_time ? fmt(r.wall_time_s) : "NA") << ',' << csv_field(r.error)
       << '\n';
  }
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t d, int trial) {
  return derive_seed(derive_seed(master, d), static_cast<std::uint64_t>(trial));
}

RunRecord run_trial(const RunConfig& cfg, const std::string& method, double lambda, std::size_t d,
                    std::uint64_t seed) {
  return execute_trial(cfg, method, lambda, d, seed).record;
}

void write_summary(std::ostream& os, std::span<const RunRecord> rows) {
  std::vector<std::size_t> dims;
  std::vector<std::string> cells;
  std::map<std::pair<std::size_t, std::string>, std::vector<double>> values;
  for (const auto& r : rows) {
    if (std::find(dims.begin(), dims.end(), r.d) == dims.end()) dims.push_back(r.d);
    const std::string label = cell_label(r);
    if (std::find(cells.begin(), cells.end(), label) == cells.end()) cells.push_back(label);
    values[{r.d, label}].push_back(r.sq_error_fwd);
  }
  char buf[128];
  os << "squared L2 error (mean / med / std)\n";
  std::snprintf(buf, sizeof buf, "%-5s", "dim");
  os << buf;
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof buf, " | %-26s", c.c_str());
    os << buf;
  }
  os << '\n';
  for (std::size_t d : dims) {
    std::snprintf(buf, sizeof buf, "%-5zu", d);
    os << buf;
    for (const auto& c : cells) {
      auto it = values.find({d, c});
      std::string cell = "-";
      if (it != values.end()) {
        try {
          const Summary s = summarize(it->second);
          std::snprintf(buf, sizeof buf, "%.4g / %.4g / %.4g", s.mean, s.median, s.std);
          cell = buf;
        } catch (const Error&) {
          cell = "failed";
        }
      }
      std::snprintf(buf, sizeof buf, " | %-26s", cell.c_str());
      os << buf;
    }
    os << '\n';
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Density-ratio estimation and density-ratio metrics"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed_value = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "Config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed_value, "Master seed (overrides run.seed)");
    sub->add_option("--out", opt.out_dir, "Output directory");
    sub->add_flag("--print-config", opt.print_config, "Print the effective config and exit");
    sub->add_flag("--no-walltime", opt.no_walltime, "Write NA in the wall_time_s column");
    sub->add_option("--jobs", opt.jobs, "Concurrent trials")->check(CLI::PositiveNumber);
  };
  CLI::App* estimate = app.add_subcommand("estimate", "Fit one ratio model on one dataset");
  CLI::App* benchmark = app.add_subcommand("benchmark", "Multi-trial L2 error sweep");
  CLI::App* gan = app.add_subcommand("gan", "Train a SLoGAN on a 2-D shape");
  CLI::App* drm = app.add_subcommand("drm", "Estimate the density-ratio metric across trials");
  for (CLI::App* sub : {estimate, benchmark, gan, drm}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    RunConfig cfg = opt.config_path.empty() ? default_config() : parse_config_file(opt.config_path);
    for (CLI::App* sub : {estimate, benchmark, gan, drm})
      if (sub->parsed() && sub->count("--seed")) cfg.seed = seed_value;
    if (opt.print_config) {
      print_config(out, cfg);
      return 0;
    }
    if (estimate->parsed()) return cmd_estimate(cfg, opt, out, err);
    if (benchmark->parsed()) return cmd_benchmark(cfg, opt, out, err);
    if (gan->parsed()) return cmd_gan(cfg, opt, out, err);
    return cmd_drm(cfg, opt, out, err);
  } catch (const std::exception& e) {
    err << "drm: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace drm::cli
