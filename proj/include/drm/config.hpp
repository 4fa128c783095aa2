#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "drm/baselines.hpp"
#include "drm/datasets.hpp"
#include "drm/objectives.hpp"
#include "drm/ratio_model.hpp"
#include "drm/slogan.hpp"
#include "drm/trainers.hpp"

namespace drm::cli {

struct DataConfig {
  std::size_t d = 2;
  std::size_t n = 1000;
  std::size_t m = 1000;
  double shift = 1.0;      // μ_p = 0, μ_q = shift·e₁
  std::size_t eval_points = 10000;
  std::string input;       // optional pair CSV replacing the Gaussian sampler
};

struct BenchmarkConfig {
  std::vector<std::string> methods{"ulsif", "rulsif", "wd", "drm"};
  std::vector<std::size_t> dims{2, 10};
  std::vector<double> lambdas{0.5, 0.1, 0.9};
  int trials = 10;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string method = "drm";  // estimate: drm, nndrm, ukl, wd, ulsif, rulsif, kliep
  DataConfig data;
  MlpRatioModel::Options model;
  TrainConfig train;           // train.spec holds the objective
  UlsifRecipe baseline;        // alpha is the RuLSIF α
  KliepConfig kliep;
  BenchmarkConfig benchmark;
  Shape2D gan_shape = Shape2D::MoG;
  GanConfig gan;
  int drm_trials = 10;
};

RunConfig default_config();

/// Sectioned `key = value` text, `#` starts a comment. Unknown sections or
/// keys and out-of-range values are errors carrying the line number.
RunConfig parse_config(std::istream& is);
RunConfig parse_config_file(const std::string& path);

/// Every key with its current value, in a form parse_config reads back.
void print_config(std::ostream& os, const RunConfig& cfg);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace drm::cli
