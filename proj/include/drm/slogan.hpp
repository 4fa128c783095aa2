#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "drm/datasets.hpp"
#include "drm/ratio_model.hpp"

namespace drm {

/// Noise → 2-D sample map: noise_dim → 64 → 64 → 2, ReLU, no spectral norm.
struct Generator {
  Mlp net;
  std::size_t noise_dim() const { return net.input_dim(); }
};

Generator generator_init(std::size_t noise_dim, std::size_t hidden, std::uint64_t seed);

/// Throws ShapeMismatch unless noise has noise_dim columns.
Tensor generator_forward(const Generator& gen, const Tensor& noise);

/// Standard normal noise, n × dim.
Tensor sample_noise(std::size_t n, std::size_t dim, Rng& rng);

struct GanConfig {
  double lambda = 0.5;
  int disc_steps = 2;  // discriminator steps per generator step
  int epochs = 2000;   // generator steps
  std::size_t batch_size = 256;
  std::size_t noise_dim = 8;
  std::size_t gen_hidden = 64;
  std::size_t disc_hidden = 64;
  double disc_lr = 1e-3;
  double gen_lr = 1e-3;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double clip_bound = 1e6;
  std::uint64_t seed = 0;
  std::size_t n_real = 20000;
  std::size_t n_validation = 2000;
  std::size_t eval_samples = 5000;
  int eval_every = 100;

  /// Throws RangeError.
  void validate() const;
};

struct GanHistoryRow {
  int epoch = 0;
  double drm_estimate = 0.0;  // likelihood part on validation vs generated
  double mmd = 0.0;           // MMD² between generated and validation
  double nll = 0.0;           // validation NLL under a KDE of generated points
};

struct GanResult {
  Generator generator;
  MlpRatioModel discriminator;
  std::vector<GanHistoryRow> history;
  Tensor final_samples;  // eval_samples × 2
};

GanResult train_slogan(Shape2D shape, const GanConfig& cfg);

void write_gan_history_csv(std::ostream& os, std::span<const GanHistoryRow> rows);
void write_points_csv(std::ostream& os, const Tensor& points);

/// Trailing moving average; the first window−1 entries use the points available.
std::vector<double> smooth_curve(std::span<const double> values, std::size_t window = 10);

}  // namespace drm
