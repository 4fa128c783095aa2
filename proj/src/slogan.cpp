#include "drm/slogan.hpp"

#include <array>
#include <cstdio>
#include <ostream>
#include <string>

#include "drm/error.hpp"
#include "drm/metrics.hpp"
#include "drm/objectives.hpp"
#include "drm/rng.hpp"

namespace drm {

Generator generator_init(std::size_t noise_dim, std::size_t hidden, std::uint64_t seed) {
  Rng rng(seed);
  const std::array<std::size_t, 4> widths{noise_dim, hidden, hidden, 2};
  return {Mlp::init(widths, rng, false)};
}

Tensor generator_forward(const Generator& gen, const Tensor& noise) {
  if (noise.cols() != gen.noise_dim()) {
    throw Error(ErrorCode::ShapeMismatch, "noise has " + std::to_string(noise.cols()) + " columns, generator expects " +
                                              std::to_string(gen.noise_dim()));
  }
  return gen.net.forward(noise);
}

Tensor sample_noise(std::size_t n, std::size_t dim, Rng& rng) {
  Tensor t(n, dim);
  for (double& v : t.data()) v = rng.normal();
  return t;
}

void GanConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(ErrorCode::RangeError, "lambda must lie in [0, 1]");
  if (disc_steps < 1) throw Error(ErrorCode::RangeError, "disc_steps must be >= 1");
  if (epochs < 0) throw Error(ErrorCode::RangeError, "epochs must be >= 0");
  if (batch_size < 1 || noise_dim < 1 || gen_hidden < 1 || disc_hidden < 1)
    throw Error(ErrorCode::RangeError, "sizes must be >= 1");
  if (!(disc_lr > 0.0) || !(gen_lr > 0.0)) throw Error(ErrorCode::RangeError, "learning rates must be positive");
  if (!(clip_bound > 1.0)) throw Error(ErrorCode::RangeError, "clip_bound must be > 1");
  if (n_real < 1 || n_validation < 2 || eval_samples < 2) throw Error(ErrorCode::RangeError, "sample counts too small");
  if (eval_every < 1) throw Error(ErrorCode::RangeError, "eval_every must be >= 1");
}

namespace {

struct Evaluator {
  Tensor validation;
  Tensor eval_noise;
  double mmd_sigma;
  double lambda;

  GanHistoryRow operator()(int epoch, const Generator& gen, const MlpRatioModel& disc, Tensor* samples) const {
    Tensor generated = generator_forward(gen, eval_noise);
    if (!generated.all_finite())
      throw Error(ErrorCode::NonFiniteValue, "generator output not finite at epoch " + std::to_string(epoch));
    GanHistoryRow row;
    row.epoch = epoch;
    const RatioFn fn = [&](const Tensor& x) { return ratio_forward(disc, x); };
    row.drm_estimate = drm_estimate(fn, lambda, validation, generated).likelihood;
    row.mmd = mmd2(generated, validation, mmd_sigma);
    row.nll = kde_nll(generated, validation, scott_bandwidth(generated));
    if (samples) *samples = std::move(generated);
    return row;
  }
};

void step(std::vector<Tensor>& params, const std::map<ad::ParamId, Tensor>& grads, ad::ParamId base,
          AdamState& adam) {
  std::vector<Tensor> g(params.size());
  for (std::size_t p = 0; p < params.size(); ++p) g[p] = grads.at(base + p);
  adam_step(params, g, adam);
}

}  // namespace

GanResult train_slogan(Shape2D shape, const GanConfig& cfg) {
  cfg.validate();
  const Tensor real = sample_shape2d(shape, cfg.n_real, derive_seed(cfg.seed, 0));
  Rng noise_rng(derive_seed(cfg.seed, 3));
  Rng eval_rng(derive_seed(cfg.seed, 4));
  Rng batch_rng(derive_seed(cfg.seed, 5));

  Generator gen = generator_init(cfg.noise_dim, cfg.gen_hidden, derive_seed(cfg.seed, 6));
  MlpRatioModel::Options dopts;
  dopts.hidden = cfg.disc_hidden;
  dopts.clip_bound = cfg.clip_bound;
  MlpRatioModel disc = mlp_init(2, derive_seed(cfg.seed, 7), dopts);

  const Tensor validation = sample_shape2d(shape, cfg.n_validation, derive_seed(cfg.seed, 1));
  const Evaluator evaluate{validation, sample_noise(cfg.eval_samples, cfg.noise_dim, eval_rng),
                           median_bandwidth(validation), cfg.lambda};

  ObjectiveSpec spec;
  spec.lambda = cfg.lambda;
  spec.clip_bound = cfg.clip_bound;

  AdamState disc_adam, gen_adam;
  disc_adam.lr = cfg.disc_lr;
  gen_adam.lr = cfg.gen_lr;
  disc_adam.beta1 = gen_adam.beta1 = cfg.beta1;
  disc_adam.beta2 = gen_adam.beta2 = cfg.beta2;
  std::vector<Tensor> disc_params = disc.net().parameters();
  std::vector<Tensor> gen_params = gen.net.parameters();
  const ad::ParamId disc_base = gen_params.size();

  GanResult result;
  result.history.push_back(evaluate(0, gen, disc, cfg.epochs == 0 ? &result.final_samples : nullptr));

  auto real_batch = [&] {
    std::vector<std::size_t> idx(cfg.batch_size);
    for (auto& i : idx) i = batch_rng.uniform_index(real.rows());
    return real.gather_rows(idx);
  };
  auto abort = [](int epoch, const Error& e) {
    if (e.code() != ErrorCode::NonFiniteValue) throw e;
    throw Error(ErrorCode::NonFiniteValue, "GAN training aborted at epoch " + std::to_string(epoch) + ": " + e.what());
  };

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (int s = 0; s < cfg.disc_steps; ++s) {
      disc.net().advance_spectral();
      const Tensor fake = generator_forward(gen, sample_noise(cfg.batch_size, cfg.noise_dim, noise_rng));
      ad::Graph graph;
      const RatioNodes x = disc.build(graph, graph.constant(real_batch()));
      const RatioNodes z = disc.build(graph, graph.constant(fake));
      const ad::NodeId loss = build_loss(graph, spec, x, z);
      try {
        step(disc_params, ad::evaluate_with_grad(graph, loss).grads, 0, disc_adam);
      } catch (const Error& e) {
        abort(epoch, e);
      }
      disc.net().set_parameters(disc_params);
    }

    ad::Graph graph;
    const ad::NodeId noise = graph.constant(sample_noise(cfg.batch_size, cfg.noise_dim, noise_rng));
    const ad::NodeId fake = gen.net.build(graph, noise, 0);
    const RatioNodes x = disc.build(graph, graph.constant(real_batch()), disc_base);
    const RatioNodes z = disc.build(graph, fake, disc_base);
    const ad::NodeId khat_node = graph.negate(build_loss(graph, spec, x, z));
    try {
      step(gen_params, ad::evaluate_with_grad(graph, khat_node).grads, 0, gen_adam);
    } catch (const Error& e) {
      abort(epoch, e);
    }
    gen.net.set_parameters(gen_params);

    if (epoch % cfg.eval_every == 0 || epoch == cfg.epochs)
      result.history.push_back(evaluate(epoch, gen, disc, epoch == cfg.epochs ? &result.final_samples : nullptr));
  }
  result.generator = std::move(gen);
  result.discriminator = std::move(disc);
  return result;
}

void write_gan_history_csv(std::ostream& os, std::span<const GanHistoryRow> rows) {
  os << "epoch,drm_estimate,mmd,nll\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", r.epoch, r.drm_estimate, r.mmd, r.nll);
    os << buf;
  }
}

void write_points_csv(std::ostream& os, const Tensor& points) {
  for (std::size_t k = 0; k < points.cols(); ++k) os << (k ? "," : "") << "dim" << k;
  os << '\n';
  char buf[32];
  for (std::size_t i = 0; i < points.rows(); ++i) {
    for (std::size_t k = 0; k < points.cols(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", points(i, k));
      os << (k ? "," : "") << buf;
    }
    os << '\n';
  }
}

std::vector<double> smooth_curve(std::span<const double> values, std::size_t window) {
  if (window < 1) throw Error(ErrorCode::RangeError, "window must be >= 1");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t lo = i + 1 >= window ? i + 1 - window : 0;
    double s = 0.0;
    for (std::size_t j = lo; j <= i; ++j) s += values[j];
    out[i] = s / static_cast<double>(i + 1 - lo);
  }
  return out;
}

}  // namespace drm
