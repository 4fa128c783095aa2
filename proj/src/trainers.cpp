#include "drm/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include "drm/error.hpp"
#include "drm/kernels.hpp"
#include "drm/rng.hpp"

namespace drm {

void TrainConfig::validate() const {
  if (epochs < 0) throw Error(ErrorCode::RangeError, "epochs must be >= 0");
  if (batch_size < 1) throw Error(ErrorCode::RangeError, "batch_size must be >= 1");
  if (!(lr > 0.0)) throw Error(ErrorCode::RangeError, "lr must be positive");
  if (eval_every < 1) throw Error(ErrorCode::RangeError, "eval_every must be >= 1");
  spec.validate();
}

void write_history_csv(std::ostream& os, const TrainHistory& history) {
  os << "epoch,objective,l2_error,branch_fwd_ascends,branch_inv_ascends\n";
  char buf[64];
  for (const HistoryRow& r : history.rows) {
    os << r.epoch << ',';
    std::snprintf(buf, sizeof buf, "%.17g", r.objective);
    os << buf << ',';
    if (std::isnan(r.l2_error)) {
      os << "NA";
    } else {
      std::snprintf(buf, sizeof buf, "%.17g", r.l2_error);
      os << buf;
    }
    os << ',' << r.branch_fwd_ascends << ',' << r.branch_inv_ascends << '\n';
  }
}

TrainResult train_dre(MlpRatioModel model, const SamplePair& data, const TrainConfig& cfg, const L2Probe& probe) {
  cfg.validate();
  if (data.X.cols() != model.input_dim() || data.Z.cols() != model.input_dim()) {
    throw Error(ErrorCode::ShapeMismatch, "data dimension " + std::to_string(data.X.cols()) +
                                              " does not match model input " + std::to_string(model.input_dim()));
  }
  ObjectiveSpec spec = cfg.spec;
  spec.clip_bound = model.clip_bound();

  TrainHistory history;
  const std::size_t n = data.X.rows(), m = data.Z.rows();
  const std::size_t n_batches = std::max<std::size_t>(1, (std::min(n, m) + cfg.batch_size - 1) / cfg.batch_size);
  const bool nn = spec.variant == Variant::NnStratified;

  AdamState adam;
  adam.lr = cfg.lr;
  adam.beta1 = cfg.beta1;
  adam.beta2 = cfg.beta2;
  adam.eps = cfg.eps;
  Rng batch_rng = Rng(cfg.seed).split(0x6261746368ULL);
  std::vector<Tensor> params = model.net().parameters();
  std::vector<Tensor> grads(params.size());

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto perm_X = batch_rng.permutation(n);
    const auto perm_Z = batch_rng.permutation(m);
    double objective_sum = 0.0;
    long fwd_ascends = 0, inv_ascends = 0;

    for (std::size_t k = 0; k < n_batches; ++k) {
      const std::span<const std::size_t> idx_X(perm_X.data() + k * n / n_batches, (k + 1) * n / n_batches - k * n / n_batches);
      const std::span<const std::size_t> idx_Z(perm_Z.data() + k * m / n_batches, (k + 1) * m / n_batches - k * m / n_batches);

      if (model.net().spectral_norm()) model.net().advance_spectral();
      ad::Graph graph;
      const RatioNodes x = model.build(graph, graph.constant(data.X.gather_rows(idx_X)));
      const RatioNodes z = model.build(graph, graph.constant(data.Z.gather_rows(idx_Z)));
      Branches branches;
      if (nn) {
        branches = branches_for(graph, spec, x, z);
        fwd_ascends += branches.forward ? 0 : 1;
        inv_ascends += branches.inverse ? 0 : 1;
      }
      const ad::NodeId loss = build_loss(graph, spec, x, z, branches);

      ad::Evaluation eval;
      try {
        eval = ad::evaluate_with_grad(graph, loss);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NonFiniteValue) throw;
        throw Error(ErrorCode::NonFiniteValue, "training aborted at epoch " + std::to_string(epoch) + ": " + e.what());
      }
      const RatioValues vx{graph.value(x.r).vec(), graph.value(x.logr).vec()};
      const RatioValues vz{graph.value(z.r).vec(), graph.value(z.logr).vec()};
      objective_sum += khat(spec, vx.r, vx.logr, vz.r, vz.logr);

      for (std::size_t p = 0; p < params.size(); ++p) grads[p] = std::move(eval.grads.at(p));
      adam_step(params, grads, adam);
      model.net().set_parameters(params);
    }

    if (epoch % cfg.eval_every == 0 || epoch == cfg.epochs) {
      HistoryRow row;
      row.epoch = epoch;
      row.objective = objective_sum / static_cast<double>(n_batches);
      row.l2_error = probe ? probe(model) : std::numeric_limits<double>::quiet_NaN();
      row.branch_fwd_ascends = fwd_ascends;
      row.branch_inv_ascends = inv_ascends;
      history.rows.push_back(row);
    }
  }
  return {std::move(model), std::move(history)};
}

KernelRatioModel train_kliep(KernelRatioModel model, const SamplePair& data, const KliepConfig& cfg) {
  const Tensor phi_X = kernel_design_matrix(data.X, model.centers, model.sigma);
  const Tensor phi_Z = kernel_design_matrix(data.Z, model.centers, model.sigma);
  const std::size_t b = model.centers.rows();
  if (model.theta.rows() != b) throw Error(ErrorCode::ShapeMismatch, "theta length != number of centers");

  // Constraint vector: mean feature over Z, so mean r(Z) = bᵀθ.
  std::vector<double> bvec(b, 0.0);
  for (std::size_t j = 0; j < phi_Z.rows(); ++j)
    for (std::size_t c = 0; c < b; ++c) bvec[c] += phi_Z(j, c);
  double bb = 0.0;
  for (double& v : bvec) {
    v /= static_cast<double>(phi_Z.rows());
    bb += v * v;
  }

  auto project = [&](Tensor& theta) {
    double bt = 0.0;
    for (std::size_t c = 0; c < b; ++c) bt += bvec[c] * theta[c];
    for (std::size_t c = 0; c < b; ++c) theta[c] += (1.0 - bt) * bvec[c] / bb;
    for (double& t : theta.data()) t = std::max(t, 0.0);
    bt = 0.0;
    for (std::size_t c = 0; c < b; ++c) bt += bvec[c] * theta[c];
    if (!(bt > 0.0)) throw Error(ErrorCode::DegenerateConstraint, "mean r(Z) vanished");
    for (double& t : theta.data()) t /= bt;
  };

  if (!(bb > 0.0)) throw Error(ErrorCode::DegenerateConstraint, "all Z features are zero");
  project(model.theta);
  for (int it = 0; it < cfg.iterations; ++it) {
    const Tensor lin = kernels::matmul(phi_X, model.theta);
    Tensor w(phi_X.rows(), 1);
    for (std::size_t i = 0; i < w.rows(); ++i) w[i] = 1.0 / std::max(lin[i], KernelRatioModel::kFloor);
    const Tensor grad = kernels::matmul_tn(phi_X, w);
    for (std::size_t c = 0; c < b; ++c) model.theta[c] += cfg.step * grad[c] / static_cast<double>(phi_X.rows());
    project(model.theta);
  }
  return model;
}

}  // namespace drm
