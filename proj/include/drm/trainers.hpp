#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "drm/datasets.hpp"
#include "drm/objectives.hpp"
#include "drm/optim.hpp"
#include "drm/ratio_model.hpp"

namespace drm {

struct TrainConfig {
  int epochs = 200;
  std::size_t batch_size = 128;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;
  ObjectiveSpec spec;
  int eval_every = 1;  // history row every k epochs (and always the last)

  void validate() const;
};

struct HistoryRow {
  int epoch = 0;
  double objective = 0.0;  // mean minibatch K̂ (maximization form) over the epoch
  double l2_error = 0.0;   // NaN unless a probe was supplied
  long branch_fwd_ascends = 0;
  long branch_inv_ascends = 0;
};

struct TrainHistory {
  std::vector<HistoryRow> rows;
};

/// Streams rows as epoch,objective,l2_error,branch_fwd_ascends,branch_inv_ascends.
void write_history_csv(std::ostream& os, const TrainHistory& history);

struct TrainResult {
  MlpRatioModel model;
  TrainHistory history;
};

using L2Probe = std::function<double(const MlpRatioModel&)>;

/// Minibatch Adam on cfg.spec. Each epoch draws independent permutations of X
/// and Z and pairs them into ⌈min(n,m)/batch⌉ minibatches. For NnStratified
/// every minibatch picks descent or margin ascent per side. Throws
/// NonFiniteValue naming the epoch if the loss graph overflows.
TrainResult train_dre(MlpRatioModel model, const SamplePair& data, const TrainConfig& cfg,
                      const L2Probe& probe = {});

struct KliepConfig {
  int iterations = 2000;
  double step = 1e-3;
};

/// Projected gradient ascent on mean log r(X) with mean r(Z) = 1 and θ ≥ 0
/// re-imposed after every step. Throws DegenerateConstraint if mean r(Z)
/// collapses to zero.
KernelRatioModel train_kliep(KernelRatioModel model, const SamplePair& data, const KliepConfig& cfg);

}  // namespace drm
