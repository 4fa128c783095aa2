#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "drm/autodiff.hpp"
#include "drm/optim.hpp"
#include "drm/tensor.hpp"

namespace drm {

/// Fully connected layer computing X·W + b with W stored in×out.
struct DenseLayer {
  Tensor weight;
  Tensor bias;  // 1×out
};

/// ReLU perceptron shared by the ratio model and the GAN generator.
/// Spectral states, when present, hold one entry per layer.
class Mlp {
 public:
  Mlp() = default;
  /// Widths {in, h1, ..., out}. Weights ~ U(±1/√fan_in), hidden biases the
  /// same, final bias zero.
  static Mlp init(std::span<const std::size_t> widths, Rng& rng, bool spectral_norm);

  std::size_t input_dim() const { return layers_.front().weight.rows(); }
  std::size_t output_dim() const { return layers_.back().weight.cols(); }
  std::size_t parameter_count() const;
  bool spectral_norm() const { return !spectral_.empty(); }

  /// Flattened as W0, b0, W1, b1, ...
  std::vector<Tensor> parameters() const;
  void set_parameters(std::span<const Tensor> params);
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<SpectralState>& spectral() { return spectral_; }
  const std::vector<SpectralState>& spectral() const { return spectral_; }

  /// One power iteration per layer; called once per optimizer step.
  void advance_spectral();
  /// Product over layers of the spectral-norm estimate of the effective weight.
  double sigma_product() const;

  /// Adds the forward pass to `graph`; parameter k gets id base + k.
  ad::NodeId build(ad::Graph& graph, ad::NodeId x, ad::ParamId base) const;
  Tensor forward(const Tensor& x) const;

 private:
  std::vector<DenseLayer> layers_;
  std::vector<SpectralState> spectral_;
};

enum class OutputMode { Exponential, ClippedSoftplus };

const char* to_string(OutputMode mode);
OutputMode output_mode_from_string(const std::string& s);

struct RatioValues {
  std::vector<double> r;
  std::vector<double> logr;
};

struct RatioNodes {
  ad::NodeId g;
  ad::NodeId logr;
  ad::NodeId r;
};

/// r(x) = exp(clamp(g(x), ±log R̄)) with g a d→hidden→hidden→1 perceptron.
class MlpRatioModel {
 public:
  struct Options {
    std::size_t hidden = 32;
    OutputMode mode = OutputMode::Exponential;
    double clip_bound = 1e6;
    bool spectral_norm = true;
  };

  MlpRatioModel() = default;
  MlpRatioModel(Mlp net, OutputMode mode, double clip_bound);

  std::size_t input_dim() const { return net_.input_dim(); }
  OutputMode mode() const { return mode_; }
  double clip_bound() const { return clip_bound_; }
  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }

  RatioNodes build(ad::Graph& graph, ad::NodeId x, ad::ParamId base = 0) const;

 private:
  Mlp net_;
  OutputMode mode_ = OutputMode::Exponential;
  double clip_bound_ = 1e6;
};

MlpRatioModel mlp_init(std::size_t d, std::uint64_t seed, const MlpRatioModel::Options& opts = {});

/// r(x) = max(θᵀφ(x), 1e-12) with Gaussian features centred on `centers`.
struct KernelRatioModel {
  static constexpr double kFloor = 1e-12;
  Tensor centers;  // b×d
  Tensor theta;    // b×1
  double sigma = 1.0;
};

/// Entry (i,j) = exp(-‖xᵢ - cⱼ‖² / (2σ²)).
Tensor kernel_design_matrix(const Tensor& points, const Tensor& centers, double sigma);

/// Ratio values on a batch. Outputs of the MLP lie in [1/R̄, R̄] exactly.
RatioValues ratio_forward(const MlpRatioModel& model, const Tensor& x);
RatioValues ratio_forward(const KernelRatioModel& model, const Tensor& x);

using AnyRatioModel = std::variant<MlpRatioModel, KernelRatioModel>;
RatioValues ratio_forward(const AnyRatioModel& model, const Tensor& x);

/// Text checkpoint with hexadecimal floats; loading reproduces every bit.
void save_checkpoint(std::ostream& os, const AnyRatioModel& model);
AnyRatioModel load_checkpoint(std::istream& is);
void save_checkpoint(const std::string& path, const AnyRatioModel& model);
AnyRatioModel load_checkpoint(const std::string& path);

}  // namespace drm
