#include "drm/ratio_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>

#include "drm/error.hpp"
#include "drm/kernels.hpp"

namespace drm {

// ---------------------------------------------------------------- Mlp

Mlp Mlp::init(std::span<const std::size_t> widths, Rng& rng, bool spectral_norm) {
  if (widths.size() < 2) throw Error(ErrorCode::ShapeMismatch, "an MLP needs at least two widths");
  Mlp net;
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    const std::size_t in = widths[k], out = widths[k + 1];
    if (in == 0 || out == 0) throw Error(ErrorCode::ShapeMismatch, "zero layer width");
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    DenseLayer layer{Tensor(in, out), Tensor(1, out)};
    for (double& w : layer.weight.data()) w = rng.uniform(-bound, bound);
    if (k + 2 < widths.size()) {
      for (double& b : layer.bias.data()) b = rng.uniform(-bound, bound);
    }
    net.layers_.push_back(std::move(layer));
  }
  if (spectral_norm) {
    for (const DenseLayer& layer : net.layers_) {
      SpectralState s = SpectralState::random(layer.weight.rows(), layer.weight.cols(), rng, 30);
      power_iterate(layer.weight, s);
      s.n_power_iters = 1;
      net.spectral_.push_back(std::move(s));
    }
  }
  return net;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const DenseLayer& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

std::vector<Tensor> Mlp::parameters() const {
  std::vector<Tensor> out;
  out.reserve(2 * layers_.size());
  for (const DenseLayer& l : layers_) {
    out.push_back(l.weight);
    out.push_back(l.bias);
  }
  return out;
}

void Mlp::set_parameters(std::span<const Tensor> params) {
  if (params.size() != 2 * layers_.size()) {
    throw Error(ErrorCode::ShapeMismatch, "expected " + std::to_string(2 * layers_.size()) +
                                              " parameter tensors, got " + std::to_string(params.size()));
  }
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    if (!params[2 * k].same_shape(layers_[k].weight) || !params[2 * k + 1].same_shape(layers_[k].bias)) {
      throw Error(ErrorCode::ShapeMismatch, "parameter shape for layer " + std::to_string(k));
    }
    layers_[k].weight = params[2 * k];
    layers_[k].bias = params[2 * k + 1];
  }
}

void Mlp::advance_spectral() {
  for (std::size_t k = 0; k < spectral_.size(); ++k) power_iterate(layers_[k].weight, spectral_[k]);
}

double Mlp::sigma_product() const {
  double p = 1.0;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    Tensor w = layers_[k].weight;
    if (spectral_norm()) {
      const double s = spectral_sigma(w, spectral_[k]);
      for (double& x : w.data()) x /= s;
    }
    Rng probe_rng(k + 1);
    SpectralState probe = SpectralState::random(w.rows(), w.cols(), probe_rng, 100);
    p *= power_iterate(w, probe);
  }
  return p;
}

ad::NodeId Mlp::build(ad::Graph& graph, ad::NodeId x, ad::ParamId base) const {
  ad::NodeId h = x;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    ad::NodeId w = graph.parameter(layers_[k].weight, base + 2 * k);
    const ad::NodeId b = graph.parameter(layers_[k].bias, base + 2 * k + 1);
    if (spectral_norm()) w = spectral_normalize(graph, w, spectral_[k]);
    h = graph.add_bias(graph.matmul(h, w), b);
    if (k + 1 < layers_.size()) h = graph.relu(h);
  }
  return h;
}

Tensor Mlp::forward(const Tensor& x) const {
  ad::Graph graph;
  const ad::NodeId out = build(graph, graph.constant(x), 0);
  return graph.value(out);
}

// ---------------------------------------------------------------- ratio models

const char* to_string(OutputMode mode) {
  return mode == OutputMode::Exponential ? "exponential" : "clipped-softplus";
}

OutputMode output_mode_from_string(const std::string& s) {
  if (s == "exponential") return OutputMode::Exponential;
  if (s == "clipped-softplus") return OutputMode::ClippedSoftplus;
  throw Error(ErrorCode::ParseError, "unknown output mode '" + s + "'");
}

MlpRatioModel::MlpRatioModel(Mlp net, OutputMode mode, double clip_bound)
    : net_(std::move(net)), mode_(mode), clip_bound_(clip_bound) {
  if (!(clip_bound_ > 1.0)) throw Error(ErrorCode::RangeError, "clip bound must exceed 1");
  if (net_.output_dim() != 1) throw Error(ErrorCode::ShapeMismatch, "ratio network must have one output");
}

RatioNodes MlpRatioModel::build(ad::Graph& graph, ad::NodeId x, ad::ParamId base) const {
  const ad::NodeId g = net_.build(graph, x, base);
  const double log_bound = std::log(clip_bound_);
  if (mode_ == OutputMode::Exponential) {
    const ad::NodeId logr = graph.clamp(g, -log_bound, log_bound);
    return {g, logr, graph.exp(logr)};
  }
  // softplus(g) = log(1 + exp(g)); the inner clamp keeps exp finite.
  const ad::NodeId gc = graph.clamp(g, -log_bound - 5.0, log_bound + 5.0);
  const ad::NodeId sp = graph.log(graph.add_bias(graph.exp(gc), graph.constant(Tensor::scalar(1.0))));
  const ad::NodeId r = graph.clamp(sp, 1.0 / clip_bound_, clip_bound_);
  return {g, graph.log(r), r};
}

MlpRatioModel mlp_init(std::size_t d, std::uint64_t seed, const MlpRatioModel::Options& opts) {
  if (d == 0 || opts.hidden == 0) throw Error(ErrorCode::ShapeMismatch, "input dim and width must be >= 1");
  Rng rng(seed);
  const std::size_t widths[] = {d, opts.hidden, opts.hidden, 1};
  return MlpRatioModel(Mlp::init(widths, rng, opts.spectral_norm), opts.mode, opts.clip_bound);
}

Tensor kernel_design_matrix(const Tensor& points, const Tensor& centers, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::RangeError, "kernel bandwidth must be positive");
  return kernels::gaussian_kernel(points, centers, sigma);
}

RatioValues ratio_forward(const MlpRatioModel& model, const Tensor& x) {
  if (!x.all_finite()) throw Error(ErrorCode::NonFiniteValue, "non-finite input batch");
  if (x.cols() != model.input_dim()) {
    throw Error(ErrorCode::ShapeMismatch, "input has " + std::to_string(x.cols()) + " columns, model expects " +
                                              std::to_string(model.input_dim()));
  }
  ad::Graph graph;
  const RatioNodes nodes = model.build(graph, graph.constant(x));
  const Tensor& logr = graph.value(nodes.logr);
  const Tensor& r = graph.value(nodes.r);
  if (!r.all_finite() || !logr.all_finite()) throw Error(ErrorCode::NonFiniteValue, "ratio model output");
  const double lo = 1.0 / model.clip_bound(), hi = model.clip_bound();
  RatioValues out{std::vector<double>(x.rows()), logr.vec()};
  for (std::size_t i = 0; i < x.rows(); ++i) out.r[i] = std::clamp(r[i], lo, hi);
  return out;
}

RatioValues ratio_forward(const KernelRatioModel& model, const Tensor& x) {
  const Tensor phi = kernel_design_matrix(x, model.centers, model.sigma);
  const Tensor lin = kernels::matmul(phi, model.theta);
  RatioValues out;
  out.r.resize(x.rows());
  out.logr.resize(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    out.r[i] = std::max(lin[i], KernelRatioModel::kFloor);
    out.logr[i] = std::log(out.r[i]);
  }
  return out;
}

RatioValues ratio_forward(const AnyRatioModel& model, const Tensor& x) {
  return std::visit([&](const auto& m) { return ratio_forward(m, x); }, model);
}

// ---------------------------------------------------------------- checkpoints

namespace {

constexpr const char* kMagic = "drm-checkpoint";
constexpr int kVersion = 1;

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

void write_values(std::ostream& os, const Tensor& t) {
  for (std::size_t i = 0; i < t.size(); ++i) os << (i ? " " : "") << hex(t[i]);
  os << '\n';
}

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}

  std::string word() {
    std::string w;
    if (!(is_ >> w)) throw Error(ErrorCode::ParseError, "checkpoint truncated");
    return w;
  }
  void expect(const std::string& w) {
    const std::string got = word();
    if (got != w) throw Error(ErrorCode::ParseError, "checkpoint: expected '" + w + "', got '" + got + "'");
  }
  std::size_t count() {
    const std::string w = word();
    char* end = nullptr;
    const unsigned long long v = std::strtoull(w.c_str(), &end, 10);
    if (*end != '\0') throw Error(ErrorCode::ParseError, "checkpoint: bad count '" + w + "'");
    return static_cast<std::size_t>(v);
  }
  double real() {
    const std::string w = word();
    char* end = nullptr;
    const double v = std::strtod(w.c_str(), &end);
    if (*end != '\0') throw Error(ErrorCode::ParseError, "checkpoint: bad number '" + w + "'");
    return v;
  }
  Tensor tensor(std::size_t rows, std::size_t cols) {
    Tensor t(rows, cols);
    for (double& x : t.data()) x = real();
    return t;
  }

 private:
  std::istream& is_;
};

void save_mlp(std::ostream& os, const MlpRatioModel& m) {
  const Mlp& net = m.net();
  os << "model mlp\n";
  os << "mode " << to_string(m.mode()) << '\n';
  os << "clip_bound " << hex(m.clip_bound()) << '\n';
  os << "layers " << net.layers().size() << '\n';
  for (std::size_t k = 0; k < net.layers().size(); ++k) {
    const DenseLayer& l = net.layers()[k];
    os << "layer " << k << ' ' << l.weight.rows() << ' ' << l.weight.cols() << '\n';
    os << "weight ";
    write_values(os, l.weight);
    os << "bias ";
    write_values(os, l.bias);
  }
  os << "spectral " << net.spectral().size() << '\n';
  for (const SpectralState& s : net.spectral()) {
    os << "iters " << s.n_power_iters << '\n';
    os << "u " << s.u.size() << ' ';
    write_values(os, s.u);
    os << "v " << s.v.size() << ' ';
    write_values(os, s.v);
  }
}

MlpRatioModel load_mlp(Reader& in) {
  in.expect("mode");
  const OutputMode mode = output_mode_from_string(in.word());
  in.expect("clip_bound");
  const double clip = in.real();
  in.expect("layers");
  const std::size_t n_layers = in.count();
  std::vector<Tensor> params;
  std::vector<std::size_t> widths;
  for (std::size_t k = 0; k < n_layers; ++k) {
    in.expect("layer");
    if (in.count() != k) throw Error(ErrorCode::ParseError, "checkpoint: layers out of order");
    const std::size_t rows = in.count(), cols = in.count();
    if (k == 0) widths.push_back(rows);
    widths.push_back(cols);
    in.expect("weight");
    params.push_back(in.tensor(rows, cols));
    in.expect("bias");
    params.push_back(in.tensor(1, cols));
  }
  in.expect("spectral");
  const std::size_t n_spec = in.count();
  if (n_spec != 0 && n_spec != n_layers) throw Error(ErrorCode::ParseError, "checkpoint: spectral count");

  Rng unused(0);
  Mlp net = Mlp::init(widths, unused, false);
  net.set_parameters(params);
  for (std::size_t k = 0; k < n_spec; ++k) {
    SpectralState s;
    in.expect("iters");
    s.n_power_iters = static_cast<int>(in.count());
    in.expect("u");
    const std::size_t nu = in.count();
    s.u = in.tensor(nu, 1);
    in.expect("v");
    const std::size_t nv = in.count();
    s.v = in.tensor(nv, 1);
    net.spectral().push_back(std::move(s));
  }
  return MlpRatioModel(std::move(net), mode, clip);
}

void save_kernel(std::ostream& os, const KernelRatioModel& m) {
  os << "model kernel\n";
  os << "sigma " << hex(m.sigma) << '\n';
  os << "centers " << m.centers.rows() << ' ' << m.centers.cols() << ' ';
  write_values(os, m.centers);
  os << "theta " << m.theta.size() << ' ';
  write_values(os, m.theta);
}

KernelRatioModel load_kernel(Reader& in) {
  KernelRatioModel m;
  in.expect("sigma");
  m.sigma = in.real();
  in.expect("centers");
  const std::size_t b = in.count(), d = in.count();
  m.centers = in.tensor(b, d);
  in.expect("theta");
  const std::size_t nt = in.count();
  if (nt != b) throw Error(ErrorCode::ParseError, "checkpoint: theta length");
  m.theta = in.tensor(nt, 1);
  return m;
}

}  // namespace

void save_checkpoint(std::ostream& os, const AnyRatioModel& model) {
  os << kMagic << ' ' << kVersion << '\n';
  if (const auto* mlp = std::get_if<MlpRatioModel>(&model)) {
    save_mlp(os, *mlp);
  } else {
    save_kernel(os, std::get<KernelRatioModel>(model));
  }
  os << "end\n";
}

AnyRatioModel load_checkpoint(std::istream& is) {
  Reader in(is);
  in.expect(kMagic);
  if (in.count() != kVersion) throw Error(ErrorCode::ParseError, "unsupported checkpoint version");
  in.expect("model");
  const std::string kind = in.word();
  AnyRatioModel out;
  if (kind == "mlp") {
    out = load_mlp(in);
  } else if (kind == "kernel") {
    out = load_kernel(in);
  } else {
    throw Error(ErrorCode::ParseError, "unknown model kind '" + kind + "'");
  }
  in.expect("end");
  return out;
}

void save_checkpoint(const std::string& path, const AnyRatioModel& model) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::IoError, "cannot write " + path);
  save_checkpoint(os, model);
}

AnyRatioModel load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::IoError, "cannot read " + path);
  return load_checkpoint(is);
}

}  // namespace drm
