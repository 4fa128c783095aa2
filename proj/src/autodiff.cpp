#include "drm/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "drm/error.hpp"
#include "drm/kernels.hpp"

namespace drm::ad {
namespace {

std::string shape_str(const Tensor& t) {
  return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::ShapeMismatch,
                std::string(op) + ": " + shape_str(a) + " vs " + shape_str(b));
  }
}

template <class F>
Tensor map(const Tensor& a, F f) {
  Tensor out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

void accumulate(Tensor& slot, const Tensor& g) {
  if (slot.size() == 0) {
    slot = g;
    return;
  }
  for (std::size_t i = 0; i < g.size(); ++i) slot[i] += g[i];
}

}  // namespace

const char* op_name(Op op) {
  switch (op) {
    case Op::Constant: return "constant";
    case Op::Parameter: return "parameter";
    case Op::MatMul: return "matmul";
    case Op::Add: return "add";
    case Op::AddBias: return "add_bias";
    case Op::Relu: return "relu";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Reciprocal: return "reciprocal";
    case Op::Mul: return "mul";
    case Op::MulScalar: return "mul_scalar";
    case Op::Scale: return "scale";
    case Op::Sum: return "sum";
    case Op::Mean: return "mean";
    case Op::Maximum: return "maximum";
    case Op::Clamp: return "clamp";
    case Op::Negate: return "negate";
  }
  return "?";
}

NodeId Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

void Graph::check(NodeId id) const {
  if (id >= nodes_.size()) throw Error(ErrorCode::ShapeMismatch, "unknown node id");
}

NodeId Graph::constant(Tensor value) {
  return push({.op = Op::Constant, .value = std::move(value)});
}

NodeId Graph::parameter(Tensor value, ParamId id) {
  return push({.op = Op::Parameter, .param = id, .value = std::move(value)});
}

NodeId Graph::matmul(NodeId a, NodeId b) {
  check(a), check(b);
  Tensor v = kernels::matmul(value(a), value(b));
  return push({.op = Op::MatMul, .a = a, .b = b, .value = std::move(v)});
}

NodeId Graph::add(NodeId a, NodeId b) {
  check(a), check(b);
  const Tensor& x = value(a);
  const Tensor& y = value(b);
  require_same(x, y, "add");
  Tensor v(x.rows(), x.cols());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = x[i] + y[i];
  return push({.op = Op::Add, .a = a, .b = b, .value = std::move(v)});
}

NodeId Graph::add_bias(NodeId a, NodeId bias) {
  check(a), check(bias);
  const Tensor& x = value(a);
  const Tensor& bv = value(bias);
  if (bv.rows() != 1 || bv.cols() != x.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "add_bias: " + shape_str(x) + " + " + shape_str(bv));
  }
  Tensor v(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) v(i, j) = x(i, j) + bv[j];
  return push({.op = Op::AddBias, .a = a, .b = bias, .value = std::move(v)});
}

NodeId Graph::relu(NodeId a) {
  check(a);
  return push({.op = Op::Relu, .a = a, .value = map(value(a), [](double x) { return x > 0.0 ? x : 0.0; })});
}

NodeId Graph::exp(NodeId a) {
  check(a);
  return push({.op = Op::Exp, .a = a, .value = map(value(a), [](double x) { return std::exp(x); })});
}

NodeId Graph::log(NodeId a) {
  check(a);
  return push({.op = Op::Log, .a = a, .value = map(value(a), [](double x) { return std::log(x); })});
}

NodeId Graph::reciprocal(NodeId a) {
  check(a);
  return push({.op = Op::Reciprocal, .a = a, .value = map(value(a), [](double x) { return 1.0 / x; })});
}

NodeId Graph::mul(NodeId a, NodeId b) {
  check(a), check(b);
  const Tensor& x = value(a);
  const Tensor& y = value(b);
  require_same(x, y, "mul");
  Tensor v(x.rows(), x.cols());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = x[i] * y[i];
  return push({.op = Op::Mul, .a = a, .b = b, .value = std::move(v)});
}

NodeId Graph::mul_scalar(NodeId a, NodeId s) {
  check(a), check(s);
  const Tensor& sv = value(s);
  if (sv.size() != 1) throw Error(ErrorCode::ShapeMismatch, "mul_scalar: factor is " + shape_str(sv));
  const double c = sv[0];
  return push({.op = Op::MulScalar, .a = a, .b = s, .value = map(value(a), [c](double x) { return x * c; })});
}

NodeId Graph::scale(NodeId a, double c) {
  check(a);
  return push({.op = Op::Scale, .a = a, .c0 = c, .value = map(value(a), [c](double x) { return x * c; })});
}

NodeId Graph::sum(NodeId a) {
  check(a);
  double s = 0.0;
  for (double x : value(a).data()) s += x;
  return push({.op = Op::Sum, .a = a, .value = Tensor::scalar(s)});
}

NodeId Graph::mean(NodeId a) {
  check(a);
  const Tensor& x = value(a);
  if (x.size() == 0) throw Error(ErrorCode::ShapeMismatch, "mean of empty tensor");
  double s = 0.0;
  for (double v : x.data()) s += v;
  return push({.op = Op::Mean, .a = a, .value = Tensor::scalar(s / static_cast<double>(x.size()))});
}

NodeId Graph::maximum(NodeId a, double c) {
  check(a);
  return push({.op = Op::Maximum, .a = a, .c0 = c, .value = map(value(a), [c](double x) { return x >= c ? x : c; })});
}

NodeId Graph::clamp(NodeId a, double lo, double hi) {
  check(a);
  return push({.op = Op::Clamp, .a = a, .c0 = lo, .c1 = hi,
               .value = map(value(a), [lo, hi](double x) { return std::clamp(x, lo, hi); })});
}

NodeId Graph::negate(NodeId a) {
  check(a);
  return push({.op = Op::Negate, .a = a, .value = map(value(a), [](double x) { return -x; })});
}

std::size_t Graph::first_non_finite() const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].value.all_finite()) return i;
  }
  return nodes_.size();
}

std::map<ParamId, Tensor> Graph::backward(NodeId output) const {
  check(output);
  if (value(output).size() != 1) {
    throw Error(ErrorCode::NonScalarOutput, "output node is " + shape_str(value(output)));
  }
  std::map<ParamId, Tensor> grads;
  for (const Node& n : nodes_) {
    if (n.op == Op::Parameter && !grads.contains(n.param)) {
      grads.emplace(n.param, Tensor(n.value.rows(), n.value.cols()));
    }
  }

  std::vector<Tensor> adj(output + 1);
  adj[output] = Tensor::scalar(1.0);
  for (std::size_t k = output + 1; k-- > 0;) {
    if (adj[k].size() == 0) continue;
    const Node& n = nodes_[k];
    const Tensor& g = adj[k];
    switch (n.op) {
      case Op::Constant:
        break;
      case Op::Parameter:
        accumulate(grads[n.param], g);
        break;
      case Op::MatMul:
        accumulate(adj[n.a], kernels::matmul_nt(g, value(n.b)));
        accumulate(adj[n.b], kernels::matmul_tn(value(n.a), g));
        break;
      case Op::Add:
        accumulate(adj[n.a], g);
        accumulate(adj[n.b], g);
        break;
      case Op::AddBias: {
        accumulate(adj[n.a], g);
        Tensor gb(1, g.cols());
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < g.cols(); ++j) gb[j] += g(i, j);
        accumulate(adj[n.b], gb);
        break;
      }
      case Op::Relu: {
        const Tensor& x = value(n.a);
        Tensor d(g.rows(), g.cols());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = x[i] > 0.0 ? g[i] : 0.0;
        accumulate(adj[n.a], d);
        break;
      }
      case Op::Exp: {
        Tensor d(g.rows(), g.cols());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = g[i] * n.value[i];
        accumulate(adj[n.a], d);
        break;
      }
      case Op::Log: {
        const Tensor& x = value(n.a);
        Tensor d(g.rows(), g.cols());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = g[i] / x[i];
        accumulate(adj[n.a], d);
        break;
      }
      case Op::Reciprocal: {
        Tensor d(g.rows(), g.cols());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = -g[i] * n.value[i] * n.value[i];
        accumulate(adj[n.a], d);
        break;
      }
      case Op::Mul: {
        const Tensor& x = value(n.a);
        const Tensor& y = value(n.b);
        Tensor dx(g.rows(), g.cols()), dy(g.rows(), g.cols());
        for (std::size_t i = 0; i < g.size(); ++i) {
          dx[i] = g[i] * y[i];
          dy[i] = g[i] * x[i];
        }
        accumulate(adj[n.a], dx);
        accumulate(adj[n.b], dy);
        break;
      }
      case Op::MulScalar: {
        const Tensor& x = value(n.a);
        const double c = value(n.b)[0];
        Tensor dx(g.rows(), g.cols());
        double ds = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
          dx[i] = g[i] * c;
          ds += g[i] * x[i];
        }
        accumulate(adj[n.a], dx);
        accumulate(adj[n.b], Tensor::scalar(ds));
        break;
      }
      case Op::Scale: {
        Tensor d(g.rows(), g.cols());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = g[i] * n.c0;
        accumulate(adj[n.a], d);
        break;
      }
      case Op::Sum: {
        const Tensor& x = value(n.a);
        accumulate(adj[n.a], Tensor(x.rows(), x.cols(), g[0]));
        break;
      }
      case Op::Mean: {
        const Tensor& x = value(n.a);
        accumulate(adj[n.a], Tensor(x.rows(), x.cols(), g[0] / static_cast<double>(x.size())));
        break;
      }
      case Op::Maximum: {
        const Tensor& x = value(n.a);
        Tensor d(g.rows(), g.cols());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = x[i] >= n.c0 ? g[i] : 0.0;
        accumulate(adj[n.a], d);
        break;
      }
      case Op::Clamp: {
        const Tensor& x = value(n.a);
        Tensor d(g.rows(), g.cols());
        for (std::size_t i = 0; i < d.size(); ++i)
          d[i] = (x[i] >= n.c0 && x[i] <= n.c1) ? g[i] : 0.0;
        accumulate(adj[n.a], d);
        break;
      }
      case Op::Negate: {
        Tensor d(g.rows(), g.cols());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = -g[i];
        accumulate(adj[n.a], d);
        break;
      }
    }
  }
  return grads;
}

Evaluation evaluate_with_grad(const Graph& graph, NodeId output) {
  const Tensor& out = graph.value(output);
  if (out.size() != 1) {
    throw Error(ErrorCode::NonScalarOutput,
                "output node is " + std::to_string(out.rows()) + "x" + std::to_string(out.cols()));
  }
  if (const std::size_t bad = graph.first_non_finite(); bad < graph.size()) {
    throw Error(ErrorCode::NonFiniteValue, "node " + std::to_string(bad) + " (" +
                                               op_name(graph.op(bad)) + ") holds NaN/Inf");
  }
  return {out, graph.backward(output)};
}

Tensor finite_diff_grad(const std::function<double(const Tensor&)>& f, const Tensor& x, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::RangeError, "finite difference step must be positive");
  Tensor grad(x.rows(), x.cols());
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw Error(ErrorCode::NonFiniteValue, "function diverges at coordinate " + std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace drm::ad
