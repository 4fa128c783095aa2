#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <vector>

#include "drm/tensor.hpp"

namespace drm::ad {

using NodeId = std::size_t;
using ParamId = std::size_t;

enum class Op {
  Constant,
  Parameter,
  MatMul,
  Add,
  AddBias,    // n×k + 1×k, bias broadcast over rows
  Relu,
  Exp,
  Log,
  Reciprocal,
  Mul,        // elementwise
  MulScalar,  // n×k times a 1×1 node
  Scale,      // times a fixed double
  Sum,
  Mean,
  Maximum,    // max(x, c) for a fixed c
  Clamp,      // clamp to [lo, hi], zero gradient outside
  Negate,
};

const char* op_name(Op op);

/// Eager tape: each op computes its value on insertion, parents always
/// precede children, and backward walks the tape once in reverse.
class Graph {
 public:
  NodeId constant(Tensor value);
  /// Leaf that receives a gradient under `id`. Several leaves may share an id;
  /// their gradients are summed.
  NodeId parameter(Tensor value, ParamId id);

  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId add_bias(NodeId a, NodeId bias);
  NodeId relu(NodeId a);
  NodeId exp(NodeId a);
  NodeId log(NodeId a);
  NodeId reciprocal(NodeId a);
  NodeId mul(NodeId a, NodeId b);
  NodeId mul_scalar(NodeId a, NodeId s);
  NodeId scale(NodeId a, double c);
  NodeId sum(NodeId a);
  NodeId mean(NodeId a);
  NodeId maximum(NodeId a, double c);
  NodeId clamp(NodeId a, double lo, double hi);
  NodeId negate(NodeId a);
  NodeId sub(NodeId a, NodeId b) { return add(a, negate(b)); }

  const Tensor& value(NodeId id) const { return nodes_.at(id).value; }
  Op op(NodeId id) const { return nodes_.at(id).op; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Reverse pass from a 1×1 node. Every parameter leaf gets an entry, zero if
  /// the output does not depend on it.
  std::map<ParamId, Tensor> backward(NodeId output) const;

  /// Id of the first node whose value holds a NaN or Inf, or size() if none.
  std::size_t first_non_finite() const;

 private:
  struct Node {
    Op op;
    NodeId a = 0;
    NodeId b = 0;
    double c0 = 0.0;
    double c1 = 0.0;
    ParamId param = 0;
    Tensor value;
  };

  NodeId push(Node node);
  void check(NodeId id) const;

  std::vector<Node> nodes_;
};

struct Evaluation {
  Tensor value;
  std::map<ParamId, Tensor> grads;
};

/// Value of `output` plus gradients for every parameter leaf.
/// Throws NonScalarOutput unless the output is 1×1, and NonFiniteValue if any
/// forward value in the graph is NaN or Inf.
Evaluation evaluate_with_grad(const Graph& graph, NodeId output);

/// Central-difference gradient of a scalar function, one coordinate at a time.
Tensor finite_diff_grad(const std::function<double(const Tensor&)>& f, const Tensor& x,
                        double h);

}  // namespace drm::ad
