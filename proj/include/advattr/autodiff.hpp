#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "advattr/tensor.hpp"

namespace advattr {

/// Guard added under the square root of norm and cosine denominators.
inline constexpr double kNormGuard = 1e-12;

struct NodeId {
  std::size_t index = 0;
  bool operator==(const NodeId&) const = default;
  auto operator<=>(const NodeId&) const = default;
};

enum class OpKind {
  Input,
  Parameter,
  Add,
  Subtract,
  Scale,
  MatVec,
  Tanh,
  Abs,
  Sum,
  SquaredNorm,
  Norm,
  Dot,
  Cosine,
};

const char* op_name(OpKind kind);

/// Gradients of a scalar root with respect to every parameter node of a
/// graph. Entries are stored in parameter creation order, which is also the
/// order used by flatten().
class GradientBundle {
 public:
  struct Entry {
    NodeId parameter;
    std::string name;
    Tensor gradient;
  };

  void add(NodeId parameter, std::string name, Tensor gradient);

  const std::vector<Entry>& entries() const { return entries_; }
  const Tensor& at(NodeId parameter) const;
  const Tensor& at(const std::string& name) const;

  /// Concatenation of all gradients in parameter creation order.
  Vec flatten() const;
  std::size_t total_size() const;

 private:
  std::vector<Entry> entries_;
};

/// Reverse-mode computation graph over dense double tensors.
///
/// Nodes are appended in topological order by the builder methods. Shapes
/// are validated at build time; values are produced by forward(). Leaf
/// nodes (inputs and parameters) carry a name and an initial value, and
/// forward() may rebind any named leaf to a tensor of the same shape.
/// Appending nodes or rebinding invalidates the cached forward values.
class Graph {
 public:
  NodeId input(std::string name, Tensor value);
  NodeId constant(Tensor value);
  NodeId parameter(std::string name, Tensor value);

  NodeId add(NodeId a, NodeId b);
  NodeId subtract(NodeId a, NodeId b);
  NodeId scale(NodeId a, double factor);
  NodeId matvec(NodeId matrix, NodeId vec);
  NodeId tanh(NodeId a);
  NodeId abs(NodeId a);
  NodeId sum(NodeId a);
  NodeId squared_norm(NodeId a);
  NodeId norm(NodeId a);
  NodeId dot(NodeId a, NodeId b);
  NodeId cosine(NodeId a, NodeId b);

  /// Root used by forward() return value and check_gradient(). Defaults to
  /// the most recently appended node.
  void set_root(NodeId root);
  NodeId root() const;

  /// Evaluates every node after applying `bindings` to named leaves and
  /// returns the root value. Throws ShapeError on a binding of the wrong
  /// shape and NumericError on a non-finite intermediate.
  Tensor forward(const std::map<std::string, Tensor>& bindings = {});

  /// Reverse-mode gradients of a scalar `root` for every parameter node.
  /// Requires a current forward pass.
  GradientBundle backward(NodeId root) const;
  GradientBundle backward() const { return backward(root()); }

  Tensor value(NodeId id) const;
  std::span<const double> value_span(NodeId id) const;
  const std::vector<std::size_t>& shape(NodeId id) const;
  OpKind kind(NodeId id) const;
  const std::string& name(NodeId id) const;

  const std::vector<NodeId>& parameters() const { return parameters_; }
  std::size_t size() const { return nodes_.size(); }
  bool has_forward() const { return evaluated_; }

 private:
  struct Node {
    OpKind kind = OpKind::Input;
    NodeId lhs{};
    NodeId rhs{};
    double factor = 0.0;
    std::vector<std::size_t> shape;
    std::string name;
    bool needs_grad = false;
  };

  NodeId append(Node node);
  NodeId leaf(OpKind kind, std::string name, Tensor value);
  const Node& node(NodeId id) const;
  void evaluate(std::size_t i);

  std::vector<Node> nodes_;
  std::vector<Vec> values_;
  std::vector<NodeId> parameters_;
  std::map<std::string, NodeId> named_;
  std::size_t root_ = 0;
  bool root_set_ = false;
  bool evaluated_ = false;
};

/// Largest relative discrepancy, over parameter tensors, between the
/// analytic gradient of `root` and a central-difference estimate with the
/// given step: ||analytic - numeric|| / max(1e-12, ||analytic|| + ||numeric||).
/// Leaves the graph re-evaluated at its original bindings.
double check_gradient(Graph& graph, NodeId root, double step);
double check_gradient(Graph& graph, double step);

}  // namespace advattr
