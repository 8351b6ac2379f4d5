#include "advattr/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace advattr {

namespace {

bool all_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

double dot_span(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2(const Vec& v) { return std::sqrt(dot_span(v, v)); }

}  // namespace

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::Input: return "input";
    case OpKind::Parameter: return "parameter";
    case OpKind::Add: return "add";
    case OpKind::Subtract: return "subtract";
    case OpKind::Scale: return "scale";
    case OpKind::MatVec: return "matvec";
    case OpKind::Tanh: return "tanh";
    case OpKind::Abs: return "abs";
    case OpKind::Sum: return "sum";
    case OpKind::SquaredNorm: return "squared_norm";
    case OpKind::Norm: return "norm";
    case OpKind::Dot: return "dot";
    case OpKind::Cosine: return "cosine";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// GradientBundle

void GradientBundle::add(NodeId parameter, std::string name, Tensor gradient) {
  entries_.push_back({parameter, std::move(name), std::move(gradient)});
}

const Tensor& GradientBundle::at(NodeId parameter) const {
  for (const auto& e : entries_) {
    if (e.parameter == parameter) return e.gradient;
  }
  throw std::out_of_range("no gradient for parameter node " + std::to_string(parameter.index));
}

const Tensor& GradientBundle::at(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e.gradient;
  }
  throw std::out_of_range("no gradient for parameter '" + name + "'");
}

Vec GradientBundle::flatten() const {
  Vec out;
  out.reserve(total_size());
  for (const auto& e : entries_) {
    out.insert(out.end(), e.gradient.values().begin(), e.gradient.values().end());
  }
  return out;
}

std::size_t GradientBundle::total_size() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.gradient.size();
  return n;
}

// ---------------------------------------------------------------------------
// Graph construction

const Graph::Node& Graph::node(NodeId id) const {
  if (id.index >= nodes_.size()) {
    throw std::out_of_range("node id " + std::to_string(id.index) + " out of range");
  }
  return nodes_[id.index];
}

NodeId Graph::append(Node n) {
  nodes_.push_back(std::move(n));
  values_.emplace_back();
  evaluated_ = false;
  return NodeId{nodes_.size() - 1};
}

NodeId Graph::leaf(OpKind kind, std::string name, Tensor value) {
  if (!name.empty() && named_.contains(name)) {
    throw std::invalid_argument("duplicate leaf name '" + name + "'");
  }
  Node n;
  n.kind = kind;
  n.shape = value.shape();
  n.name = name;
  n.needs_grad = kind == OpKind::Parameter;
  const NodeId id = append(std::move(n));
  values_[id.index] = value.values();
  if (!name.empty()) named_.emplace(std::move(name), id);
  if (kind == OpKind::Parameter) parameters_.push_back(id);
  return id;
}

NodeId Graph::input(std::string name, Tensor value) {
  return leaf(OpKind::Input, std::move(name), std::move(value));
}

NodeId Graph::constant(Tensor value) { return leaf(OpKind::Input, "", std::move(value)); }

NodeId Graph::parameter(std::string name, Tensor value) {
  if (name.empty()) throw std::invalid_argument("parameters must be named");
  return leaf(OpKind::Parameter, std::move(name), std::move(value));
}

NodeId Graph::add(NodeId a, NodeId b) {
  if (node(a).shape != node(b).shape) {
    throw ShapeError("add: " + shape_string(node(a).shape) + " vs " + shape_string(node(b).shape));
  }
  return append({OpKind::Add, a, b, 0.0, node(a).shape, "", node(a).needs_grad || node(b).needs_grad});
}

NodeId Graph::subtract(NodeId a, NodeId b) {
  if (node(a).shape != node(b).shape) {
    throw ShapeError("subtract: " + shape_string(node(a).shape) + " vs " +
                     shape_string(node(b).shape));
  }
  return append(
      {OpKind::Subtract, a, b, 0.0, node(a).shape, "", node(a).needs_grad || node(b).needs_grad});
}

NodeId Graph::scale(NodeId a, double factor) {
  if (!std::isfinite(factor)) throw NumericError("scale: non-finite factor");
  return append({OpKind::Scale, a, a, factor, node(a).shape, "", node(a).needs_grad});
}

NodeId Graph::matvec(NodeId matrix, NodeId vec) {
  const auto& ms = node(matrix).shape;
  const auto& vs = node(vec).shape;
  if (ms.size() != 2 || vs.size() != 1 || ms[1] != vs[0]) {
    throw ShapeError("matvec: " + shape_string(ms) + " x " + shape_string(vs));
  }
  return append({OpKind::MatVec, matrix, vec, 0.0, {ms[0]}, "",
                 node(matrix).needs_grad || node(vec).needs_grad});
}

NodeId Graph::tanh(NodeId a) {
  return append({OpKind::Tanh, a, a, 0.0, node(a).shape, "", node(a).needs_grad});
}

NodeId Graph::abs(NodeId a) {
  return append({OpKind::Abs, a, a, 0.0, node(a).shape, "", node(a).needs_grad});
}

NodeId Graph::sum(NodeId a) {
  return append({OpKind::Sum, a, a, 0.0, {}, "", node(a).needs_grad});
}

NodeId Graph::squared_norm(NodeId a) {
  return append({OpKind::SquaredNorm, a, a, 0.0, {}, "", node(a).needs_grad});
}

NodeId Graph::norm(NodeId a) {
  return append({OpKind::Norm, a, a, 0.0, {}, "", node(a).needs_grad});
}

NodeId Graph::dot(NodeId a, NodeId b) {
  if (node(a).shape != node(b).shape || node(a).shape.size() != 1) {
    throw ShapeError("dot: " + shape_string(node(a).shape) + " vs " + shape_string(node(b).shape));
  }
  return append({OpKind::Dot, a, b, 0.0, {}, "", node(a).needs_grad || node(b).needs_grad});
}

NodeId Graph::cosine(NodeId a, NodeId b) {
  if (node(a).shape != node(b).shape || node(a).shape.size() != 1) {
    throw ShapeError("cosine: " + shape_string(node(a).shape) + " vs " +
                     shape_string(node(b).shape));
  }
  return append({OpKind::Cosine, a, b, 0.0, {}, "", node(a).needs_grad || node(b).needs_grad});
}

void Graph::set_root(NodeId root) {
  node(root);
  root_ = root.index;
  root_set_ = true;
}

NodeId Graph::root() const {
  if (nodes_.empty()) throw std::logic_error("empty graph has no root");
  return NodeId{root_set_ ? root_ : nodes_.size() - 1};
}

// ---------------------------------------------------------------------------
// Forward

void Graph::evaluate(std::size_t i) {
  const Node& n = nodes_[i];
  if (n.kind == OpKind::Input || n.kind == OpKind::Parameter) return;
  const Vec& a = values_[n.lhs.index];
  const Vec& b = values_[n.rhs.index];
  Vec out;
  switch (n.kind) {
    case OpKind::Add:
      out.resize(a.size());
      for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] + b[k];
      break;
    case OpKind::Subtract:
      out.resize(a.size());
      for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] - b[k];
      break;
    case OpKind::Scale:
      out.resize(a.size());
      for (std::size_t k = 0; k < a.size(); ++k) out[k] = n.factor * a[k];
      break;
    case OpKind::MatVec: {
      const std::size_t rows = n.shape[0];
      const std::size_t cols = b.size();
      out.assign(rows, 0.0);
      for (std::size_t r = 0; r < rows; ++r) {
        const double* row = a.data() + r * cols;
        double s = 0.0;
        for (std::size_t c = 0; c < cols; ++c) s += row[c] * b[c];
        out[r] = s;
      }
      break;
    }
    case OpKind::Tanh:
      out.resize(a.size());
      for (std::size_t k = 0; k < a.size(); ++k) out[k] = std::tanh(a[k]);
      break;
    case OpKind::Abs:
      out.resize(a.size());
      for (std::size_t k = 0; k < a.size(); ++k) out[k] = std::fabs(a[k]);
      break;
    case OpKind::Sum: {
      double s = 0.0;
      for (double x : a) s += x;
      out = {s};
      break;
    }
    case OpKind::SquaredNorm:
      out = {dot_span(a, a)};
      break;
    case OpKind::Norm:
      out = {std::sqrt(dot_span(a, a) + kNormGuard)};
      break;
    case OpKind::Dot:
      out = {dot_span(a, b)};
      break;
    case OpKind::Cosine: {
      const double na = std::sqrt(dot_span(a, a) + kNormGuard);
      const double nb = std::sqrt(dot_span(b, b) + kNormGuard);
      out = {dot_span(a, b) / (na * nb)};
      break;
    }
    case OpKind::Input:
    case OpKind::Parameter:
      break;
  }
  for (double x : out) {
    if (!std::isfinite(x)) {
      throw NumericError(std::string("non-finite value produced by ") + op_name(n.kind) +
                         " node " + std::to_string(i));
    }
  }
  values_[i] = std::move(out);
}

Tensor Graph::forward(const std::map<std::string, Tensor>& bindings) {
  for (const auto& [name, tensor] : bindings) {
    auto it = named_.find(name);
    if (it == named_.end()) throw std::invalid_argument("unknown leaf '" + name + "'");
    const Node& n = nodes_[it->second.index];
    if (tensor.shape() != n.shape) {
      throw ShapeError("binding '" + name + "': expected " + shape_string(n.shape) + ", got " +
                       shape_string(tensor.shape()));
    }
    values_[it->second.index] = tensor.values();
  }
  evaluated_ = false;
  for (std::size_t i = 0; i < nodes_.size(); ++i) evaluate(i);
  evaluated_ = true;
  return value(root());
}

Tensor Graph::value(NodeId id) const {
  return Tensor(node(id).shape, Vec(value_span(id).begin(), value_span(id).end()));
}

std::span<const double> Graph::value_span(NodeId id) const {
  const Node& n = node(id);
  if (!evaluated_ && n.kind != OpKind::Input && n.kind != OpKind::Parameter) {
    throw std::logic_error("value requested before forward()");
  }
  return values_[id.index];
}

const std::vector<std::size_t>& Graph::shape(NodeId id) const { return node(id).shape; }
OpKind Graph::kind(NodeId id) const { return node(id).kind; }
const std::string& Graph::name(NodeId id) const { return node(id).name; }

// ---------------------------------------------------------------------------
// Backward

GradientBundle Graph::backward(NodeId root) const {
  if (!evaluated_) throw std::logic_error("backward() requires a current forward pass");
  const Node& r = node(root);
  if (!r.shape.empty()) throw ShapeError("backward root must be scalar, got " + shape_string(r.shape));

  std::vector<Vec> adj(root.index + 1);
  adj[root.index] = {1.0};

  auto accum = [&](NodeId target, std::size_t k, double g) {
    Vec& t = adj[target.index];
    if (t.empty()) t.assign(values_[target.index].size(), 0.0);
    t[k] += g;
  };

  for (std::size_t i = root.index + 1; i-- > 0;) {
    const Node& n = nodes_[i];
    const Vec& g = adj[i];
    if (g.empty() || !n.needs_grad) continue;
    if (n.kind == OpKind::Input || n.kind == OpKind::Parameter) continue;

    const Vec& a = values_[n.lhs.index];
    const Vec& b = values_[n.rhs.index];
    const bool ga = nodes_[n.lhs.index].needs_grad;
    const bool gb = nodes_[n.rhs.index].needs_grad;

    switch (n.kind) {
      case OpKind::Add:
        for (std::size_t k = 0; k < g.size(); ++k) {
          if (ga) accum(n.lhs, k, g[k]);
          if (gb) accum(n.rhs, k, g[k]);
        }
        break;
      case OpKind::Subtract:
        for (std::size_t k = 0; k < g.size(); ++k) {
          if (ga) accum(n.lhs, k, g[k]);
          if (gb) accum(n.rhs, k, -g[k]);
        }
        break;
      case OpKind::Scale:
        for (std::size_t k = 0; k < g.size(); ++k) accum(n.lhs, k, n.factor * g[k]);
        break;
      case OpKind::MatVec: {
        const std::size_t rows = n.shape[0];
        const std::size_t cols = b.size();
        for (std::size_t rr = 0; rr < rows; ++rr) {
          if (g[rr] == 0.0) continue;
          for (std::size_t c = 0; c < cols; ++c) {
            if (ga) accum(n.lhs, rr * cols + c, g[rr] * b[c]);
            if (gb) accum(n.rhs, c, g[rr] * a[rr * cols + c]);
          }
        }
        break;
      }
      case OpKind::Tanh: {
        const Vec& y = values_[i];
        for (std::size_t k = 0; k < g.size(); ++k) accum(n.lhs, k, g[k] * (1.0 - y[k] * y[k]));
        break;
      }
      case OpKind::Abs:
        for (std::size_t k = 0; k < g.size(); ++k) {
          const double sign = a[k] > 0.0 ? 1.0 : (a[k] < 0.0 ? -1.0 : 0.0);
          accum(n.lhs, k, g[k] * sign);
        }
        break;
      case OpKind::Sum:
        for (std::size_t k = 0; k < a.size(); ++k) accum(n.lhs, k, g[0]);
        break;
      case OpKind::SquaredNorm:
        for (std::size_t k = 0; k < a.size(); ++k) accum(n.lhs, k, 2.0 * a[k] * g[0]);
        break;
      case OpKind::Norm: {
        const double nv = values_[i][0];
        for (std::size_t k = 0; k < a.size(); ++k) accum(n.lhs, k, g[0] * a[k] / nv);
        break;
      }
      case OpKind::Dot:
        for (std::size_t k = 0; k < a.size(); ++k) {
          if (ga) accum(n.lhs, k, g[0] * b[k]);
          if (gb) accum(n.rhs, k, g[0] * a[k]);
        }
        break;
      case OpKind::Cosine: {
        // The gradient is defined as zero when either argument is exactly zero.
        if (all_zero(a) || all_zero(b)) break;
        const double na2 = dot_span(a, a) + kNormGuard;
        const double nb2 = dot_span(b, b) + kNormGuard;
        const double inv = 1.0 / std::sqrt(na2 * nb2);
        const double c = values_[i][0];
        for (std::size_t k = 0; k < a.size(); ++k) {
          if (ga) accum(n.lhs, k, g[0] * (b[k] * inv - c * a[k] / na2));
          if (gb) accum(n.rhs, k, g[0] * (a[k] * inv - c * b[k] / nb2));
        }
        break;
      }
      case OpKind::Input:
      case OpKind::Parameter:
        break;
    }
  }

  GradientBundle bundle;
  for (NodeId p : parameters_) {
    const Node& n = nodes_[p.index];
    Vec grad = p.index < adj.size() && !adj[p.index].empty()
                   ? adj[p.index]
                   : Vec(values_[p.index].size(), 0.0);
    bundle.add(p, n.name, Tensor(n.shape, std::move(grad)));
  }
  return bundle;
}

// ---------------------------------------------------------------------------
// Finite-difference check

double check_gradient(Graph& graph, NodeId root, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("check_gradient: step must be positive");
  graph.forward();
  const GradientBundle analytic = graph.backward(root);

  double worst = 0.0;
  for (const auto& entry : analytic.entries()) {
    const Tensor original = graph.value(entry.parameter);
    Vec perturbed = original.values();
    Vec numeric(perturbed.size());
    for (std::size_t k = 0; k < perturbed.size(); ++k) {
      const double x0 = perturbed[k];
      perturbed[k] = x0 + step;
      graph.forward({{entry.name, Tensor(original.shape(), perturbed)}});
      const double fp = graph.value_span(root)[0];
      perturbed[k] = x0 - step;
      graph.forward({{entry.name, Tensor(original.shape(), perturbed)}});
      const double fm = graph.value_span(root)[0];
      perturbed[k] = x0;
      numeric[k] = (fp - fm) / (2.0 * step);
    }
    graph.forward({{entry.name, original}});

    Vec diff(numeric.size());
    for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = entry.gradient[k] - numeric[k];
    const double denom = std::max(1e-12, l2(entry.gradient.values()) + l2(numeric));
    worst = std::max(worst, l2(diff) / denom);
  }
  return worst;
}

double check_gradient(Graph& graph, double step) { return check_gradient(graph, graph.root(), step); }

}  // namespace advattr
