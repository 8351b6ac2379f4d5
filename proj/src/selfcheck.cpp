#include "advattr/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "advattr/autodiff.hpp"
#include "advattr/losses.hpp"
#include "advattr/noise_gen.hpp"
#include "advattr/pareto.hpp"
#include "advattr/rng.hpp"

namespace advattr {

namespace {

constexpr double kOpBound = 1e-6;
constexpr double kChainBound = 1e-5;
constexpr double kFdStep = 1e-5;

Vec away_from_zero(Vec v) {
  for (auto& x : v) {
    if (std::fabs(x) < 0.1) x = x < 0 ? -0.5 : 0.5;
  }
  return v;
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

std::vector<CheckLine> gradient_op_checks(std::uint64_t seed, std::size_t instances) {
  constexpr std::size_t n = 6;
  constexpr std::size_t rows = 4;
  using Build = std::function<NodeId(Graph&, NodeId x, NodeId y, NodeId m)>;
  const std::vector<std::pair<OpKind, Build>> ops = {
      {OpKind::Add, [](Graph& g, NodeId x, NodeId y, NodeId) { return g.add(x, y); }},
      {OpKind::Subtract, [](Graph& g, NodeId x, NodeId y, NodeId) { return g.subtract(x, y); }},
      {OpKind::Scale, [](Graph& g, NodeId x, NodeId, NodeId) { return g.scale(x, -1.7); }},
      {OpKind::MatVec, [](Graph& g, NodeId x, NodeId, NodeId m) { return g.matvec(m, x); }},
      {OpKind::Tanh, [](Graph& g, NodeId x, NodeId, NodeId) { return g.tanh(x); }},
      {OpKind::Abs, [](Graph& g, NodeId x, NodeId, NodeId) { return g.abs(x); }},
      {OpKind::Sum, [](Graph& g, NodeId x, NodeId, NodeId) { return g.sum(x); }},
      {OpKind::SquaredNorm, [](Graph& g, NodeId x, NodeId, NodeId) { return g.squared_norm(x); }},
      {OpKind::Norm, [](Graph& g, NodeId x, NodeId, NodeId) { return g.norm(x); }},
      {OpKind::Dot, [](Graph& g, NodeId x, NodeId y, NodeId) { return g.dot(x, y); }},
      {OpKind::Cosine, [](Graph& g, NodeId x, NodeId y, NodeId) { return g.cosine(x, y); }},
  };
  std::vector<CheckLine> out;
  for (std::size_t k = 0; k < ops.size(); ++k) {
    CheckLine line{std::string("grad.") + op_name(ops[k].first), 0.0, kOpBound, true};
    for (std::size_t i = 0; i < instances; ++i) {
      Rng rng(derive_seed(seed, 100 * k + i));
      Graph g;
      const NodeId x = g.parameter("x", Tensor::vector(away_from_zero(gaussian_vector(n, 1.0, rng))));
      const NodeId y = g.parameter("y", Tensor::vector(gaussian_vector(n, 1.0, rng)));
      const NodeId m = g.parameter("m", Tensor::matrix(rows, n, gaussian_vector(rows * n, 0.5, rng)));
      NodeId node = ops[k].second(g, x, y, m);
      if (!g.shape(node).empty()) {
        const NodeId r = g.constant(Tensor::vector(gaussian_vector(g.shape(node)[0], 1.0, rng)));
        node = g.dot(node, r);
      }
      g.set_root(node);
      line.value = std::max(line.value, check_gradient(g, node, kFdStep));
    }
    line.pass = line.value < line.bound;
    out.push_back(line);
  }
  return out;
}

CheckLine gradient_chain_check(const WorldConfig& config, std::uint64_t seed,
                               std::size_t instances) {
  CheckLine line{"grad.chain", 0.0, kChainBound, true};
  for (std::size_t i = 0; i < instances; ++i) {
    const World world = make_world(config, derive_seed(seed, i));
    const auto gens = make_generators(world, derive_seed(seed, 1000 + i));
    const std::size_t s = i % world.source_codes.size();
    const std::size_t t = i % world.target_images.size();
    std::vector<const Embedder*> models;
    for (std::size_t k = 0; k < std::min<std::size_t>(2, world.embedders.size()); ++k) {
      models.push_back(&world.embedders[k]);
    }
    const FeatureDiff diff =
        feature_difference(world.source_images[s], world.target_images[t], *models.front());
    AttackGraph ag = build_attack_graph(world, gens, world.source_codes[s], diff,
                                        world.target_images[t], models, LossWeights{});
    line.value = std::max(line.value, check_gradient(ag.graph, ag.adv_loss, kFdStep));
    line.value = std::max(line.value, check_gradient(ag.graph, ag.stealthy_loss, kFdStep));
  }
  line.pass = line.value < line.bound;
  return line;
}

CheckLine solver_check(std::uint64_t seed, std::size_t instances, std::size_t max_dim,
                       double grid_step) {
  CheckLine line{"solver.oracle", 0.0, 1e-9, true};
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double log_lo = std::log(10.0);
  const double log_hi = std::log(static_cast<double>(std::max<std::size_t>(max_dim, 10)));
  for (std::size_t i = 0; i < instances; ++i) {
    const auto dim = static_cast<std::size_t>(std::exp(log_lo + (log_hi - log_lo) * unit(rng)));
    // Scales in [0.1, 10] keep the objective below ~1e6, where an absolute
    // 1e-9 excess is still above double resolution.
    const double scale_s = std::pow(10.0, -1.0 + 2.0 * unit(rng));
    const double scale_a = std::pow(10.0, -1.0 + 2.0 * unit(rng));
    const Vec gs = gaussian_vector(dim, scale_s, rng);
    Vec ga = gaussian_vector(dim, scale_a, rng);
    if (i % 5 == 0) {
      // nearly aligned gradients
      for (std::size_t k = 0; k < dim; ++k) ga[k] = 0.9 * gs[k] + 0.1 * ga[k];
    }
    const double c1 = 0.45 * unit(rng);
    const double c2 = 0.45 * unit(rng);
    const GradientPair pair{gs, ga};
    const TradeoffWeights w = pareto_weights(pair, c1, c2);
    const TradeoffWeights b = brute_force_weights(pair, c1, c2, grid_step);
    const double excess = pareto_objective(pair, w) - pareto_objective(pair, b);
    line.value = std::max(line.value, excess);
    if (excess > line.bound || !w.on_constrained_simplex(c1, c2)) line.pass = false;

    if (w.stealthy > c1 + 1e-9 && w.adversarial > c2 + 1e-9) {
      Vec d(dim), diff(dim);
      for (std::size_t k = 0; k < dim; ++k) {
        d[k] = w.stealthy * gs[k] + w.adversarial * ga[k];
        diff[k] = gs[k] - ga[k];
      }
      const double residual = std::fabs(dot(d, diff));
      const double allowed = 1e-6 * std::sqrt(dot(diff, diff)) * std::sqrt(dot(d, d)) + 1e-12;
      if (residual >= allowed) line.pass = false;
    }
  }
  return line;
}

std::vector<CheckLine> self_check(const WorldConfig& config, std::uint64_t seed) {
  std::vector<CheckLine> out = gradient_op_checks(seed, 5);
  out.push_back(gradient_chain_check(config, seed, 3));
  out.push_back(solver_check(seed, 200, 1000, 1e-4));
  return out;
}

}  // namespace advattr
