#pragma once

#include <array>
#include <optional>
#include <span>
#include <utility>

#include "advattr/tensor.hpp"

namespace advattr {

/// Trade-off weights of the total loss: `stealthy` (w1) multiplies the
/// stealthy loss and `adversarial` (w2) the attack loss.
struct TradeoffWeights {
  double stealthy = 0.5;
  double adversarial = 0.5;

  /// Throws std::invalid_argument unless w1 + w2 = 1 and both are >= 0
  /// (tolerance 1e-9).
  void validate_simplex() const;
  /// Additionally requires w1 >= c1 and w2 >= c2 (tolerance 1e-9).
  bool on_constrained_simplex(double c1, double c2) const;
};

struct GradientPair {
  std::span<const double> stealthy;
  std::span<const double> adversarial;
};

using Gram2 = std::array<std::array<double, 2>, 2>;

/// [<gs,gs> <gs,ga>; <ga,gs> <ga,ga>].
Gram2 gram(const GradientPair& pair);

/// ||w1 gs + w2 ga||^2 evaluated through the Gram matrix.
double pareto_objective(const Gram2& g, double w1, double w2);
double pareto_objective(const GradientPair& pair, const TradeoffWeights& w);

struct KktSolution {
  double w1;  // shifted weights: w - c
  double w2;
  double lambda;
};

/// Solves [GG^T e; e^T 0] [w; lambda] = [-GG^T c; 1 - e^T c] in closed form.
/// Returns nullopt when the system is singular to working precision, which
/// happens exactly when the two gradients coincide (||gs - ga||^2 is
/// negligible relative to ||gs||^2 + ||ga||^2) or both vanish.
std::optional<KktSolution> solve_equality_kkt(const Gram2& g, double c1, double c2);
std::optional<KktSolution> solve_equality_kkt(const GradientPair& pair, double c1, double c2);

/// Euclidean projection of (w1, w2) onto {x1 + x2 = sum_target, x >= 0}.
std::pair<double, double> project_simplex(double w1, double w2, double sum_target);

/// Minimizes ||w1 gs + w2 ga||^2 over w1 + w2 = 1, w1 >= c1, w2 >= c2.
TradeoffWeights pareto_weights(const GradientPair& pair, double c1, double c2);
TradeoffWeights pareto_weights(const Gram2& g, double c1, double c2);

/// Exhaustive scan of w1 over [c1, 1 - c2] at the given resolution (the
/// upper end point is always included).
TradeoffWeights brute_force_weights(const GradientPair& pair, double c1, double c2,
                                    double resolution);

}  // namespace advattr
