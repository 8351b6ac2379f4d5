#include "advattr/pareto.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace advattr {

namespace {

constexpr double kSimplexTol = 1e-9;
constexpr double kSingularRatio = 1e-12;

void check_bounds(double c1, double c2) {
  if (!(c1 >= 0.0) || !(c2 >= 0.0) || !(c1 + c2 < 1.0)) {
    throw std::invalid_argument("bounds must satisfy c1, c2 >= 0 and c1 + c2 < 1 (got c1=" +
                                std::to_string(c1) + ", c2=" + std::to_string(c2) + ")");
  }
}

}  // namespace

void TradeoffWeights::validate_simplex() const {
  if (!std::isfinite(stealthy) || !std::isfinite(adversarial) ||
      std::fabs(stealthy + adversarial - 1.0) > kSimplexTol || stealthy < -kSimplexTol ||
      adversarial < -kSimplexTol) {
    throw std::invalid_argument("trade-off weights (" + std::to_string(stealthy) + ", " +
                                std::to_string(adversarial) + ") are not on the simplex");
  }
}

bool TradeoffWeights::on_constrained_simplex(double c1, double c2) const {
  return std::isfinite(stealthy) && std::isfinite(adversarial) &&
         std::fabs(stealthy + adversarial - 1.0) <= kSimplexTol &&
         stealthy >= c1 - kSimplexTol && adversarial >= c2 - kSimplexTol;
}

Gram2 gram(const GradientPair& pair) {
  if (pair.stealthy.size() != pair.adversarial.size()) {
    throw ShapeError("gradient pair length mismatch: " + std::to_string(pair.stealthy.size()) +
                     " vs " + std::to_string(pair.adversarial.size()));
  }
  double ss = 0.0, sa = 0.0, aa = 0.0;
  for (std::size_t i = 0; i < pair.stealthy.size(); ++i) {
    const double s = pair.stealthy[i];
    const double a = pair.adversarial[i];
    ss += s * s;
    sa += s * a;
    aa += a * a;
  }
  return {{{ss, sa}, {sa, aa}}};
}

double pareto_objective(const Gram2& g, double w1, double w2) {
  return w1 * w1 * g[0][0] + 2.0 * w1 * w2 * g[0][1] + w2 * w2 * g[1][1];
}

double pareto_objective(const GradientPair& pair, const TradeoffWeights& w) {
  return pareto_objective(gram(pair), w.stealthy, w.adversarial);
}

std::optional<KktSolution> solve_equality_kkt(const Gram2& g, double c1, double c2) {
  check_bounds(c1, c2);
  const double a = g[0][0], b = g[0][1], d = g[1][1];
  // M = [a b 1; b d 1; 1 1 0], det M = -(a - 2b + d) = -||gs - ga||^2.
  const double spread = a - 2.0 * b + d;
  const double scale = a + d;
  if (scale == 0.0 || !(spread > kSingularRatio * scale)) return std::nullopt;

  const double det = -spread;
  // right-hand side [-(Gc)_1, -(Gc)_2, 1 - c1 - c2]
  const double r1 = -(a * c1 + b * c2);
  const double r2 = -(b * c1 + d * c2);
  const double r3 = 1.0 - c1 - c2;

  // Cramer's rule on the 3x3 system.
  const double det1 = r1 * (0.0 - 1.0) - b * (0.0 - r3) + 1.0 * (r2 - d * r3);
  const double det2 = a * (r2 * 0.0 - r3) - r1 * (b * 0.0 - 1.0) + 1.0 * (b * r3 - r2);
  const double det3 = a * (d * r3 - r2) - b * (b * r3 - r2) + r1 * (b - d);
  return KktSolution{det1 / det, det2 / det, det3 / det};
}

std::optional<KktSolution> solve_equality_kkt(const GradientPair& pair, double c1, double c2) {
  return solve_equality_kkt(gram(pair), c1, c2);
}

std::pair<double, double> project_simplex(double w1, double w2, double sum_target) {
  if (!(sum_target > 0.0)) throw std::invalid_argument("project_simplex: sum_target must be > 0");
  const double shift = 0.5 * (sum_target - w1 - w2);
  const double x1 = w1 + shift;
  const double x2 = w2 + shift;
  if (x1 < 0.0) return {0.0, sum_target};
  if (x2 < 0.0) return {sum_target, 0.0};
  return {x1, x2};
}

TradeoffWeights pareto_weights(const Gram2& g, double c1, double c2) {
  check_bounds(c1, c2);
  const double budget = 1.0 - c1 - c2;
  const auto kkt = solve_equality_kkt(g, c1, c2);
  if (!kkt) {
    const double mid = 0.5 * (c1 + 1.0 - c2);
    return {mid, 1.0 - mid};
  }
  const double w1 = project_simplex(kkt->w1, kkt->w2, budget).first + c1;
  return {w1, 1.0 - w1};
}

TradeoffWeights pareto_weights(const GradientPair& pair, double c1, double c2) {
  return pareto_weights(gram(pair), c1, c2);
}

TradeoffWeights brute_force_weights(const GradientPair& pair, double c1, double c2,
                                    double resolution) {
  if (!(resolution > 0.0)) throw std::invalid_argument("resolution must be positive");
  if (!(c1 >= 0.0) || !(c2 >= 0.0) || c1 > 1.0 - c2) {
    throw std::invalid_argument("empty feasible interval for w1");
  }
  const Gram2 g = gram(pair);
  const double hi = 1.0 - c2;
  double best_w1 = c1;
  double best = pareto_objective(g, c1, 1.0 - c1);
  const auto steps = static_cast<std::size_t>(std::floor((hi - c1) / resolution));
  for (std::size_t k = 1; k <= steps + 1; ++k) {
    const double w1 = k <= steps ? c1 + static_cast<double>(k) * resolution : hi;
    const double obj = pareto_objective(g, w1, 1.0 - w1);
    if (obj < best) {
      best = obj;
      best_w1 = w1;
    }
  }
  return {best_w1, 1.0 - best_w1};
}

}  // namespace advattr
