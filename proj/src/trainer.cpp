#include "advattr/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace advattr {

namespace {

constexpr std::uint64_t kTagGenerators = 17;

double l2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

void TrainConfig::validate() const {
  if (iterations < 1) throw ConfigError("train.iterations must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("train.learning_rate must be > 0");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
    throw ConfigError("Adam hyperparameters need 0 <= beta < 1 and epsilon > 0");
  }
  loss.validate();
  if (!(c1 >= 0.0) || !(c2 >= 0.0) || !(c1 + c2 < 1.0)) {
    throw ConfigError("train.c1, train.c2 must be >= 0 with c1 + c2 < 1");
  }
  if (!enable_moo) {
    try {
      fixed_omega.validate_simplex();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("train.fixed_omega: ") + e.what());
    }
  }
  if (train_embedders.size() < 2) {
    throw ConfigError("train.embedders must name at least two training embedders");
  }
  for (std::size_t i = 0; i < train_embedders.size(); ++i) {
    for (std::size_t k = i + 1; k < train_embedders.size(); ++k) {
      if (train_embedders[i] == train_embedders[k]) {
        throw ConfigError("train.embedders lists '" + train_embedders[i] + "' twice");
      }
    }
  }
}

OptimizerState OptimizerState::fresh(std::span<const NoiseGenerator> gens) {
  OptimizerState s;
  for (const auto& g : gens) {
    AdamState a;
    for (const auto& p : g.parameters()) {
      a.m.emplace_back(p.size(), 0.0);
      a.v.emplace_back(p.size(), 0.0);
    }
    s.per_generator.push_back(std::move(a));
  }
  return s;
}

void adam_update(std::span<double> param, std::span<const double> grad, Vec& m, Vec& v,
                 std::size_t step, double lr, double beta1, double beta2, double epsilon) {
  if (param.size() != grad.size() || m.size() != param.size() || v.size() != param.size()) {
    throw ShapeError("adam_update: parameter, gradient and moment sizes differ");
  }
  if (step < 1) throw std::invalid_argument("adam_update: step count starts at 1");
  if (!(lr >= 0.0)) throw std::invalid_argument("adam_update: negative learning rate");
  const double t = static_cast<double>(step);
  const double bc1 = 1.0 - std::pow(beta1, t);
  const double bc2 = 1.0 - std::pow(beta2, t);
  for (std::size_t k = 0; k < param.size(); ++k) {
    m[k] = beta1 * m[k] + (1.0 - beta1) * grad[k];
    v[k] = beta2 * v[k] + (1.0 - beta2) * grad[k] * grad[k];
    const double m_hat = m[k] / bc1;
    const double v_hat = v[k] / bc2;
    param[k] -= lr * m_hat / (std::sqrt(v_hat) + epsilon);
  }
}

SelectionLog TrainLog::selection_log() const {
  SelectionLog log(selection_counts.size());
  for (const auto& r : records) {
    if (r.selected) log.record({r.iteration, r.gains, *r.selected});
  }
  return log;
}

SourceTargetPair pair_for_iteration(const World& world, std::size_t iteration) {
  const std::size_t targets = world.target_images.size();
  const std::size_t total = world.source_codes.size() * targets;
  const std::size_t p = iteration % total;
  return {p / targets, p % targets};
}

std::vector<const Embedder*> resolve_embedders(const World& world,
                                               std::span<const std::string> names) {
  std::vector<const Embedder*> out;
  for (const auto& n : names) out.push_back(&world.embedder(n));
  return out;
}

StepRecord train_step(const World& world, std::vector<NoiseGenerator>& gens,
                      OptimizerState& opt, SourceTargetPair pair, TradeoffWeights& omega,
                      const TrainConfig& config, std::size_t iteration) {
  if (pair.source >= world.source_codes.size() || pair.target >= world.target_images.size()) {
    throw std::out_of_range("source/target pair outside the world");
  }
  if (gens.size() != world.attributes.size() || opt.per_generator.size() != gens.size()) {
    throw ShapeError("generator / optimizer state count must equal the attribute count");
  }
  const auto models = resolve_embedders(world, config.train_embedders);
  if (models.empty()) throw ConfigError("no training embedders");

  const LatentCode& code = world.source_codes[pair.source];
  const ImageVector& source = world.source_images[pair.source];
  const ImageVector& target = world.target_images[pair.target];

  StepRecord rec;
  rec.iteration = iteration;
  rec.source = pair.source;
  rec.target = pair.target;

  const FeatureDiff diff = feature_difference(source, target, *models.front());
  std::vector<NoiseVector> noises;
  noises.reserve(gens.size());
  for (const auto& g : gens) noises.push_back(generate_noise(g, diff));
  const auto vs = vicinity_vectors(world.attributes, noises);

  std::vector<std::size_t> update_set;
  if (config.enable_selection) {
    const GainContext ctx{world, code, target, vs, models};
    rec.gains = marginal_gains(ctx);
    rec.selected = select_attribute(rec.gains);
    update_set = {*rec.selected};
  } else {
    for (std::size_t i = 0; i < gens.size(); ++i) update_set.push_back(i);
  }

  AttackGraph ag = build_attack_graph(world, gens, code, diff, target, models, config.loss);
  ag.graph.forward();
  rec.adv_loss = ag.graph.value_span(ag.adv_loss)[0];
  rec.stealthy_loss = ag.graph.value_span(ag.stealthy_loss)[0];
  const GradientBundle grad_adv = ag.graph.backward(ag.adv_loss);
  const GradientBundle grad_stea = ag.graph.backward(ag.stealthy_loss);

  Vec g_stea, g_adv;
  for (std::size_t j : update_set) {
    for (NodeId p : ag.generator_params[j]) {
      const auto& s = grad_stea.at(p).values();
      const auto& a = grad_adv.at(p).values();
      g_stea.insert(g_stea.end(), s.begin(), s.end());
      g_adv.insert(g_adv.end(), a.begin(), a.end());
    }
  }
  require_finite(g_stea, "stealthy-loss gradient");
  require_finite(g_adv, "adversarial-loss gradient");
  rec.grad_norm_stealthy = l2(g_stea);
  rec.grad_norm_adversarial = l2(g_adv);

  omega = config.enable_moo ? pareto_weights(GradientPair{g_stea, g_adv}, config.c1, config.c2)
                            : config.fixed_omega;
  rec.omega = omega;
  rec.total_loss = total_loss(rec.stealthy_loss, rec.adv_loss, omega);
  if (!std::isfinite(rec.total_loss)) throw NumericError("non-finite total loss");

  std::size_t offset = 0;
  for (std::size_t j : update_set) {
    std::vector<Tensor> params = gens[j].parameters();
    AdamState& state = opt.per_generator[j];
    ++state.steps;
    std::vector<Tensor> updated;
    for (std::size_t k = 0; k < params.size(); ++k) {
      Vec values = params[k].values();
      Vec combined(values.size());
      for (std::size_t e = 0; e < values.size(); ++e) {
        combined[e] = omega.stealthy * g_stea[offset + e] + omega.adversarial * g_adv[offset + e];
      }
      offset += values.size();
      if (config.optimizer == OptimizerKind::Adam) {
        adam_update(values, combined, state.m[k], state.v[k], state.steps, config.learning_rate,
                    config.beta1, config.beta2, config.epsilon);
      } else {
        for (std::size_t e = 0; e < values.size(); ++e) {
          values[e] -= config.learning_rate * combined[e];
        }
      }
      updated.emplace_back(params[k].shape(), std::move(values));
    }
    gens[j].apply_update(std::move(updated));
  }
  return rec;
}

std::vector<NoiseGenerator> initial_generators(const World& world, const TrainConfig& config) {
  return make_generators(world, derive_seed(config.seed, kTagGenerators));
}

TrainResult train(const World& world, const TrainConfig& config) {
  config.validate();
  resolve_embedders(world, config.train_embedders);

  TrainResult result;
  result.generators = initial_generators(world, config);
  result.optimizer = OptimizerState::fresh(result.generators);
  result.log.selection_counts.assign(world.attributes.size(), 0);
  result.log.records.reserve(config.iterations);

  TradeoffWeights omega = config.enable_moo ? TradeoffWeights{0.5, 0.5} : config.fixed_omega;
  for (std::size_t t = 0; t < config.iterations; ++t) {
    StepRecord rec = train_step(world, result.generators, result.optimizer,
                                pair_for_iteration(world, t), omega, config, t);
    if (rec.selected) ++result.log.selection_counts[*rec.selected];
    result.log.records.push_back(std::move(rec));
  }
  return result;
}

}  // namespace advattr
