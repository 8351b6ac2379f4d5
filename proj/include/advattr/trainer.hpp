#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "advattr/attr_select.hpp"
#include "advattr/losses.hpp"
#include "advattr/noise_gen.hpp"
#include "advattr/pareto.hpp"
#include "advattr/world.hpp"

namespace advattr {

enum class OptimizerKind { Adam, Sgd };

struct TrainConfig {
  std::size_t iterations = 2000;
  double learning_rate = 1e-2;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  LossWeights loss;
  double c1 = 0.1;
  double c2 = 0.1;
  bool enable_selection = true;
  bool enable_moo = true;
  /// Weights used when the multi-objective solve is disabled.
  TradeoffWeights fixed_omega{0.5, 0.5};
  std::vector<std::string> train_embedders{"fr1", "fr2"};
  std::uint64_t seed = 0;

  void validate() const;
};

/// Adam moments for one noise generator.
struct AdamState {
  std::vector<Vec> m;
  std::vector<Vec> v;
  std::size_t steps = 0;
};

struct OptimizerState {
  std::vector<AdamState> per_generator;
  static OptimizerState fresh(std::span<const NoiseGenerator> gens);
};

/// One bias-corrected Adam step on a parameter block, in place. `step` is
/// the 1-based update count of the owning generator. `lr` may be zero.
void adam_update(std::span<double> param, std::span<const double> grad, Vec& m, Vec& v,
                 std::size_t step, double lr, double beta1, double beta2, double epsilon);

struct StepRecord {
  std::size_t iteration = 0;
  std::size_t source = 0;
  std::size_t target = 0;
  double adv_loss = 0.0;
  double stealthy_loss = 0.0;
  double total_loss = 0.0;
  /// Selected attribute; nullopt when every generator is updated.
  std::optional<std::size_t> selected;
  std::vector<double> gains;  // empty when selection is disabled
  TradeoffWeights omega;
  double grad_norm_stealthy = 0.0;
  double grad_norm_adversarial = 0.0;
};

struct TrainLog {
  std::vector<StepRecord> records;
  std::vector<std::size_t> selection_counts;
  SelectionLog selection_log() const;
};

struct SourceTargetPair {
  std::size_t source = 0;
  std::size_t target = 0;
};

/// Round-robin schedule over all (source, target) pairs, source-major.
SourceTargetPair pair_for_iteration(const World& world, std::size_t iteration);

std::vector<const Embedder*> resolve_embedders(const World& world,
                                               std::span<const std::string> names);

/// One iteration of the attack training loop. Updates the selected
/// generator (or all of them when selection is disabled) and `omega`.
/// Throws NumericError on a non-finite loss or gradient.
StepRecord train_step(const World& world, std::vector<NoiseGenerator>& gens,
                      OptimizerState& opt, SourceTargetPair pair, TradeoffWeights& omega,
                      const TrainConfig& config, std::size_t iteration = 0);

struct TrainResult {
  std::vector<NoiseGenerator> generators;
  OptimizerState optimizer;
  TrainLog log;
};

/// Generators a training run starts from, seeded from config.seed. Also the
/// untrained baseline for evaluation.
std::vector<NoiseGenerator> initial_generators(const World& world, const TrainConfig& config);

/// Runs config.iterations steps from initial_generators().
TrainResult train(const World& world, const TrainConfig& config);

}  // namespace advattr
