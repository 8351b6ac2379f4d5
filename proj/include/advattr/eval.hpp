#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "advattr/noise_gen.hpp"
#include "advattr/trainer.hpp"
#include "advattr/world.hpp"

namespace advattr {

struct EvalConfig {
  double far = 0.01;
  std::size_t impostor_pairs = 500;
  void validate() const;
};

using ImagePair = std::pair<ImageVector, ImageVector>;

/// Seeded cross-identity pairs: two independent random latent codes,
/// each synthesized through the world generator.
std::vector<ImagePair> impostor_pairs(const World& world, std::size_t count);

/// Order statistic at rank ceil((1 - far) * M) of the sorted scores: the
/// smallest score t such that at most far * M scores exceed t.
double far_threshold_from_scores(std::span<const double> scores, double far);
double far_threshold(const Embedder& model, std::span<const ImagePair> pairs, double far);

/// Percentage of scores strictly greater than tau.
double attack_success_rate_from_scores(std::span<const double> scores, double tau);
/// Pairs are (adversarial face, target).
double attack_success_rate(std::span<const ImagePair> pairs, const Embedder& model, double tau);

double mse(std::span<const double> a, std::span<const double> b);

struct EmbedderResult {
  std::string name;
  bool holdout = false;
  double tau = 0.0;
  double asr = 0.0;
};

struct EvalReport {
  std::string arm;
  std::vector<EmbedderResult> embedders;
  double mean_mse = 0.0;
  double mean_stealthy_loss = 0.0;
  std::size_t pair_count = 0;

  /// Mean ASR over held-out embedders.
  double holdout_asr() const;
  const EmbedderResult& result(const std::string& name) const;
};

/// Per-embedder FAR thresholds, computed once per world.
struct Calibration {
  std::vector<std::string> names;
  std::vector<double> tau;
  double threshold(const std::string& name) const;
};

Calibration calibrate(const World& world, const EvalConfig& config);

/// Forward-only evaluation of every source-target pair against every
/// embedder. Embedders named in train.train_embedders are marked as
/// training models; the rest are held out.
EvalReport transfer_eval(const World& world, std::span<const NoiseGenerator> gens,
                         const TrainConfig& train, const Calibration& calibration,
                         const std::string& arm);
EvalReport transfer_eval(const World& world, std::span<const NoiseGenerator> gens,
                         const TrainConfig& train, const EvalConfig& config,
                         const std::string& arm);

}  // namespace advattr
