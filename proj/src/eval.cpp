#include "advattr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "advattr/losses.hpp"

namespace advattr {

namespace {
constexpr std::uint64_t kTagImpostors = 29;
}

void EvalConfig::validate() const {
  if (!(far > 0.0 && far < 1.0)) throw ConfigError("eval.far must lie in (0, 1)");
  const auto needed = static_cast<std::size_t>(std::ceil(1.0 / far - 1e-9));
  if (impostor_pairs < needed) {
    throw ConfigError("eval.impostor_pairs must be at least " + std::to_string(needed) +
                      " for FAR " + std::to_string(far));
  }
}

std::vector<ImagePair> impostor_pairs(const World& world, std::size_t count) {
  Rng rng(derive_seed(world.seed, kTagImpostors));
  std::vector<ImagePair> pairs;
  pairs.reserve(count);
  const std::size_t d = world.config.latent_dim;
  for (std::size_t i = 0; i < count; ++i) {
    ImageVector a = synthesize(world.generator, gaussian_vector(d, 1.0, rng));
    ImageVector b = synthesize(world.generator, gaussian_vector(d, 1.0, rng));
    pairs.emplace_back(std::move(a), std::move(b));
  }
  return pairs;
}

double far_threshold_from_scores(std::span<const double> scores, double far) {
  if (!(far > 0.0 && far < 1.0)) throw std::invalid_argument("far must lie in (0, 1)");
  const std::size_t m = scores.size();
  const auto needed = static_cast<std::size_t>(std::ceil(1.0 / far - 1e-9));
  if (m == 0 || m < needed) {
    throw std::invalid_argument("need at least " + std::to_string(needed) +
                                " impostor scores for FAR " + std::to_string(far) + ", got " +
                                std::to_string(m));
  }
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  // Rank in [1, m]; the epsilon absorbs representation error in (1 - far) * m.
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - far) * static_cast<double>(m) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, m);
  return sorted[rank - 1];
}

double far_threshold(const Embedder& model, std::span<const ImagePair> pairs, double far) {
  std::vector<double> scores;
  scores.reserve(pairs.size());
  for (const auto& [a, b] : pairs) scores.push_back(cosine_similarity(embed(model, a), embed(model, b)));
  return far_threshold_from_scores(scores, far);
}

double attack_success_rate_from_scores(std::span<const double> scores, double tau) {
  if (scores.empty()) throw std::invalid_argument("attack_success_rate: no pairs");
  const auto hits = std::count_if(scores.begin(), scores.end(), [tau](double s) { return s > tau; });
  return 100.0 * static_cast<double>(hits) / static_cast<double>(scores.size());
}

double attack_success_rate(std::span<const ImagePair> pairs, const Embedder& model, double tau) {
  std::vector<double> scores;
  scores.reserve(pairs.size());
  for (const auto& [adv, target] : pairs) {
    scores.push_back(cosine_similarity(embed(model, target), embed(model, adv)));
  }
  return attack_success_rate_from_scores(scores, tau);
}

double mse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("mse: dimension mismatch");
  if (a.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

double EvalReport::holdout_asr() const {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& e : embedders) {
    if (e.holdout) {
      s += e.asr;
      ++n;
    }
  }
  if (n == 0) throw std::logic_error("report has no held-out embedder");
  return s / static_cast<double>(n);
}

const EmbedderResult& EvalReport::result(const std::string& name) const {
  for (const auto& e : embedders) {
    if (e.name == name) return e;
  }
  throw std::out_of_range("no result for embedder '" + name + "'");
}

double Calibration::threshold(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return tau[i];
  }
  throw std::out_of_range("no calibrated threshold for '" + name + "'");
}

Calibration calibrate(const World& world, const EvalConfig& config) {
  config.validate();
  const auto pairs = impostor_pairs(world, config.impostor_pairs);
  Calibration cal;
  for (const auto& e : world.embedders) {
    cal.names.push_back(e.name);
    cal.tau.push_back(far_threshold(e, pairs, config.far));
  }
  return cal;
}

EvalReport transfer_eval(const World& world, std::span<const NoiseGenerator> gens,
                         const TrainConfig& train, const Calibration& calibration,
                         const std::string& arm) {
  if (gens.size() != world.attributes.size()) {
    throw ShapeError("one noise generator per attribute required");
  }
  const auto training = resolve_embedders(world, train.train_embedders);
  if (training.size() >= world.embedders.size()) {
    throw ConfigError("every embedder is used for training; none left for black-box transfer");
  }

  EvalReport report;
  report.arm = arm;
  std::vector<ImagePair> attack_pairs;
  double mse_sum = 0.0;
  double stea_sum = 0.0;
  for (std::size_t s = 0; s < world.source_codes.size(); ++s) {
    for (std::size_t t = 0; t < world.target_images.size(); ++t) {
      const ImageVector& target = world.target_images[t];
      const FeatureDiff diff = feature_difference(world.source_images[s], target, *training.front());
      std::vector<NoiseVector> noises;
      for (const auto& g : gens) noises.push_back(generate_noise(g, diff));
      const auto vs = vicinity_vectors(world.attributes, noises);
      ImageVector face = adversarial_face(world, world.source_codes[s], vs);
      mse_sum += mse(world.source_images[s], face);
      stea_sum += stealthy_loss(world.attributes, vs, train.loss.alpha1, train.loss.alpha2);
      attack_pairs.emplace_back(std::move(face), target);
    }
  }
  report.pair_count = attack_pairs.size();
  report.mean_mse = mse_sum / static_cast<double>(report.pair_count);
  report.mean_stealthy_loss = stea_sum / static_cast<double>(report.pair_count);

  for (const auto& e : world.embedders) {
    EmbedderResult r;
    r.name = e.name;
    r.holdout = std::find(train.train_embedders.begin(), train.train_embedders.end(), e.name) ==
                train.train_embedders.end();
    r.tau = calibration.threshold(e.name);
    r.asr = attack_success_rate(attack_pairs, e, r.tau);
    report.embedders.push_back(std::move(r));
  }
  return report;
}

EvalReport transfer_eval(const World& world, std::span<const NoiseGenerator> gens,
                         const TrainConfig& train, const EvalConfig& config,
                         const std::string& arm) {
  return transfer_eval(world, gens, train, calibrate(world, config), arm);
}

}  // namespace advattr
