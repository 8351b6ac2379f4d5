#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "advattr/world.hpp"

namespace advattr {

using FeatureDiff = Vec;
using NoiseVector = Vec;
using VicinityVector = Vec;

/// Adversarial noise generator for one attribute: feature difference (h) ->
/// tanh hidden (h) -> affine output in latent space (d).
class NoiseGenerator {
 public:
  NoiseGenerator() = default;
  NoiseGenerator(std::size_t attribute, TanhMlp net);

  static NoiseGenerator random(std::size_t attribute, std::size_t feature_dim,
                               std::size_t latent_dim, std::uint64_t seed);
  /// Generator whose every parameter is zero, so it always emits zero noise.
  static NoiseGenerator zeros(std::size_t attribute, std::size_t feature_dim,
                              std::size_t latent_dim);

  std::size_t attribute() const { return attribute_; }
  std::size_t update_count() const { return updates_; }
  const TanhMlp& network() const { return net_; }
  std::size_t feature_dim() const { return net_.in_dim(); }
  std::size_t latent_dim() const { return net_.out_dim(); }

  std::vector<Tensor> parameters() const { return net_.parameters(); }
  /// Replaces the parameters and counts one update. Only the trainer calls this.
  void apply_update(std::vector<Tensor> params);
  /// Restores parameters and counter from a checkpoint.
  void restore(std::vector<Tensor> params, std::size_t updates);

  std::uint64_t checksum() const;

 private:
  std::size_t attribute_ = 0;
  TanhMlp net_;
  std::size_t updates_ = 0;
};

/// Elementwise |f_m(source) - f_m(target)| at the model's middle layer.
FeatureDiff feature_difference(std::span<const double> source, std::span<const double> target,
                               const Embedder& model);

NoiseVector generate_noise(const NoiseGenerator& gen, std::span<const double> diff);

/// v_i = z_i + n_i for every attribute.
std::vector<VicinityVector> vicinity_vectors(const AttributeDictionary& dict,
                                             std::span<const NoiseVector> noises);

/// synthesize(code + sum_i v_i).
ImageVector adversarial_face(const World& world, std::span<const double> source_code,
                             std::span<const VicinityVector> vs);

std::vector<NoiseGenerator> make_generators(const World& world, std::uint64_t seed);
std::vector<NoiseGenerator> make_zero_generators(const World& world);

}  // namespace advattr
