#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "advattr/autodiff.hpp"
#include "advattr/rng.hpp"
#include "advattr/tensor.hpp"

namespace advattr {

struct WorldConfig {
  std::size_t latent_dim = 32;
  std::size_t image_dim = 64;
  std::size_t hidden_dim = 16;
  std::size_t embed_dim = 16;
  std::size_t num_attributes = 5;
  std::size_t num_sources = 20;
  std::size_t num_targets = 4;
  std::size_t num_embedders = 3;
  /// Weight correlation between recognition models: each embedder mixes a
  /// shared family network (weight sqrt(rho)) with its own draw
  /// (weight sqrt(1 - rho)), keeping the 1/sqrt(fan_in) scale.
  double embedder_correlation = 0.9;

  void validate() const;
  bool operator==(const WorldConfig&) const = default;
};

struct DenseLayer {
  Tensor weight;  // [out, in]
  Tensor bias;    // [out]
};

/// Two dense layers with a tanh after the first and, optionally, after the
/// second. Used for every fixed network in the world and for the noise
/// generators.
class TanhMlp {
 public:
  TanhMlp() = default;
  TanhMlp(DenseLayer hidden, DenseLayer output, bool tanh_output);

  /// Gaussian weights and biases with standard deviation 1/sqrt(fan_in).
  static TanhMlp random(std::size_t in, std::size_t hidden, std::size_t out, bool tanh_output,
                        Rng& rng);

  Vec forward(std::span<const double> x) const;
  Vec hidden(std::span<const double> x) const;

  struct Nodes {
    NodeId hidden;
    NodeId output;
    std::vector<NodeId> parameters;  // w1, b1, w2, b2 when trainable
  };
  /// Appends the network to `graph`. Weights become parameters named
  /// `<prefix>.w1` ... `<prefix>.b2` when `trainable`, constants otherwise.
  Nodes build(Graph& graph, NodeId x, std::string_view prefix, bool trainable) const;

  const DenseLayer& hidden_layer() const { return hidden_; }
  const DenseLayer& output_layer() const { return output_; }
  bool tanh_output() const { return tanh_output_; }
  std::size_t in_dim() const { return hidden_.weight.shape()[1]; }
  std::size_t hidden_dim() const { return hidden_.weight.shape()[0]; }
  std::size_t out_dim() const { return output_.weight.shape()[0]; }

  /// Parameters in the fixed order w1, b1, w2, b2.
  std::vector<Tensor> parameters() const;
  void set_parameters(std::vector<Tensor> params);

  void hash_into(Fnv1a& h) const;

 private:
  DenseLayer hidden_;
  DenseLayer output_;
  bool tanh_output_ = false;
};

/// Fixed latent-to-image map.
struct SynthesisGenerator {
  TanhMlp net;
  std::uint64_t seed = 0;
};

/// Fixed image-to-latent map.
struct Encoder {
  TanhMlp net;
};

struct AttributeDictionary {
  std::vector<Vec> directions;  // unit norm, pairwise orthogonal
  std::vector<std::string> names;
  std::size_t size() const { return directions.size(); }
};

/// Recognition model stand-in: image -> hidden (middle features) -> embedding.
struct Embedder {
  std::string name;
  TanhMlp net;
  std::uint64_t seed = 0;
};

struct World {
  WorldConfig config;
  std::uint64_t seed = 0;
  SynthesisGenerator generator;
  Encoder encoder;
  AttributeDictionary attributes;
  std::vector<Embedder> embedders;
  std::vector<LatentCode> source_codes;
  std::vector<ImageVector> source_images;  // synthesize(source_code)
  std::vector<ImageVector> target_images;

  const Embedder& embedder(std::string_view name) const;
  std::uint64_t checksum() const;
};

World make_world(const WorldConfig& config, std::uint64_t seed);

ImageVector synthesize(const SynthesisGenerator& gen, std::span<const double> code);
LatentCode encode(const Encoder& enc, std::span<const double> image);
Embedding embed(const Embedder& model, std::span<const double> image);
FeatureVector middle_features(const Embedder& model, std::span<const double> image);

/// Modified Gram-Schmidt (two passes) on seeded Gaussian draws.
std::vector<Vec> random_orthonormal(std::size_t count, std::size_t dim, Rng& rng);

}  // namespace advattr
