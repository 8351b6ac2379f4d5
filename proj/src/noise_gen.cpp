#include "advattr/noise_gen.hpp"

#include <cmath>

namespace advattr {

NoiseGenerator::NoiseGenerator(std::size_t attribute, TanhMlp net)
    : attribute_(attribute), net_(std::move(net)) {
  if (net_.tanh_output()) throw ShapeError("noise generator output layer must be affine");
}

NoiseGenerator NoiseGenerator::random(std::size_t attribute, std::size_t feature_dim,
                                      std::size_t latent_dim, std::uint64_t seed) {
  Rng rng(seed);
  return NoiseGenerator(attribute,
                        TanhMlp::random(feature_dim, feature_dim, latent_dim, false, rng));
}

NoiseGenerator NoiseGenerator::zeros(std::size_t attribute, std::size_t feature_dim,
                                     std::size_t latent_dim) {
  DenseLayer h{Tensor::zeros({feature_dim, feature_dim}), Tensor::zeros({feature_dim})};
  DenseLayer o{Tensor::zeros({latent_dim, feature_dim}), Tensor::zeros({latent_dim})};
  return NoiseGenerator(attribute, TanhMlp(std::move(h), std::move(o), false));
}

void NoiseGenerator::apply_update(std::vector<Tensor> params) {
  net_.set_parameters(std::move(params));
  ++updates_;
}

void NoiseGenerator::restore(std::vector<Tensor> params, std::size_t updates) {
  net_.set_parameters(std::move(params));
  updates_ = updates;
}

std::uint64_t NoiseGenerator::checksum() const {
  Fnv1a h;
  h.u64(attribute_);
  net_.hash_into(h);
  return h.digest();
}

FeatureDiff feature_difference(std::span<const double> source, std::span<const double> target,
                               const Embedder& model) {
  const Vec a = middle_features(model, source);
  const Vec b = middle_features(model, target);
  FeatureDiff out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::fabs(a[i] - b[i]);
  return out;
}

NoiseVector generate_noise(const NoiseGenerator& gen, std::span<const double> diff) {
  return gen.network().forward(diff);
}

std::vector<VicinityVector> vicinity_vectors(const AttributeDictionary& dict,
                                             std::span<const NoiseVector> noises) {
  if (noises.size() != dict.size()) {
    throw ShapeError("expected " + std::to_string(dict.size()) + " noise vectors, got " +
                     std::to_string(noises.size()));
  }
  std::vector<VicinityVector> out;
  out.reserve(noises.size());
  for (std::size_t i = 0; i < noises.size(); ++i) {
    const Vec& z = dict.directions[i];
    if (noises[i].size() != z.size()) {
      throw ShapeError("noise " + std::to_string(i) + " has dimension " +
                       std::to_string(noises[i].size()) + ", expected " +
                       std::to_string(z.size()));
    }
    Vec v(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) v[k] = z[k] + noises[i][k];
    out.push_back(std::move(v));
  }
  return out;
}

ImageVector adversarial_face(const World& world, std::span<const double> source_code,
                             std::span<const VicinityVector> vs) {
  if (vs.size() != world.attributes.size()) {
    throw ShapeError("expected " + std::to_string(world.attributes.size()) +
                     " vicinity vectors, got " + std::to_string(vs.size()));
  }
  Vec code(source_code.begin(), source_code.end());
  for (const auto& v : vs) {
    if (v.size() != code.size()) throw ShapeError("vicinity vector dimension mismatch");
    for (std::size_t k = 0; k < code.size(); ++k) code[k] += v[k];
  }
  return synthesize(world.generator, code);
}

std::vector<NoiseGenerator> make_generators(const World& world, std::uint64_t seed) {
  std::vector<NoiseGenerator> gens;
  for (std::size_t i = 0; i < world.attributes.size(); ++i) {
    gens.push_back(NoiseGenerator::random(i, world.config.hidden_dim, world.config.latent_dim,
                                          derive_seed(seed, 1000 + i)));
  }
  return gens;
}

std::vector<NoiseGenerator> make_zero_generators(const World& world) {
  std::vector<NoiseGenerator> gens;
  for (std::size_t i = 0; i < world.attributes.size(); ++i) {
    gens.push_back(NoiseGenerator::zeros(i, world.config.hidden_dim, world.config.latent_dim));
  }
  return gens;
}

}  // namespace advattr
