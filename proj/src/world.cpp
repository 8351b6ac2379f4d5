#include "advattr/world.hpp"

#include <cmath>
#include <stdexcept>

namespace advattr {

namespace {

constexpr std::uint64_t kTagGenerator = 1;
constexpr std::uint64_t kTagEncoder = 2;
constexpr std::uint64_t kTagAttributes = 3;
constexpr std::uint64_t kTagEmbedderBase = 100;
constexpr std::uint64_t kTagSources = 4;
constexpr std::uint64_t kTagTargets = 5;
constexpr std::uint64_t kTagEmbedderFamily = 6;

const char* const kAttributeNames[] = {"smiling", "eyeglasses", "mustache", "blurry", "pale_skin"};

Vec affine(const DenseLayer& layer, std::span<const double> x, bool apply_tanh) {
  const std::size_t rows = layer.weight.shape()[0];
  const std::size_t cols = layer.weight.shape()[1];
  if (x.size() != cols) {
    throw ShapeError("dense layer expects input of length " + std::to_string(cols) + ", got " +
                     std::to_string(x.size()));
  }
  const double* w = layer.weight.data().data();
  Vec out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    const double* row = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) s += row[c] * x[c];
    s += layer.bias[r];
    out[r] = apply_tanh ? std::tanh(s) : s;
  }
  return out;
}

DenseLayer random_layer(std::size_t in, std::size_t out, Rng& rng) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(in));
  Tensor w = Tensor::matrix(out, in, gaussian_vector(out * in, scale, rng));
  Tensor b = Tensor::vector(gaussian_vector(out, scale, rng));
  return {std::move(w), std::move(b)};
}

Tensor mix(const Tensor& shared, const Tensor& own, double rho) {
  const double a = std::sqrt(rho);
  const double b = std::sqrt(1.0 - rho);
  Vec out(shared.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * shared[i] + b * own[i];
  return Tensor(shared.shape(), std::move(out));
}

TanhMlp mix(const TanhMlp& shared, const TanhMlp& own, double rho) {
  return TanhMlp({mix(shared.hidden_layer().weight, own.hidden_layer().weight, rho),
                  mix(shared.hidden_layer().bias, own.hidden_layer().bias, rho)},
                 {mix(shared.output_layer().weight, own.output_layer().weight, rho),
                  mix(shared.output_layer().bias, own.output_layer().bias, rho)},
                 own.tanh_output());
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

void WorldConfig::validate() const {
  const std::pair<const char*, std::size_t> fields[] = {
      {"latent_dim", latent_dim},   {"image_dim", image_dim},
      {"hidden_dim", hidden_dim},   {"embed_dim", embed_dim},
      {"num_attributes", num_attributes}, {"num_sources", num_sources},
      {"num_targets", num_targets}, {"num_embedders", num_embedders},
  };
  for (const auto& [name, value] : fields) {
    if (value < 1) throw ConfigError(std::string("world.") + name + " must be >= 1");
  }
  if (!(embedder_correlation >= 0.0 && embedder_correlation < 1.0)) {
    throw ConfigError("world.embedder_correlation must lie in [0, 1)");
  }
  if (num_attributes > latent_dim) {
    throw ConfigError("world.num_attributes (" + std::to_string(num_attributes) +
                      ") exceeds world.latent_dim (" + std::to_string(latent_dim) +
                      "): cannot build that many orthonormal directions");
  }
}

// ---------------------------------------------------------------------------
// TanhMlp

TanhMlp::TanhMlp(DenseLayer hidden, DenseLayer output, bool tanh_output)
    : hidden_(std::move(hidden)), output_(std::move(output)), tanh_output_(tanh_output) {
  if (hidden_.weight.rank() != 2 || output_.weight.rank() != 2 ||
      hidden_.bias.shape() != std::vector<std::size_t>{hidden_.weight.shape()[0]} ||
      output_.bias.shape() != std::vector<std::size_t>{output_.weight.shape()[0]} ||
      output_.weight.shape()[1] != hidden_.weight.shape()[0]) {
    throw ShapeError("inconsistent layer shapes in TanhMlp");
  }
}

TanhMlp TanhMlp::random(std::size_t in, std::size_t hidden, std::size_t out, bool tanh_output,
                        Rng& rng) {
  DenseLayer h = random_layer(in, hidden, rng);
  DenseLayer o = random_layer(hidden, out, rng);
  return TanhMlp(std::move(h), std::move(o), tanh_output);
}

Vec TanhMlp::hidden(std::span<const double> x) const { return affine(hidden_, x, true); }

Vec TanhMlp::forward(std::span<const double> x) const {
  const Vec h = hidden(x);
  return affine(output_, h, tanh_output_);
}

TanhMlp::Nodes TanhMlp::build(Graph& graph, NodeId x, std::string_view prefix,
                              bool trainable) const {
  auto leaf = [&](const char* suffix, const Tensor& t) {
    return trainable ? graph.parameter(std::string(prefix) + "." + suffix, t) : graph.constant(t);
  };
  Nodes nodes;
  const NodeId w1 = leaf("w1", hidden_.weight);
  const NodeId b1 = leaf("b1", hidden_.bias);
  const NodeId w2 = leaf("w2", output_.weight);
  const NodeId b2 = leaf("b2", output_.bias);
  if (trainable) nodes.parameters = {w1, b1, w2, b2};
  nodes.hidden = graph.tanh(graph.add(graph.matvec(w1, x), b1));
  nodes.output = graph.add(graph.matvec(w2, nodes.hidden), b2);
  if (tanh_output_) nodes.output = graph.tanh(nodes.output);
  return nodes;
}

std::vector<Tensor> TanhMlp::parameters() const {
  return {hidden_.weight, hidden_.bias, output_.weight, output_.bias};
}

void TanhMlp::set_parameters(std::vector<Tensor> params) {
  if (params.size() != 4) throw ShapeError("TanhMlp expects 4 parameter tensors");
  const auto current = parameters();
  for (std::size_t i = 0; i < 4; ++i) {
    if (params[i].shape() != current[i].shape()) {
      throw ShapeError("parameter " + std::to_string(i) + ": expected shape " +
                       shape_string(current[i].shape()) + ", got " +
                       shape_string(params[i].shape()));
    }
  }
  hidden_ = {std::move(params[0]), std::move(params[1])};
  output_ = {std::move(params[2]), std::move(params[3])};
}

void TanhMlp::hash_into(Fnv1a& h) const {
  for (const auto& t : parameters()) h.doubles(t.data());
  h.u64(tanh_output_ ? 1 : 0);
}

// ---------------------------------------------------------------------------
// World

const Embedder& World::embedder(std::string_view name) const {
  for (const auto& e : embedders) {
    if (e.name == name) return e;
  }
  throw ConfigError("unknown embedder '" + std::string(name) + "'");
}

std::uint64_t World::checksum() const {
  Fnv1a h;
  generator.net.hash_into(h);
  encoder.net.hash_into(h);
  for (const auto& z : attributes.directions) h.doubles(z);
  for (const auto& e : embedders) {
    h.text(e.name);
    e.net.hash_into(h);
  }
  for (const auto& v : source_codes) h.doubles(v);
  for (const auto& v : source_images) h.doubles(v);
  for (const auto& v : target_images) h.doubles(v);
  return h.digest();
}

std::vector<Vec> random_orthonormal(std::size_t count, std::size_t dim, Rng& rng) {
  if (count > dim) {
    throw ConfigError("cannot build " + std::to_string(count) + " orthonormal directions in " +
                      std::to_string(dim) + " dimensions");
  }
  std::vector<Vec> basis;
  basis.reserve(count);
  while (basis.size() < count) {
    Vec v = gaussian_vector(dim, 1.0, rng);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis) {
        const double proj = dot(v, q);
        for (std::size_t k = 0; k < dim; ++k) v[k] -= proj * q[k];
      }
    }
    const double n = std::sqrt(dot(v, v));
    if (n < 1e-8) continue;  // numerically dependent draw; resample
    for (auto& x : v) x /= n;
    basis.push_back(std::move(v));
  }
  return basis;
}

World make_world(const WorldConfig& config, std::uint64_t seed) {
  config.validate();
  World w;
  w.config = config;
  w.seed = seed;

  {
    const std::uint64_t s = derive_seed(seed, kTagGenerator);
    Rng rng(s);
    w.generator.net = TanhMlp::random(config.latent_dim, config.image_dim, config.image_dim,
                                      /*tanh_output=*/true, rng);
    w.generator.seed = s;
  }
  {
    Rng rng(derive_seed(seed, kTagEncoder));
    w.encoder.net = TanhMlp::random(config.image_dim, config.latent_dim, config.latent_dim,
                                    /*tanh_output=*/false, rng);
  }
  {
    Rng rng(derive_seed(seed, kTagAttributes));
    w.attributes.directions = random_orthonormal(config.num_attributes, config.latent_dim, rng);
    for (std::size_t i = 0; i < config.num_attributes; ++i) {
      w.attributes.names.push_back(i < std::size(kAttributeNames) ? kAttributeNames[i]
                                                                  : "attr" + std::to_string(i));
    }
  }
  Rng family_rng(derive_seed(seed, kTagEmbedderFamily));
  const TanhMlp family = TanhMlp::random(config.image_dim, config.hidden_dim, config.embed_dim,
                                         /*tanh_output=*/false, family_rng);
  for (std::size_t k = 0; k < config.num_embedders; ++k) {
    const std::uint64_t s = derive_seed(seed, kTagEmbedderBase + k);
    Rng rng(s);
    Embedder e;
    e.name = "fr" + std::to_string(k + 1);
    e.net = mix(family,
                TanhMlp::random(config.image_dim, config.hidden_dim, config.embed_dim, false, rng),
                config.embedder_correlation);
    e.seed = s;
    w.embedders.push_back(std::move(e));
  }
  {
    // Source identities: a random face, inverted through the encoder, then
    // re-synthesized so the source image is exactly what the generator
    // produces from the source code.
    Rng rng(derive_seed(seed, kTagSources));
    for (std::size_t i = 0; i < config.num_sources; ++i) {
      const Vec raw = gaussian_vector(config.latent_dim, 1.0, rng);
      LatentCode code = encode(w.encoder, synthesize(w.generator, raw));
      w.source_images.push_back(synthesize(w.generator, code));
      w.source_codes.push_back(std::move(code));
    }
  }
  {
    Rng rng(derive_seed(seed, kTagTargets));
    for (std::size_t i = 0; i < config.num_targets; ++i) {
      w.target_images.push_back(
          synthesize(w.generator, gaussian_vector(config.latent_dim, 1.0, rng)));
    }
  }
  return w;
}

ImageVector synthesize(const SynthesisGenerator& gen, std::span<const double> code) {
  return gen.net.forward(code);
}

LatentCode encode(const Encoder& enc, std::span<const double> image) {
  return enc.net.forward(image);
}

Embedding embed(const Embedder& model, std::span<const double> image) {
  return model.net.forward(image);
}

FeatureVector middle_features(const Embedder& model, std::span<const double> image) {
  return model.net.hidden(image);
}

}  // namespace advattr
