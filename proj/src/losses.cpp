#include "advattr/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace advattr {

void LossWeights::validate() const {
  if (!(alpha1 >= 0.0) || !(alpha2 >= 0.0)) {
    throw ConfigError("stealthy loss weights alpha1, alpha2 must be non-negative");
  }
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("cosine_similarity: length mismatch");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / (std::sqrt(aa + kNormGuard) * std::sqrt(bb + kNormGuard));
}

double adv_loss(std::span<const double> adv_face, std::span<const double> target,
                const Embedder& model) {
  return 1.0 - cosine_similarity(embed(model, adv_face), embed(model, target));
}

double stealthy_loss(const AttributeDictionary& dict, std::span<const VicinityVector> vs,
                     double alpha1, double alpha2) {
  if (vs.size() != dict.size()) throw ShapeError("stealthy_loss: vicinity count mismatch");
  if (!(alpha1 >= 0.0) || !(alpha2 >= 0.0)) throw std::invalid_argument("negative alpha");
  double total = 0.0;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const Vec& z = dict.directions[i];
    if (vs[i].size() != z.size()) throw ShapeError("stealthy_loss: dimension mismatch");
    double vv = 0.0;
    for (double x : vs[i]) vv += x * x;
    total += alpha1 * (1.0 - cosine_similarity(z, vs[i])) + alpha2 * std::sqrt(vv + kNormGuard);
  }
  return total / static_cast<double>(vs.size());
}

double total_loss(double stea, double adv, const TradeoffWeights& w) {
  w.validate_simplex();
  return w.stealthy * stea + w.adversarial * adv;
}

NodeId adv_loss_node(Graph& graph, NodeId adv_embedding, NodeId target_embedding) {
  const NodeId one = graph.constant(Tensor::scalar(1.0));
  return graph.subtract(one, graph.cosine(adv_embedding, target_embedding));
}

NodeId stealthy_loss_node(Graph& graph, std::span<const NodeId> directions,
                          std::span<const NodeId> vicinity, const LossWeights& weights) {
  if (directions.size() != vicinity.size() || directions.empty()) {
    throw ShapeError("stealthy_loss_node: need one vicinity vector per direction");
  }
  const NodeId one = graph.constant(Tensor::scalar(1.0));
  NodeId total{};
  for (std::size_t i = 0; i < directions.size(); ++i) {
    const NodeId cos_term =
        graph.scale(graph.subtract(one, graph.cosine(directions[i], vicinity[i])), weights.alpha1);
    const NodeId norm_term = graph.scale(graph.norm(vicinity[i]), weights.alpha2);
    const NodeId term = graph.add(cos_term, norm_term);
    total = i == 0 ? term : graph.add(total, term);
  }
  return graph.scale(total, 1.0 / static_cast<double>(directions.size()));
}

AttackGraph build_attack_graph(const World& world, std::span<const NoiseGenerator> gens,
                               std::span<const double> source_code,
                               std::span<const double> diff, std::span<const double> target,
                               std::span<const Embedder* const> models,
                               const LossWeights& weights) {
  if (gens.size() != world.attributes.size()) {
    throw ShapeError("one noise generator per attribute required");
  }
  if (models.empty()) throw std::invalid_argument("at least one embedder required");

  AttackGraph ag;
  Graph& g = ag.graph;
  const NodeId kappa = g.input("kappa_diff", Tensor::vector(Vec(diff.begin(), diff.end())));
  NodeId code = g.input("source_code", Tensor::vector(Vec(source_code.begin(), source_code.end())));

  std::vector<NodeId> directions;
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const auto nodes = gens[i].network().build(g, kappa, "g" + std::to_string(i), true);
    ag.generator_params.push_back(nodes.parameters);
    ag.noises.push_back(nodes.output);
    const NodeId z = g.constant(Tensor::vector(world.attributes.directions[i]));
    directions.push_back(z);
    const NodeId v = g.add(z, nodes.output);
    ag.vicinity.push_back(v);
    code = g.add(code, v);
  }
  ag.face = world.generator.net.build(g, code, "synth", false).output;

  NodeId adv{};
  for (std::size_t m = 0; m < models.size(); ++m) {
    const NodeId emb = models[m]->net.build(g, ag.face, models[m]->name, false).output;
    const NodeId target_emb = g.constant(Tensor::vector(embed(*models[m], target)));
    const NodeId loss = adv_loss_node(g, emb, target_emb);
    adv = m == 0 ? loss : g.add(adv, loss);
  }
  ag.adv_loss = g.scale(adv, 1.0 / static_cast<double>(models.size()));
  ag.stealthy_loss = stealthy_loss_node(g, directions, ag.vicinity, weights);
  g.set_root(ag.adv_loss);
  return ag;
}

}  // namespace advattr
