#pragma once

#include <span>
#include <vector>

#include "advattr/autodiff.hpp"
#include "advattr/noise_gen.hpp"
#include "advattr/pareto.hpp"
#include "advattr/world.hpp"

namespace advattr {

/// Internal weights of the stealthy loss.
struct LossWeights {
  double alpha1 = 1.0;   // cosine term
  double alpha2 = 0.01;  // norm term
  void validate() const;
};

/// Cosine similarity with the same denominator guard as the graph node;
/// zero when either vector is exactly zero.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// 1 - cos(f(adv_face), f(target)).
double adv_loss(std::span<const double> adv_face, std::span<const double> target,
                const Embedder& model);

/// Mean over attributes of alpha1 (1 - cos(z_i, v_i)) + alpha2 ||v_i||.
double stealthy_loss(const AttributeDictionary& dict, std::span<const VicinityVector> vs,
                     double alpha1, double alpha2);

/// w1 * stea + w2 * adv.
double total_loss(double stea, double adv, const TradeoffWeights& w);

NodeId adv_loss_node(Graph& graph, NodeId adv_embedding, NodeId target_embedding);
NodeId stealthy_loss_node(Graph& graph, std::span<const NodeId> directions,
                          std::span<const NodeId> vicinity, const LossWeights& weights);

/// Differentiable chain for one source-target pair:
/// diff -> noise generators -> vicinity vectors -> synthesis -> embedders -> losses.
/// Every generator's weights are graph parameters.
struct AttackGraph {
  Graph graph;
  std::vector<std::vector<NodeId>> generator_params;  // w1, b1, w2, b2 per generator
  std::vector<NodeId> noises;
  std::vector<NodeId> vicinity;
  NodeId face;
  NodeId adv_loss;       // averaged over the supplied models
  NodeId stealthy_loss;
};

AttackGraph build_attack_graph(const World& world, std::span<const NoiseGenerator> gens,
                               std::span<const double> source_code,
                               std::span<const double> diff, std::span<const double> target,
                               std::span<const Embedder* const> models,
                               const LossWeights& weights);

}  // namespace advattr
