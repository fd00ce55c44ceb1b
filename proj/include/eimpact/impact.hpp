#pragma once
// Emotion propagation to the root: per-node impact, the root's Emotion Board,
// mean-threshold influential nodes and recursive drill-down.

#include <map>
#include <set>
#include <span>
#include <vector>

#include "eimpact/graph.hpp"

namespace eimpact {

// impact = emotion_score
//        * (alpha * in_degree / max_in_degree
//           + beta * engagement / (n - 1)
//           + gamma * pagerank / max_pagerank)
//        * lambda ^ depth
struct ImpactWeights {
  double alpha = 1.0 / 3.0;
  double beta = 1.0 / 3.0;
  double gamma = 1.0 / 3.0;
  double lambda = 0.8;
  bool include_root = false;

  // Throws InvalidArgument unless the weights are non-negative, sum to 1
  // (within 1e-9) and 0 < lambda <= 1.
  void validate() const;
};

struct GraphAggregates {
  std::size_t max_in_degree = 0;
  std::size_t node_count = 0;
  double max_pagerank = 0.0;
};

GraphAggregates aggregate(std::span<const NodeMetrics> metrics);

// 0/0 terms count as 0.
double node_impact(const NodeMetrics& metrics, const GraphAggregates& aggregates,
                   const ImpactWeights& weights);

struct NodeImpact {
  NodeId node;
  double value = 0.0;
};

// Indexed like the graph's nodes.
std::vector<double> compute_impacts(const ConversationGraph& graph,
                                    std::span<const NodeMetrics> metrics,
                                    const ImpactWeights& weights);

// Proportions sum to 1, or are all 0 when no emotional mass reaches the root.
struct EmotionBoard {
  PerEmotion<double> proportions{};

  bool empty() const;
  double operator[](EmotionLabel e) const { return proportions[index_of(e)]; }
};

EmotionBoard emotion_board(const ConversationGraph& graph, std::span<const double> impacts,
                           const ImpactWeights& weights);

struct InfluentialSet {
  double threshold = 0.0;
  std::set<NodeId, IdLess> members;
};

// threshold = mean value; members strictly above it. Throws EmptyGraph.
InfluentialSet influential_nodes(std::span<const NodeImpact> impacts);
// Scope is every node except the root (unless weights.include_root). An empty
// scope yields an empty set with threshold 0.
InfluentialSet influential_nodes(const ConversationGraph& graph, std::span<const double> impacts,
                                 const ImpactWeights& weights);

struct ImpactAnalysis {
  std::vector<NodeMetrics> metrics;
  std::vector<double> impacts;
  EmotionBoard board;
  InfluentialSet influential;
};

ImpactAnalysis analyze_impact(const ConversationGraph& graph, const ImpactWeights& weights,
                              const PageRankOptions& pagerank_options = {});

using Drilldown = std::map<NodeId, InfluentialSet, IdLess>;

// Re-runs the full analysis on each influential node's reply subtree with
// that node as root, then on the influential nodes found there, up to
// max_depth levels.
Drilldown drilldown(const ConversationGraph& graph, const InfluentialSet& influential,
                    const ImpactWeights& weights, int max_depth = 2,
                    const PageRankOptions& pagerank_options = {});

// Percentage of scored nodes in the subtree (root of the subtree included)
// carrying each label; all zero when nothing is scored. Throws NodeNotFound.
PerEmotion<double> tree_emotion_distribution(const ConversationGraph& graph,
                                             std::size_t subtree_root);
PerEmotion<double> tree_emotion_distribution(const ConversationGraph& graph,
                                             std::string_view subtree_root);

// Unweighted label fractions over scored in-scope nodes.
PerEmotion<double> raw_emotion_fraction(const ConversationGraph& graph, const ImpactWeights& weights);

// 100 * (board - raw fraction), in percentage points. All zero when the board
// carries no mass.
PerEmotion<double> distribution_shift(const ConversationGraph& graph, std::span<const double> impacts,
                                      const ImpactWeights& weights);

}  // namespace eimpact
