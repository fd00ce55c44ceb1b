#include "eimpact/impact.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "eimpact/error.hpp"

namespace eimpact {

namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

bool in_scope(const ConversationGraph& graph, std::size_t v, const ImpactWeights& weights) {
  return weights.include_root || v != graph.root();
}

}  // namespace

void ImpactWeights::validate() const {
  if (alpha < 0 || beta < 0 || gamma < 0)
    throw Error(ErrorCode::InvalidArgument, "impact weights must be non-negative");
  if (std::abs(alpha + beta + gamma - 1.0) > 1e-9)
    throw Error(ErrorCode::InvalidArgument, "alpha + beta + gamma must equal 1");
  if (!(lambda > 0.0 && lambda <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "lambda must lie in (0,1]");
}

GraphAggregates aggregate(std::span<const NodeMetrics> metrics) {
  GraphAggregates agg;
  agg.node_count = metrics.size();
  for (const auto& m : metrics) {
    agg.max_in_degree = std::max(agg.max_in_degree, m.direct_responses);
    agg.max_pagerank = std::max(agg.max_pagerank, m.pagerank);
  }
  return agg;
}

double node_impact(const NodeMetrics& m, const GraphAggregates& agg, const ImpactWeights& w) {
  if (m.emotion_score <= 0.0) return 0.0;
  const double others = agg.node_count > 0 ? static_cast<double>(agg.node_count - 1) : 0.0;
  const double structure =
      w.alpha * ratio(static_cast<double>(m.direct_responses), static_cast<double>(agg.max_in_degree)) +
      w.beta * ratio(static_cast<double>(m.engagement), others) +
      w.gamma * ratio(m.pagerank, agg.max_pagerank);
  return m.emotion_score * structure * std::pow(w.lambda, static_cast<double>(m.depth));
}

std::vector<double> compute_impacts(const ConversationGraph& graph,
                                    std::span<const NodeMetrics> metrics,
                                    const ImpactWeights& weights) {
  const auto agg = aggregate(metrics);
  std::vector<double> impacts(graph.size());
  for (std::size_t v = 0; v < graph.size(); ++v) impacts[v] = node_impact(metrics[v], agg, weights);
  return impacts;
}

bool EmotionBoard::empty() const {
  return std::all_of(proportions.begin(), proportions.end(), [](double p) { return p == 0.0; });
}

EmotionBoard emotion_board(const ConversationGraph& graph, std::span<const double> impacts,
                           const ImpactWeights& weights) {
  EmotionBoard board;
  double total = 0.0;
  for (std::size_t v = 0; v < graph.size(); ++v) {
    if (!in_scope(graph, v, weights) || !graph.emotion(v).scored) continue;
    board.proportions[index_of(graph.emotion(v).label)] += impacts[v];
    total += impacts[v];
  }
  if (total <= 0.0) return EmotionBoard{};
  for (auto& p : board.proportions) p /= total;
  return board;
}

InfluentialSet influential_nodes(std::span<const NodeImpact> impacts) {
  if (impacts.empty()) throw Error(ErrorCode::EmptyGraph, "no nodes in scope");
  double sum = 0.0;
  for (const auto& i : impacts) sum += i.value;
  InfluentialSet set;
  set.threshold = sum / static_cast<double>(impacts.size());
  for (const auto& i : impacts)
    if (i.value > set.threshold) set.members.insert(i.node);
  return set;
}

InfluentialSet influential_nodes(const ConversationGraph& graph, std::span<const double> impacts,
                                 const ImpactWeights& weights) {
  std::vector<NodeImpact> scoped;
  for (std::size_t v = 0; v < graph.size(); ++v)
    if (in_scope(graph, v, weights)) scoped.push_back({graph.id(v), impacts[v]});
  if (scoped.empty()) return {};
  return influential_nodes(scoped);
}

ImpactAnalysis analyze_impact(const ConversationGraph& graph, const ImpactWeights& weights,
                              const PageRankOptions& pagerank_options) {
  weights.validate();
  ImpactAnalysis a;
  a.metrics = compute_metrics(graph, pagerank_options);
  a.impacts = compute_impacts(graph, a.metrics, weights);
  a.board = emotion_board(graph, a.impacts, weights);
  a.influential = influential_nodes(graph, a.impacts, weights);
  return a;
}

Drilldown drilldown(const ConversationGraph& graph, const InfluentialSet& influential,
                    const ImpactWeights& weights, int max_depth,
                    const PageRankOptions& pagerank_options) {
  Drilldown out;
  std::vector<NodeId> frontier(influential.members.begin(), influential.members.end());
  for (int level = 1; level <= max_depth && !frontier.empty(); ++level) {
    std::vector<NodeId> next;
    for (const auto& id : frontier) {
      if (out.contains(id)) continue;
      auto sub = graph.subtree(graph.index(id));
      InfluentialSet found;
      if (sub.size() > 1) {
        ImpactWeights scoped = weights;
        scoped.include_root = false;
        found = analyze_impact(sub, scoped, pagerank_options).influential;
      }
      next.insert(next.end(), found.members.begin(), found.members.end());
      out.emplace(id, std::move(found));
    }
    frontier = std::move(next);
  }
  return out;
}

PerEmotion<double> tree_emotion_distribution(const ConversationGraph& graph,
                                             std::size_t subtree_root) {
  if (subtree_root >= graph.size())
    throw Error(ErrorCode::NodeNotFound, std::to_string(subtree_root));
  PerEmotion<double> pct{};
  std::size_t scored = 0;
  for (auto v : graph.subtree_nodes(subtree_root)) {
    if (!graph.emotion(v).scored) continue;
    pct[index_of(graph.emotion(v).label)] += 1.0;
    ++scored;
  }
  if (scored == 0) return pct;
  for (auto& p : pct) p = 100.0 * p / static_cast<double>(scored);
  return pct;
}

PerEmotion<double> tree_emotion_distribution(const ConversationGraph& graph,
                                             std::string_view subtree_root) {
  return tree_emotion_distribution(graph, graph.index(subtree_root));
}

PerEmotion<double> raw_emotion_fraction(const ConversationGraph& graph, const ImpactWeights& weights) {
  PerEmotion<double> frac{};
  std::size_t scored = 0;
  for (std::size_t v = 0; v < graph.size(); ++v) {
    if (!in_scope(graph, v, weights) || !graph.emotion(v).scored) continue;
    frac[index_of(graph.emotion(v).label)] += 1.0;
    ++scored;
  }
  if (scored == 0) return frac;
  for (auto& f : frac) f /= static_cast<double>(scored);
  return frac;
}

PerEmotion<double> distribution_shift(const ConversationGraph& graph, std::span<const double> impacts,
                                      const ImpactWeights& weights) {
  PerEmotion<double> shift{};
  auto board = emotion_board(graph, impacts, weights);
  if (board.empty()) return shift;
  auto raw = raw_emotion_fraction(graph, weights);
  for (std::size_t e = 0; e < kEmotionCount; ++e)
    shift[e] = 100.0 * (board.proportions[e] - raw[e]);
  return shift;
}

}  // namespace eimpact
