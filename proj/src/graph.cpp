#include "eimpact/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "eimpact/error.hpp"

namespace eimpact {

namespace {

std::string join_ids(std::vector<NodeId> ids) {
  std::sort(ids.begin(), ids.end(), IdLess{});
  std::string out;
  for (const auto& id : ids) out += (out.empty() ? "" : ",") + id;
  return out;
}

}  // namespace

ConversationGraph::ConversationGraph(std::vector<NodeId> ids, std::vector<std::size_t> parents,
                                     std::vector<EmotionScore> emotions)
    : ids_(std::move(ids)), parents_(std::move(parents)), emotions_(std::move(emotions)) {
  const std::size_t n = ids_.size();
  if (n == 0) throw Error(ErrorCode::NoRoot, "empty graph");
  if (parents_.size() != n || emotions_.size() != n)
    throw Error(ErrorCode::InvalidArgument, "graph arrays differ in length");

  for (std::size_t v = 0; v < n; ++v) {
    if (!index_.emplace(ids_[v], v).second) throw Error(ErrorCode::InvalidArgument, "duplicate id " + ids_[v]);
    if (parents_[v] != kNoParent && parents_[v] >= n)
      throw Error(ErrorCode::InvalidArgument, "parent index out of range for " + ids_[v]);
  }

  // Walk parent pointers; 0 = unvisited, 1 = on current path, 2 = reaches a root.
  std::vector<std::uint8_t> state(n, 0);
  std::vector<std::size_t> path;
  for (std::size_t start = 0; start < n; ++start) {
    std::size_t v = start;
    path.clear();
    while (v != kNoParent && state[v] == 0) {
      state[v] = 1;
      path.push_back(v);
      v = parents_[v];
    }
    if (v != kNoParent && state[v] == 1) {
      std::vector<NodeId> cycle;
      auto it = std::find(path.begin(), path.end(), v);
      for (; it != path.end(); ++it) cycle.push_back(ids_[*it]);
      throw Error(ErrorCode::CycleDetected, join_ids(std::move(cycle)));
    }
    for (auto p : path) state[p] = 2;
  }

  std::vector<NodeId> roots;
  for (std::size_t v = 0; v < n; ++v)
    if (parents_[v] == kNoParent) {
      roots.push_back(ids_[v]);
      root_ = v;
    }
  if (roots.empty()) throw Error(ErrorCode::NoRoot, "no parentless node");
  if (roots.size() > 1) throw Error(ErrorCode::MultipleRoots, join_ids(std::move(roots)));

  children_.assign(n, {});
  for (std::size_t v = 0; v < n; ++v)
    if (parents_[v] != kNoParent) children_[parents_[v]].push_back(v);
}

ConversationGraph ConversationGraph::from_edges(
    std::vector<NodeId> ids, const std::vector<std::pair<NodeId, NodeId>>& child_parent,
    const std::map<NodeId, EmotionScore, IdLess>& emotions) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t v = 0; v < ids.size(); ++v) index.emplace(ids[v], v);

  std::vector<std::size_t> parents(ids.size(), kNoParent);
  std::vector<NodeId> loops;
  for (const auto& [child, parent] : child_parent) {
    auto c = index.find(child);
    if (c == index.end()) throw Error(ErrorCode::NodeNotFound, child);
    auto p = index.find(parent);
    if (p == index.end()) throw Error(ErrorCode::NodeNotFound, parent);
    if (c->second == p->second) {
      loops.push_back(child);
      continue;
    }
    if (parents[c->second] != kNoParent)
      throw Error(ErrorCode::InvalidArgument, "node " + child + " has more than one parent");
    parents[c->second] = p->second;
  }

  std::vector<EmotionScore> scores(ids.size());
  for (std::size_t v = 0; v < ids.size(); ++v)
    if (auto it = emotions.find(ids[v]); it != emotions.end()) scores[v] = it->second;

  ConversationGraph graph(std::move(ids), std::move(parents), std::move(scores));
  graph.self_loops_ = std::move(loops);
  return graph;
}

std::optional<std::size_t> ConversationGraph::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t ConversationGraph::index(std::string_view id) const {
  auto v = find(id);
  if (!v) throw Error(ErrorCode::NodeNotFound, std::string(id));
  return *v;
}

std::vector<std::size_t> ConversationGraph::subtree_nodes(std::size_t v) const {
  std::vector<std::size_t> out{v};
  for (std::size_t i = 0; i < out.size(); ++i)
    for (auto c : children_[out[i]]) out.push_back(c);
  return out;
}

ConversationGraph ConversationGraph::subtree(std::size_t v) const {
  auto nodes = subtree_nodes(v);
  std::sort(nodes.begin(), nodes.end());  // keep arrival order
  std::unordered_map<std::size_t, std::size_t> remap;
  for (std::size_t i = 0; i < nodes.size(); ++i) remap.emplace(nodes[i], i);

  std::vector<NodeId> ids;
  std::vector<std::size_t> parents;
  std::vector<EmotionScore> emotions;
  for (auto u : nodes) {
    ids.push_back(ids_[u]);
    parents.push_back(u == v ? kNoParent : remap.at(parents_[u]));
    emotions.push_back(emotions_[u]);
  }
  return ConversationGraph(std::move(ids), std::move(parents), std::move(emotions));
}

bool ConversationGraph::in_subtree(std::size_t v, std::size_t subtree_root) const {
  for (; v != kNoParent; v = parents_[v])
    if (v == subtree_root) return true;
  return false;
}

ConversationGraph build_graph(const Conversation& conversation,
                              const std::map<NodeId, NodeId>& parents,
                              const std::map<NodeId, EmotionScore, IdLess>& scores) {
  std::vector<NodeId> ids;
  std::vector<std::pair<NodeId, NodeId>> edges;
  ids.reserve(conversation.records.size());
  for (const auto& r : conversation.records) {
    ids.push_back(r.id);
    if (auto it = parents.find(r.id); it != parents.end()) edges.emplace_back(r.id, it->second);
  }
  return ConversationGraph::from_edges(std::move(ids), edges, scores);
}

PageRankResult pagerank(std::span<const std::vector<std::size_t>> out_edges,
                        const PageRankOptions& options) {
  if (!(options.damping > 0.0 && options.damping < 1.0))
    throw Error(ErrorCode::InvalidArgument, "damping must lie in (0,1)");
  const std::size_t n = out_edges.size();
  PageRankResult result;
  if (n == 0) return result;

  const double d = options.damping;
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> rank(n, inv_n), next(n);

  for (int iter = 0; iter < options.max_iter; ++iter) {
    double dangling = 0.0;
    for (std::size_t u = 0; u < n; ++u)
      if (out_edges[u].empty()) dangling += rank[u];

    std::fill(next.begin(), next.end(), (1.0 - d) * inv_n + d * dangling * inv_n);
    for (std::size_t u = 0; u < n; ++u) {
      if (out_edges[u].empty()) continue;
      const double share = d * rank[u] / static_cast<double>(out_edges[u].size());
      for (auto v : out_edges[u]) next[v] += share;
    }

    double delta = 0.0;
    for (std::size_t v = 0; v < n; ++v) delta += std::abs(next[v] - rank[v]);
    rank.swap(next);
    result.iterations = iter + 1;
    if (delta < options.eps) {
      result.converged = true;
      break;
    }
  }

  double total = 0.0;
  for (double r : rank) total += r;
  for (double& r : rank) r /= total;
  result.ranks = std::move(rank);
  return result;
}

PageRankResult pagerank(const ConversationGraph& graph, const PageRankOptions& options) {
  std::vector<std::vector<std::size_t>> out(graph.size());
  for (std::size_t v = 0; v < graph.size(); ++v)
    if (graph.parent(v) != ConversationGraph::kNoParent) out[v].push_back(graph.parent(v));
  return pagerank(std::span<const std::vector<std::size_t>>(out), options);
}

std::vector<NodeMetrics> compute_metrics(const ConversationGraph& graph,
                                         const PageRankOptions& options) {
  const std::size_t n = graph.size();
  std::vector<NodeMetrics> metrics(n);

  // BFS order from the root: depths top-down, subtree sizes bottom-up.
  auto order = graph.subtree_nodes(graph.root());
  for (auto v : order) {
    metrics[v].direct_responses = graph.children(v).size();
    if (v != graph.root()) metrics[v].depth = metrics[graph.parent(v)].depth + 1;
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    auto v = *it;
    if (v != graph.root()) metrics[graph.parent(v)].engagement += metrics[v].engagement + 1;
  }

  auto pr = pagerank(graph, options);
  for (std::size_t v = 0; v < n; ++v) {
    metrics[v].pagerank = pr.ranks[v];
    metrics[v].emotion_score = graph.emotion(v).scored ? graph.emotion(v).score : 0.0;
  }
  return metrics;
}

WienerIndex wiener_index(const ConversationGraph& graph, std::size_t subtree_root) {
  if (subtree_root >= graph.size()) throw Error(ErrorCode::NodeNotFound, std::to_string(subtree_root));
  auto nodes = graph.subtree_nodes(subtree_root);
  const std::uint64_t n = nodes.size();
  if (n <= 1) return {0.0, static_cast<std::size_t>(n)};

  // Each edge (c, parent(c)) lies on size(c) * (n - size(c)) shortest paths.
  std::unordered_map<std::size_t, std::uint64_t> size;
  std::uint64_t pair_sum = 0;
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    auto v = *it;
    std::uint64_t s = 1;
    for (auto c : graph.children(v)) s += size[c];
    size[v] = s;
    if (v != subtree_root) pair_sum += s * (n - s);
  }
  const double value = 2.0 * static_cast<double>(pair_sum) / static_cast<double>(n * (n - 1));
  return {value, static_cast<std::size_t>(n)};
}

WienerIndex wiener_index(const ConversationGraph& graph, std::string_view subtree_root) {
  return wiener_index(graph, graph.index(subtree_root));
}

}  // namespace eimpact
