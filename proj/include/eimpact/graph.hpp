#pragma once
// Conversation graph G = (V, E, A): reply edges point child -> parent, the
// source post is the root. Node indices follow arrival order.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "eimpact/affect.hpp"
#include "eimpact/corpus.hpp"

namespace eimpact {

class ConversationGraph {
 public:
  static constexpr std::size_t kNoParent = static_cast<std::size_t>(-1);

  // `parents[i]` is the index of node i's parent or kNoParent. Exactly one
  // node may be parentless. Throws CycleDetected, NoRoot, MultipleRoots,
  // InvalidArgument (size mismatch, duplicate id, index out of range).
  ConversationGraph(std::vector<NodeId> ids, std::vector<std::size_t> parents,
                    std::vector<EmotionScore> emotions);

  // Edge-list form. Self-loop edges are recorded but take no part in the
  // structure; every other node needs exactly one outgoing edge.
  static ConversationGraph from_edges(std::vector<NodeId> ids,
                                      const std::vector<std::pair<NodeId, NodeId>>& child_parent,
                                      const std::map<NodeId, EmotionScore, IdLess>& emotions = {});

  std::size_t size() const { return ids_.size(); }
  std::size_t edge_count() const { return ids_.size() - 1; }
  std::size_t root() const { return root_; }

  const NodeId& id(std::size_t v) const { return ids_[v]; }
  const std::vector<NodeId>& ids() const { return ids_; }
  std::size_t parent(std::size_t v) const { return parents_[v]; }
  const std::vector<std::size_t>& children(std::size_t v) const { return children_[v]; }
  const EmotionScore& emotion(std::size_t v) const { return emotions_[v]; }
  const std::vector<NodeId>& self_loops() const { return self_loops_; }

  std::optional<std::size_t> find(std::string_view id) const;
  // Throws NodeNotFound.
  std::size_t index(std::string_view id) const;

  // Nodes of the reply subtree rooted at `v` (including v), parents before
  // children.
  std::vector<std::size_t> subtree_nodes(std::size_t v) const;
  // Reply subtree rooted at `v` as a standalone graph with v as root.
  ConversationGraph subtree(std::size_t v) const;
  bool in_subtree(std::size_t v, std::size_t subtree_root) const;

 private:
  ConversationGraph() = default;

  std::vector<NodeId> ids_;
  std::vector<std::size_t> parents_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<EmotionScore> emotions_;
  std::vector<NodeId> self_loops_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t root_ = 0;
};

// Nodes follow conversation.records; every non-root record must appear in
// `parents`. Nodes without a score entry are unscored.
ConversationGraph build_graph(const Conversation& conversation,
                              const std::map<NodeId, NodeId>& parents,
                              const std::map<NodeId, EmotionScore, IdLess>& scores);

struct PageRankOptions {
  double damping = 0.85;
  double eps = 1e-8;
  int max_iter = 100;
};

struct PageRankResult {
  std::vector<double> ranks;
  int iterations = 0;
  bool converged = false;
};

// Power iteration over an arbitrary digraph given as out-edge lists. Dangling
// nodes spread their mass uniformly over all nodes.
PageRankResult pagerank(std::span<const std::vector<std::size_t>> out_edges,
                        const PageRankOptions& options = {});
// Child -> parent direction; the root is the dangling node.
PageRankResult pagerank(const ConversationGraph& graph, const PageRankOptions& options = {});

struct NodeMetrics {
  std::size_t direct_responses = 0;  // in-degree
  std::size_t engagement = 0;        // reply-subtree size, self excluded
  std::size_t depth = 0;             // edges to root
  double pagerank = 0.0;
  double emotion_score = 0.0;
};

std::vector<NodeMetrics> compute_metrics(const ConversationGraph& graph,
                                         const PageRankOptions& options = {});

struct WienerIndex {
  double value = 0.0;  // mean pairwise distance
  std::size_t n = 0;
};

// Undirected reply subtree rooted at the node; 0 when it has a single node.
WienerIndex wiener_index(const ConversationGraph& graph, std::size_t subtree_root);
WienerIndex wiener_index(const ConversationGraph& graph, std::string_view subtree_root);

}  // namespace eimpact
