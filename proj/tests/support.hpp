#pragma once
// Generators and brute-force oracles shared by the unit and acceptance
// suites. Nothing here calls into the code paths it is used to check.

#include <algorithm>
#include <map>
#include <set>
#include <cmath>
#include <cstdint>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "eimpact/graph.hpp"
#include "eimpact/simulate.hpp"

namespace eimpact::testing {

using Parents = std::vector<std::size_t>;  // parents[0] is the root marker

inline std::string node_name(std::size_t i) { return std::to_string(i + 1); }

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Random rooted tree on n nodes with parent index < child index. Mixes
// uniform attachment with chain extension to vary depth.
inline Parents random_tree(std::size_t n, std::mt19937_64& rng) {
  Parents p(n, ConversationGraph::kNoParent);
  for (std::size_t i = 1; i < n; ++i) {
    double u = uniform01(rng);
    if (u < 0.3)
      p[i] = i - 1;
    else if (u < 0.45)
      p[i] = 0;
    else
      p[i] = rng() % i;
  }
  return p;
}

inline EmotionScore random_score(std::mt19937_64& rng, double unscored_rate = 0.15) {
  if (uniform01(rng) < unscored_rate) return EmotionScore::unscored();
  return {static_cast<EmotionLabel>(rng() % kEmotionCount), 0.05 + 0.95 * uniform01(rng), true};
}

inline ConversationGraph make_graph(const Parents& parents, std::vector<EmotionScore> scores = {}) {
  std::vector<NodeId> ids;
  for (std::size_t i = 0; i < parents.size(); ++i) ids.push_back(node_name(i));
  if (scores.empty()) scores.assign(parents.size(), EmotionScore::unscored());
  return ConversationGraph(std::move(ids), parents, std::move(scores));
}

inline ConversationGraph random_graph(std::size_t n, std::mt19937_64& rng) {
  auto parents = random_tree(n, rng);
  std::vector<EmotionScore> scores;
  for (std::size_t i = 0; i < n; ++i) scores.push_back(random_score(rng));
  return make_graph(parents, std::move(scores));
}

// Every labeled recursive tree on n nodes (parent[i] < i); covers every
// rooted tree shape.
template <typename F>
void for_each_tree(std::size_t n, F&& visit) {
  Parents p(n, ConversationGraph::kNoParent);
  if (n <= 1) {
    visit(p);
    return;
  }
  std::vector<std::size_t> digit(n, 0);
  for (;;) {
    for (std::size_t i = 1; i < n; ++i) p[i] = digit[i];
    visit(p);
    std::size_t i = n - 1;
    while (i >= 1) {
      if (++digit[i] < i) break;
      digit[i] = 0;
      --i;
    }
    if (i == 0) return;
  }
}

// All-pairs BFS over the undirected subtree.
inline double brute_wiener(const Parents& parents, std::size_t root) {
  const std::size_t n = parents.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t v = 0; v < n; ++v)
    if (parents[v] != ConversationGraph::kNoParent) {
      adj[v].push_back(parents[v]);
      adj[parents[v]].push_back(v);
    }
  // members: nodes whose parent chain reaches root
  std::vector<bool> member(n, false);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t u = v; u != ConversationGraph::kNoParent; u = parents[u])
      if (u == root) {
        member[v] = true;
        break;
      }
  std::size_t count = 0;
  double total = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    if (!member[s]) continue;
    ++count;
    std::vector<long> dist(n, -1);
    std::queue<std::size_t> q;
    dist[s] = 0;
    q.push(s);
    while (!q.empty()) {
      auto v = q.front();
      q.pop();
      for (auto w : adj[v])
        if (member[w] && dist[w] < 0) {
          dist[w] = dist[v] + 1;
          q.push(w);
        }
    }
    for (std::size_t t = 0; t < n; ++t)
      if (member[t] && t != s) total += static_cast<double>(dist[t]);
  }
  if (count <= 1) return 0.0;
  return total / static_cast<double>(count * (count - 1));
}

struct BruteMetrics {
  std::size_t in_degree = 0, subtree = 0, depth = 0;
};

inline std::vector<BruteMetrics> brute_metrics(const Parents& parents) {
  const std::size_t n = parents.size();
  std::vector<BruteMetrics> m(n);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t u = 0; u < n; ++u) {
      if (parents[u] == v) ++m[v].in_degree;
      if (u == v) continue;
      for (std::size_t w = parents[u]; w != ConversationGraph::kNoParent; w = parents[w])
        if (w == v) {
          ++m[v].subtree;
          break;
        }
    }
    for (std::size_t w = v; parents[w] != ConversationGraph::kNoParent; w = parents[w]) ++m[v].depth;
  }
  return m;
}

// Dense Google-matrix power iteration run far past convergence.
inline std::vector<double> dense_pagerank(const std::vector<std::vector<std::size_t>>& out, double d,
                                          int iterations = 3000) {
  const std::size_t n = out.size();
  std::vector<std::vector<double>> g(n, std::vector<double>(n, (1.0 - d) / static_cast<double>(n)));
  for (std::size_t u = 0; u < n; ++u) {
    if (out[u].empty()) {
      for (std::size_t v = 0; v < n; ++v) g[v][u] += d / static_cast<double>(n);
    } else {
      for (auto v : out[u]) g[v][u] += d / static_cast<double>(out[u].size());
    }
  }
  std::vector<double> x(n, 1.0 / static_cast<double>(n)), y(n);
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += g[i][j] * x[j];
      y[i] = s;
    }
    x.swap(y);
  }
  return x;
}

inline std::vector<std::vector<std::size_t>> tree_out_edges(const Parents& parents) {
  std::vector<std::vector<std::size_t>> out(parents.size());
  for (std::size_t v = 0; v < parents.size(); ++v)
    if (parents[v] != ConversationGraph::kNoParent) out[v].push_back(parents[v]);
  return out;
}

// Written out term by term from the documented impact formula.
inline double reference_impact(double score, double in_deg, double max_in_deg, double engagement,
                               double n, double pagerank, double max_pagerank, double depth,
                               double alpha, double beta, double gamma, double lambda) {
  if (score == 0.0) return 0.0;
  double a = max_in_deg == 0.0 ? 0.0 : in_deg / max_in_deg;
  double b = n - 1.0 == 0.0 ? 0.0 : engagement / (n - 1.0);
  double c = max_pagerank == 0.0 ? 0.0 : pagerank / max_pagerank;
  double decay = 1.0;
  for (int i = 0; i < static_cast<int>(depth); ++i) decay *= lambda;
  return score * (alpha * a + beta * b + gamma * c) * decay;
}

// Replay recount: an arrival is suppressed exactly when one of its proper
// ancestors was frozen before it arrived. Arrival order is re-derived here.
struct ReplayRecount {
  std::set<NodeId> suppressed;
  std::size_t baseline_toxic = 0;
  std::size_t retained_toxic = 0;
  double reduction_percent = 0.0;
};

inline ReplayRecount recount_replay(const Conversation& conv, const std::map<NodeId, NodeId>& parents,
                                    const ToxicityMap& toxicity, double threshold,
                                    const std::map<NodeId, std::size_t, IdLess>& frozen_at) {
  std::vector<const ConversationRecord*> order;
  for (const auto& r : conv.records) order.push_back(&r);
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) {
    if (a->created_at != b->created_at) return a->created_at < b->created_at;
    return id_less(a->id, b->id);
  });
  ReplayRecount out;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const auto& id = order[pos]->id;
    bool blocked = false;
    for (auto it = parents.find(id); it != parents.end(); it = parents.find(it->second)) {
      auto f = frozen_at.find(it->second);
      if (f != frozen_at.end() && f->second <= pos) {
        blocked = true;
        break;
      }
    }
    if (blocked) out.suppressed.insert(id);
    if (toxicity.at(id).value > threshold) {
      ++out.baseline_toxic;
      if (!blocked) ++out.retained_toxic;
    }
  }
  if (out.baseline_toxic > 0)
    out.reduction_percent = 100.0 * static_cast<double>(out.baseline_toxic - out.retained_toxic) /
                            static_cast<double>(out.baseline_toxic);
  return out;
}

}  // namespace eimpact::testing
