#include <doctest.h>

#include <numeric>
#include <random>

#include "eimpact/error.hpp"
#include "eimpact/graph.hpp"
#include "support.hpp"

using namespace eimpact;
using namespace eimpact::testing;

namespace {

constexpr auto kNone = ConversationGraph::kNoParent;

// Worked example: 1 is the post; 2 and 3 reply to it; 4, 5, 6 reply to 3;
// 8 replies to 6 and 7 to 8.
Parents fig3() { return {kNone, 0, 0, 2, 2, 2, 7, 5}; }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an eimpact::Error");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("graph construction validates the tree") {
  auto none = [] { return std::vector<EmotionScore>(3, EmotionScore::unscored()); };
  CHECK(code_of([&] { ConversationGraph({"a", "b", "c"}, {kNone, 2, 1}, none()); }) ==
        ErrorCode::CycleDetected);
  CHECK(code_of([&] { ConversationGraph({"a", "b", "c"}, {1, 2, 0}, none()); }) ==
        ErrorCode::CycleDetected);
  CHECK(code_of([&] { ConversationGraph({"a", "b", "c"}, {kNone, kNone, 0}, none()); }) ==
        ErrorCode::MultipleRoots);
  CHECK(code_of([&] { ConversationGraph({"a", "a", "c"}, {kNone, 0, 0}, none()); }) ==
        ErrorCode::InvalidArgument);
  CHECK(code_of([&] { ConversationGraph({"a", "b", "c"}, {kNone, 0, 9}, none()); }) ==
        ErrorCode::InvalidArgument);
  try {
    ConversationGraph({"r", "x", "y", "z"}, {kNone, 3, 1, 2}, std::vector<EmotionScore>(4));
    FAIL("expected CycleDetected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CycleDetected);
    CHECK(e.detail() == "x,y,z");
  }
}

TEST_CASE("from_edges records self-loops outside the structure") {
  auto g = ConversationGraph::from_edges({"1", "2", "3"}, {{"2", "1"}, {"3", "2"}, {"3", "3"}},
                                         {{"2", {EmotionLabel::Joy, 0.5, true}}});
  CHECK(g.size() == 3);
  CHECK(g.edge_count() == 2);
  CHECK(g.self_loops() == std::vector<NodeId>{"3"});
  CHECK(g.parent(g.index("3")) == g.index("2"));
  CHECK(g.emotion(g.index("2")).label == EmotionLabel::Joy);
  CHECK_FALSE(g.emotion(g.index("3")).scored);
  CHECK(code_of([] { ConversationGraph::from_edges({"1", "2"}, {{"2", "1"}, {"2", "1"}}); }) ==
        ErrorCode::InvalidArgument);
  CHECK(code_of([] { ConversationGraph::from_edges({"1", "2"}, {{"2", "9"}}); }) ==
        ErrorCode::NodeNotFound);
}

TEST_CASE("lookup and subtrees") {
  auto g = make_graph(fig3());
  CHECK(g.root() == 0);
  CHECK(g.index("3") == 2);
  CHECK_FALSE(g.find("42"));
  CHECK(code_of([&] { g.index("42"); }) == ErrorCode::NodeNotFound);

  auto nodes = g.subtree_nodes(2);
  std::sort(nodes.begin(), nodes.end());
  CHECK(nodes == std::vector<std::size_t>{2, 3, 4, 5, 6, 7});
  CHECK(g.in_subtree(6, 2));
  CHECK_FALSE(g.in_subtree(1, 2));

  auto sub = g.subtree(5);  // node "6"
  CHECK(sub.size() == 3);
  CHECK(sub.id(sub.root()) == "6");
  CHECK(sub.parent(sub.index("7")) == sub.index("8"));
}

TEST_CASE("worked example metrics") {
  auto g = make_graph(fig3());
  auto m = compute_metrics(g);
  const auto n3 = g.index("3");
  CHECK(m[n3].direct_responses == 3);
  CHECK(m[n3].engagement == 5);
  CHECK(m[n3].depth == 1);
  CHECK(m[g.root()].engagement == 7);
  CHECK(m[g.root()].depth == 0);
  CHECK(m[g.index("7")].depth == 4);
  CHECK(m[g.index("7")].engagement == 0);
}

TEST_CASE("metrics match brute-force recount on random trees") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    auto p = random_tree(1 + rng() % 120, rng);
    auto g = make_graph(p);
    auto m = compute_metrics(g);
    auto b = brute_metrics(p);
    for (std::size_t v = 0; v < p.size(); ++v) {
      CHECK(m[v].direct_responses == b[v].in_degree);
      CHECK(m[v].engagement == b[v].subtree);
      CHECK(m[v].depth == b[v].depth);
    }
  }
}

TEST_CASE("pagerank") {
  SUBCASE("directed cycle is uniform") {
    std::vector<std::vector<std::size_t>> out = {{1}, {2}, {3}, {4}, {0}};
    auto r = pagerank(out);
    CHECK(r.converged);
    for (double x : r.ranks) CHECK(x == doctest::Approx(0.2).epsilon(1e-12));
  }
  SUBCASE("all dangling is uniform") {
    std::vector<std::vector<std::size_t>> out(4);
    for (double x : pagerank(out).ranks) CHECK(x == doctest::Approx(0.25));
  }
  SUBCASE("empty graph") { CHECK(pagerank(std::vector<std::vector<std::size_t>>{}).ranks.empty()); }
  SUBCASE("single node") { CHECK(pagerank(std::vector<std::vector<std::size_t>>(1)).ranks[0] == 1.0); }
  SUBCASE("star: root dominates, leaves equal") {
    Parents p = {kNone, 0, 0, 0, 0};
    auto r = pagerank(make_graph(p)).ranks;
    for (std::size_t i = 2; i < 5; ++i) CHECK(r[i] == doctest::Approx(r[1]));
    CHECK(r[0] > r[1]);
  }
  SUBCASE("trees agree with a dense oracle") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
      auto p = random_tree(1 + rng() % 60, rng);
      auto r = pagerank(make_graph(p), {0.85, 1e-13, 2000});
      auto o = dense_pagerank(tree_out_edges(p), 0.85);
      double sum = std::accumulate(r.ranks.begin(), r.ranks.end(), 0.0);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
      for (std::size_t v = 0; v < p.size(); ++v) CHECK(std::abs(r.ranks[v] - o[v]) < 1e-9);
    }
  }
}

TEST_CASE("wiener index") {
  SUBCASE("closed forms") {
    for (std::size_t n = 1; n <= 30; ++n) {
      Parents path(n, kNone);
      for (std::size_t i = 1; i < n; ++i) path[i] = i - 1;
      double expected = n == 1 ? 0.0 : (static_cast<double>(n) + 1.0) / 3.0;
      CHECK(wiener_index(make_graph(path), std::size_t{0}).value == doctest::Approx(expected).epsilon(1e-12));

      Parents star(n, 0);
      star[0] = kNone;
      double k = static_cast<double>(n - 1);
      double star_expected = n == 1 ? 0.0 : 2.0 * k / (k + 1.0);
      CHECK(wiener_index(make_graph(star), std::size_t{0}).value ==
            doctest::Approx(star_expected).epsilon(1e-12));
    }
  }
  SUBCASE("subtree scope and id lookup") {
    auto g = make_graph(fig3());
    auto w = wiener_index(g, "6");
    CHECK(w.n == 3);
    CHECK(w.value == doctest::Approx(4.0 / 3.0));
    CHECK(wiener_index(g, "7").value == 0.0);
    for (std::size_t v = 0; v < g.size(); ++v)
      CHECK(wiener_index(g, v).value == doctest::Approx(brute_wiener(fig3(), v)));
  }
}

TEST_CASE("build_graph follows records and resolved parents") {
  Conversation conv;
  conv.conversation_id = "1";
  for (const char* id : {"1", "2", "3"}) {
    ConversationRecord r;
    r.id = id;
    r.conversation_id = "1";
    conv.records.push_back(r);
  }
  std::map<NodeId, NodeId> parents = {{"2", "1"}, {"3", "1"}};
  std::map<NodeId, EmotionScore, IdLess> scores = {{"3", {EmotionLabel::Fear, 0.7, true}}};
  auto g = build_graph(conv, parents, scores);
  CHECK(g.size() == 3);
  CHECK(g.id(g.root()) == "1");
  CHECK(g.emotion(2).label == EmotionLabel::Fear);
  CHECK_FALSE(g.emotion(1).scored);
}
