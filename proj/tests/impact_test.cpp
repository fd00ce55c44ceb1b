#include <doctest.h>

#include <numeric>
#include <random>

#include "eimpact/error.hpp"
#include "eimpact/impact.hpp"
#include "support.hpp"

using namespace eimpact;
using namespace eimpact::testing;

namespace {

constexpr auto kNone = ConversationGraph::kNoParent;

EmotionScore sc(EmotionLabel l, double s) { return {l, s, true}; }

}  // namespace

TEST_CASE("weights validation") {
  CHECK_NOTHROW(ImpactWeights{}.validate());
  CHECK_NOTHROW(ImpactWeights{1, 0, 0, 1.0}.validate());
  CHECK_THROWS_AS((ImpactWeights{0.5, 0.5, 0.5, 0.8}.validate()), Error);
  CHECK_THROWS_AS((ImpactWeights{1.2, -0.2, 0, 0.8}.validate()), Error);
  CHECK_THROWS_AS((ImpactWeights{1, 0, 0, 0.0}.validate()), Error);
  CHECK_THROWS_AS((ImpactWeights{1, 0, 0, 1.5}.validate()), Error);
}

TEST_CASE("impacts follow the formula term by term") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 80; ++trial) {
    auto g = random_graph(1 + rng() % 80, rng);
    double a = uniform01(rng), b = uniform01(rng) * (1 - a);
    ImpactWeights w{a, b, 1 - a - b, 0.3 + 0.7 * uniform01(rng)};
    auto m = compute_metrics(g);
    auto impacts = compute_impacts(g, m, w);
    double dmax = 0, pmax = 0;
    for (const auto& x : m) {
      dmax = std::max(dmax, static_cast<double>(x.direct_responses));
      pmax = std::max(pmax, x.pagerank);
    }
    for (std::size_t v = 0; v < g.size(); ++v) {
      double s = g.emotion(v).scored ? g.emotion(v).score : 0.0;
      double ref = reference_impact(s, static_cast<double>(m[v].direct_responses), dmax,
                                    static_cast<double>(m[v].engagement), static_cast<double>(g.size()),
                                    m[v].pagerank, pmax, static_cast<double>(m[v].depth), w.alpha, w.beta,
                                    w.gamma, w.lambda);
      CHECK(impacts[v] == doctest::Approx(ref).epsilon(1e-12));
      CHECK(impacts[v] >= 0.0);
    }
  }
}

TEST_CASE("single-node graph has an empty board and no influential nodes") {
  auto g = make_graph({kNone}, {sc(EmotionLabel::Joy, 1.0)});
  auto a = analyze_impact(g, {});
  // in-degree and engagement terms are 0/0 and count as 0; pagerank is 1/1
  CHECK(a.impacts[0] == doctest::Approx(1.0 / 3.0));
  CHECK(a.board.empty());
  CHECK(a.influential.members.empty());
  ImpactWeights with_root;
  with_root.include_root = true;
  auto b = analyze_impact(g, with_root);
  CHECK(b.influential.members.empty());
}

TEST_CASE("emotion board and influential nodes on a small fixture") {
  // 1 <- 2 <- 4, 1 <- 3
  Parents p = {kNone, 0, 0, 1};
  auto g = make_graph(p, {sc(EmotionLabel::Joy, 1.0), sc(EmotionLabel::Anger, 0.8),
                          sc(EmotionLabel::Sadness, 0.5), sc(EmotionLabel::Anger, 0.9)});
  auto a = analyze_impact(g, {});
  double total = a.impacts[1] + a.impacts[2] + a.impacts[3];
  CHECK(a.board[EmotionLabel::Anger] == doctest::Approx((a.impacts[1] + a.impacts[3]) / total));
  CHECK(a.board[EmotionLabel::Sadness] == doctest::Approx(a.impacts[2] / total));
  CHECK(a.board[EmotionLabel::Joy] == 0.0);
  CHECK(a.influential.threshold == doctest::Approx(total / 3.0));
  CHECK(a.influential.members == std::set<NodeId, IdLess>{"2"});

  auto shift = distribution_shift(g, a.impacts, {});
  auto raw = raw_emotion_fraction(g, {});
  CHECK(raw[index_of(EmotionLabel::Anger)] == doctest::Approx(2.0 / 3.0));
  CHECK(shift[index_of(EmotionLabel::Anger)] ==
        doctest::Approx(100.0 * (a.board[EmotionLabel::Anger] - 2.0 / 3.0)));
  double shift_sum = std::accumulate(shift.begin(), shift.end(), 0.0);
  CHECK(shift_sum == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("influential_nodes on explicit values") {
  std::vector<NodeImpact> v = {{"a", 1}, {"b", 2}, {"c", 3}, {"d", 2}};
  auto s = influential_nodes(v);
  CHECK(s.threshold == 2.0);
  CHECK(s.members == std::set<NodeId, IdLess>{"c"});
  std::vector<NodeImpact> flat = {{"a", 0.5}, {"b", 0.5}};
  CHECK(influential_nodes(flat).members.empty());
  CHECK_THROWS_AS(influential_nodes(std::vector<NodeImpact>{}), Error);
}

TEST_CASE("board is normalized or empty; root perturbation does not matter (random)") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    auto p = random_tree(1 + rng() % 100, rng);
    std::vector<EmotionScore> scores;
    for (std::size_t i = 0; i < p.size(); ++i) scores.push_back(random_score(rng, 0.3));
    auto g = make_graph(p, scores);
    auto a = analyze_impact(g, {});
    double sum = std::accumulate(a.board.proportions.begin(), a.board.proportions.end(), 0.0);
    if (!a.board.empty()) CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

    scores[0] = random_score(rng, 0.5);
    auto g2 = make_graph(p, scores);
    auto a2 = analyze_impact(g2, {});
    CHECK(a2.influential.members == a.influential.members);
    CHECK(a2.board.proportions == a.board.proportions);
  }
}

TEST_CASE("drilldown") {
  // root 1; 2 has a deep busy subtree, 3 a small one
  Parents p = {kNone, 0, 0, 1, 1, 1, 3, 3, 6, 2};
  std::vector<EmotionScore> s(p.size(), sc(EmotionLabel::Anger, 0.9));
  auto g = make_graph(p, s);
  auto a = analyze_impact(g, {});
  REQUIRE(a.influential.members.contains("2"));
  auto d = drilldown(g, a.influential, {}, 2);
  REQUIRE(d.contains("2"));
  // Inside 2's subtree, 4 has the most replies beneath it.
  CHECK(d.at("2").members.contains("4"));
  CHECK_FALSE(d.at("2").members.contains("2"));
  for (const auto& [id, set] : d)
    for (const auto& m : set.members) CHECK(g.in_subtree(g.index(m), g.index(id)));

  CHECK(drilldown(g, a.influential, {}, 0).empty());
  auto deep = drilldown(g, a.influential, {}, 5);
  CHECK(deep.size() >= d.size());
}

TEST_CASE("tree emotion distribution counts scored nodes in the subtree") {
  Parents p = {kNone, 0, 1, 1, 1};
  auto g = make_graph(p, {sc(EmotionLabel::Joy, 1), sc(EmotionLabel::Anger, 1), sc(EmotionLabel::Anger, 1),
                          sc(EmotionLabel::Fear, 1), EmotionScore::unscored()});
  auto d = tree_emotion_distribution(g, "2");
  CHECK(d[index_of(EmotionLabel::Anger)] == doctest::Approx(200.0 / 3.0));
  CHECK(d[index_of(EmotionLabel::Fear)] == doctest::Approx(100.0 / 3.0));
  CHECK(d[index_of(EmotionLabel::Joy)] == 0.0);
  auto none = tree_emotion_distribution(g, "5");
  for (double x : none) CHECK(x == 0.0);
  CHECK_THROWS_AS(tree_emotion_distribution(g, "99"), Error);
}
