#include <doctest.h>

#include <random>

#include "eimpact/error.hpp"
#include "eimpact/simulate.hpp"
#include "support.hpp"

using namespace eimpact;
using namespace eimpact::testing;

namespace {

struct Fixture {
  Conversation conv;
  std::map<NodeId, NodeId> parents;
  std::map<NodeId, EmotionScore, IdLess> scores;
  ToxicityMap tox;

  void add(const std::string& id, int second, std::optional<std::string> parent, EmotionLabel label,
           double score, double toxicity) {
    ConversationRecord r;
    r.id = id;
    r.conversation_id = "1";
    r.author_id = "a" + id;
    r.created_at = *parse_timestamp("2022-01-01T00:00:00Z") + std::chrono::seconds(second);
    r.lang = "en";
    r.text = "t";
    if (parent) parents[id] = *parent;
    conv.records.push_back(r);
    scores[id] = {label, score, true};
    tox[id] = {toxicity, ToxicitySource::Precomputed};
  }
};

}  // namespace

TEST_CASE("policy names") {
  for (auto k : kAllPolicies) CHECK(parse_policy(to_string(k)) == k);
  CHECK_FALSE(parse_policy("all"));
}

TEST_CASE("replay freezes flagged nodes and suppresses later replies below them") {
  Fixture f;
  f.add("1", 0, {}, EmotionLabel::Joy, 0.9, 0.0);
  f.add("2", 1, "1", EmotionLabel::Anger, 0.9, 0.95);  // toxic
  f.add("3", 2, "1", EmotionLabel::Joy, 0.6, 0.1);
  f.add("4", 3, "2", EmotionLabel::Anger, 0.9, 0.97);  // toxic, arrives before evaluation
  f.add("5", 4, "2", EmotionLabel::Anger, 0.9, 0.99);  // toxic, after freeze of 2
  f.add("6", 5, "5", EmotionLabel::Anger, 0.9, 0.99);  // below a suppressed node
  f.add("7", 6, "3", EmotionLabel::Joy, 0.9, 0.0);

  Policy tox_only{PolicyKind::ToxicityOnly, 4, false};
  auto o = replay_with_policy(f.conv, f.parents, f.scores, f.tox, tox_only, {}, 0.9);
  CHECK(o.arrivals == 7);
  CHECK(o.baseline_toxic == 4);
  CHECK(o.frozen == NodeSet{"2", "4"});
  CHECK(o.frozen_at.at("2") == 4);
  CHECK(o.suppressed_ids == NodeSet{"5", "6"});
  CHECK(o.retained_toxic == 2);
  CHECK(o.reduction_percent == doctest::Approx(50.0));
  CHECK(o.flagged_percent == doctest::Approx(100.0 * 2.0 / 7.0));

  auto rc = recount_replay(f.conv, f.parents, f.tox, 0.9, o.frozen_at);
  CHECK(rc.suppressed == std::set<NodeId>(o.suppressed_ids.begin(), o.suppressed_ids.end()));
}

TEST_CASE("the root is never frozen unless allowed") {
  Fixture f;
  f.add("1", 0, {}, EmotionLabel::Anger, 0.9, 0.99);
  f.add("2", 1, "1", EmotionLabel::Anger, 0.9, 0.0);
  f.add("3", 2, "1", EmotionLabel::Anger, 0.9, 0.0);
  Policy p{PolicyKind::ToxicityOnly, 1, false};
  auto o = replay_with_policy(f.conv, f.parents, f.scores, f.tox, p, {}, 0.9);
  CHECK(o.flagged.contains("1"));
  CHECK(o.frozen.empty());
  CHECK(o.suppressed == 0);
  p.freeze_root_allowed = true;
  auto o2 = replay_with_policy(f.conv, f.parents, f.scores, f.tox, p, {}, 0.9);
  CHECK(o2.frozen == NodeSet{"1"});
  CHECK(o2.suppressed_ids == NodeSet{"2", "3"});
}

TEST_CASE("replay input errors") {
  Fixture f;
  f.add("1", 0, {}, EmotionLabel::Joy, 0.9, 0.0);
  f.add("2", 1, "1", EmotionLabel::Joy, 0.9, 0.0);
  auto code = [&](auto mutate) {
    Fixture g = f;
    mutate(g);
    try {
      replay_with_policy(g.conv, g.parents, g.scores, g.tox, {}, {}, 0.9);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::IoError;
  };
  CHECK(code([](Fixture& g) { g.scores.erase("2"); }) == ErrorCode::MissingScore);
  CHECK(code([](Fixture& g) { g.tox.erase("2"); }) == ErrorCode::MissingToxicity);
  CHECK(code([](Fixture& g) { g.parents["1"] = "2"; }) == ErrorCode::OutOfOrderArrival);
  CHECK(code([](Fixture& g) { g.parents.erase("2"); }) == ErrorCode::MultipleRoots);
  CHECK_THROWS_AS(replay_with_policy(f.conv, f.parents, f.scores, f.tox, {PolicyKind::Combined, 0, false}, {}, 0.9),
                  Error);
}

TEST_CASE("synthesized conversations are well formed and deterministic") {
  SynthParams p;
  p.seed = 17;
  p.max_nodes = 300;
  p.base_branching = 2.0;
  auto a = synthesize_conversation(p);
  auto b = synthesize_conversation(p);
  CHECK(a.conversation.records == b.conversation.records);
  CHECK(a.parents == b.parents);
  CHECK(a.scores == b.scores);
  CHECK(a.toxicity == b.toxicity);

  const auto& recs = a.conversation.records;
  REQUIRE_FALSE(recs.empty());
  CHECK(recs.size() <= p.max_nodes);
  CHECK(recs[0].id == "s17");
  CHECK(a.parents.size() == recs.size() - 1);
  std::set<NodeId> seen;
  for (const auto& r : recs) {
    if (r.id != recs[0].id) CHECK(seen.contains(a.parents.at(r.id)));
    seen.insert(r.id);
    CHECK(a.scores.at(r.id).score >= 0.5);
    CHECK(a.scores.at(r.id).score <= 1.0);
    double t = a.toxicity.at(r.id).value;
    CHECK(t >= 0.0);
    CHECK(t <= 1.0);
  }

  p.seed = 18;
  auto c = synthesize_conversation(p);
  CHECK_FALSE(c.conversation.records == a.conversation.records);
}

TEST_CASE("synth parameter validation") {
  SynthParams p;
  p.anger_multiplier = 0.5;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.emotion_mix = {0, 0, 0, 0, 0, 0};
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.toxic_given_anger = 1.5;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.max_nodes = 0;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("synthetic toxicity tracks anger") {
  SynthParams p;
  p.max_nodes = 2000;
  p.base_branching = 3.0;
  p.toxic_given_anger = 0.6;
  p.toxic_given_other = 0.05;
  std::size_t anger = 0, anger_toxic = 0, other = 0, other_toxic = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    p.seed = seed;
    auto s = synthesize_conversation(p);
    for (const auto& [id, e] : s.scores) {
      bool toxic = s.toxicity.at(id).value > 0.9;
      if (e.label == EmotionLabel::Anger) {
        ++anger;
        anger_toxic += toxic;
      } else {
        ++other;
        other_toxic += toxic;
      }
    }
  }
  REQUIRE(anger > 200);
  CHECK(double(anger_toxic) / double(anger) == doctest::Approx(0.6).epsilon(0.1));
  CHECK(double(other_toxic) / double(other) == doctest::Approx(0.05).epsilon(0.3));
}

TEST_CASE("replay matches the recount oracle on synthetic conversations") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SynthParams p;
    p.seed = seed;
    p.max_nodes = 150;
    p.base_branching = 2.0;
    p.toxic_given_anger = 0.5;
    auto s = synthesize_conversation(p);
    for (auto kind : kAllPolicies) {
      Policy pol{kind, static_cast<int>(1 + seed % 10), false};
      auto o = replay_with_policy(s.conversation, s.parents, s.scores, s.toxicity, pol, {}, 0.9);
      auto rc = recount_replay(s.conversation, s.parents, s.toxicity, 0.9, o.frozen_at);
      CHECK(rc.suppressed == std::set<NodeId>(o.suppressed_ids.begin(), o.suppressed_ids.end()));
      CHECK(rc.reduction_percent == o.reduction_percent);
      CHECK(o.frozen.size() == o.frozen_at.size());
    }
  }
}

TEST_CASE("combined never suppresses a reply that toxicity-only keeps") {
  // Combined flags are toxic and share toxicity-only's schedule, so its
  // suppressed set can only be smaller.
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    SynthParams p;
    p.seed = seed;
    p.toxic_given_anger = 0.6;
    p.anger_multiplier = 3.0;
    auto s = synthesize_conversation(p);
    for (int cadence : {1, 7, 25}) {
      Policy c{PolicyKind::Combined, cadence, false}, t{PolicyKind::ToxicityOnly, cadence, false};
      auto oc = replay_with_policy(s.conversation, s.parents, s.scores, s.toxicity, c, {}, 0.9);
      auto ot = replay_with_policy(s.conversation, s.parents, s.scores, s.toxicity, t, {}, 0.9);
      for (const auto& id : oc.suppressed_ids) CHECK(ot.suppressed_ids.contains(id));
      CHECK(oc.reduction_percent <= ot.reduction_percent);
    }
  }
}
