#pragma once
// Timeline replay under freeze policies, and a seeded branching-process
// conversation generator.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "eimpact/impact.hpp"
#include "eimpact/toxicity.hpp"

namespace eimpact {

enum class PolicyKind { EImpactOnly, ToxicityOnly, Combined };
inline constexpr std::array<PolicyKind, 3> kAllPolicies = {
    PolicyKind::EImpactOnly, PolicyKind::ToxicityOnly, PolicyKind::Combined};

std::string_view to_string(PolicyKind kind);
// Accepts the CLI spellings eimpact / toxicity / combined.
std::optional<PolicyKind> parse_policy(std::string_view name);

struct Policy {
  PolicyKind kind = PolicyKind::Combined;
  int evaluation_cadence = 25;
  bool freeze_root_allowed = false;
};

struct InterventionOutcome {
  PolicyKind policy = PolicyKind::Combined;
  std::size_t arrivals = 0;
  std::size_t baseline_toxic = 0;
  std::size_t retained_toxic = 0;
  std::size_t suppressed = 0;
  NodeSet flagged;  // union of every evaluation's flag set
  NodeSet frozen;
  // Arrival count after which each frozen node was frozen; arrivals at
  // 0-based positions >= this value see the freeze.
  std::map<NodeId, std::size_t, IdLess> frozen_at;
  NodeSet suppressed_ids;
  double flagged_percent = 0.0;
  double reduction_percent = 0.0;
};

// Replays records in arrival order. Every `evaluation_cadence` arrivals the
// policy's flag set is computed on the retained graph and newly flagged nodes
// are frozen; later arrivals below a frozen node are suppressed. Throws
// MissingScore, MissingToxicity, OutOfOrderArrival (parent not yet arrived).
InterventionOutcome replay_with_policy(const Conversation& conversation,
                                       const std::map<NodeId, NodeId>& parents,
                                       const std::map<NodeId, EmotionScore, IdLess>& scores,
                                       const ToxicityMap& toxicity, const Policy& policy,
                                       const ImpactWeights& weights, double tox_threshold);

// One replay per policy kind, same cadence and inputs.
std::vector<InterventionOutcome> compare_policies(
    const Conversation& conversation, const std::map<NodeId, NodeId>& parents,
    const std::map<NodeId, EmotionScore, IdLess>& scores, const ToxicityMap& toxicity,
    const ImpactWeights& weights, double tox_threshold, int evaluation_cadence = 25);

struct SynthParams {
  std::uint64_t seed = 1;
  std::size_t max_nodes = 200;
  double base_branching = 1.5;
  PerEmotion<double> emotion_mix{1, 1, 1, 1, 1, 1};  // unnormalized prior
  double anger_multiplier = 1.0;
  // Probability that a reply repeats its parent's label instead of drawing
  // from emotion_mix.
  double label_inheritance = 0.5;
  double toxic_given_anger = 0.3;
  double toxic_given_other = 0.05;

  void validate() const;  // throws InvalidArgument
};

struct SyntheticConversation {
  Conversation conversation;
  std::map<NodeId, NodeId> parents;
  std::map<NodeId, EmotionScore, IdLess> scores;
  ToxicityMap toxicity;
};

// Breadth-first branching process. Reply counts are Poisson with mean
// base_branching (times anger_multiplier under anger parents); toxic nodes
// get a toxicity value in (0.9, 1], others one in [0, 0.9).
SyntheticConversation synthesize_conversation(const SynthParams& params);

}  // namespace eimpact
