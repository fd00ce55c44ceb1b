#include "eimpact/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "eimpact/error.hpp"

namespace eimpact {

namespace {

enum class ArrivalState { Retained, Suppressed };

// mt19937_64 output is fully specified; the std distributions are not, so
// uniform and Poisson draws are done by hand to keep outputs identical across
// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::size_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    std::size_t k = 0;
    double p = uniform();
    while (p > limit) {
      ++k;
      p *= uniform();
    }
    return k;
  }

  std::size_t categorical(const PerEmotion<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double target = uniform() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (target < weights[i]) return i;
      target -= weights[i];
    }
    for (std::size_t i = weights.size(); i-- > 0;)
      if (weights[i] > 0) return i;
    return 0;
  }

 private:
  std::mt19937_64 engine_;
};

std::string pad(std::size_t v, int width) {
  std::string s = std::to_string(v);
  if (static_cast<int>(s.size()) < width) s.insert(0, width - s.size(), '0');
  return s;
}

}  // namespace

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::EImpactOnly: return "eimpact";
    case PolicyKind::ToxicityOnly: return "toxicity";
    case PolicyKind::Combined: return "combined";
  }
  return "combined";
}

std::optional<PolicyKind> parse_policy(std::string_view name) {
  for (auto k : kAllPolicies)
    if (to_string(k) == name) return k;
  return std::nullopt;
}

InterventionOutcome replay_with_policy(const Conversation& conversation,
                                       const std::map<NodeId, NodeId>& parents,
                                       const std::map<NodeId, EmotionScore, IdLess>& scores,
                                       const ToxicityMap& toxicity, const Policy& policy,
                                       const ImpactWeights& weights, double tox_threshold) {
  if (policy.evaluation_cadence < 1)
    throw Error(ErrorCode::InvalidArgument, "evaluation cadence must be >= 1");
  weights.validate();

  std::vector<const ConversationRecord*> arrivals;
  for (const auto& r : conversation.records) {
    if (!scores.contains(r.id)) throw Error(ErrorCode::MissingScore, r.id);
    if (!toxicity.contains(r.id)) throw Error(ErrorCode::MissingToxicity, r.id);
    arrivals.push_back(&r);
  }
  std::sort(arrivals.begin(), arrivals.end(), [](auto* a, auto* b) { return arrival_before(*a, *b); });

  InterventionOutcome out;
  out.policy = policy.kind;

  auto is_toxic = [&](const NodeId& id) { return toxicity.at(id).value > tox_threshold; };

  std::unordered_map<std::string, ArrivalState> state;
  std::unordered_map<std::string, std::string> parent_of;  // retained nodes only
  std::vector<const ConversationRecord*> retained;
  std::unordered_set<std::string> frozen;
  std::string root;
  std::size_t count = 0;

  auto blocked_by_freeze = [&](const std::string& start) {
    for (const std::string* v = &start;;) {
      if (frozen.contains(*v)) return true;
      auto it = parent_of.find(*v);
      if (it == parent_of.end()) return false;
      v = &it->second;
    }
  };

  auto evaluate = [&] {
    std::vector<NodeId> ids;
    std::vector<std::size_t> parent_idx;
    std::vector<EmotionScore> emotions;
    std::unordered_map<std::string, std::size_t> index;
    for (auto* r : retained) {
      index.emplace(r->id, ids.size());
      ids.push_back(r->id);
      emotions.push_back(scores.at(r->id));
      auto p = parent_of.find(r->id);
      parent_idx.push_back(p == parent_of.end() ? ConversationGraph::kNoParent : index.at(p->second));
    }
    ConversationGraph graph(std::move(ids), std::move(parent_idx), std::move(emotions));

    NodeSet flags;
    NodeSet toxic;
    if (policy.kind != PolicyKind::EImpactOnly)
      for (auto* r : retained)
        if (is_toxic(r->id)) toxic.insert(r->id);
    switch (policy.kind) {
      case PolicyKind::EImpactOnly:
        flags = analyze_impact(graph, weights).influential.members;
        break;
      case PolicyKind::ToxicityOnly:
        flags = toxic;
        break;
      case PolicyKind::Combined:
        flags = combined_influential(analyze_impact(graph, weights).influential, toxic).combined;
        break;
    }
    for (const auto& id : flags) {
      out.flagged.insert(id);
      if (id == root && !policy.freeze_root_allowed) continue;
      if (frozen.insert(id).second) out.frozen_at.emplace(id, count);
    }
  };

  for (auto* r : arrivals) {
    auto p = parents.find(r->id);
    bool suppressed = false;
    if (p == parents.end()) {
      if (!root.empty()) throw Error(ErrorCode::MultipleRoots, root + "," + r->id);
      root = r->id;
    } else {
      auto ps = state.find(p->second);
      if (ps == state.end()) throw Error(ErrorCode::OutOfOrderArrival, r->id);
      suppressed = ps->second == ArrivalState::Suppressed || blocked_by_freeze(p->second);
    }

    if (suppressed) {
      state[r->id] = ArrivalState::Suppressed;
      out.suppressed_ids.insert(r->id);
    } else {
      state[r->id] = ArrivalState::Retained;
      if (p != parents.end()) parent_of[r->id] = p->second;
      retained.push_back(r);
    }
    if (is_toxic(r->id)) {
      ++out.baseline_toxic;
      if (!suppressed) ++out.retained_toxic;
    }

    ++count;
    if (count % static_cast<std::size_t>(policy.evaluation_cadence) == 0) evaluate();
  }

  out.arrivals = arrivals.size();
  out.suppressed = out.suppressed_ids.size();
  out.frozen.insert(frozen.begin(), frozen.end());
  out.flagged_percent =
      out.arrivals == 0 ? 0.0 : 100.0 * static_cast<double>(out.flagged.size()) / static_cast<double>(out.arrivals);
  out.reduction_percent =
      out.baseline_toxic == 0
          ? 0.0
          : 100.0 * static_cast<double>(out.baseline_toxic - out.retained_toxic) /
                static_cast<double>(out.baseline_toxic);
  return out;
}

std::vector<InterventionOutcome> compare_policies(
    const Conversation& conversation, const std::map<NodeId, NodeId>& parents,
    const std::map<NodeId, EmotionScore, IdLess>& scores, const ToxicityMap& toxicity,
    const ImpactWeights& weights, double tox_threshold, int evaluation_cadence) {
  std::vector<InterventionOutcome> out;
  for (auto kind : kAllPolicies) {
    Policy policy{kind, evaluation_cadence, false};
    out.push_back(replay_with_policy(conversation, parents, scores, toxicity, policy, weights,
                                     tox_threshold));
  }
  return out;
}

void SynthParams::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (max_nodes < 1) throw Error(ErrorCode::InvalidArgument, "max_nodes must be >= 1");
  if (!(base_branching >= 0.0) || !std::isfinite(base_branching))
    throw Error(ErrorCode::InvalidArgument, "base_branching must be >= 0");
  if (!(anger_multiplier >= 1.0) || !std::isfinite(anger_multiplier))
    throw Error(ErrorCode::InvalidArgument, "anger_multiplier must be >= 1");
  if (!prob(label_inheritance) || !prob(toxic_given_anger) || !prob(toxic_given_other))
    throw Error(ErrorCode::InvalidArgument, "probabilities must lie in [0,1]");
  double total = 0.0;
  for (double w : emotion_mix) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw Error(ErrorCode::InvalidArgument, "emotion_mix weights must be >= 0");
    total += w;
  }
  if (total <= 0.0) throw Error(ErrorCode::InvalidArgument, "emotion_mix has no mass");
}

SyntheticConversation synthesize_conversation(const SynthParams& params) {
  params.validate();
  Rng rng(params.seed);
  SyntheticConversation out;
  const std::string conv_id = "s" + std::to_string(params.seed);
  out.conversation.conversation_id = conv_id;

  const Timestamp start = std::chrono::sys_days{std::chrono::year{2022} / 1 / 1};

  struct Pending {
    std::size_t index;
    EmotionLabel label;
  };
  std::deque<Pending> queue;

  auto add_node = [&](std::optional<std::size_t> parent, EmotionLabel label) {
    const std::size_t index = out.conversation.records.size();
    ConversationRecord r;
    r.id = index == 0 ? conv_id : conv_id + "-" + pad(index, 6);
    r.conversation_id = conv_id;
    r.author_id = "u" + std::to_string(index);
    r.created_at = start + std::chrono::seconds(index);
    r.lang = "en";
    r.text = "synthetic " + std::string(to_string(label)) + " message " + std::to_string(index);
    if (parent) {
      const auto& p = out.conversation.records[*parent];
      r.in_reply_to_user_id = p.author_id;
      r.parent_id = p.id;
      out.parents[r.id] = p.id;
    }
    const double prob = 0.5 + 0.5 * rng.uniform();
    out.scores[r.id] = EmotionScore{label, prob, true};
    const double p_toxic =
        label == EmotionLabel::Anger ? params.toxic_given_anger : params.toxic_given_other;
    const bool toxic = rng.uniform() < p_toxic;
    double value = toxic ? 0.9 + 0.1 * (1.0 - rng.uniform()) : 0.9 * rng.uniform();
    if (toxic) value = std::max(value, std::nextafter(0.9, 1.0));
    out.toxicity[r.id] = {value, ToxicitySource::Precomputed};
    out.conversation.records.push_back(std::move(r));
    queue.push_back({index, label});
  };

  add_node(std::nullopt, static_cast<EmotionLabel>(rng.categorical(params.emotion_mix)));
  while (!queue.empty() && out.conversation.records.size() < params.max_nodes) {
    auto node = queue.front();
    queue.pop_front();
    double mean = params.base_branching;
    if (node.label == EmotionLabel::Anger) mean *= params.anger_multiplier;
    const std::size_t replies = rng.poisson(mean);
    for (std::size_t k = 0; k < replies && out.conversation.records.size() < params.max_nodes; ++k) {
      EmotionLabel label = rng.uniform() < params.label_inheritance
                               ? node.label
                               : static_cast<EmotionLabel>(rng.categorical(params.emotion_mix));
      add_node(node.index, label);
    }
  }
  return out;
}

}  // namespace eimpact
