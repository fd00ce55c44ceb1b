#pragma once
// Toxicity scoring (offline lexicon, remote service, precomputed file),
// threshold flagging and the influential-and-toxic intersection.

#include <chrono>
#include <istream>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "eimpact/impact.hpp"

namespace eimpact {

enum class ToxicitySource { Offline, Remote, Precomputed };
std::string_view to_string(ToxicitySource source);
std::optional<ToxicitySource> parse_toxicity_source(std::string_view name);

struct ToxicityScore {
  double value = 0.0;
  ToxicitySource source = ToxicitySource::Offline;
  bool operator==(const ToxicityScore&) const = default;
};

using ToxicityMap = std::map<NodeId, ToxicityScore, IdLess>;
using NodeSet = std::set<NodeId, IdLess>;

struct ToxicityLexicon {
  std::unordered_map<std::string, double> weights;
  double saturation = 2.0;
};

// `token,weight` with weights in [0,1]. Throws MissingColumn, MalformedRow,
// InvalidLexicon.
ToxicityLexicon load_toxicity_lexicon(std::istream& source);

// min(1, sum of matched weights / saturation).
ToxicityScore offline_toxicity_score(const std::vector<std::string>& tokens,
                                     const ToxicityLexicon& lexicon);

struct PrecomputedToxicity {
  ToxicityMap values;
  std::vector<std::string> warnings;
};

// `id,value`; out-of-range values are clamped with a warning.
PrecomputedToxicity load_precomputed_toxicity(std::istream& source);

struct ToxicityConfig {
  double threshold = 0.9;
  ToxicitySource provider = ToxicitySource::Offline;
  std::string endpoint;  // e.g. https://host/v1alpha1/comments:analyze
  std::string api_key_env = "TOXICITY_API_KEY";
  int max_retries = 3;
  std::chrono::milliseconds request_interval{1000};
  std::chrono::milliseconds backoff_base{500};
  std::chrono::milliseconds timeout{10000};

  // Throws InvalidArgument unless 0 < threshold < 1 and counts/durations are
  // non-negative.
  void validate() const;
};

// Client for a comment-analysis service speaking
//   POST <endpoint>?key=<api key>
//   {"comment":{"text":...},"requestedAttributes":{"TOXICITY":{}}}
// and answering with attributeScores.TOXICITY.summaryScore.value.
//
// All requests made through one instance share a pacing gate: a request
// (retries included) starts at least request_interval after the previous one
// finished.
// HTTP 429 and 5xx are retried up to max_retries times with exponential
// backoff.
class RemoteToxicityScorer {
 public:
  // Throws MissingApiKey when the configured variable is unset or empty.
  explicit RemoteToxicityScorer(ToxicityConfig config);

  // Throws RateLimited, ProtocolError, Timeout, TransportError.
  ToxicityScore score(std::string_view text);

 private:
  void wait_for_slot(std::chrono::milliseconds extra_delay);

  ToxicityConfig config_;
  std::string api_key_;
  std::string base_;
  std::string path_;
  std::mutex gate_;
  std::chrono::steady_clock::time_point last_request_{};
  bool has_last_ = false;
};

ToxicityScore remote_toxicity_score(std::string_view text, const ToxicityConfig& config);

// Strictly above the threshold.
NodeSet toxic_nodes(const ToxicityMap& scores, double threshold);

struct Overlap {
  double containment = 0.0;  // |combined| / |toxic|
  double jaccard = 0.0;      // |combined| / |influential u toxic|
};

struct CombinedResult {
  NodeSet eimpact_set;
  NodeSet toxic_set;
  NodeSet combined;
  Overlap overlap;
};

CombinedResult combined_influential(const InfluentialSet& eimpact, const NodeSet& toxic);

// Share of toxic graph nodes lying in the reply subtree of some influential
// node (the influential node included).
double toxicity_concentration(const ConversationGraph& graph, const NodeSet& toxic,
                              const InfluentialSet& influential);

}  // namespace eimpact
