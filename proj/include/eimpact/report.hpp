#pragma once
// End-to-end pipeline (ingest -> score -> analyze -> toxicity -> replay) and
// the report writers: report.json, graph.dot, plot-series CSVs, outcomes.

#include <filesystem>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eimpact/corpus.hpp"
#include "eimpact/graph.hpp"
#include "eimpact/impact.hpp"
#include "eimpact/simulate.hpp"
#include "eimpact/toxicity.hpp"

namespace eimpact {

inline constexpr int kReportSchemaVersion = 1;

struct RunConfig {
  std::filesystem::path input;
  std::filesystem::path lexicon;           // optional
  std::filesystem::path emoji_map;         // optional
  std::filesystem::path scores;            // optional precomputed emotion labels
  std::filesystem::path toxicity;          // optional precomputed toxicity
  std::filesystem::path toxicity_lexicon;  // optional, offline provider
  std::set<std::string> languages{"en"};
  ImpactWeights weights;
  ToxicityConfig toxicity_config;
  Policy policy;
  int drilldown_depth = 2;
  std::filesystem::path out_dir;
};

// Failure inside one pipeline stage ("corpus", "affect", "graph", ...).
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message)
      : std::runtime_error("stage '" + stage + "': " + message), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct InfluentialDetail {
  NodeId id;
  double impact = 0.0;
  WienerIndex wiener;
  PerEmotion<double> distribution{};  // percent of scored subtree nodes
  std::optional<EmotionLabel> dominant;
};

struct ConversationAnalysis {
  explicit ConversationAnalysis(ConversationGraph g) : graph(std::move(g)) {}

  ConversationGraph graph;
  Conversation conversation;
  ParentResolution resolution;
  std::map<NodeId, EmotionScore, IdLess> scores;
  ImpactAnalysis impact;
  Drilldown drill;
  std::vector<InfluentialDetail> influential;
  PerEmotion<double> shift{};
  ToxicityMap toxicity;
  NodeSet toxic;
  CombinedResult combined;
  double concentration = 0.0;
  std::vector<InterventionOutcome> outcomes;  // one per policy kind
  NodeSet frozen;                             // under the configured policy
};

struct AnalysisReport {
  RunConfig config;
  std::vector<ConversationAnalysis> conversations;
  std::vector<DroppedRecord> filtered;  // language/media drops
  std::vector<std::string> warnings;
  std::string generated_at;
};

// Throws StageError; usage problems (missing files, bad weights) surface as
// StageError with stage "config".
AnalysisReport run_analysis(const RunConfig& config);

nlohmann::ordered_json report_json(const AnalysisReport& report);
nlohmann::ordered_json outcome_json(const InterventionOutcome& outcome);
// Drops volatile fields (generated_at) and rounds floats to 12 significant
// digits so runs compare equal across platforms.
nlohmann::ordered_json canonicalize_report(nlohmann::ordered_json report);

std::string export_dot(const ConversationGraph& graph, const EmotionBoard& board,
                       const InfluentialSet& influential, const NodeSet& frozen);

void write_wiener_series(std::ostream& out, const AnalysisReport& report);
void write_distribution_series(std::ostream& out, const AnalysisReport& report);
// Corpus-level totals per policy: flagged and reduction percentages.
void write_outcomes_csv(std::ostream& out, const std::vector<std::vector<InterventionOutcome>>& runs);
void write_dropped_csv(std::ostream& out, const AnalysisReport& report);

// Writes report.json, graph.dot, wiener_vs_emotion.csv, distribution.csv,
// outcomes.csv and dropped.csv into config.out_dir. Throws IoError.
void write_analysis_outputs(const AnalysisReport& report);

std::string format_number(double value);
std::string utc_now();

}  // namespace eimpact
