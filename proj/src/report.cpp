#include "eimpact/report.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <memory>
#include <sstream>

#include "eimpact/csv.hpp"
#include "eimpact/error.hpp"

namespace eimpact {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw StageError(name, e.what());
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return in;
}

ordered_json per_emotion_json(const PerEmotion<double>& values) {
  ordered_json j = ordered_json::object();
  for (auto e : kAllEmotions) j[std::string(to_string(e))] = values[index_of(e)];
  return j;
}

ordered_json id_array(const NodeSet& ids) {
  ordered_json j = ordered_json::array();
  for (const auto& id : ids) j.push_back(id);
  return j;
}

ordered_json influential_json(const InfluentialSet& set) {
  return {{"threshold", set.threshold}, {"members", id_array(set.members)}};
}

std::optional<EmotionLabel> dominant_of(const PerEmotion<double>& pct) {
  std::optional<EmotionLabel> best;
  for (auto e : kAllEmotions)
    if (pct[index_of(e)] > 0.0 && (!best || pct[index_of(e)] > pct[index_of(*best)])) best = e;
  return best;
}

std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

const char* emotion_color(const EmotionScore& s) {
  if (!s.scored) return "gray";
  switch (s.label) {
    case EmotionLabel::Anger: return "red";
    case EmotionLabel::Fear: return "purple";
    case EmotionLabel::Joy: return "yellow";
    case EmotionLabel::Love: return "pink";
    case EmotionLabel::Sadness: return "blue";
    case EmotionLabel::Surprise: return "orange";
  }
  return "gray";
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

AnalysisReport run_analysis(const RunConfig& config) {
  AnalysisReport report;
  report.config = config;
  report.generated_at = utc_now();

  stage("config", [&] {
    config.weights.validate();
    config.toxicity_config.validate();
    if (config.policy.evaluation_cadence < 1)
      throw Error(ErrorCode::InvalidArgument, "cadence must be >= 1");
    for (const auto* p : {&config.input, &config.lexicon, &config.emoji_map, &config.scores,
                          &config.toxicity, &config.toxicity_lexicon})
      if (!p->empty() && !fs::exists(*p)) throw Error(ErrorCode::IoError, "file not found: " + p->string());
    if (config.toxicity_config.provider == ToxicitySource::Precomputed && config.toxicity.empty())
      throw Error(ErrorCode::InvalidArgument, "precomputed toxicity provider needs a toxicity file");
  });

  auto conversations = stage("corpus", [&] {
    auto in = open_input(config.input);
    auto records = parse_records(in);
    auto filtered = filter_records(records, config.languages);
    report.filtered = filtered.dropped;
    auto groups = group_conversations(std::move(filtered.kept));
    std::vector<std::pair<Conversation, ParentResolution>> out;
    for (auto& conv : groups) {
      auto resolution = resolve_parents(conv.records);
      apply_resolution(conv, resolution);
      out.emplace_back(std::move(conv), std::move(resolution));
    }
    return out;
  });

  // Scorers are loaded once for every conversation.
  struct Scoring {
    std::unique_ptr<LexiconScorer> lexicon;
    PrecomputedScores precomputed;
  };
  auto scoring = stage("affect", [&] {
    Scoring s;
    if (!config.lexicon.empty()) {
      auto in = open_input(config.lexicon);
      auto lexicon = load_lexicon(in);
      if (!config.emoji_map.empty()) {
        auto em = open_input(config.emoji_map);
        load_emoji_map(em, lexicon);
      }
      s.lexicon = std::make_unique<LexiconScorer>(std::move(lexicon));
    }
    if (!config.scores.empty()) {
      auto in = open_input(config.scores);
      s.precomputed = load_precomputed_scores(in);
      report.warnings.insert(report.warnings.end(), s.precomputed.warnings.begin(),
                             s.precomputed.warnings.end());
    }
    return s;
  });

  struct ToxicitySources {
    PrecomputedToxicity precomputed;
    ToxicityLexicon lexicon;
    std::unique_ptr<RemoteToxicityScorer> remote;
  };
  auto tox_sources = stage("toxicity", [&] {
    ToxicitySources t;
    if (!config.toxicity.empty()) {
      auto in = open_input(config.toxicity);
      t.precomputed = load_precomputed_toxicity(in);
      report.warnings.insert(report.warnings.end(), t.precomputed.warnings.begin(),
                             t.precomputed.warnings.end());
    }
    if (!config.toxicity_lexicon.empty()) {
      auto in = open_input(config.toxicity_lexicon);
      t.lexicon = load_toxicity_lexicon(in);
    }
    if (config.toxicity_config.provider == ToxicitySource::Remote)
      t.remote = std::make_unique<RemoteToxicityScorer>(config.toxicity_config);
    return t;
  });

  const double threshold = config.toxicity_config.threshold;
  for (auto& [conv, resolution] : conversations) {
    auto scores = stage("affect", [&] {
      std::map<NodeId, EmotionScore, IdLess> out;
      for (const auto& r : conv.records) {
        if (auto it = scoring.precomputed.scores.find(r.id); it != scoring.precomputed.scores.end())
          out[r.id] = it->second;
        else if (scoring.lexicon)
          out[r.id] = scoring.lexicon->score(r.text);
        else
          out[r.id] = EmotionScore::unscored();
      }
      return out;
    });

    auto graph = stage("graph", [&] { return build_graph(conv, resolution.parents, scores); });
    ConversationAnalysis a(std::move(graph));
    a.conversation = conv;
    a.resolution = resolution;
    a.scores = std::move(scores);

    stage("impact", [&] {
      a.impact = analyze_impact(a.graph, config.weights);
      a.drill = drilldown(a.graph, a.impact.influential, config.weights, config.drilldown_depth);
      for (const auto& id : a.impact.influential.members) {
        auto v = a.graph.index(id);
        InfluentialDetail d;
        d.id = id;
        d.impact = a.impact.impacts[v];
        d.wiener = wiener_index(a.graph, v);
        d.distribution = tree_emotion_distribution(a.graph, v);
        d.dominant = dominant_of(d.distribution);
        a.influential.push_back(std::move(d));
      }
      a.shift = distribution_shift(a.graph, a.impact.impacts, config.weights);
    });

    stage("toxicity", [&] {
      std::size_t missing = 0;
      for (const auto& r : conv.records) {
        if (auto it = tox_sources.precomputed.values.find(r.id); it != tox_sources.precomputed.values.end()) {
          a.toxicity[r.id] = it->second;
          continue;
        }
        switch (config.toxicity_config.provider) {
          case ToxicitySource::Remote:
            a.toxicity[r.id] = tox_sources.remote->score(r.text);
            break;
          case ToxicitySource::Offline:
            a.toxicity[r.id] = offline_toxicity_score(tokenize(r.text), tox_sources.lexicon);
            break;
          case ToxicitySource::Precomputed:
            a.toxicity[r.id] = {0.0, ToxicitySource::Precomputed};
            ++missing;
            break;
        }
      }
      if (missing > 0)
        report.warnings.push_back(conv.conversation_id + ": " + std::to_string(missing) +
                                  " node(s) missing from the toxicity file, treated as 0");
      a.toxic = toxic_nodes(a.toxicity, threshold);
      a.combined = combined_influential(a.impact.influential, a.toxic);
      a.concentration = toxicity_concentration(a.graph, a.toxic, a.impact.influential);
    });

    stage("simulate", [&] {
      for (auto kind : kAllPolicies) {
        Policy p = config.policy;
        p.kind = kind;
        a.outcomes.push_back(replay_with_policy(a.conversation, a.resolution.parents, a.scores,
                                                a.toxicity, p, config.weights, threshold));
        if (kind == config.policy.kind) a.frozen = a.outcomes.back().frozen;
      }
    });

    report.conversations.push_back(std::move(a));
  }
  return report;
}

ordered_json outcome_json(const InterventionOutcome& o) {
  return {{"policy", std::string(to_string(o.policy))},
          {"arrivals", o.arrivals},
          {"baseline_toxic", o.baseline_toxic},
          {"retained_toxic", o.retained_toxic},
          {"suppressed", o.suppressed},
          {"flagged", id_array(o.flagged)},
          {"frozen", id_array(o.frozen)},
          {"flagged_percent", o.flagged_percent},
          {"reduction_percent", o.reduction_percent}};
}

ordered_json report_json(const AnalysisReport& report) {
  const auto& cfg = report.config;
  ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["generated_at"] = report.generated_at;
  j["config"] = {
      {"weights",
       {{"alpha", cfg.weights.alpha},
        {"beta", cfg.weights.beta},
        {"gamma", cfg.weights.gamma},
        {"lambda", cfg.weights.lambda},
        {"include_root", cfg.weights.include_root}}},
      {"tox_threshold", cfg.toxicity_config.threshold},
      {"toxicity_provider", std::string(to_string(cfg.toxicity_config.provider))},
      {"policy", std::string(to_string(cfg.policy.kind))},
      {"cadence", cfg.policy.evaluation_cadence},
      {"drilldown_depth", cfg.drilldown_depth}};

  ordered_json filtered = ordered_json::array();
  for (const auto& d : report.filtered)
    filtered.push_back({{"id", d.id}, {"reason", std::string(to_string(d.reason))}});
  j["filtered"] = std::move(filtered);

  ordered_json convs = ordered_json::array();
  for (const auto& a : report.conversations) {
    const auto& g = a.graph;
    ordered_json c;
    c["conversation_id"] = a.conversation.conversation_id;
    c["root"] = g.id(g.root());
    c["node_count"] = g.size();
    c["edge_count"] = g.edge_count();

    ordered_json dropped = ordered_json::array();
    for (const auto& d : a.conversation.dropped)
      dropped.push_back({{"id", d.id}, {"reason", std::string(to_string(d.reason))}});
    c["dropped"] = std::move(dropped);

    c["emotion_board"] = per_emotion_json(a.impact.board.proportions);

    ordered_json members = ordered_json::array();
    for (const auto& d : a.influential) {
      members.push_back({{"id", d.id},
                         {"impact", d.impact},
                         {"wiener_index", d.wiener.value},
                         {"subtree_size", d.wiener.n},
                         {"dominant_emotion", d.dominant ? std::string(to_string(*d.dominant)) : "none"},
                         {"emotion_distribution", per_emotion_json(d.distribution)}});
    }
    c["influential"] = {{"threshold", a.impact.influential.threshold}, {"members", std::move(members)}};

    ordered_json drill = ordered_json::object();
    for (const auto& [id, set] : a.drill) drill[id] = influential_json(set);
    c["drilldown"] = std::move(drill);

    c["distribution_shift"] = per_emotion_json(a.shift);

    c["toxicity"] = {{"threshold", cfg.toxicity_config.threshold},
                     {"toxic", id_array(a.toxic)},
                     {"combined", id_array(a.combined.combined)},
                     {"containment", a.combined.overlap.containment},
                     {"jaccard", a.combined.overlap.jaccard},
                     {"concentration", a.concentration}};

    ordered_json outcomes = ordered_json::array();
    for (const auto& o : a.outcomes) outcomes.push_back(outcome_json(o));
    c["outcomes"] = std::move(outcomes);

    ordered_json nodes = ordered_json::array();
    for (std::size_t v = 0; v < g.size(); ++v) {
      const auto& m = a.impact.metrics[v];
      const auto& e = g.emotion(v);
      ordered_json n;
      n["id"] = g.id(v);
      n["parent"] = v == g.root() ? ordered_json(nullptr) : ordered_json(g.id(g.parent(v)));
      n["label"] = e.scored ? ordered_json(std::string(to_string(e.label))) : ordered_json(nullptr);
      n["emotion_score"] = m.emotion_score;
      n["direct_responses"] = m.direct_responses;
      n["engagement"] = m.engagement;
      n["depth"] = m.depth;
      n["pagerank"] = m.pagerank;
      n["impact"] = a.impact.impacts[v];
      n["toxicity"] = a.toxicity.at(g.id(v)).value;
      nodes.push_back(std::move(n));
    }
    c["nodes"] = std::move(nodes);
    convs.push_back(std::move(c));
  }
  j["conversations"] = std::move(convs);
  j["warnings"] = report.warnings;
  return j;
}

namespace {

void round_floats(ordered_json& j) {
  if (j.is_number_float()) {
    double v = j.get<double>();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    double r = std::strtod(buf, nullptr);
    j = r == 0.0 ? 0.0 : r;  // no negative zero
  } else if (j.is_structured()) {
    for (auto& child : j) round_floats(child);
  }
}

}  // namespace

ordered_json canonicalize_report(ordered_json report) {
  report.erase("generated_at");
  round_floats(report);
  return report;
}

std::string export_dot(const ConversationGraph& graph, const EmotionBoard& board,
                       const InfluentialSet& influential, const NodeSet& frozen) {
  std::vector<std::size_t> order(graph.size());
  for (std::size_t v = 0; v < order.size(); ++v) order[v] = v;
  std::sort(order.begin(), order.end(),
            [&](auto a, auto b) { return id_less(graph.id(a), graph.id(b)); });

  std::string board_label;
  for (auto e : kAllEmotions) {
    if (!board_label.empty()) board_label += ' ';
    board_label += std::string(to_string(e)) + "=" + fixed2(board[e]);
  }

  std::ostringstream out;
  out << "digraph " << dot_quote(graph.id(graph.root())) << " {\n";
  out << "  graph [rankdir=BT, label=" << dot_quote("emotion board: " + board_label) << "];\n";
  out << "  node [shape=circle, style=filled, fontname=\"Helvetica\"];\n";
  for (auto v : order) {
    const auto& id = graph.id(v);
    const auto& e = graph.emotion(v);
    std::string label = id + "\n" + (e.scored ? std::string(to_string(e.label)) + " " + fixed2(e.score) : "unscored");
    out << "  " << dot_quote(id) << " [label=" << dot_quote(label) << ", fillcolor=\""
        << emotion_color(e) << "\"";
    if (influential.members.contains(id)) out << ", peripheries=2";
    if (frozen.contains(id)) out << ", style=\"filled,bold\", penwidth=3, frozen=true";
    out << "];\n";
  }
  for (auto v : order) {
    if (v == graph.root()) continue;
    out << "  " << dot_quote(graph.id(v)) << " -> " << dot_quote(graph.id(graph.parent(v))) << ";\n";
  }
  out << "}\n";
  return out.str();
}

void write_wiener_series(std::ostream& out, const AnalysisReport& report) {
  csv::write_row(out, {"influential_node_id", "dominant_emotion", "emotion", "pct_in_subtree",
                       "wiener_index"});
  for (const auto& a : report.conversations)
    for (const auto& d : a.influential)
      for (auto e : kAllEmotions)
        csv::write_row(out, {d.id, d.dominant ? std::string(to_string(*d.dominant)) : "none",
                             std::string(to_string(e)), format_number(d.distribution[index_of(e)]),
                             format_number(d.wiener.value)});
}

void write_distribution_series(std::ostream& out, const AnalysisReport& report) {
  csv::write_row(out, {"influential_node_id", "emotion", "pct"});
  for (const auto& a : report.conversations)
    for (const auto& d : a.influential)
      for (auto e : kAllEmotions)
        csv::write_row(out, {d.id, std::string(to_string(e)), format_number(d.distribution[index_of(e)])});
}

void write_outcomes_csv(std::ostream& out, const std::vector<std::vector<InterventionOutcome>>& runs) {
  csv::write_row(out, {"policy", "flagged_pct", "reduction_pct"});
  for (auto kind : kAllPolicies) {
    std::size_t arrivals = 0, flagged = 0, baseline = 0, retained = 0;
    for (const auto& outcomes : runs)
      for (const auto& o : outcomes) {
        if (o.policy != kind) continue;
        arrivals += o.arrivals;
        flagged += o.flagged.size();
        baseline += o.baseline_toxic;
        retained += o.retained_toxic;
      }
    double flagged_pct = arrivals ? 100.0 * static_cast<double>(flagged) / static_cast<double>(arrivals) : 0.0;
    double reduction = baseline ? 100.0 * static_cast<double>(baseline - retained) / static_cast<double>(baseline) : 0.0;
    csv::write_row(out, {std::string(to_string(kind)), format_number(flagged_pct), format_number(reduction)});
  }
}

void write_dropped_csv(std::ostream& out, const AnalysisReport& report) {
  csv::write_row(out, {"id", "reason"});
  for (const auto& d : report.filtered) csv::write_row(out, {d.id, std::string(to_string(d.reason))});
  for (const auto& a : report.conversations)
    for (const auto& d : a.conversation.dropped)
      csv::write_row(out, {d.id, std::string(to_string(d.reason))});
}

void write_analysis_outputs(const AnalysisReport& report) {
  const auto& dir = report.config.out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());

  write_file(dir / "report.json", report_json(report).dump(2) + "\n");

  std::string dot;
  for (const auto& a : report.conversations)
    dot += export_dot(a.graph, a.impact.board, a.impact.influential, a.frozen);
  write_file(dir / "graph.dot", dot);

  std::ostringstream wiener, dist, outcomes, dropped;
  write_wiener_series(wiener, report);
  write_distribution_series(dist, report);
  std::vector<std::vector<InterventionOutcome>> runs;
  for (const auto& a : report.conversations) runs.push_back(a.outcomes);
  write_outcomes_csv(outcomes, runs);
  write_dropped_csv(dropped, report);
  write_file(dir / "wiener_vs_emotion.csv", wiener.str());
  write_file(dir / "distribution.csv", dist.str());
  write_file(dir / "outcomes.csv", outcomes.str());
  write_file(dir / "dropped.csv", dropped.str());
}

}  // namespace eimpact
