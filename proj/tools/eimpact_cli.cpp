// eimpact command-line driver.
//
//   eimpact analyze    --input conv.csv --lexicon lex.csv --out out/
//   eimpact simulate   (--input conv.csv ... | --seed N) --out out/
//   eimpact export-dot --input conv.csv ... [--out out/]
//   eimpact synth      --seed N --out dir/
//
// Exit codes: 0 success, 1 stage failure, 2 usage/configuration error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "eimpact/csv.hpp"
#include "eimpact/error.hpp"
#include "eimpact/report.hpp"
#include "eimpact/simulate.hpp"

namespace fs = std::filesystem;
using namespace eimpact;

namespace {

constexpr int kExitStage = 1;
constexpr int kExitUsage = 2;

struct CommonOptions {
  RunConfig config;
  std::string weights;
  std::string provider;
  std::string policy = "combined";
  std::vector<std::string> languages{"en"};
  int request_interval_ms = 1000;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool input_required) {
  auto* input = cmd->add_option("--input", o.config.input, "conversation CSV")->check(CLI::ExistingFile);
  if (input_required) input->required();
  cmd->add_option("--lexicon", o.config.lexicon, "emotion lexicon CSV (token,emotion,weight)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--emoji-map", o.config.emoji_map, "emoji map CSV (emoji,token)")->check(CLI::ExistingFile);
  cmd->add_option("--scores", o.config.scores, "precomputed emotion scores CSV (id,label,score)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--toxicity", o.config.toxicity, "precomputed toxicity CSV (id,value)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--toxicity-lexicon", o.config.toxicity_lexicon, "offline toxicity lexicon CSV (token,weight)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--toxicity-provider", o.provider, "offline | remote | precomputed")
      ->check(CLI::IsMember({"offline", "remote", "precomputed"}));
  cmd->add_option("--toxicity-endpoint", o.config.toxicity_config.endpoint, "remote scoring endpoint URL");
  cmd->add_option("--api-key-env", o.config.toxicity_config.api_key_env, "environment variable holding the API key")
      ->capture_default_str();
  cmd->add_option("--max-retries", o.config.toxicity_config.max_retries)->capture_default_str();
  cmd->add_option("--request-interval-ms", o.request_interval_ms)->capture_default_str();
  cmd->add_option("--tox-threshold", o.config.toxicity_config.threshold)->capture_default_str();
  cmd->add_option("--weights", o.weights, "alpha,beta,gamma,lambda");
  cmd->add_flag("--include-root", o.config.weights.include_root, "count the root in the emotion board");
  cmd->add_option("--policy", o.policy, "eimpact | toxicity | combined")
      ->check(CLI::IsMember({"eimpact", "toxicity", "combined"}))
      ->capture_default_str();
  cmd->add_option("--cadence", o.config.policy.evaluation_cadence, "re-evaluate flags every k arrivals")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--drilldown-depth", o.config.drilldown_depth)->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd->add_option("--lang", o.languages, "allowed language tags")->capture_default_str();
}

// Throws std::invalid_argument on malformed values.
void finalize(CommonOptions& o) {
  if (!o.weights.empty()) {
    std::vector<double> parts;
    std::stringstream ss(o.weights);
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::size_t used = 0;
      double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument("bad number in --weights: " + item);
      parts.push_back(v);
    }
    if (parts.size() != 4) throw std::invalid_argument("--weights expects alpha,beta,gamma,lambda");
    o.config.weights.alpha = parts[0];
    o.config.weights.beta = parts[1];
    o.config.weights.gamma = parts[2];
    o.config.weights.lambda = parts[3];
  }
  if (o.provider.empty()) o.provider = o.config.toxicity.empty() ? "offline" : "precomputed";
  o.config.toxicity_config.provider = *parse_toxicity_source(o.provider);
  o.config.toxicity_config.request_interval = std::chrono::milliseconds(o.request_interval_ms);
  o.config.policy.kind = *parse_policy(o.policy);
  o.config.languages = {o.languages.begin(), o.languages.end()};
  o.config.weights.validate();
  o.config.toxicity_config.validate();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
}

void print_warnings(const AnalysisReport& report) {
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
}

int run_synth(const SynthParams& params, const fs::path& out_dir) {
  auto synth = synthesize_conversation(params);
  fs::create_directories(out_dir);
  std::ostringstream conv, scores, tox;
  write_records(conv, synth.conversation.records);
  csv::write_row(scores, {"id", "label", "score"});
  for (const auto& r : synth.conversation.records) {
    const auto& s = synth.scores.at(r.id);
    csv::write_row(scores, {r.id, std::string(to_string(s.label)), format_number(s.score)});
  }
  csv::write_row(tox, {"id", "value"});
  for (const auto& r : synth.conversation.records)
    csv::write_row(tox, {r.id, format_number(synth.toxicity.at(r.id).value)});
  write_text(out_dir / "conversation.csv", conv.str());
  write_text(out_dir / "scores.csv", scores.str());
  write_text(out_dir / "toxicity.csv", tox.str());
  std::cout << "wrote " << synth.conversation.records.size() << " records to " << out_dir.string() << "\n";
  return 0;
}

void write_outcomes(const fs::path& dir, const std::vector<std::vector<InterventionOutcome>>& runs) {
  fs::create_directories(dir);
  std::ostringstream csv_out;
  write_outcomes_csv(csv_out, runs);
  write_text(dir / "outcomes.csv", csv_out.str());
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& outcomes : runs)
    for (const auto& o : outcomes) arr.push_back(outcome_json(o));
  write_text(dir / "outcomes.json", arr.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Emotion propagation and influential-node analysis for reply trees"};
  app.require_subcommand(1);

  CommonOptions analyze_opts, simulate_opts, dot_opts;
  fs::path analyze_out, simulate_out, dot_out;

  auto* analyze = app.add_subcommand("analyze", "run the full pipeline and write all reports");
  add_common(analyze, analyze_opts, true);
  analyze->add_option("--out", analyze_out, "output directory")->required();

  SynthParams sim_params;
  bool sim_seed_given = false;
  auto* simulate = app.add_subcommand("simulate", "compare freeze policies by timeline replay");
  add_common(simulate, simulate_opts, false);
  simulate->add_option("--out", simulate_out, "output directory")->required();
  simulate->add_option("--seed", sim_params.seed, "synthesize a conversation instead of reading --input")
      ->each([&](const std::string&) { sim_seed_given = true; });
  simulate->add_option("--max-nodes", sim_params.max_nodes)->capture_default_str();
  simulate->add_option("--branching", sim_params.base_branching)->capture_default_str();
  simulate->add_option("--anger-multiplier", sim_params.anger_multiplier)->capture_default_str();

  auto* dot = app.add_subcommand("export-dot", "write the colour-coded conversation graph");
  add_common(dot, dot_opts, true);
  dot->add_option("--out", dot_out, "output directory (stdout when omitted)");

  SynthParams synth_params;
  fs::path synth_out;
  auto* synth = app.add_subcommand("synth", "generate a synthetic conversation with scores and toxicity");
  synth->add_option("--seed", synth_params.seed)->required();
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--max-nodes", synth_params.max_nodes)->capture_default_str();
  synth->add_option("--branching", synth_params.base_branching)->capture_default_str();
  synth->add_option("--anger-multiplier", synth_params.anger_multiplier)->capture_default_str();
  synth->add_option("--inheritance", synth_params.label_inheritance)->capture_default_str();
  synth->add_option("--toxic-given-anger", synth_params.toxic_given_anger)->capture_default_str();
  synth->add_option("--toxic-given-other", synth_params.toxic_given_other)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (analyze->parsed()) finalize(analyze_opts);
    if (simulate->parsed()) {
      finalize(simulate_opts);
      if (simulate_opts.config.input.empty() && !sim_seed_given)
        throw std::invalid_argument("simulate needs --input or --seed");
      sim_params.validate();
    }
    if (dot->parsed()) finalize(dot_opts);
    if (synth->parsed()) synth_params.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (analyze->parsed()) {
      analyze_opts.config.out_dir = analyze_out;
      auto report = run_analysis(analyze_opts.config);
      print_warnings(report);
      write_analysis_outputs(report);
      std::cout << "analyzed " << report.conversations.size() << " conversation(s); reports in "
                << analyze_out.string() << "\n";
    } else if (simulate->parsed()) {
      std::vector<std::vector<InterventionOutcome>> runs;
      if (!simulate_opts.config.input.empty()) {
        auto report = run_analysis(simulate_opts.config);
        print_warnings(report);
        for (const auto& a : report.conversations) runs.push_back(a.outcomes);
      } else {
        auto s = synthesize_conversation(sim_params);
        const auto& cfg = simulate_opts.config;
        runs.push_back(compare_policies(s.conversation, s.parents, s.scores, s.toxicity, cfg.weights,
                                        cfg.toxicity_config.threshold, cfg.policy.evaluation_cadence));
      }
      write_outcomes(simulate_out, runs);
      for (const auto& o : runs.front())
        std::cout << to_string(o.policy) << ": flagged " << format_number(o.flagged_percent)
                  << "%, reduction " << format_number(o.reduction_percent) << "%\n";
    } else if (dot->parsed()) {
      auto report = run_analysis(dot_opts.config);
      print_warnings(report);
      std::string text;
      for (const auto& a : report.conversations)
        text += export_dot(a.graph, a.impact.board, a.impact.influential, a.frozen);
      if (dot_out.empty()) {
        std::cout << text;
      } else {
        fs::create_directories(dot_out);
        write_text(dot_out / "graph.dot", text);
      }
    } else if (synth->parsed()) {
      return run_synth(synth_params, synth_out);
    }
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.stage() == "config" ? kExitUsage : kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "error: stage 'output': " << e.what() << "\n";
    return kExitStage;
  }
  return 0;
}
