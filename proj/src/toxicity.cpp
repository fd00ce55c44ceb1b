#include "eimpact/toxicity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "eimpact/csv.hpp"
#include "eimpact/error.hpp"

namespace eimpact {

namespace {

double parse_number(const std::string& text, std::size_t line) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size() || std::isnan(v)) throw std::invalid_argument("bad number");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::MalformedRow, std::to_string(line));
  }
}

std::string percent_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(ToxicitySource source) {
  switch (source) {
    case ToxicitySource::Offline: return "offline";
    case ToxicitySource::Remote: return "remote";
    case ToxicitySource::Precomputed: return "precomputed";
  }
  return "offline";
}

std::optional<ToxicitySource> parse_toxicity_source(std::string_view name) {
  if (name == "offline") return ToxicitySource::Offline;
  if (name == "remote") return ToxicitySource::Remote;
  if (name == "precomputed") return ToxicitySource::Precomputed;
  return std::nullopt;
}

ToxicityLexicon load_toxicity_lexicon(std::istream& source) {
  auto table = csv::read_table(source, {"token", "weight"});
  const auto c_token = table.header.require("token");
  const auto c_weight = table.header.require("weight");
  ToxicityLexicon lexicon;
  for (const auto& row : table.rows) {
    const auto& token = row.fields[c_token];
    if (token.empty()) throw Error(ErrorCode::MalformedRow, std::to_string(row.line));
    double w = parse_number(row.fields[c_weight], row.line);
    if (!(w >= 0.0 && w <= 1.0)) throw Error(ErrorCode::InvalidLexicon, token + ":" + row.fields[c_weight]);
    lexicon.weights[token] = w;
  }
  return lexicon;
}

ToxicityScore offline_toxicity_score(const std::vector<std::string>& tokens,
                                     const ToxicityLexicon& lexicon) {
  double sum = 0.0;
  for (const auto& t : tokens)
    if (auto it = lexicon.weights.find(t); it != lexicon.weights.end()) sum += it->second;
  double value = lexicon.saturation > 0.0 ? std::min(1.0, sum / lexicon.saturation) : (sum > 0 ? 1.0 : 0.0);
  return {value, ToxicitySource::Offline};
}

PrecomputedToxicity load_precomputed_toxicity(std::istream& source) {
  auto table = csv::read_table(source, {"id", "value"});
  const auto c_id = table.header.require("id");
  const auto c_value = table.header.require("value");
  PrecomputedToxicity out;
  for (const auto& row : table.rows) {
    const auto& id = row.fields[c_id];
    if (id.empty()) throw Error(ErrorCode::MalformedRow, std::to_string(row.line));
    double v = parse_number(row.fields[c_value], row.line);
    if (v < 0.0 || v > 1.0) {
      out.warnings.push_back("toxicity " + row.fields[c_value] + " for id " + id +
                             " clamped to [0,1]");
      v = std::clamp(v, 0.0, 1.0);
    }
    out.values[id] = {v, ToxicitySource::Precomputed};
  }
  return out;
}

void ToxicityConfig::validate() const {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw Error(ErrorCode::InvalidArgument, "toxicity threshold must lie in (0,1)");
  if (max_retries < 0) throw Error(ErrorCode::InvalidArgument, "max_retries must be >= 0");
  if (request_interval.count() < 0 || backoff_base.count() < 0 || timeout.count() <= 0)
    throw Error(ErrorCode::InvalidArgument, "durations must be non-negative");
}

RemoteToxicityScorer::RemoteToxicityScorer(ToxicityConfig config) : config_(std::move(config)) {
  config_.validate();
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') throw Error(ErrorCode::MissingApiKey, config_.api_key_env);
  api_key_ = key;

  auto scheme = config_.endpoint.find("://");
  if (scheme == std::string::npos)
    throw Error(ErrorCode::InvalidArgument, "endpoint must be an absolute URL: " + config_.endpoint);
  auto slash = config_.endpoint.find('/', scheme + 3);
  base_ = config_.endpoint.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : config_.endpoint.substr(slash);
  path_ += (path_.find('?') == std::string::npos ? "?key=" : "&key=") + percent_encode(api_key_);
}

void RemoteToxicityScorer::wait_for_slot(std::chrono::milliseconds extra_delay) {
  auto now = std::chrono::steady_clock::now();
  auto earliest = now + extra_delay;
  if (has_last_) earliest = std::max(earliest, last_request_ + config_.request_interval);
  if (earliest > now) std::this_thread::sleep_until(earliest);
  last_request_ = std::chrono::steady_clock::now();
  has_last_ = true;
}

ToxicityScore RemoteToxicityScorer::score(std::string_view text) {
  std::lock_guard lock(gate_);

  nlohmann::json body = {{"comment", {{"text", std::string(text)}}},
                         {"requestedAttributes", {{"TOXICITY", nlohmann::json::object()}}}};
  const std::string payload = body.dump();

  httplib::Client client(base_);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  std::string last_failure;
  ErrorCode last_code = ErrorCode::TransportError;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    std::chrono::milliseconds backoff{0};
    if (attempt > 0) backoff = config_.backoff_base * (1LL << std::min(attempt - 1, 20));
    wait_for_slot(backoff);

    auto res = client.Post(path_, payload, "application/json");
    // Count the gap from the end of this attempt, so the server never sees
    // two requests closer than the interval regardless of latency.
    last_request_ = std::chrono::steady_clock::now();
    if (!res) {
      auto err = res.error();
      last_code = (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read)
                      ? ErrorCode::Timeout
                      : ErrorCode::TransportError;
      last_failure = httplib::to_string(err);
      continue;
    }
    if (res->status == 429) {
      last_code = ErrorCode::RateLimited;
      last_failure = "HTTP 429 after " + std::to_string(attempt + 1) + " attempts";
      continue;
    }
    if (res->status >= 500) {
      last_code = ErrorCode::TransportError;
      last_failure = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      throw Error(ErrorCode::ProtocolError, "HTTP " + std::to_string(res->status) + ": " + res->body);

    auto json = nlohmann::json::parse(res->body, nullptr, false);
    if (json.is_discarded()) throw Error(ErrorCode::ProtocolError, "response is not JSON");
    const auto pointer = nlohmann::json::json_pointer("/attributeScores/TOXICITY/summaryScore/value");
    if (!json.contains(pointer) || !json.at(pointer).is_number())
      throw Error(ErrorCode::ProtocolError, "missing attributeScores.TOXICITY.summaryScore.value");
    double value = json.at(pointer).get<double>();
    if (!(value >= 0.0 && value <= 1.0))
      throw Error(ErrorCode::ProtocolError, "summary score outside [0,1]");
    return {value, ToxicitySource::Remote};
  }
  throw Error(last_code, last_failure);
}

ToxicityScore remote_toxicity_score(std::string_view text, const ToxicityConfig& config) {
  RemoteToxicityScorer scorer(config);
  return scorer.score(text);
}

NodeSet toxic_nodes(const ToxicityMap& scores, double threshold) {
  NodeSet out;
  for (const auto& [id, s] : scores)
    if (s.value > threshold) out.insert(id);
  return out;
}

CombinedResult combined_influential(const InfluentialSet& eimpact, const NodeSet& toxic) {
  CombinedResult r;
  r.eimpact_set = eimpact.members;
  r.toxic_set = toxic;
  std::set_intersection(r.eimpact_set.begin(), r.eimpact_set.end(), toxic.begin(), toxic.end(),
                        std::inserter(r.combined, r.combined.end()), IdLess{});
  NodeSet all;
  std::set_union(r.eimpact_set.begin(), r.eimpact_set.end(), toxic.begin(), toxic.end(),
                 std::inserter(all, all.end()), IdLess{});
  const double inter = static_cast<double>(r.combined.size());
  r.overlap.containment = toxic.empty() ? 0.0 : inter / static_cast<double>(toxic.size());
  r.overlap.jaccard = all.empty() ? 0.0 : inter / static_cast<double>(all.size());
  return r;
}

double toxicity_concentration(const ConversationGraph& graph, const NodeSet& toxic,
                              const InfluentialSet& influential) {
  std::vector<bool> covered(graph.size(), false);
  for (const auto& id : influential.members) {
    auto v = graph.find(id);
    if (!v) continue;
    for (auto u : graph.subtree_nodes(*v)) covered[u] = true;
  }
  std::size_t total = 0, inside = 0;
  for (const auto& id : toxic) {
    auto v = graph.find(id);
    if (!v) continue;
    ++total;
    if (covered[*v]) ++inside;
  }
  return total == 0 ? 0.0 : static_cast<double>(inside) / static_cast<double>(total);
}

}  // namespace eimpact
