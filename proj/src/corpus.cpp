#include "eimpact/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include "eimpact/csv.hpp"
#include "eimpact/error.hpp"

namespace eimpact {

namespace {

using namespace std::chrono;

bool read_digits(std::string_view s, std::size_t pos, std::size_t count, int& out) {
  if (pos + count > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    v = v * 10 + (s[i] - '0');
  }
  out = v;
  return true;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_url_or_media(std::string_view word) {
  static constexpr std::array<std::string_view, 4> kPrefixes = {"http://", "https://", "www.",
                                                                "pic.twitter.com/"};
  static constexpr std::array<std::string_view, 6> kPlaceholders = {
      "[media]", "[image]", "[video]", "[gif]", "<media>", "<media omitted>"};
  std::string w = lower_ascii(word);
  for (auto p : kPrefixes)
    if (w.rfind(p, 0) == 0) return true;
  for (auto p : kPlaceholders)
    if (w == p) return true;
  return false;
}

std::optional<std::string> optional_field(const std::string& v) {
  if (v.empty()) return std::nullopt;
  return v;
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view s) {
  int y, mo, d, h, mi, sec;
  if (!read_digits(s, 0, 4, y) || s.size() < 19 || s[4] != '-' || !read_digits(s, 5, 2, mo) ||
      s[7] != '-' || !read_digits(s, 8, 2, d) ||
      (s[10] != 'T' && s[10] != 't' && s[10] != ' ') || !read_digits(s, 11, 2, h) ||
      s[13] != ':' || !read_digits(s, 14, 2, mi) || s[16] != ':' || !read_digits(s, 17, 2, sec))
    return std::nullopt;

  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) return std::nullopt;

  std::size_t pos = 19;
  std::int64_t micros = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    std::size_t digits = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      if (digits < 6) micros = micros * 10 + (s[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) return std::nullopt;
    for (std::size_t i = digits; i < 6; ++i) micros *= 10;
  }

  minutes offset{0};
  if (pos >= s.size()) return std::nullopt;
  if (s[pos] == 'Z' || s[pos] == 'z') {
    ++pos;
  } else if (s[pos] == '+' || s[pos] == '-') {
    int oh, om;
    if (!read_digits(s, pos + 1, 2, oh) || pos + 3 >= s.size() || s[pos + 3] != ':' ||
        !read_digits(s, pos + 4, 2, om) || oh > 23 || om > 59)
      return std::nullopt;
    offset = hours{oh} + minutes{om};
    if (s[pos] == '-') offset = -offset;
    pos += 6;
  } else {
    return std::nullopt;
  }
  if (pos != s.size()) return std::nullopt;

  Timestamp ts = sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec} + microseconds{micros};
  return ts - offset;
}

std::string format_timestamp(Timestamp ts) {
  auto day_point = floor<days>(ts);
  year_month_day ymd{day_point};
  hh_mm_ss<microseconds> tod{ts - day_point};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()));
  std::string out = buf;
  if (auto frac = tod.subseconds().count(); frac != 0) {
    std::snprintf(buf, sizeof buf, ".%06lld", static_cast<long long>(frac));
    std::string f = buf;
    while (f.back() == '0') f.pop_back();
    out += f;
  }
  out += 'Z';
  return out;
}

bool arrival_before(const ConversationRecord& a, const ConversationRecord& b) {
  if (a.created_at != b.created_at) return a.created_at < b.created_at;
  return id_less(a.id, b.id);
}

bool id_less(std::string_view a, std::string_view b) {
  auto all_digits = [](std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (all_digits(a) && all_digits(b)) {
    auto strip = [](std::string_view s) {
      auto p = s.find_first_not_of('0');
      return p == std::string_view::npos ? std::string_view{} : s.substr(p);
    };
    auto sa = strip(a), sb = strip(b);
    if (sa.size() != sb.size()) return sa.size() < sb.size();
    if (sa != sb) return sa < sb;
  }
  return a < b;
}

std::string_view to_string(DropReason reason) {
  switch (reason) {
    case DropReason::LangFiltered: return "LangFiltered";
    case DropReason::EmptyText: return "EmptyText";
    case DropReason::MediaOnly: return "MediaOnly";
    case DropReason::OrphanParent: return "OrphanParent";
    case DropReason::SelfLoopDropped: return "SelfLoopDropped";
  }
  return "Unknown";
}

std::vector<ConversationRecord> parse_records(std::istream& source) {
  auto table = csv::read_table(source, {"author_id", "conversation_id", "created_at", "id",
                                        "in_reply_to_user_id", "lang", "text"});
  const auto& h = table.header;
  const auto c_author = h.require("author_id");
  const auto c_conv = h.require("conversation_id");
  const auto c_created = h.require("created_at");
  const auto c_id = h.require("id");
  const auto c_reply_user = h.require("in_reply_to_user_id");
  const auto c_lang = h.require("lang");
  const auto c_text = h.require("text");
  const auto c_parent = h.find("parent_id");
  const auto c_entities = h.find("entities");

  std::vector<ConversationRecord> records;
  records.reserve(table.rows.size());
  std::unordered_set<std::string> seen;
  for (const auto& row : table.rows) {
    const auto& f = row.fields;
    auto ts = parse_timestamp(f[c_created]);
    if (!ts || f[c_id].empty() || f[c_conv].empty())
      throw Error(ErrorCode::MalformedRow, std::to_string(row.line));
    if (!seen.insert(f[c_id]).second) throw Error(ErrorCode::DuplicateId, f[c_id]);

    ConversationRecord r;
    r.id = f[c_id];
    r.conversation_id = f[c_conv];
    r.author_id = f[c_author];
    r.created_at = *ts;
    r.in_reply_to_user_id = optional_field(f[c_reply_user]);
    if (c_parent) r.parent_id = optional_field(f[*c_parent]);
    r.lang = f[c_lang];
    r.text = f[c_text];
    if (c_entities) r.entities = optional_field(f[*c_entities]);
    records.push_back(std::move(r));
  }
  return records;
}

void write_records(std::ostream& out, std::span<const ConversationRecord> records) {
  csv::write_row(out, {"author_id", "conversation_id", "created_at", "id", "in_reply_to_user_id",
                       "lang", "text", "parent_id", "entities"});
  for (const auto& r : records) {
    csv::write_row(out, {r.author_id, r.conversation_id, format_timestamp(r.created_at), r.id,
                         r.in_reply_to_user_id.value_or(""), r.lang, r.text,
                         r.parent_id.value_or(""), r.entities.value_or("")});
  }
}

std::string strip_urls(std::string_view text) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (start == i) break;
    auto word = text.substr(start, i - start);
    // two-word placeholder
    if (lower_ascii(word) == "<media" && text.substr(i).starts_with(" omitted>")) {
      i += 9;
      continue;
    }
    if (is_url_or_media(word)) continue;
    if (!out.empty()) out.push_back(' ');
    out.append(word);
  }
  return out;
}

FilterResult filter_records(std::span<const ConversationRecord> records,
                            const std::set<std::string>& lang_allow) {
  FilterResult result;
  for (const auto& r : records) {
    if (!lang_allow.contains(r.lang)) {
      result.dropped.push_back({r.id, DropReason::LangFiltered});
      continue;
    }
    bool blank = std::all_of(r.text.begin(), r.text.end(), is_space);
    if (blank) {
      result.dropped.push_back({r.id, DropReason::EmptyText});
      continue;
    }
    if (strip_urls(r.text).empty()) {
      result.dropped.push_back({r.id, DropReason::MediaOnly});
      continue;
    }
    result.kept.push_back(r);
  }
  return result;
}

std::vector<Conversation> group_conversations(std::vector<ConversationRecord> records) {
  std::map<std::string, Conversation, IdLess> groups;
  for (auto& r : records) {
    auto& conv = groups[r.conversation_id];
    conv.conversation_id = r.conversation_id;
    conv.records.push_back(std::move(r));
  }
  std::vector<Conversation> out;
  out.reserve(groups.size());
  for (auto& [id, conv] : groups) {
    std::sort(conv.records.begin(), conv.records.end(), arrival_before);
    out.push_back(std::move(conv));
  }
  return out;
}

ParentResolution resolve_parents(std::span<const ConversationRecord> input) {
  if (input.empty()) throw Error(ErrorCode::NoRoot, "empty conversation");

  std::vector<const ConversationRecord*> order;
  order.reserve(input.size());
  for (const auto& r : input) order.push_back(&r);
  std::sort(order.begin(), order.end(),
            [](auto* a, auto* b) { return arrival_before(*a, *b); });

  ParentResolution res;
  const std::string& conv_id = order.front()->conversation_id;

  std::vector<NodeId> candidates;
  for (auto* r : order)
    if (r->id == conv_id) candidates.push_back(r->id);
  if (candidates.empty()) {
    for (auto* r : order) {
      bool has_parent = r->parent_id && *r->parent_id != r->id;
      if (!has_parent && !r->in_reply_to_user_id) candidates.push_back(r->id);
    }
  }
  if (candidates.empty()) throw Error(ErrorCode::NoRoot, conv_id);
  if (candidates.size() > 1) {
    std::string ids;
    for (const auto& c : candidates) ids += (ids.empty() ? "" : ",") + c;
    throw Error(ErrorCode::MultipleRoots, ids);
  }
  res.root = candidates.front();

  // Explicit links, with self-references discarded.
  std::unordered_map<std::string, std::optional<NodeId>> explicit_parent;
  for (auto* r : order) {
    if (r->id == res.root) continue;
    if (r->parent_id && *r->parent_id == r->id) {
      res.dropped.push_back({r->id, DropReason::SelfLoopDropped});
      explicit_parent[r->id] = std::nullopt;
    } else {
      explicit_parent[r->id] = r->parent_id;
    }
  }

  // Orphans cascade: a record whose explicit parent is missing (or was itself
  // dropped) is removed.
  std::unordered_set<std::string> alive;
  for (auto* r : order) alive.insert(r->id);
  for (bool changed = true; changed;) {
    changed = false;
    for (auto* r : order) {
      if (!alive.contains(r->id) || r->id == res.root) continue;
      const auto& p = explicit_parent[r->id];
      if (p && !alive.contains(*p)) {
        alive.erase(r->id);
        res.dropped.push_back({r->id, DropReason::OrphanParent});
        changed = true;
      }
    }
  }

  std::unordered_map<std::string, NodeId> latest_by_author;
  for (auto* r : order) {
    if (!alive.contains(r->id)) continue;
    if (r->id != res.root) {
      const auto& p = explicit_parent[r->id];
      if (p) {
        res.parents[r->id] = *p;
      } else if (r->in_reply_to_user_id) {
        auto it = latest_by_author.find(*r->in_reply_to_user_id);
        res.parents[r->id] = it != latest_by_author.end() ? it->second : res.root;
      } else {
        res.parents[r->id] = res.root;
      }
    }
    latest_by_author[r->author_id] = r->id;
  }
  return res;
}

void apply_resolution(Conversation& conversation, const ParentResolution& resolution) {
  std::unordered_set<std::string> orphans;
  for (const auto& d : resolution.dropped)
    if (d.reason == DropReason::OrphanParent) orphans.insert(d.id);
  std::erase_if(conversation.records, [&](const auto& r) { return orphans.contains(r.id); });
  conversation.dropped.insert(conversation.dropped.end(), resolution.dropped.begin(),
                              resolution.dropped.end());
}

}  // namespace eimpact
