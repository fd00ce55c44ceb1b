#include "eimpact/affect.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eimpact/csv.hpp"
#include "eimpact/error.hpp"

namespace eimpact {

namespace {

constexpr std::array<std::string_view, kEmotionCount> kEmotionNames = {
    "anger", "fear", "joy", "love", "sadness", "surprise"};

constexpr char32_t kInvalid = 0xFFFD;

// Decodes one code point starting at `pos`, advancing it. Malformed
// sequences yield U+FFFD and consume a single byte.
char32_t decode(std::string_view s, std::size_t& pos) {
  auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  int len = (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xE ? 3 : (b0 >> 3) == 0x1E ? 4 : 0;
  if (len == 0 || pos + len > s.size()) {
    ++pos;
    return kInvalid;
  }
  char32_t cp = b0 & (0x7F >> len);
  for (int i = 1; i < len; ++i) {
    auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) {
      ++pos;
      return kInvalid;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  pos += len;
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_emoji_modifier(char32_t cp) {
  return cp == 0xFE0F || cp == 0xFE0E || cp == 0x20E3 || (cp >= 0x1F3FB && cp <= 0x1F3FF) ||
         (cp >= 0xE0020 && cp <= 0xE007F);
}

bool is_regional_indicator(char32_t cp) { return cp >= 0x1F1E6 && cp <= 0x1F1FF; }

bool is_emoji(char32_t cp) {
  return (cp >= 0x1F000 && cp <= 0x1FAFF) || (cp >= 0x2600 && cp <= 0x27BF) ||
         (cp >= 0x2300 && cp <= 0x23FF) || (cp >= 0x2B00 && cp <= 0x2BFF) ||
         (cp >= 0x2190 && cp <= 0x21FF) || cp == 0x203C || cp == 0x2049 || cp == 0x2122 ||
         cp == 0x2139 || cp == 0x3030 || cp == 0x303D || cp == 0x3297 || cp == 0x3299 ||
         cp == 0x00A9 || cp == 0x00AE;
}

bool is_space(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v' ||
         cp == 0x00A0 || cp == 0x3000 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 ||
         cp == 0x2029;
}

bool is_word_char(char32_t cp) {
  if (cp < 0x80) return std::isalnum(static_cast<int>(cp)) || cp == '_';
  if (cp == kInvalid || is_emoji(cp) || is_emoji_modifier(cp) || cp == 0x200D) return false;
  // General/supplemental punctuation, CJK symbols, Latin-1 punctuation.
  if ((cp >= 0x2000 && cp <= 0x206F) || (cp >= 0x2E00 && cp <= 0x2E7F) ||
      (cp >= 0x3000 && cp <= 0x303F) || (cp >= 0x00A0 && cp <= 0x00BF) || cp == 0x00D7 ||
      cp == 0x00F7)
    return false;
  return true;
}

bool is_apostrophe(char32_t cp) { return cp == '\'' || cp == 0x2019; }

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
  return true;
}

bool url_at(std::string_view s) {
  return starts_with_ci(s, "http://") || starts_with_ci(s, "https://") ||
         starts_with_ci(s, "www.");
}

}  // namespace

std::string_view to_string(EmotionLabel label) { return kEmotionNames[index_of(label)]; }

std::optional<EmotionLabel> parse_emotion(std::string_view name) {
  for (std::size_t i = 0; i < kEmotionCount; ++i)
    if (kEmotionNames[i] == name) return static_cast<EmotionLabel>(i);
  return std::nullopt;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string word;
  auto flush = [&] {
    if (!word.empty() && word != "#") tokens.push_back(word);
    word.clear();
  };
  auto peek = [&](std::size_t at) -> char32_t {
    if (at >= text.size()) return 0;
    return decode(text, at);
  };

  std::size_t pos = 0;
  bool chunk_start = true;
  while (pos < text.size()) {
    if (chunk_start || word.empty()) {
      if (url_at(text.substr(pos))) {
        // skip to the next whitespace
        flush();
        while (pos < text.size()) {
          std::size_t at = pos;
          if (is_space(decode(text, at))) break;
          pos = at;
        }
        continue;
      }
    }
    char32_t cp = decode(text, pos);
    chunk_start = false;

    if (is_space(cp)) {
      flush();
      chunk_start = true;
    } else if (is_emoji(cp) || is_regional_indicator(cp)) {
      flush();
      std::string emoji;
      append_utf8(emoji, cp);
      if (is_regional_indicator(cp) && is_regional_indicator(peek(pos))) {
        append_utf8(emoji, decode(text, pos));
      }
      for (;;) {
        char32_t next = peek(pos);
        if (is_emoji_modifier(next)) {
          append_utf8(emoji, decode(text, pos));
        } else if (next == 0x200D) {
          std::size_t after = pos;
          decode(text, after);
          char32_t joined = peek(after);
          if (!is_emoji(joined)) break;
          append_utf8(emoji, 0x200D);
          pos = after;
          append_utf8(emoji, decode(text, pos));
        } else {
          break;
        }
      }
      tokens.push_back(std::move(emoji));
    } else if (is_word_char(cp)) {
      if (cp < 0x80)
        word.push_back(static_cast<char>(std::tolower(static_cast<int>(cp))));
      else
        append_utf8(word, cp);
    } else if (cp == '#' && word.empty() && is_word_char(peek(pos))) {
      word.push_back('#');
    } else if (cp == '@' && word.empty() && is_word_char(peek(pos))) {
      // mention: drop the handle
      while (pos < text.size()) {
        std::size_t at = pos;
        if (!is_word_char(decode(text, at))) break;
        pos = at;
      }
    } else if (is_apostrophe(cp) && !word.empty() && word != "#" && is_word_char(peek(pos))) {
      word.push_back('\'');
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

EmotionLexicon load_lexicon(std::istream& source) {
  auto table = csv::read_table(source, {"token", "emotion", "weight"});
  const auto c_token = table.header.require("token");
  const auto c_emotion = table.header.require("emotion");
  const auto c_weight = table.header.require("weight");

  EmotionLexicon lexicon;
  for (const auto& row : table.rows) {
    const auto& token = row.fields[c_token];
    if (token.empty()) throw Error(ErrorCode::MalformedRow, std::to_string(row.line));
    auto label = parse_emotion(row.fields[c_emotion]);
    if (!label) throw Error(ErrorCode::UnknownLabel, row.fields[c_emotion]);
    double weight = 0.0;
    try {
      std::size_t used = 0;
      weight = std::stod(row.fields[c_weight], &used);
      if (used != row.fields[c_weight].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorCode::MalformedRow, std::to_string(row.line));
    }
    if (!std::isfinite(weight) || weight < 0.0)
      throw Error(ErrorCode::InvalidLexicon, token + ":" + row.fields[c_weight]);
    auto [it, inserted] = lexicon.entries.try_emplace(token, PerEmotion<double>{});
    it->second[index_of(*label)] += weight;
  }
  return lexicon;
}

void load_emoji_map(std::istream& source, EmotionLexicon& lexicon) {
  auto table = csv::read_table(source, {"emoji", "token"});
  const auto c_emoji = table.header.require("emoji");
  const auto c_token = table.header.require("token");
  for (const auto& row : table.rows) {
    const auto& emoji = row.fields[c_emoji];
    const auto& target = row.fields[c_token];
    auto as_tokens = tokenize(target);
    if (emoji.empty() || as_tokens.size() != 1 || as_tokens.front() != target)
      throw Error(ErrorCode::InvalidLexicon, "emoji map target '" + target + "'");
    lexicon.emoji_map[emoji] = target;
  }
}

EmotionScore lexicon_score(const std::vector<std::string>& tokens, const EmotionLexicon& lexicon) {
  PerEmotion<double> sums{};
  for (const auto& raw : tokens) {
    const std::string* token = &raw;
    if (auto e = lexicon.emoji_map.find(raw); e != lexicon.emoji_map.end()) token = &e->second;
    auto it = lexicon.entries.find(*token);
    if (it == lexicon.entries.end()) continue;
    for (std::size_t i = 0; i < kEmotionCount; ++i) sums[i] += it->second[i];
  }
  double total = 0.0;
  for (double s : sums) total += s;
  if (total <= 0.0) return EmotionScore::unscored();

  std::size_t best = 0;
  for (std::size_t i = 1; i < kEmotionCount; ++i)
    if (sums[i] > sums[best]) best = i;
  return {static_cast<EmotionLabel>(best), sums[best] / total, true};
}

PrecomputedScores load_precomputed_scores(std::istream& source) {
  auto table = csv::read_table(source, {"id", "label", "score"});
  const auto c_id = table.header.require("id");
  const auto c_label = table.header.require("label");
  const auto c_score = table.header.require("score");

  PrecomputedScores out;
  for (const auto& row : table.rows) {
    const auto& id = row.fields[c_id];
    if (id.empty()) throw Error(ErrorCode::MalformedRow, std::to_string(row.line));
    auto label = parse_emotion(row.fields[c_label]);
    if (!label) throw Error(ErrorCode::UnknownLabel, row.fields[c_label]);
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(row.fields[c_score], &used);
      if (used != row.fields[c_score].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorCode::MalformedRow, std::to_string(row.line));
    }
    if (std::isnan(value)) throw Error(ErrorCode::MalformedRow, std::to_string(row.line));
    if (value < 0.0 || value > 1.0) {
      std::ostringstream msg;
      msg << "score " << row.fields[c_score] << " for id " << id << " clamped to [0,1]";
      out.warnings.push_back(msg.str());
      value = std::clamp(value, 0.0, 1.0);
    }
    out.scores[id] = EmotionScore{*label, value, true};
  }
  return out;
}

}  // namespace eimpact
