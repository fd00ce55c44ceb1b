#pragma once
// Six-class emotion scoring: tokenizer, lexicon baseline and precomputed
// label loading.

#include <array>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "eimpact/corpus.hpp"

namespace eimpact {

// Enumerator order is the alphabetical label order, which is also the
// argmax tie-break order.
enum class EmotionLabel : std::size_t { Anger, Fear, Joy, Love, Sadness, Surprise };
inline constexpr std::size_t kEmotionCount = 6;
inline constexpr std::array<EmotionLabel, kEmotionCount> kAllEmotions = {
    EmotionLabel::Anger, EmotionLabel::Fear,    EmotionLabel::Joy,
    EmotionLabel::Love,  EmotionLabel::Sadness, EmotionLabel::Surprise};

std::string_view to_string(EmotionLabel label);
std::optional<EmotionLabel> parse_emotion(std::string_view name);

template <typename T>
using PerEmotion = std::array<T, kEmotionCount>;

inline constexpr std::size_t index_of(EmotionLabel e) { return static_cast<std::size_t>(e); }

struct EmotionScore {
  EmotionLabel label = EmotionLabel::Anger;
  double score = 0.0;
  bool scored = false;

  static EmotionScore unscored() { return {}; }
  bool operator==(const EmotionScore&) const = default;
};

std::vector<std::string> tokenize(std::string_view text);

struct EmotionLexicon {
  std::unordered_map<std::string, PerEmotion<double>> entries;
  std::unordered_map<std::string, std::string> emoji_map;
};

// `token,emotion,weight`; repeated (token, emotion) pairs accumulate.
// Throws MissingColumn, MalformedRow, UnknownLabel, InvalidLexicon.
EmotionLexicon load_lexicon(std::istream& source);
// `emoji,token`; each target must itself tokenize to a single token.
void load_emoji_map(std::istream& source, EmotionLexicon& lexicon);

EmotionScore lexicon_score(const std::vector<std::string>& tokens, const EmotionLexicon& lexicon);

// Any deterministic text -> EmotionScore mapping.
class EmotionScorer {
 public:
  virtual ~EmotionScorer() = default;
  virtual EmotionScore score(std::string_view text) const = 0;
};

class LexiconScorer final : public EmotionScorer {
 public:
  explicit LexiconScorer(EmotionLexicon lexicon) : lexicon_(std::move(lexicon)) {}
  EmotionScore score(std::string_view text) const override {
    return lexicon_score(tokenize(text), lexicon_);
  }

 private:
  EmotionLexicon lexicon_;
};

struct PrecomputedScores {
  std::map<NodeId, EmotionScore, IdLess> scores;
  std::vector<std::string> warnings;
};

// `id,label,score`; out-of-range scores are clamped into [0,1] with a
// warning. Throws UnknownLabel(value), MalformedRow(line).
PrecomputedScores load_precomputed_scores(std::istream& source);

}  // namespace eimpact
