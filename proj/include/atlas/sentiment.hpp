#pragma once

#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace atlas {

inline constexpr std::string_view kSentimentPositive = "positive";
inline constexpr std::string_view kSentimentNeutral = "neutral";
inline constexpr std::string_view kSentimentNegative = "negative";

struct SentimentScore {
  std::string label;        // positive | neutral | negative
  double confidence = 0.0;  // in [0, 1]
};

struct SentimentLexicon {
  std::set<std::string> positive;
  std::set<std::string> negative;
};

// Transparent counting classifier: with p positive and n negative token
// hits, the label is the majority side (neutral on a tie) and confidence is
// |p - n| / (p + n), or 0 when no lexicon token occurs. Matching is on
// lowercased tokens.
SentimentScore classify(const std::string& text,
                        const SentimentLexicon& lexicon);

struct ScoredPost {
  std::string text;
  SentimentScore score;
};

// Top-k unigram terms by frequency among posts of the wanted class,
// stoplist excluded, ties broken lexicographically. Token counting matches
// the classifier's tokenization.
std::vector<std::pair<std::string, std::size_t>> keywords_by_sentiment(
    const std::vector<ScoredPost>& posts, std::string_view wanted_class,
    const std::set<std::string>& stoplist, std::size_t k);

}  // namespace atlas
