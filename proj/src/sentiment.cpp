#include "atlas/sentiment.hpp"

#include <algorithm>
#include <map>

#include "atlas/text.hpp"

namespace atlas {

SentimentScore classify(const std::string& text,
                        const SentimentLexicon& lexicon) {
  std::size_t pos = 0, neg = 0;
  for (const std::string& token : word_tokens(text)) {
    const std::string lowered = lower_utf8(token);
    if (lexicon.positive.contains(lowered)) ++pos;
    if (lexicon.negative.contains(lowered)) ++neg;
  }
  SentimentScore score;
  if (pos > neg) {
    score.label = kSentimentPositive;
  } else if (neg > pos) {
    score.label = kSentimentNegative;
  } else {
    score.label = kSentimentNeutral;
  }
  const std::size_t hits = pos + neg;
  score.confidence =
      hits == 0 ? 0.0
                : static_cast<double>(pos > neg ? pos - neg : neg - pos) /
                      static_cast<double>(hits);
  return score;
}

std::vector<std::pair<std::string, std::size_t>> keywords_by_sentiment(
    const std::vector<ScoredPost>& posts, std::string_view wanted_class,
    const std::set<std::string>& stoplist, std::size_t k) {
  std::map<std::string, std::size_t> counts;
  for (const ScoredPost& post : posts) {
    if (post.score.label != wanted_class) continue;
    for (const std::string& token : word_tokens(post.text)) {
      const std::string lowered = lower_utf8(token);
      if (lowered.empty() || stoplist.contains(lowered)) continue;
      ++counts[lowered];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(),
                                                          counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) {
                     return a.second > b.second;
                   });
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

}  // namespace atlas
