#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace atlas {

struct KeyphraseParams {
  std::size_t num_candidates = 10;
  std::size_t ngram_max = 3;
  std::set<std::string> stoplist;

  // Throws ConfigError on zero values; values outside the usual 3..10
  // candidate range are accepted with a stderr warning.
  void validate() const;
};

// A canonical vocabulary entry. `canonical` is the lemma-aligned lowercase
// form that the clustering, taxonomy, and evolution stages key on; `surface`
// keeps one original spelling for display.
struct Label {
  std::string surface;
  std::string canonical;
  std::int64_t first_seen = 0;
  std::int64_t last_seen = 0;
  std::uint64_t freq = 0;
};

// Lowercases, then reduces each token by an ordered plural rule table:
// exception-list members pass through, ies->y (length > 4), xes/ches/shes/
// sses/zes drop "es", other es-forms drop "s" (length > 3), and a trailing
// "s" is dropped for length > 2 tokens not ending in "ss" or "us". Collapses
// whitespace. Idempotent; never lengthens a token.
std::string canonicalize(std::string_view phrase,
                         const std::set<std::string>& exceptions);

// Loads one lowercase token per line; '#' lines and blanks ignored.
std::set<std::string> load_word_list(const std::string& path);

// Document-frequency table for the extractor's TF-IDF scores. Frequencies
// are keyed by canonical n-gram so that morphological variants of a phrase
// share one statistic. The exception set used at build time travels with the
// table; extraction must canonicalize with the same set.
struct TermStats {
  std::size_t total_docs = 0;
  std::unordered_map<std::string, std::size_t> df;
  std::set<std::string> exceptions;
};

TermStats compute_term_stats(const std::vector<std::string>& normalized_texts,
                             std::size_t ngram_max,
                             std::set<std::string> exceptions);

struct ExtractedPhrase {
  std::string surface;    // first-occurrence spelling, verbatim from the text
  std::string canonical;
};

// Ranked keyphrase candidates for one normalized document: contiguous token
// n-grams (n <= ngram_max) containing no stoplist token, deduplicated by
// canonical form, scored tf * smoothed-idf * token-count, descending. Ties
// go to the earlier first occurrence, then the lexicographically smaller
// canonical form. At most num_candidates results.
std::vector<ExtractedPhrase> extract_keyphrases(const std::string& text,
                                                const TermStats& stats,
                                                const KeyphraseParams& params);

struct PhraseOccurrence {
  std::string surface;
  std::string canonical;
  std::int64_t timestamp = 0;
};

// Merges occurrences into one Label per canonical form, sorted by canonical.
// freq counts occurrences; first_seen/last_seen are min/max timestamps;
// surface is the lexicographically smallest observed spelling. The result is
// independent of input order.
std::vector<Label> build_vocabulary(
    const std::vector<PhraseOccurrence>& occurrences);

}  // namespace atlas
