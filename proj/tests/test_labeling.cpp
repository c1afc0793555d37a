#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"

#include "atlas/errors.hpp"
#include "atlas/labeling.hpp"
#include "atlas/text.hpp"

using namespace atlas;

namespace {

const std::set<std::string> kNoExceptions;

bool is_token_subsequence(const std::string& needle,
                          const std::string& haystack) {
  std::vector<std::string> n = word_tokens(needle);
  std::vector<std::string> h = word_tokens(haystack);
  if (n.empty()) return false;
  for (std::size_t start = 0; start + n.size() <= h.size(); ++start) {
    bool match = true;
    for (std::size_t i = 0; i < n.size(); ++i) {
      if (h[start + i] != n[i]) {
        match = false;
        break;
      }
    }
    if (match) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("canonicalize spec examples") {
  CHECK(canonicalize("Data", kNoExceptions) == "data");
  CHECK(canonicalize("Ethical AIs", kNoExceptions) == "ethical ai");
  CHECK(canonicalize("ethics", {"ethics"}) == "ethics");
}

TEST_CASE("canonicalize plural rule table") {
  // ies -> y for tokens longer than four characters.
  CHECK(canonicalize("policies", kNoExceptions) == "policy");
  CHECK(canonicalize("ties", kNoExceptions) == "tie");  // too short for ies rule
  // xes / ches / shes / sses / zes drop "es".
  CHECK(canonicalize("boxes", kNoExceptions) == "box");
  CHECK(canonicalize("churches", kNoExceptions) == "church");
  CHECK(canonicalize("dishes", kNoExceptions) == "dish");
  CHECK(canonicalize("classes", kNoExceptions) == "class");
  // Other es-forms drop just the "s".
  CHECK(canonicalize("rules", kNoExceptions) == "rule");
  CHECK(canonicalize("issues", kNoExceptions) == "issue");
  // Plain trailing "s" for length > 2, except ss/us endings.
  CHECK(canonicalize("laws", kNoExceptions) == "law");
  CHECK(canonicalize("AIs", kNoExceptions) == "ai");
  CHECK(canonicalize("class", kNoExceptions) == "class");
  CHECK(canonicalize("status", kNoExceptions) == "status");
  CHECK(canonicalize("is", kNoExceptions) == "is");
  // Exception-list members pass through untouched.
  CHECK(canonicalize("bias", {"bias"}) == "bias");
  CHECK(canonicalize("News", {"news"}) == "news");
}

TEST_CASE("canonicalize collapses whitespace and is idempotent") {
  CHECK(canonicalize("  Data   Rules ", kNoExceptions) == "data rule");
  std::vector<std::string> samples = {"Ethical AIs",  "policies",
                                      "data privacy", "classes of boxes",
                                      "status quo",   "News stories"};
  std::set<std::string> exceptions = {"news"};
  for (const auto& s : samples) {
    std::string once = canonicalize(s, exceptions);
    CHECK(canonicalize(once, exceptions) == once);
  }
}

TEST_CASE("canonicalize never lengthens a token") {
  std::mt19937_64 rng(7);
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyzES";
  for (int trial = 0; trial < 500; ++trial) {
    std::string word;
    std::size_t len = 1 + rng() % 12;
    for (std::size_t i = 0; i < len; ++i) {
      word.push_back(alphabet[rng() % alphabet.size()]);
    }
    std::string reduced = canonicalize(word, kNoExceptions);
    CHECK(reduced.size() <= word.size());
    CHECK_FALSE(reduced.empty());
  }
}

TEST_CASE("keyphrase params validation") {
  KeyphraseParams p;
  CHECK_NOTHROW(p.validate());
  KeyphraseParams zero_cands = p;
  zero_cands.num_candidates = 0;
  CHECK_THROWS_AS(zero_cands.validate(), ConfigError);
  KeyphraseParams zero_ngram = p;
  zero_ngram.ngram_max = 0;
  CHECK_THROWS_AS(zero_ngram.validate(), ConfigError);
  // Outside 3..10 warns but passes.
  KeyphraseParams wide = p;
  wide.num_candidates = 15;
  CHECK_NOTHROW(wide.validate());
}

TEST_CASE("compute_term_stats counts document frequency by canonical gram") {
  std::vector<std::string> docs = {"ethical ai here", "privacy law here",
                                   "robot here"};
  TermStats stats = compute_term_stats(docs, 3, kNoExceptions);
  CHECK(stats.total_docs == 3);
  CHECK(stats.df.at("here") == 3);
  CHECK(stats.df.at("ethical ai") == 1);
  CHECK(stats.df.at("privacy law here") == 1);
  CHECK(stats.df.count("ethical here") == 0);  // not contiguous
  // Morphological variants share one statistic.
  TermStats merged = compute_term_stats({"new rule", "old rules"}, 2,
                                        kNoExceptions);
  CHECK(merged.df.at("rule") == 2);
}

TEST_CASE("extract_keyphrases trivial cases") {
  std::vector<std::string> docs = {"the of and"};
  TermStats stats = compute_term_stats(docs, 3, kNoExceptions);
  KeyphraseParams params;
  params.stoplist = {"the", "of", "and"};
  CHECK(extract_keyphrases("", stats, params).empty());
  CHECK(extract_keyphrases("the of and", stats, params).empty());
}

TEST_CASE("extract_keyphrases spec toy corpus: repetition wins") {
  std::vector<std::string> docs = {
      "ethical ai matters and ethical ai wins",
      "privacy law passed",
      "robot tax debate",
  };
  TermStats stats = compute_term_stats(docs, 3, kNoExceptions);
  KeyphraseParams params;
  params.stoplist = {"and"};
  auto phrases = extract_keyphrases(docs[0], stats, params);
  REQUIRE_FALSE(phrases.empty());
  // tf=2 and token_count=2 beat every single occurrence and every unigram.
  CHECK(phrases[0].canonical == "ethical ai");
}

TEST_CASE("extract_keyphrases never crosses a stoplist token") {
  std::vector<std::string> docs = {"alpha beta the gamma delta"};
  TermStats stats = compute_term_stats(docs, 3, kNoExceptions);
  KeyphraseParams params;
  params.stoplist = {"the"};
  auto phrases = extract_keyphrases(docs[0], stats, params);
  for (const auto& p : phrases) {
    CHECK(p.canonical.find("the") == std::string::npos);
    CHECK(p.canonical.find("beta gamma") == std::string::npos);
  }
}

TEST_CASE("extract_keyphrases deduplicates by canonical form") {
  std::vector<std::string> docs = {"AI Ethics and ai ethics"};
  std::set<std::string> exceptions = {"ethics"};
  TermStats stats = compute_term_stats(docs, 3, exceptions);
  KeyphraseParams params;
  params.stoplist = {"and"};
  auto phrases = extract_keyphrases(docs[0], stats, params);
  REQUIRE_FALSE(phrases.empty());
  // Both spellings collapse to one candidate; tf=2 on two tokens ranks it
  // first, and the surface keeps the first-occurrence spelling.
  CHECK(phrases[0].canonical == "ai ethics");
  CHECK(phrases[0].surface == "AI Ethics");
  std::size_t hits = 0;
  for (const auto& p : phrases) {
    if (p.canonical == "ai ethics") ++hits;
  }
  CHECK(hits == 1);
}

TEST_CASE("extract_keyphrases tie order: position before lexicography") {
  std::vector<std::string> docs = {"zeta alpha"};
  TermStats stats = compute_term_stats(docs, 1, kNoExceptions);
  KeyphraseParams params;
  params.ngram_max = 1;
  auto phrases = extract_keyphrases(docs[0], stats, params);
  REQUIRE(phrases.size() == 2);
  // Equal tf, df, and length: the earlier first occurrence wins.
  CHECK(phrases[0].canonical == "zeta");
  CHECK(phrases[1].canonical == "alpha");
}

TEST_CASE("extract_keyphrases respects num_candidates") {
  std::vector<std::string> docs = {"one two three four five six seven"};
  TermStats stats = compute_term_stats(docs, 2, kNoExceptions);
  KeyphraseParams params;
  params.num_candidates = 3;
  params.ngram_max = 2;
  auto phrases = extract_keyphrases(docs[0], stats, params);
  CHECK(phrases.size() == 3);
}

TEST_CASE("every extracted phrase is a token subsequence of its source") {
  std::mt19937_64 rng(99);
  std::vector<std::string> pool = {"data",  "privacy,", "law.",   "rules!",
                                   "the",   "of",       "bias",   "audit",
                                   "Facial", "ban",     "reform", "and"};
  KeyphraseParams params;
  params.stoplist = {"the", "of", "and"};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> docs;
    for (int d = 0; d < 4; ++d) {
      std::string text;
      std::size_t len = 3 + rng() % 10;
      for (std::size_t i = 0; i < len; ++i) {
        if (!text.empty()) text.push_back(' ');
        text += pool[rng() % pool.size()];
      }
      docs.push_back(text);
    }
    TermStats stats = compute_term_stats(docs, 3, kNoExceptions);
    for (const auto& doc : docs) {
      for (const auto& phrase : extract_keyphrases(doc, stats, params)) {
        CHECK(is_token_subsequence(phrase.surface, doc));
        CHECK_FALSE(phrase.canonical.empty());
      }
    }
  }
}

TEST_CASE("build_vocabulary merges spellings by canonical form") {
  std::vector<PhraseOccurrence> occ = {
      {"AI Ethics", "ai ethics", 100},
      {"ai ethics", "ai ethics", 200},
      {"privacy law", "privacy law", 150},
  };
  auto vocab = build_vocabulary(occ);
  REQUIRE(vocab.size() == 2);
  CHECK(vocab[0].canonical == "ai ethics");
  CHECK(vocab[0].freq == 2);
  CHECK(vocab[0].first_seen == 100);
  CHECK(vocab[0].last_seen == 200);
  CHECK(vocab[0].surface == "AI Ethics");  // lexicographically smallest
  CHECK(vocab[1].canonical == "privacy law");
  CHECK(vocab[1].freq == 1);
}

TEST_CASE("build_vocabulary is order independent and conserves freq") {
  std::vector<PhraseOccurrence> occ = {
      {"a", "a", 5}, {"b", "b", 3}, {"a", "a", 9}, {"c", "c", 1}, {"b", "b", 3},
  };
  auto sorted_vocab = build_vocabulary(occ);
  std::vector<PhraseOccurrence> shuffled = {occ[4], occ[2], occ[0], occ[3],
                                            occ[1]};
  auto shuffled_vocab = build_vocabulary(shuffled);
  REQUIRE(sorted_vocab.size() == shuffled_vocab.size());
  std::uint64_t freq_sum = 0;
  for (std::size_t i = 0; i < sorted_vocab.size(); ++i) {
    CHECK(sorted_vocab[i].canonical == shuffled_vocab[i].canonical);
    CHECK(sorted_vocab[i].freq == shuffled_vocab[i].freq);
    CHECK(sorted_vocab[i].first_seen == shuffled_vocab[i].first_seen);
    CHECK(sorted_vocab[i].last_seen == shuffled_vocab[i].last_seen);
    freq_sum += sorted_vocab[i].freq;
  }
  CHECK(freq_sum == occ.size());
  CHECK(build_vocabulary({}).empty());
}

TEST_CASE("load_word_list skips comments and blanks") {
  std::string path = "wordlist_probe.tmp";
  {
    std::ofstream out(path);
    out << "# comment\n\nalpha\nbeta\n  gamma  \n";
  }
  auto words = load_word_list(path);
  std::remove(path.c_str());
  CHECK(words == std::set<std::string>{"alpha", "beta", "gamma"});
  CHECK_THROWS_AS(load_word_list("definitely_missing.txt"), DataError);
}
