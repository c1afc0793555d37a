#include "atlas/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>

#include "atlas/errors.hpp"
#include "atlas/text.hpp"

namespace atlas {

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string reduce_token(const std::string& token,
                         const std::set<std::string>& exceptions) {
  if (exceptions.contains(token)) return token;
  const std::size_t len = token.size();
  if (len > 4 && ends_with(token, "ies")) {
    return token.substr(0, len - 3) + "y";
  }
  for (std::string_view suffix : {"xes", "ches", "shes", "sses", "zes"}) {
    if (ends_with(token, suffix)) return token.substr(0, len - 2);
  }
  if (len > 3 && ends_with(token, "es")) {
    return token.substr(0, len - 1);
  }
  if (len > 2 && token.back() == 's' && !ends_with(token, "ss") &&
      !ends_with(token, "us")) {
    return token.substr(0, len - 1);
  }
  return token;
}

}  // namespace

void KeyphraseParams::validate() const {
  if (num_candidates == 0) {
    throw ConfigError("keyphrase num_candidates must be positive");
  }
  if (ngram_max == 0) {
    throw ConfigError("keyphrase ngram_max must be positive");
  }
  if (num_candidates < 3 || num_candidates > 10) {
    std::cerr << "warning: num_candidates=" << num_candidates
              << " is outside the usual 3..10 range\n";
  }
}

std::string canonicalize(std::string_view phrase,
                         const std::set<std::string>& exceptions) {
  const std::string lowered = lower_utf8(phrase);
  std::string out;
  out.reserve(lowered.size());
  for (const std::string& token : word_tokens(lowered)) {
    const std::string reduced = reduce_token(token, exceptions);
    if (reduced.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += reduced;
  }
  return out;
}

std::set<std::string> load_word_list(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open word list: " + path);
  }
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string word(trim(line));
    if (word.empty() || word[0] == '#') continue;
    out.insert(lower_utf8(word));
  }
  return out;
}

TermStats compute_term_stats(const std::vector<std::string>& normalized_texts,
                             std::size_t ngram_max,
                             std::set<std::string> exceptions) {
  TermStats stats;
  stats.total_docs = normalized_texts.size();
  stats.exceptions = std::move(exceptions);
  std::set<std::string> seen;
  for (const std::string& text : normalized_texts) {
    seen.clear();
    const std::vector<std::string> tokens = word_tokens(text);
    for (std::size_t n = 1; n <= ngram_max; ++n) {
      if (tokens.size() < n) break;
      for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string gram = tokens[i];
        for (std::size_t j = 1; j < n; ++j) {
          gram.push_back(' ');
          gram += tokens[i + j];
        }
        std::string key = canonicalize(gram, stats.exceptions);
        if (key.empty()) continue;
        if (seen.insert(key).second) ++stats.df[std::move(key)];
      }
    }
  }
  return stats;
}

std::vector<ExtractedPhrase> extract_keyphrases(const std::string& text,
                                                const TermStats& stats,
                                                const KeyphraseParams& params) {
  params.validate();
  const std::vector<std::string> tokens = word_tokens(text);
  if (tokens.empty()) return {};

  std::vector<bool> stop(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    stop[i] = params.stoplist.contains(lower_utf8(tokens[i]));
  }

  struct Candidate {
    std::string surface;
    std::size_t tf = 0;
    std::size_t first_pos = 0;
    std::size_t token_count = 0;
  };
  // std::map keeps canonical keys ordered, which the tie rule needs anyway.
  std::map<std::string, Candidate> candidates;

  for (std::size_t n = 1; n <= params.ngram_max; ++n) {
    if (tokens.size() < n) break;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      bool blocked = false;
      for (std::size_t j = 0; j < n && !blocked; ++j) blocked = stop[i + j];
      if (blocked) continue;
      std::string gram = tokens[i];
      for (std::size_t j = 1; j < n; ++j) {
        gram.push_back(' ');
        gram += tokens[i + j];
      }
      std::string key = canonicalize(gram, stats.exceptions);
      if (key.empty()) continue;
      auto [it, inserted] = candidates.try_emplace(std::move(key));
      Candidate& c = it->second;
      ++c.tf;
      if (inserted || i < c.first_pos) {
        // Position index i orders unigrams and longer grams alike; for equal
        // canonical keys the earliest window wins the surface form.
        c.first_pos = i;
        c.surface = std::move(gram);
        c.token_count = n;
      }
    }
  }

  struct Scored {
    double score;
    const std::string* canonical;
    const Candidate* candidate;
  };
  std::vector<Scored> scored;
  scored.reserve(candidates.size());
  const double n_docs = static_cast<double>(stats.total_docs);
  for (const auto& [key, c] : candidates) {
    const auto df_it = stats.df.find(key);
    const double df = df_it == stats.df.end()
                          ? 0.0
                          : static_cast<double>(df_it->second);
    const double idf = std::log((1.0 + n_docs) / (1.0 + df)) + 1.0;
    const double score = static_cast<double>(c.tf) * idf *
                         static_cast<double>(c.token_count);
    scored.push_back({score, &key, &c});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.candidate->first_pos != b.candidate->first_pos) {
      return a.candidate->first_pos < b.candidate->first_pos;
    }
    return *a.canonical < *b.canonical;
  });

  const std::size_t n_out = std::min(params.num_candidates, scored.size());
  std::vector<ExtractedPhrase> out;
  out.reserve(n_out);
  for (std::size_t i = 0; i < n_out; ++i) {
    out.push_back({scored[i].candidate->surface, *scored[i].canonical});
  }
  return out;
}

std::vector<Label> build_vocabulary(
    const std::vector<PhraseOccurrence>& occurrences) {
  std::map<std::string, Label> by_canonical;
  for (const PhraseOccurrence& occ : occurrences) {
    if (occ.canonical.empty()) {
      throw DomainError("vocabulary: empty canonical form");
    }
    auto [it, inserted] = by_canonical.try_emplace(occ.canonical);
    Label& label = it->second;
    if (inserted) {
      label.canonical = occ.canonical;
      label.surface = occ.surface;
      label.first_seen = occ.timestamp;
      label.last_seen = occ.timestamp;
      label.freq = 1;
      continue;
    }
    ++label.freq;
    label.first_seen = std::min(label.first_seen, occ.timestamp);
    label.last_seen = std::max(label.last_seen, occ.timestamp);
    if (occ.surface < label.surface) label.surface = occ.surface;
  }
  std::vector<Label> out;
  out.reserve(by_canonical.size());
  for (auto& [key, label] : by_canonical) out.push_back(std::move(label));
  return out;
}

}  // namespace atlas
