#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "atlas/semantics.hpp"
#include "atlas/sentiment.hpp"

namespace atlas {

struct RemotePolicy {
  int timeout_ms = 5000;
  int max_retries = 3;     // additional attempts after the first
  int backoff_ms = 100;    // doubles per retry
  int max_in_flight = 4;   // interface cap; this client is synchronous

  void validate() const;
};

// JSON-over-HTTP client for the five model endpoints. Transport failures
// and 5xx responses are retried with exponential backoff; anything else
// that is not a schema-conforming 200 raises RemoteError immediately, with
// the offending payload's hash logged to stderr so runs can be correlated
// with server logs. Empty batches return empty results without touching the
// network.
class RemoteClient {
 public:
  RemoteClient(std::string base_url, RemotePolicy policy);

  // POST /v1/keyphrases {"texts":[...], "num_candidates":n}
  //   -> {"keyphrases":[[str]]}, one list per text.
  std::vector<std::vector<std::string>> keyphrases(
      const std::vector<std::string>& texts, std::size_t num_candidates);

  // POST /v1/embeddings {"texts":[...]} -> {"dim":n, "vectors":[[f]]}.
  // A response whose dim differs from expected_dim (or whose vectors do not
  // all have that length) is a ConfigError, not a retry case.
  std::vector<EmbeddingVector> embeddings(const std::vector<std::string>& texts,
                                          std::size_t expected_dim);

  // POST /v1/hierarchy {"labels":[...], "n_top":n, "n_leaves":n}
  //   -> {"tree": {...}}; returns the tree value unparsed.
  nlohmann::json hierarchy(const std::vector<std::string>& labels,
                           std::size_t n_top, std::size_t n_leaves);

  // POST /v1/nli {"premise":str, "hypotheses":[...]} -> {"scores":[f]}
  // with every score in [0, 1].
  std::vector<double> nli(const std::string& premise,
                          const std::vector<std::string>& hypotheses);

  // POST /v1/sentiment {"texts":[...]}
  //   -> {"results":[{"label":str,"confidence":f}]}.
  // Labels outside the three classes are schema violations; confidence is
  // clamped to [0, 1] with a warning.
  std::vector<SentimentScore> sentiment(const std::vector<std::string>& texts);

 private:
  nlohmann::json post_json(const std::string& path, const nlohmann::json& body);

  std::string base_url_;
  RemotePolicy policy_;
};

}  // namespace atlas
