#include "atlas/remote.hpp"

#include <algorithm>
#include <chrono>
#include <iostream>
#include <thread>

#include "httplib.h"

#include "atlas/errors.hpp"
#include "atlas/hash.hpp"

namespace atlas {

namespace {

[[noreturn]] void schema_violation(const std::string& path,
                                   const nlohmann::json& payload,
                                   const std::string& detail) {
  std::cerr << "remote: schema violation at " << path << " (payload fnv1a64 "
            << hex_digest(Fnv1a64::of(payload.dump())) << "): " << detail
            << "\n";
  throw RemoteError(path + ": " + detail);
}

}  // namespace

void RemotePolicy::validate() const {
  if (timeout_ms <= 0) {
    throw ConfigError("remote timeout_ms must be positive");
  }
  if (max_retries < 0) {
    throw ConfigError("remote max_retries must be non-negative");
  }
  if (backoff_ms < 0) {
    throw ConfigError("remote backoff_ms must be non-negative");
  }
  if (max_in_flight < 1) {
    throw ConfigError("remote max_in_flight must be at least 1");
  }
}

RemoteClient::RemoteClient(std::string base_url, RemotePolicy policy)
    : base_url_(std::move(base_url)), policy_(policy) {
  if (base_url_.empty()) {
    throw ConfigError("remote base url is empty");
  }
  policy_.validate();
}

nlohmann::json RemoteClient::post_json(const std::string& path,
                                       const nlohmann::json& body) {
  const std::string payload = body.dump();
  int delay_ms = policy_.backoff_ms;
  for (int attempt = 0;; ++attempt) {
    httplib::Client client(base_url_);
    client.set_connection_timeout(std::chrono::milliseconds(policy_.timeout_ms));
    client.set_read_timeout(std::chrono::milliseconds(policy_.timeout_ms));
    client.set_write_timeout(std::chrono::milliseconds(policy_.timeout_ms));
    httplib::Result res = client.Post(path, payload, "application/json");

    // No response or a server-side failure is worth retrying; anything the
    // server answered deliberately is not.
    const bool transient = !res || res->status >= 500;
    if (!transient) {
      if (res->status != 200) {
        throw RemoteError(path + ": HTTP " + std::to_string(res->status));
      }
      nlohmann::json parsed = nlohmann::json::parse(res->body, nullptr, false);
      if (parsed.is_discarded()) {
        std::cerr << "remote: unparseable response at " << path
                  << " (payload fnv1a64 "
                  << hex_digest(Fnv1a64::of(res->body)) << ")\n";
        throw RemoteError(path + ": response is not valid JSON");
      }
      return parsed;
    }
    if (attempt >= policy_.max_retries) {
      throw RemoteError(path + ": transport failure after " +
                        std::to_string(attempt + 1) + " attempts");
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
    delay_ms *= 2;
  }
}

std::vector<std::vector<std::string>> RemoteClient::keyphrases(
    const std::vector<std::string>& texts, std::size_t num_candidates) {
  if (texts.empty()) return {};
  const std::string path = "/v1/keyphrases";
  const nlohmann::json response = post_json(
      path, {{"texts", texts}, {"num_candidates", num_candidates}});
  if (!response.is_object() || !response.contains("keyphrases") ||
      !response["keyphrases"].is_array() ||
      response["keyphrases"].size() != texts.size()) {
    schema_violation(path, response, "expected keyphrases[texts]");
  }
  std::vector<std::vector<std::string>> out;
  out.reserve(texts.size());
  for (const auto& list : response["keyphrases"]) {
    if (!list.is_array()) {
      schema_violation(path, response, "keyphrases entries must be arrays");
    }
    std::vector<std::string> phrases;
    for (const auto& p : list) {
      if (!p.is_string()) {
        schema_violation(path, response, "keyphrase must be a string");
      }
      phrases.push_back(p.get<std::string>());
    }
    out.push_back(std::move(phrases));
  }
  return out;
}

std::vector<EmbeddingVector> RemoteClient::embeddings(
    const std::vector<std::string>& texts, std::size_t expected_dim) {
  if (texts.empty()) return {};
  const std::string path = "/v1/embeddings";
  const nlohmann::json response = post_json(path, {{"texts", texts}});
  if (!response.is_object() || !response.contains("dim") ||
      !response["dim"].is_number_unsigned() || !response.contains("vectors") ||
      !response["vectors"].is_array() ||
      response["vectors"].size() != texts.size()) {
    schema_violation(path, response, "expected dim and vectors[texts]");
  }
  const std::size_t dim = response["dim"].get<std::size_t>();
  if (dim != expected_dim) {
    throw ConfigError("remote embedding dim " + std::to_string(dim) +
                      " does not match configured dim " +
                      std::to_string(expected_dim));
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& vj : response["vectors"]) {
    if (!vj.is_array()) {
      schema_violation(path, response, "vectors entries must be arrays");
    }
    EmbeddingVector v;
    v.reserve(vj.size());
    for (const auto& x : vj) {
      if (!x.is_number()) {
        schema_violation(path, response, "vector entries must be numbers");
      }
      v.push_back(x.get<double>());
    }
    if (v.size() != expected_dim) {
      throw ConfigError("remote embedding vector has dim " +
                        std::to_string(v.size()) + ", expected " +
                        std::to_string(expected_dim));
    }
    out.push_back(std::move(v));
  }
  return out;
}

nlohmann::json RemoteClient::hierarchy(const std::vector<std::string>& labels,
                                       std::size_t n_top,
                                       std::size_t n_leaves) {
  const std::string path = "/v1/hierarchy";
  const nlohmann::json response = post_json(
      path, {{"labels", labels}, {"n_top", n_top}, {"n_leaves", n_leaves}});
  if (!response.is_object() || !response.contains("tree") ||
      !response["tree"].is_object()) {
    schema_violation(path, response, "expected a tree object");
  }
  return response["tree"];
}

std::vector<double> RemoteClient::nli(
    const std::string& premise, const std::vector<std::string>& hypotheses) {
  if (hypotheses.empty()) return {};
  const std::string path = "/v1/nli";
  const nlohmann::json response =
      post_json(path, {{"premise", premise}, {"hypotheses", hypotheses}});
  if (!response.is_object() || !response.contains("scores") ||
      !response["scores"].is_array() ||
      response["scores"].size() != hypotheses.size()) {
    schema_violation(path, response, "expected scores[hypotheses]");
  }
  std::vector<double> out;
  out.reserve(hypotheses.size());
  for (const auto& s : response["scores"]) {
    if (!s.is_number()) {
      schema_violation(path, response, "scores must be numbers");
    }
    const double score = s.get<double>();
    if (score < 0.0 || score > 1.0) {
      schema_violation(path, response, "score outside [0, 1]");
    }
    out.push_back(score);
  }
  return out;
}

std::vector<SentimentScore> RemoteClient::sentiment(
    const std::vector<std::string>& texts) {
  if (texts.empty()) return {};
  const std::string path = "/v1/sentiment";
  const nlohmann::json response = post_json(path, {{"texts", texts}});
  if (!response.is_object() || !response.contains("results") ||
      !response["results"].is_array() ||
      response["results"].size() != texts.size()) {
    schema_violation(path, response, "expected results[texts]");
  }
  std::vector<SentimentScore> out;
  out.reserve(texts.size());
  for (const auto& rj : response["results"]) {
    if (!rj.is_object() || !rj.contains("label") || !rj["label"].is_string() ||
        !rj.contains("confidence") || !rj["confidence"].is_number()) {
      schema_violation(path, response, "results need label and confidence");
    }
    SentimentScore score;
    score.label = rj["label"].get<std::string>();
    if (score.label != kSentimentPositive && score.label != kSentimentNeutral &&
        score.label != kSentimentNegative) {
      schema_violation(path, response,
                       "label must be positive, neutral, or negative");
    }
    score.confidence = rj["confidence"].get<double>();
    if (score.confidence < 0.0 || score.confidence > 1.0) {
      std::cerr << "remote: clamping out-of-range confidence "
                << score.confidence << "\n";
      score.confidence = std::clamp(score.confidence, 0.0, 1.0);
    }
    out.push_back(std::move(score));
  }
  return out;
}

}  // namespace atlas
