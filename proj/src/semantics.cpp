#include "atlas/semantics.hpp"

#include <algorithm>
#include <cmath>

#include "atlas/errors.hpp"
#include "atlas/hash.hpp"

namespace atlas {

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.size() != b.size()) {
    throw DomainError("cosine: dimension mismatch (" + std::to_string(a.size()) +
                      " vs " + std::to_string(b.size()) + ")");
  }
  if (a.empty()) {
    throw DomainError("cosine: empty vectors");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw DomainError("cosine: zero-norm vector");
  }
  const double cos = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(cos, -1.0, 1.0);
}

std::vector<std::pair<std::string, double>> top_k_similar(
    const EmbeddingVector& query,
    const std::vector<LabeledEmbedding>& candidates, std::size_t k,
    const std::set<std::string>& exclude) {
  struct Scored {
    double sim;
    std::uint64_t freq;
    const std::string* label;
  };
  std::vector<Scored> scored;
  scored.reserve(candidates.size());
  for (const LabeledEmbedding& c : candidates) {
    if (exclude.contains(c.label)) continue;
    scored.push_back({cosine_similarity(query, c.vec), c.freq, &c.label});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& x, const Scored& y) {
    if (x.sim != y.sim) return x.sim > y.sim;
    if (x.freq != y.freq) return x.freq > y.freq;
    return *x.label < *y.label;
  });
  const std::size_t n = std::min(k, scored.size());
  std::vector<std::pair<std::string, double>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.emplace_back(*scored[i].label, scored[i].sim);
  }
  return out;
}

HashedTrigramEmbedder::HashedTrigramEmbedder(std::size_t dim) : dim_(dim) {
  if (dim_ == 0) {
    throw DomainError("embedder: dimension must be positive");
  }
}

EmbeddingVector HashedTrigramEmbedder::embed(std::string_view text) const {
  EmbeddingVector v(dim_, 0.0);
  if (text.size() < 3) {
    v[0] = 1.0;
    return v;
  }
  for (std::size_t i = 0; i + 3 <= text.size(); ++i) {
    const std::uint64_t h = Fnv1a64::of(text.substr(i, 3));
    const std::size_t bucket = static_cast<std::size_t>((h >> 1) % dim_);
    v[bucket] += (h & 1u) ? 1.0 : -1.0;
  }
  double norm2 = 0.0;
  for (double x : v) norm2 += x * x;
  if (norm2 == 0.0) {
    v[0] = 1.0;
    return v;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : v) x *= inv;
  return v;
}

std::vector<EmbeddingVector> HashedTrigramEmbedder::embed_batch(
    const std::vector<std::string>& texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const std::string& t : texts) out.push_back(embed(t));
  return out;
}

}  // namespace atlas
