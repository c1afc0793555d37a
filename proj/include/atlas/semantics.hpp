#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace atlas {

using EmbeddingVector = std::vector<double>;

// dot(a, b) / (|a| * |b|), clamped to [-1, 1] on output. Throws DomainError
// on dimension mismatch or a zero-norm vector; a zero norm is a logic bug
// upstream (embeddings are unit length), not data to smooth over.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

struct LabeledEmbedding {
  std::string label;
  std::uint64_t freq = 0;
  EmbeddingVector vec;
};

// The k highest-similarity candidates not in `exclude`, as (label, cosine)
// descending. Ties broken by higher freq, then lexicographic label. Returns
// fewer than k when candidates run out; k = 0 yields an empty list.
std::vector<std::pair<std::string, double>> top_k_similar(
    const EmbeddingVector& query,
    const std::vector<LabeledEmbedding>& candidates, std::size_t k,
    const std::set<std::string>& exclude = {});

// Deterministic local text embedder: hashed byte trigrams with signed
// buckets, L2-normalised. Stands in for a sentence-embedding service when
// running offline; geometry is meaningful (shared trigrams raise cosine) but
// not semantic.
class HashedTrigramEmbedder {
 public:
  explicit HashedTrigramEmbedder(std::size_t dim = 384);

  std::size_t dim() const { return dim_; }

  // Never returns a zero vector: input shorter than one trigram (or full
  // signed cancellation) maps to the first basis vector.
  EmbeddingVector embed(std::string_view text) const;

  std::vector<EmbeddingVector> embed_batch(
      const std::vector<std::string>& texts) const;

 private:
  std::size_t dim_;
};

}  // namespace atlas
