#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"

#include "atlas/errors.hpp"
#include "atlas/semantics.hpp"

using namespace atlas;

TEST_CASE("cosine similarity oracle values") {
  CHECK(std::abs(cosine_similarity({1, 2, 3}, {4, 5, 6}) - 0.974632) <= 1e-6);
  CHECK(std::abs(cosine_similarity({1, 0}, {0, 1})) <= 1e-12);
  CHECK(std::abs(cosine_similarity({3, 4}, {3, 4}) - 1.0) <= 1e-9);
  CHECK(std::abs(cosine_similarity({1, 1}, {-1, -1}) + 1.0) <= 1e-9);
}

TEST_CASE("cosine similarity rejects contract violations") {
  CHECK_THROWS_AS(cosine_similarity({1, 2}, {1, 2, 3}), DomainError);
  CHECK_THROWS_AS(cosine_similarity({}, {}), DomainError);
  CHECK_THROWS_AS(cosine_similarity({0, 0}, {1, 2}), DomainError);
  CHECK_THROWS_AS(cosine_similarity({1, 2}, {0, 0}), DomainError);
}

TEST_CASE("cosine similarity fuzz: symmetry, bounds, self-similarity") {
  std::mt19937_64 rng(991);
  std::normal_distribution<double> gauss(0.0, 2.0);
  for (int trial = 0; trial < 2000; ++trial) {
    std::size_t dim = 2 + rng() % 15;
    EmbeddingVector a(dim), b(dim);
    double na = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      a[i] = gauss(rng);
      b[i] = gauss(rng);
      na += a[i] * a[i];
    }
    if (na == 0.0) a[0] = 1.0;
    bool nb_zero = true;
    for (double x : b) nb_zero = nb_zero && x == 0.0;
    if (nb_zero) b[0] = 1.0;

    double ab = cosine_similarity(a, b);
    double ba = cosine_similarity(b, a);
    CHECK(std::abs(ab - ba) <= 1e-12);
    CHECK(ab >= -1.0);
    CHECK(ab <= 1.0);
    CHECK(std::abs(cosine_similarity(a, a) - 1.0) <= 1e-9);
  }
}

TEST_CASE("cosine similarity is scale invariant") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    EmbeddingVector a(8), b(8);
    for (std::size_t i = 0; i < 8; ++i) {
      a[i] = gauss(rng) + 0.01;
      b[i] = gauss(rng) + 0.01;
    }
    double base = cosine_similarity(a, b);
    EmbeddingVector a3(a);
    for (double& x : a3) x *= 3.25;
    CHECK(cosine_similarity(a3, b) == doctest::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("top_k_similar ranks by similarity, then freq, then label") {
  // Identical vectors make the similarity ties bit-exact.
  std::vector<LabeledEmbedding> cands = {
      {"north", 1, {0.0, 1.0}},
      {"east", 5, {0.0, 1.0}},
      {"beta", 2, {1.0, 0.0}},
      {"alpha", 2, {1.0, 0.0}},
      {"south", 9, {-1.0, 0.0}},
  };
  EmbeddingVector query = {1.0, 0.0};
  auto top = top_k_similar(query, cands, 3);
  REQUIRE(top.size() == 3);
  // alpha and beta tie at cos=1 and freq=2; lexicographic order decides.
  CHECK(top[0].first == "alpha");
  CHECK(top[1].first == "beta");
  // north and east tie at cos=0; east has the higher freq.
  CHECK(top[2].first == "east");

  auto all = top_k_similar(query, cands, 10);
  CHECK(all.size() == 5);
  CHECK(all[3].first == "north");
  CHECK(all[4].first == "south");

  CHECK(top_k_similar(query, cands, 0).empty());
  CHECK(top_k_similar(query, {}, 3).empty());
}

TEST_CASE("top_k_similar honors the exclude set") {
  std::vector<LabeledEmbedding> cands = {
      {"a", 1, {1.0, 0.0}},
      {"b", 1, {0.9, 0.1}},
      {"c", 1, {0.0, 1.0}},
  };
  auto top = top_k_similar({1.0, 0.0}, cands, 2, {"a"});
  REQUIRE(top.size() == 2);
  CHECK(top[0].first == "b");
  CHECK(top[1].first == "c");
}

TEST_CASE("top_k_similar argmax is invariant under query scaling") {
  std::mt19937_64 rng(33);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<LabeledEmbedding> cands;
  for (int i = 0; i < 12; ++i) {
    EmbeddingVector v(6);
    for (double& x : v) x = gauss(rng);
    bool zero = true;
    for (double x : v) zero = zero && x == 0.0;
    if (zero) v[0] = 1.0;
    cands.push_back({"c" + std::to_string(i), 1, v});
  }
  for (int trial = 0; trial < 100; ++trial) {
    EmbeddingVector q(6);
    for (double& x : q) x = gauss(rng);
    bool zero = true;
    for (double x : q) zero = zero && x == 0.0;
    if (zero) q[0] = 1.0;
    EmbeddingVector scaled(q);
    for (double& x : scaled) x *= 7.5;
    auto a = top_k_similar(q, cands, 1);
    auto b = top_k_similar(scaled, cands, 1);
    REQUIRE(a.size() == 1);
    REQUIRE(b.size() == 1);
    CHECK(a[0].first == b[0].first);
  }
}

TEST_CASE("hashed trigram embedder produces unit vectors") {
  HashedTrigramEmbedder embedder(384);
  for (const std::string& text :
       {std::string("data privacy"), std::string("facial recognition ban"),
        std::string("x"), std::string("")}) {
    EmbeddingVector v = embedder.embed(text);
    REQUIRE(v.size() == 384);
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    CHECK(std::abs(std::sqrt(norm2) - 1.0) <= 1e-9);
  }
}

TEST_CASE("hashed trigram embedder is deterministic") {
  HashedTrigramEmbedder a(64);
  HashedTrigramEmbedder b(64);
  CHECK(a.embed("algorithmic bias") == b.embed("algorithmic bias"));
  CHECK(a.embed("algorithmic bias") == a.embed("algorithmic bias"));
}

TEST_CASE("embedder maps sub-trigram input to the first basis vector") {
  HashedTrigramEmbedder embedder(8);
  EmbeddingVector e1(8, 0.0);
  e1[0] = 1.0;
  CHECK(embedder.embed("") == e1);
  CHECK(embedder.embed("ab") == e1);
}

TEST_CASE("embedder geometry: shared trigrams raise cosine") {
  HashedTrigramEmbedder embedder(384);
  double related = cosine_similarity(embedder.embed("data privacy law"),
                                     embedder.embed("data privacy rules"));
  double unrelated = cosine_similarity(embedder.embed("data privacy law"),
                                       embedder.embed("quantum flux router"));
  CHECK(related > unrelated);
}

TEST_CASE("embedder rejects dimension zero") {
  CHECK_THROWS_AS(HashedTrigramEmbedder(0), DomainError);
}

TEST_CASE("embed_batch matches per-text embedding") {
  HashedTrigramEmbedder embedder(32);
  std::vector<std::string> texts = {"one", "two", "three"};
  auto batch = embedder.embed_batch(texts);
  REQUIRE(batch.size() == 3);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    CHECK(batch[i] == embedder.embed(texts[i]));
  }
}
