#include "atlas/clustering.hpp"

#include <deque>
#include <limits>
#include <string>

#include "atlas/errors.hpp"

namespace atlas {

void DbscanParams::validate() const {
  if (eps < 0.0) {
    throw ConfigError("dbscan eps must be non-negative");
  }
  if (min_pts < 1) {
    throw ConfigError("dbscan min_pts must be at least 1");
  }
}

ClusterAssignment dbscan(const std::vector<EmbeddingVector>& points,
                         const DbscanParams& params) {
  params.validate();
  ClusterAssignment result;
  const std::size_t n = points.size();
  result.labels.assign(n, ClusterAssignment::kNoise);
  if (n == 0) return result;

  const std::size_t dim = points[0].size();
  for (const EmbeddingVector& p : points) {
    if (p.size() != dim) {
      throw DomainError("dbscan: mixed point dimensions");
    }
  }

  // n stays small (vocabulary-scale), so the quadratic neighborhood pass is
  // fine and keeps the behavior exactly at the definition.
  std::vector<std::vector<std::size_t>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) {
    neighbors[i].push_back(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      if (1.0 - cosine_similarity(points[i], points[j]) <= params.eps) {
        neighbors[i].push_back(j);
        neighbors[j].push_back(i);
      }
    }
  }
  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) {
    core[i] = neighbors[i].size() >= params.min_pts;
  }

  int next_cluster = 0;
  std::vector<bool> queued(n, false);
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!core[seed] || result.labels[seed] != ClusterAssignment::kNoise) {
      continue;
    }
    const int cluster = next_cluster++;
    std::deque<std::size_t> frontier;
    frontier.push_back(seed);
    queued[seed] = true;
    while (!frontier.empty()) {
      const std::size_t p = frontier.front();
      frontier.pop_front();
      if (result.labels[p] != ClusterAssignment::kNoise) continue;
      result.labels[p] = cluster;
      if (!core[p]) continue;  // border point: claimed, but not expanded
      for (std::size_t q : neighbors[p]) {
        if (!queued[q] && result.labels[q] == ClusterAssignment::kNoise) {
          frontier.push_back(q);
          queued[q] = true;
        }
      }
    }
  }
  result.cluster_count = static_cast<std::size_t>(next_cluster);
  return result;
}

std::size_t representative(const std::vector<LabeledEmbedding>& members) {
  if (members.empty()) {
    throw DomainError("representative: empty cluster");
  }
  std::size_t best = 0;
  double best_sum = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < members.size(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < members.size(); ++j) {
      if (i == j) continue;
      sum += 1.0 - cosine_similarity(members[i].vec, members[j].vec);
    }
    const bool better =
        sum < best_sum ||
        (sum == best_sum &&
         (members[i].freq > members[best].freq ||
          (members[i].freq == members[best].freq &&
           members[i].label < members[best].label)));
    if (better) {
      best = i;
      best_sum = sum;
    }
  }
  return best;
}

}  // namespace atlas
