#pragma once

#include <cstddef>
#include <vector>

#include "atlas/semantics.hpp"

namespace atlas {

struct DbscanParams {
  double eps = 0.30;     // cosine-distance radius, 1 - cos(a, b)
  std::size_t min_pts = 5;

  // Throws ConfigError when eps < 0 or min_pts < 1.
  void validate() const;
};

struct ClusterAssignment {
  static constexpr int kNoise = -1;

  std::vector<int> labels;      // one entry per input point
  std::size_t cluster_count = 0;
};

// DBSCAN over cosine distance. A point is core iff its eps-neighborhood
// (itself included) holds at least min_pts points. Clusters are numbered
// 0..C-1 in order of their seed core point's input position; border points
// reachable from several clusters go to the earliest-seeded one; everything
// else is kNoise. Deterministic for a fixed input order.
ClusterAssignment dbscan(const std::vector<EmbeddingVector>& points,
                         const DbscanParams& params);

// Medoid of a non-empty cluster: the member with minimal summed cosine
// distance to all other members. Ties go to the higher freq, then the
// lexicographically smaller label. Returns an index into `members`.
std::size_t representative(const std::vector<LabeledEmbedding>& members);

}  // namespace atlas
