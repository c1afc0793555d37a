#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "atlas/semantics.hpp"

namespace atlas {

struct TaxonomyParams {
  std::size_t n_top = 7;
  std::size_t n_leaves = 64;
  bool mid_layer = true;
  double longtail_threshold = 0.5;

  // Throws ConfigError when n_top is zero, n_top > n_leaves, or the
  // threshold is outside (0, 1].
  void validate() const;
};

struct TopicNode {
  std::string id;
  std::string name;
  int level = 0;                          // 1 root, 2 mid, 3 leaf
  std::vector<std::string> children;      // node ids; empty iff level 3
  std::vector<std::string> member_labels; // canonical labels; leaves only
  double share = 0.0;
};

struct TopicHierarchy {
  std::vector<TopicNode> nodes;           // depth-first, roots in order
  std::vector<std::string> root_ids;
  std::map<std::string, std::string> index;  // canonical label -> leaf id
  double unassigned = 0.0;

  const TopicNode* find(const std::string& id) const;
  TopicNode* find(const std::string& id);
  std::vector<const TopicNode*> leaves() const;
  std::vector<const TopicNode*> roots() const;

  // Id of the level-1 ancestor of any node id; throws DomainError when the
  // id is unknown.
  const std::string& root_of(const std::string& id) const;
};

// Offline hierarchy builder: complete-linkage agglomerative clustering of
// the cluster representatives under cosine distance, cut at three sizes to
// give n_top roots, an intermediate layer, and min(reps, n_leaves) leaves.
// Node names are group medoid labels, de-duplicated with " (2)" style
// suffixes. Fewer representatives than n_top degrades the root count with a
// stderr warning. Deterministic.
TopicHierarchy build_hierarchy(std::vector<LabeledEmbedding> representatives,
                               const TaxonomyParams& params);

// Builds the hierarchy from a provider's nested {"name", "children"} tree
// (the value under "tree"). The tree must reach depth exactly 3 below the
// super-root and hold at least n_top leaves after repair; otherwise a
// RemoteError is thrown. Repairs applied: duplicate names suffixed,
// childless depth-1/2 nodes re-attached as leaves under the level-2 node
// with the nearest name embedding.
TopicHierarchy hierarchy_from_remote_tree(
    const nlohmann::json& tree, const TaxonomyParams& params,
    const std::function<EmbeddingVector(const std::string&)>& embed_name);

struct LeafRef {
  std::string id;
  std::string name;
  EmbeddingVector vec;
};

std::vector<LeafRef> make_leaf_refs(
    const TopicHierarchy& hierarchy,
    const std::function<EmbeddingVector(const std::string&)>& embed_name);

// Argmax cosine between the label vector and the leaf-name vectors; ties go
// to the lexicographically smaller leaf name. Returns the leaf id.
const std::string& map_label_to_leaf(const EmbeddingVector& label_vec,
                                     const std::vector<LeafRef>& leaves);

// Rewrites leaf member_labels and the hierarchy index from a complete
// label -> leaf-id assignment.
void assign_members(TopicHierarchy& hierarchy,
                    const std::map<std::string, std::string>& label_to_leaf);

// Leaf share = assigned posts / total posts; internal shares sum children;
// unassigned = remaining fraction. total_posts of zero leaves every share 0.
void compute_shares(TopicHierarchy& hierarchy,
                    const std::map<std::string, std::size_t>& leaf_post_counts,
                    std::size_t total_posts);

struct LongtailStats {
  std::string head_id;
  std::string head_name;
  double head_share = 0.0;
  std::vector<double> tail_shares;  // descending
  bool is_longtail = false;
};

// Head = max-share root. is_longtail holds when head_share reaches the
// threshold and at least two other roots carry positive mass.
LongtailStats longtail_stats(const TopicHierarchy& hierarchy,
                             double threshold);

nlohmann::json hierarchy_to_json(const TopicHierarchy& hierarchy);

// Strict parse of the serialized form; throws DataError on any structural
// violation. Round-trips hierarchy_to_json exactly.
TopicHierarchy hierarchy_from_json(const nlohmann::json& j);

}  // namespace atlas
