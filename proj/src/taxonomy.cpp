#include "atlas/taxonomy.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <set>

#include "atlas/clustering.hpp"
#include "atlas/errors.hpp"

namespace atlas {

namespace {

struct Group {
  std::size_t min_index = 0;  // smallest original representative index
  std::vector<std::size_t> members;
};

struct Cuts {
  std::vector<Group> tops;
  std::vector<Group> mids;
  std::vector<Group> leaves;
};

// Complete-linkage agglomeration over cosine distance, snapshotting the
// active partition at the three requested sizes (n_leaf >= n_mid >= n_top).
// Equal-distance merges pick the pair with the smallest (min_index pair),
// so the result is independent of everything but the input order, which the
// caller fixes by sorting.
Cuts agglomerate(const std::vector<LabeledEmbedding>& reps, std::size_t n_top,
                 std::size_t n_mid, std::size_t n_leaf) {
  const std::size_t r = reps.size();
  std::vector<std::optional<Group>> slots(r);
  for (std::size_t i = 0; i < r; ++i) {
    slots[i] = Group{i, {i}};
  }
  // dist[i][j] is the complete-linkage distance between slots i and j; it
  // starts as the pointwise distance and is maintained by the max rule.
  std::vector<std::vector<double>> dist(r, std::vector<double>(r, 0.0));
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = i + 1; j < r; ++j) {
      dist[i][j] = 1.0 - cosine_similarity(reps[i].vec, reps[j].vec);
    }
  }

  Cuts cuts;
  auto snapshot = [&](std::size_t count) {
    auto current = [&]() {
      std::vector<Group> out;
      for (const auto& s : slots) {
        if (s) out.push_back(*s);
      }
      return out;
    };
    if (count == n_leaf && cuts.leaves.empty()) cuts.leaves = current();
    if (count == n_mid && cuts.mids.empty()) cuts.mids = current();
    if (count == n_top && cuts.tops.empty()) cuts.tops = current();
  };

  std::size_t active = r;
  snapshot(active);
  while (active > n_top) {
    std::size_t best_i = r, best_j = r;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < r; ++i) {
      if (!slots[i]) continue;
      for (std::size_t j = i + 1; j < r; ++j) {
        if (!slots[j]) continue;
        if (dist[i][j] < best_d) {
          best_d = dist[i][j];
          best_i = i;
          best_j = j;
        }
      }
    }
    // Merge j into i; slot index stays the group's min_index.
    for (std::size_t x = 0; x < r; ++x) {
      if (!slots[x] || x == best_i || x == best_j) continue;
      const double dix = best_i < x ? dist[best_i][x] : dist[x][best_i];
      const double djx = best_j < x ? dist[best_j][x] : dist[x][best_j];
      const double merged = std::max(dix, djx);
      if (best_i < x) {
        dist[best_i][x] = merged;
      } else {
        dist[x][best_i] = merged;
      }
    }
    Group& gi = *slots[best_i];
    Group& gj = *slots[best_j];
    gi.members.insert(gi.members.end(), gj.members.begin(), gj.members.end());
    std::sort(gi.members.begin(), gi.members.end());
    slots[best_j].reset();
    --active;
    snapshot(active);
  }
  return cuts;
}

// Intermediate tree used while names and ids are still in flux.
struct TempNode {
  std::string name;
  std::size_t order_key = 0;  // group min_index, breaks equal-name ties
  std::vector<std::string> member_labels;
  std::vector<TempNode> children;
};

std::string medoid_name(const std::vector<LabeledEmbedding>& reps,
                        const Group& group) {
  std::vector<LabeledEmbedding> members;
  members.reserve(group.members.size());
  for (std::size_t idx : group.members) members.push_back(reps[idx]);
  return members[representative(members)].label;
}

void sort_children(std::vector<TempNode>& children) {
  std::sort(children.begin(), children.end(),
            [](const TempNode& a, const TempNode& b) {
              if (a.name != b.name) return a.name < b.name;
              return a.order_key < b.order_key;
            });
}

// Renames every node to a globally unique name, walking level by level so
// that roots keep bare names and deeper duplicates pick up suffixes.
void dedupe_names(std::vector<TempNode>& roots) {
  std::set<std::string> used;
  auto claim = [&used](std::string& name) {
    if (used.insert(name).second) return;
    for (std::size_t k = 2;; ++k) {
      std::string candidate = name + " (" + std::to_string(k) + ")";
      if (used.insert(candidate).second) {
        name = std::move(candidate);
        return;
      }
    }
  };
  for (TempNode& root : roots) claim(root.name);
  for (TempNode& root : roots) {
    for (TempNode& mid : root.children) claim(mid.name);
  }
  for (TempNode& root : roots) {
    for (TempNode& mid : root.children) {
      for (TempNode& leaf : mid.children) claim(leaf.name);
    }
  }
}

void emit_node(const TempNode& node, const std::string& id, int level,
               TopicHierarchy& out) {
  TopicNode topic;
  topic.id = id;
  topic.name = node.name;
  topic.level = level;
  if (level == 3) {
    topic.member_labels = node.member_labels;
    std::sort(topic.member_labels.begin(), topic.member_labels.end());
  } else {
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      topic.children.push_back(id + "." + std::to_string(i));
    }
  }
  out.nodes.push_back(std::move(topic));
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    emit_node(node.children[i], id + "." + std::to_string(i), level + 1, out);
  }
}

TopicHierarchy finalize_tree(std::vector<TempNode> roots) {
  dedupe_names(roots);
  sort_children(roots);
  for (TempNode& root : roots) {
    sort_children(root.children);
    for (TempNode& mid : root.children) sort_children(mid.children);
  }
  TopicHierarchy h;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const std::string id = "t" + std::to_string(i);
    h.root_ids.push_back(id);
    emit_node(roots[i], id, 1, h);
  }
  return h;
}

}  // namespace

void TaxonomyParams::validate() const {
  if (n_top == 0) {
    throw ConfigError("taxonomy n_top must be positive");
  }
  if (n_top > n_leaves) {
    throw ConfigError("taxonomy n_top must not exceed n_leaves");
  }
  if (longtail_threshold <= 0.0 || longtail_threshold > 1.0) {
    throw ConfigError("taxonomy longtail_threshold must be in (0, 1]");
  }
}

const TopicNode* TopicHierarchy::find(const std::string& id) const {
  for (const TopicNode& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

TopicNode* TopicHierarchy::find(const std::string& id) {
  for (TopicNode& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

std::vector<const TopicNode*> TopicHierarchy::leaves() const {
  std::vector<const TopicNode*> out;
  for (const TopicNode& n : nodes) {
    if (n.level == 3) out.push_back(&n);
  }
  return out;
}

std::vector<const TopicNode*> TopicHierarchy::roots() const {
  std::vector<const TopicNode*> out;
  for (const std::string& id : root_ids) out.push_back(find(id));
  return out;
}

const std::string& TopicHierarchy::root_of(const std::string& id) const {
  for (const std::string& root : root_ids) {
    // Ids encode the path ("t3.1.0" descends from "t3"), so a prefix test
    // at a segment boundary answers ancestry without a parent map.
    if (id == root ||
        (id.size() > root.size() && id.compare(0, root.size(), root) == 0 &&
         id[root.size()] == '.')) {
      return root;
    }
  }
  throw DomainError("hierarchy: unknown node id '" + id + "'");
}

TopicHierarchy build_hierarchy(std::vector<LabeledEmbedding> representatives,
                               const TaxonomyParams& params) {
  params.validate();
  if (representatives.empty()) {
    throw DomainError("hierarchy: no representatives");
  }
  std::sort(representatives.begin(), representatives.end(),
            [](const LabeledEmbedding& a, const LabeledEmbedding& b) {
              return a.label < b.label;
            });
  for (std::size_t i = 1; i < representatives.size(); ++i) {
    if (representatives[i].label == representatives[i - 1].label) {
      throw DomainError("hierarchy: duplicate representative label '" +
                        representatives[i].label + "'");
    }
  }

  const std::size_t r = representatives.size();
  std::size_t n_top = params.n_top;
  if (r < n_top) {
    std::cerr << "warning: only " << r << " representatives for n_top="
              << n_top << "; degrading\n";
    n_top = r;
  }
  const std::size_t n_leaf = std::min(r, params.n_leaves);
  std::size_t n_mid = n_leaf;
  if (params.mid_layer) {
    const auto ideal = static_cast<std::size_t>(std::llround(
        std::sqrt(static_cast<double>(n_top) * static_cast<double>(n_leaf))));
    n_mid = std::clamp(ideal, n_top, n_leaf);
  }

  const Cuts cuts = agglomerate(representatives, n_top, n_mid, n_leaf);

  // Each representative's mid and top group; agglomeration is monotone, so
  // leaf groups nest inside mid groups inside top groups.
  std::vector<std::size_t> mid_of(r), top_of(r);
  for (std::size_t m = 0; m < cuts.mids.size(); ++m) {
    for (std::size_t idx : cuts.mids[m].members) mid_of[idx] = m;
  }
  for (std::size_t t = 0; t < cuts.tops.size(); ++t) {
    for (std::size_t idx : cuts.tops[t].members) top_of[idx] = t;
  }

  std::vector<TempNode> roots(cuts.tops.size());
  std::vector<TempNode> mids(cuts.mids.size());
  for (std::size_t m = 0; m < cuts.mids.size(); ++m) {
    mids[m].name = medoid_name(representatives, cuts.mids[m]);
    mids[m].order_key = cuts.mids[m].min_index;
  }
  for (const Group& leaf_group : cuts.leaves) {
    TempNode leaf;
    leaf.name = medoid_name(representatives, leaf_group);
    leaf.order_key = leaf_group.min_index;
    for (std::size_t idx : leaf_group.members) {
      leaf.member_labels.push_back(representatives[idx].label);
    }
    mids[mid_of[leaf_group.members.front()]].children.push_back(
        std::move(leaf));
  }
  for (std::size_t t = 0; t < cuts.tops.size(); ++t) {
    roots[t].name = medoid_name(representatives, cuts.tops[t]);
    roots[t].order_key = cuts.tops[t].min_index;
  }
  for (std::size_t m = 0; m < mids.size(); ++m) {
    roots[top_of[cuts.mids[m].members.front()]].children.push_back(
        std::move(mids[m]));
  }

  return finalize_tree(std::move(roots));
}

namespace {

struct RawNode {
  std::string name;
  std::vector<RawNode> children;
};

RawNode parse_raw_tree(const nlohmann::json& j, int depth) {
  if (!j.is_object() || !j.contains("name") || !j["name"].is_string() ||
      j["name"].get<std::string>().empty()) {
    throw RemoteError("hierarchy tree node without a valid name");
  }
  if (depth > 3) {
    throw RemoteError("hierarchy tree deeper than 3 levels");
  }
  RawNode node;
  node.name = j["name"].get<std::string>();
  if (j.contains("children")) {
    if (!j["children"].is_array()) {
      throw RemoteError("hierarchy tree children must be an array");
    }
    for (const auto& child : j["children"]) {
      node.children.push_back(parse_raw_tree(child, depth + 1));
    }
  }
  return node;
}

int max_depth(const RawNode& node) {
  int deepest = 0;
  for (const RawNode& c : node.children) {
    deepest = std::max(deepest, max_depth(c));
  }
  return deepest + 1;
}

}  // namespace

TopicHierarchy hierarchy_from_remote_tree(
    const nlohmann::json& tree, const TaxonomyParams& params,
    const std::function<EmbeddingVector(const std::string&)>& embed_name) {
  params.validate();
  RawNode root = parse_raw_tree(tree, 0);  // super-root container
  if (root.children.empty()) {
    throw RemoteError("hierarchy tree has no level-1 nodes");
  }
  if (max_depth(root) != 4) {  // super-root + exactly 3 levels below
    throw RemoteError("hierarchy tree depth is not exactly 3");
  }

  // Childless nodes above leaf depth are misplaced leaves. Detach them until
  // the structure stabilizes, then hang each under the level-2 node whose
  // name embedding it is closest to.
  std::vector<RawNode> orphans;
  bool changed = true;
  while (changed) {
    changed = false;
    for (RawNode& level1 : root.children) {
      for (auto it = level1.children.begin(); it != level1.children.end();) {
        if (it->children.empty()) {
          orphans.push_back(std::move(*it));
          it = level1.children.erase(it);
          changed = true;
        } else {
          ++it;
        }
      }
    }
    for (auto it = root.children.begin(); it != root.children.end();) {
      if (it->children.empty()) {
        orphans.push_back(std::move(*it));
        it = root.children.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
  }
  if (root.children.empty()) {
    throw RemoteError("hierarchy tree has no complete root-to-leaf chain");
  }

  if (!orphans.empty()) {
    std::sort(orphans.begin(), orphans.end(),
              [](const RawNode& a, const RawNode& b) { return a.name < b.name; });
    struct MidRef {
      RawNode* node;
      EmbeddingVector vec;
    };
    std::vector<MidRef> mids;
    for (RawNode& level1 : root.children) {
      for (RawNode& mid : level1.children) {
        mids.push_back({&mid, embed_name(mid.name)});
      }
    }
    for (RawNode& orphan : orphans) {
      const EmbeddingVector v = embed_name(orphan.name);
      std::size_t best = 0;
      double best_sim = -2.0;
      for (std::size_t i = 0; i < mids.size(); ++i) {
        const double sim = cosine_similarity(v, mids[i].vec);
        if (sim > best_sim ||
            (sim == best_sim && mids[i].node->name < mids[best].node->name)) {
          best = i;
          best_sim = sim;
        }
      }
      // A freshly attached orphan is a leaf; it must not grow children, and
      // it cannot, because attachment happens after the detach fixpoint.
      mids[best].node->children.push_back(std::move(orphan));
    }
  }

  std::size_t leaf_count = 0;
  for (const RawNode& level1 : root.children) {
    for (const RawNode& mid : level1.children) {
      leaf_count += mid.children.size();
    }
  }
  if (leaf_count < params.n_top) {
    throw RemoteError("hierarchy tree has " + std::to_string(leaf_count) +
                      " leaves, need at least " +
                      std::to_string(params.n_top));
  }

  std::vector<TempNode> roots;
  std::size_t order = 0;
  for (RawNode& level1 : root.children) {
    TempNode top;
    top.name = std::move(level1.name);
    top.order_key = order++;
    for (RawNode& mid : level1.children) {
      TempNode m;
      m.name = std::move(mid.name);
      m.order_key = order++;
      for (RawNode& leaf : mid.children) {
        TempNode l;
        l.name = std::move(leaf.name);
        l.order_key = order++;
        m.children.push_back(std::move(l));
      }
      top.children.push_back(std::move(m));
    }
    roots.push_back(std::move(top));
  }
  return finalize_tree(std::move(roots));
}

std::vector<LeafRef> make_leaf_refs(
    const TopicHierarchy& hierarchy,
    const std::function<EmbeddingVector(const std::string&)>& embed_name) {
  std::vector<LeafRef> out;
  for (const TopicNode* leaf : hierarchy.leaves()) {
    out.push_back({leaf->id, leaf->name, embed_name(leaf->name)});
  }
  return out;
}

const std::string& map_label_to_leaf(const EmbeddingVector& label_vec,
                                     const std::vector<LeafRef>& leaves) {
  if (leaves.empty()) {
    throw DomainError("map_label_to_leaf: no leaves");
  }
  std::size_t best = 0;
  double best_sim = -2.0;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    const double sim = cosine_similarity(label_vec, leaves[i].vec);
    if (sim > best_sim ||
        (sim == best_sim && leaves[i].name < leaves[best].name)) {
      best = i;
      best_sim = sim;
    }
  }
  return leaves[best].id;
}

void assign_members(TopicHierarchy& hierarchy,
                    const std::map<std::string, std::string>& label_to_leaf) {
  for (TopicNode& n : hierarchy.nodes) {
    if (n.level == 3) n.member_labels.clear();
  }
  hierarchy.index.clear();
  for (const auto& [label, leaf_id] : label_to_leaf) {
    TopicNode* leaf = hierarchy.find(leaf_id);
    if (leaf == nullptr || leaf->level != 3) {
      throw DomainError("assign_members: '" + leaf_id + "' is not a leaf");
    }
    leaf->member_labels.push_back(label);
    hierarchy.index.emplace(label, leaf_id);
  }
  // std::map iteration already delivered labels in order, so member lists
  // are sorted without another pass.
}

void compute_shares(TopicHierarchy& hierarchy,
                    const std::map<std::string, std::size_t>& leaf_post_counts,
                    std::size_t total_posts) {
  for (const auto& [leaf_id, count] : leaf_post_counts) {
    const TopicNode* leaf = hierarchy.find(leaf_id);
    if (leaf == nullptr || leaf->level != 3) {
      throw DomainError("compute_shares: '" + leaf_id + "' is not a leaf");
    }
    (void)count;
  }
  const double total = static_cast<double>(total_posts);

  // Recursive lambda: child shares are set first, parents take the sum, so
  // conservation holds exactly as written.
  auto fill = [&](auto&& self, TopicNode& node) -> double {
    if (node.level == 3) {
      const auto it = leaf_post_counts.find(node.id);
      const std::size_t count = it == leaf_post_counts.end() ? 0 : it->second;
      node.share =
          total_posts == 0 ? 0.0 : static_cast<double>(count) / total;
      return node.share;
    }
    double sum = 0.0;
    for (const std::string& child_id : node.children) {
      sum += self(self, *hierarchy.find(child_id));
    }
    node.share = sum;
    return sum;
  };
  double assigned = 0.0;
  for (const std::string& root_id : hierarchy.root_ids) {
    assigned += fill(fill, *hierarchy.find(root_id));
  }
  hierarchy.unassigned = total_posts == 0 ? 0.0 : 1.0 - assigned;
}

LongtailStats longtail_stats(const TopicHierarchy& hierarchy,
                             double threshold) {
  LongtailStats stats;
  std::vector<const TopicNode*> roots = hierarchy.roots();
  if (roots.empty()) return stats;
  std::sort(roots.begin(), roots.end(),
            [](const TopicNode* a, const TopicNode* b) {
              if (a->share != b->share) return a->share > b->share;
              return a->name < b->name;
            });
  stats.head_id = roots[0]->id;
  stats.head_name = roots[0]->name;
  stats.head_share = roots[0]->share;
  std::size_t positive_tail = 0;
  for (std::size_t i = 1; i < roots.size(); ++i) {
    stats.tail_shares.push_back(roots[i]->share);
    if (roots[i]->share > 0.0) ++positive_tail;
  }
  stats.is_longtail = stats.head_share >= threshold && positive_tail >= 2;
  return stats;
}

nlohmann::json hierarchy_to_json(const TopicHierarchy& hierarchy) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const TopicNode& n : hierarchy.nodes) {
    nodes.push_back({{"id", n.id},
                     {"name", n.name},
                     {"level", n.level},
                     {"children", n.children},
                     {"member_labels", n.member_labels},
                     {"share", n.share}});
  }
  return {{"nodes", std::move(nodes)},
          {"roots", hierarchy.root_ids},
          {"index", hierarchy.index},
          {"unassigned", hierarchy.unassigned}};
}

TopicHierarchy hierarchy_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("nodes") || !j.contains("roots") ||
      !j.contains("index") || !j.contains("unassigned")) {
    throw DataError("hierarchy json: missing required keys");
  }
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "nodes" && key != "roots" && key != "index" &&
        key != "unassigned") {
      throw DataError("hierarchy json: unknown key '" + key + "'");
    }
  }
  TopicHierarchy h;
  if (!j["nodes"].is_array() || !j["roots"].is_array() ||
      !j["index"].is_object() || !j["unassigned"].is_number()) {
    throw DataError("hierarchy json: wrong field types");
  }
  std::set<std::string> ids;
  for (const auto& nj : j["nodes"]) {
    TopicNode n;
    if (!nj.is_object() || !nj.contains("id") || !nj["id"].is_string() ||
        !nj.contains("name") || !nj["name"].is_string() ||
        !nj.contains("level") || !nj["level"].is_number_integer() ||
        !nj.contains("children") || !nj["children"].is_array() ||
        !nj.contains("member_labels") || !nj["member_labels"].is_array() ||
        !nj.contains("share") || !nj["share"].is_number()) {
      throw DataError("hierarchy json: malformed node");
    }
    n.id = nj["id"].get<std::string>();
    n.name = nj["name"].get<std::string>();
    n.level = nj["level"].get<int>();
    if (n.level < 1 || n.level > 3) {
      throw DataError("hierarchy json: node level out of range");
    }
    for (const auto& c : nj["children"]) {
      if (!c.is_string()) throw DataError("hierarchy json: bad child id");
      n.children.push_back(c.get<std::string>());
    }
    for (const auto& m : nj["member_labels"]) {
      if (!m.is_string()) throw DataError("hierarchy json: bad member label");
      n.member_labels.push_back(m.get<std::string>());
    }
    n.share = nj["share"].get<double>();
    if ((n.level == 3) != n.children.empty()) {
      throw DataError("hierarchy json: children must be empty exactly on leaves");
    }
    if (!ids.insert(n.id).second) {
      throw DataError("hierarchy json: duplicate node id '" + n.id + "'");
    }
    h.nodes.push_back(std::move(n));
  }
  for (const auto& r : j["roots"]) {
    if (!r.is_string()) throw DataError("hierarchy json: bad root id");
    h.root_ids.push_back(r.get<std::string>());
  }
  for (const TopicNode& n : h.nodes) {
    for (const std::string& c : n.children) {
      const TopicNode* child = h.find(c);
      if (child == nullptr || child->level != n.level + 1) {
        throw DataError("hierarchy json: broken child link '" + c + "'");
      }
    }
  }
  for (const std::string& r : h.root_ids) {
    const TopicNode* root = h.find(r);
    if (root == nullptr || root->level != 1) {
      throw DataError("hierarchy json: root '" + r + "' is not a level-1 node");
    }
  }
  for (const auto& [label, leaf_id] : j["index"].items()) {
    if (!leaf_id.is_string()) throw DataError("hierarchy json: bad index entry");
    const TopicNode* leaf = h.find(leaf_id.get<std::string>());
    if (leaf == nullptr || leaf->level != 3) {
      throw DataError("hierarchy json: index target is not a leaf");
    }
    h.index.emplace(label, leaf_id.get<std::string>());
  }
  h.unassigned = j["unassigned"].get<double>();
  return h;
}

}  // namespace atlas
