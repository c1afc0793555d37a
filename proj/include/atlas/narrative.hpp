#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "atlas/geospatial.hpp"
#include "atlas/semantics.hpp"
#include "atlas/taxonomy.hpp"

namespace atlas {

// Monthly counts per level-1 topic, gap-filled over the corpus month range.
struct TrendSeries {
  std::vector<std::string> months;    // "YYYY-MM", ascending, contiguous
  std::vector<std::string> topic_ids; // hierarchy root order
  std::vector<std::string> topic_names;
  // counts[m][t] pairs with months[m] and topic_ids[t].
  std::vector<std::vector<std::uint64_t>> counts;
  std::vector<std::uint64_t> unassigned;  // per month
};

struct AssignedPost {
  std::int64_t created_at = 0;
  std::optional<std::string> leaf_id;  // absent = unassigned
};

TrendSeries trend_series(const std::vector<AssignedPost>& posts,
                         const TopicHierarchy& hierarchy);

// Per-region metrics backing the four story-map layers.
struct RegionMetrics {
  Region region;
  GeoPoint anchor;
  std::uint64_t total = 0;
  std::map<std::string, std::uint64_t> topic_counts;  // root id -> count
  std::string dominant;                // root id, empty when no topic counts
  std::string dominant_excluding_head; // root id, empty when none
  std::uint64_t positive = 0;
  std::uint64_t negative = 0;
  std::uint64_t neutral = 0;
};

struct StoryMaps {
  std::vector<RegionMetrics> rows;     // sorted by region key
  std::vector<std::string> top_positive_regions;  // top 5 region keys
  std::vector<std::string> top_negative_regions;
  std::string head_root_id;
};

// Expects aggregates whose topic ids are hierarchy ROOT ids (the caller maps
// leaves up before aggregating) and whose sentiment labels are the
// classifier's three classes. The anchor for each region comes from the
// gazetteer; a region without an anchor is a data error.
StoryMaps build_story_maps(const RegionAggregation& aggregation,
                           const TopicHierarchy& hierarchy,
                           const Gazetteer& gazetteer);

// Event-evolution graph: a seed chained year to year through the most
// similar not-yet-used labels.
struct EvolutionParams {
  std::size_t k = 5;
  std::optional<int> year_start;  // absent: year of earliest occurrence
  std::optional<int> year_end;    // absent: year of latest occurrence
  std::string strategy = "similarity";  // or "frequency"
  std::string seed_rule = "last_seen";  // or "first_seen" | "peak_month"

  void validate() const;
};

struct LabelOccurrence {
  std::string label;       // canonical form
  std::int64_t timestamp = 0;
};

struct EvolutionNode {
  int year = 0;
  std::string label;
  std::uint64_t freq = 0;       // occurrences within the year
  std::int64_t last_seen = 0;   // within the year
  double sim = 0.0;             // cosine to that year's seed
};

struct EvolutionEdge {
  std::string from;  // seed label
  std::string to;    // selected label
  int year = 0;
  double weight = 0.0;
};

struct SeedEntry {
  int year = 0;
  std::string label;
};

struct EvolutionGraph {
  std::vector<int> years;
  std::vector<SeedEntry> seed_chain;
  std::vector<EvolutionNode> nodes;
  std::vector<EvolutionEdge> edges;
};

// Seed of the first year = most frequent label of the range's first
// calendar month (January of year_start when the range is explicit, the
// earliest occupied month otherwise); ties go lexicographic. Each year
// selects up to k candidates among labels occurring that year, minus every
// previously selected label and every seed, ranked by the strategy; the
// next seed is the selection picked by seed_rule. Empty years select
// nothing and carry the seed forward. Throws DataError when the first month
// has no occurrences (the message names the month) or an embedding is
// missing.
EvolutionGraph build_evolution(
    const std::vector<LabelOccurrence>& occurrences,
    const std::map<std::string, EmbeddingVector>& embeddings,
    const EvolutionParams& params);

// Emitters. All output is deterministic for fixed input.
std::string trend_to_csv(const TrendSeries& series);
nlohmann::json trend_to_json(const TrendSeries& series);

// Layer name -> GeoJSON FeatureCollection, one entry per story-map layer:
// total, topics, sentiment_positive, sentiment_negative.
std::map<std::string, nlohmann::json> story_maps_to_geojson(
    const StoryMaps& maps, const TopicHierarchy& hierarchy);

nlohmann::json evolution_to_json(const EvolutionGraph& graph);
std::string evolution_to_svg(const EvolutionGraph& graph);

}  // namespace atlas
