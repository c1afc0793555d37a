#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace atlas {

struct GeoPoint {
  double lat = 0.0;  // degrees in [-90, 90]
  double lon = 0.0;  // degrees in [-180, 180]
};

struct Region {
  std::string country_code;  // ISO-3166 alpha-2, uppercase
  std::string admin1;        // optional subdivision code; empty = none

  // "CC" or "CC-ADMIN1"
  std::string key() const {
    return admin1.empty() ? country_code : country_code + "-" + admin1;
  }
  friend bool operator==(const Region&, const Region&) = default;
  friend auto operator<=>(const Region&, const Region&) = default;
};

struct GazetteerEntry {
  std::string alias;  // original spelling
  GeoPoint point;
  Region region;
  std::int64_t population = 0;
};

// Immutable after load; lookups are safe from any number of readers.
class Gazetteer {
 public:
  // TSV with a header row: alias, lat, lon, country_code, admin1, population.
  // Multiple aliases per place; same alias appearing twice resolves to the
  // highest-population entry (ties: lexicographic country, then admin1).
  // Throws DataError on any malformed row; lookups never throw.
  static Gazetteer load(const std::string& path);
  static Gazetteer parse(std::istream& in, const std::string& origin);

  std::optional<GazetteerEntry> find_alias(std::string_view alias) const;

  // Representative point for a region: its highest-population entry.
  std::optional<GeoPoint> region_anchor(const Region& region) const;

  std::size_t size() const { return by_key_.size(); }

 private:
  std::unordered_map<std::string, GazetteerEntry> by_key_;  // folded alias
  std::map<std::string, std::pair<std::int64_t, GeoPoint>> anchors_;  // region key
};

// Case/diacritic-insensitive match over comma-split segments of the raw
// location; admin1-bearing entries are preferred over country-only ones,
// then longer segments, then earlier ones. No fuzzy matching; no match is
// absent, never a guess.
std::optional<std::pair<GeoPoint, Region>> geocode(std::string_view raw_location,
                                                   const Gazetteer& gazetteer);

// One row of the annotated corpus as the aggregator consumes it.
struct AnnotatedPost {
  std::string id;
  std::optional<Region> region;
  std::optional<std::string> topic_id;
  std::optional<std::string> sentiment;
};

struct RegionAggregate {
  Region region;
  std::size_t post_count = 0;
  std::map<std::string, std::size_t> topic_counts;
  std::map<std::string, std::size_t> sentiment_counts;
};

struct RegionAggregation {
  std::vector<RegionAggregate> aggregates;  // sorted by region key
  std::size_t excluded = 0;                 // posts without a region
};

RegionAggregation aggregate_by_region(const std::vector<AnnotatedPost>& posts);

}  // namespace atlas
