#include "atlas/geospatial.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "atlas/errors.hpp"
#include "atlas/text.hpp"

namespace atlas {

namespace {

std::vector<std::string> split_tsv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return out;
}

double parse_coord(const std::string& s, double lo, double hi,
                   const std::string& origin, std::size_t lineno) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v < lo || v > hi) {
    throw DataError(origin + ":" + std::to_string(lineno) +
                    ": bad coordinate '" + s + "'");
  }
  return v;
}

std::int64_t parse_population(const std::string& s, const std::string& origin,
                              std::size_t lineno) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v < 0) {
    throw DataError(origin + ":" + std::to_string(lineno) +
                    ": bad population '" + s + "'");
  }
  return v;
}

bool valid_country_code(const std::string& s) {
  return s.size() == 2 && std::isupper(static_cast<unsigned char>(s[0])) &&
         std::isupper(static_cast<unsigned char>(s[1]));
}

// True when `incoming` should replace `current` for the same folded alias.
bool outranks(const GazetteerEntry& incoming, const GazetteerEntry& current) {
  if (incoming.population != current.population) {
    return incoming.population > current.population;
  }
  if (incoming.region.country_code != current.region.country_code) {
    return incoming.region.country_code < current.region.country_code;
  }
  return incoming.region.admin1 < current.region.admin1;
}

}  // namespace

Gazetteer Gazetteer::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open gazetteer: " + path);
  }
  return parse(in, path);
}

Gazetteer Gazetteer::parse(std::istream& in, const std::string& origin) {
  Gazetteer g;
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError(origin + ": empty gazetteer");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_tsv(line);
  const std::vector<std::string> expected = {"alias",        "lat",
                                             "lon",          "country_code",
                                             "admin1",       "population"};
  if (header != expected) {
    throw DataError(origin + ": unexpected gazetteer header");
  }

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols = split_tsv(line);
    if (cols.size() != 6) {
      throw DataError(origin + ":" + std::to_string(lineno) +
                      ": expected 6 columns, got " +
                      std::to_string(cols.size()));
    }
    GazetteerEntry e;
    e.alias = trim(cols[0]);
    if (e.alias.empty()) {
      throw DataError(origin + ":" + std::to_string(lineno) + ": empty alias");
    }
    e.point.lat = parse_coord(cols[1], -90.0, 90.0, origin, lineno);
    e.point.lon = parse_coord(cols[2], -180.0, 180.0, origin, lineno);
    e.region.country_code = trim(cols[3]);
    if (!valid_country_code(e.region.country_code)) {
      throw DataError(origin + ":" + std::to_string(lineno) +
                      ": bad country code '" + e.region.country_code + "'");
    }
    e.region.admin1 = trim(cols[4]);
    e.population = parse_population(cols[5], origin, lineno);

    const std::string key = fold_key(e.alias);
    auto it = g.by_key_.find(key);
    if (it == g.by_key_.end()) {
      g.by_key_.emplace(key, e);
    } else if (outranks(e, it->second)) {
      it->second = e;
    }

    // Anchor bookkeeping is independent of alias collisions: every row is a
    // candidate for its region's representative point.
    auto [ait, inserted] =
        g.anchors_.try_emplace(e.region.key(), e.population, e.point);
    if (!inserted && e.population > ait->second.first) {
      ait->second = {e.population, e.point};
    }
  }
  return g;
}

std::optional<GazetteerEntry> Gazetteer::find_alias(
    std::string_view alias) const {
  auto it = by_key_.find(fold_key(alias));
  if (it == by_key_.end()) return std::nullopt;
  return it->second;
}

std::optional<GeoPoint> Gazetteer::region_anchor(const Region& region) const {
  auto it = anchors_.find(region.key());
  if (it == anchors_.end()) return std::nullopt;
  return it->second.second;
}

std::optional<std::pair<GeoPoint, Region>> geocode(
    std::string_view raw_location, const Gazetteer& gazetteer) {
  // Comma-split, trim each segment, drop empties.
  std::vector<std::string> segments;
  {
    std::string current;
    for (char c : raw_location) {
      if (c == ',') {
        segments.push_back(std::move(current));
        current.clear();
      } else {
        current.push_back(c);
      }
    }
    segments.push_back(std::move(current));
  }

  struct Candidate {
    GazetteerEntry entry;
    std::size_t length = 0;  // folded segment length
    std::size_t index = 0;   // segment position
  };
  std::optional<Candidate> best;

  std::size_t index = 0;
  for (std::string& raw : segments) {
    std::string seg(trim(raw));
    if (seg.empty()) continue;
    auto hit = gazetteer.find_alias(seg);
    std::size_t position = index++;
    if (!hit) continue;
    Candidate c{*hit, fold_key(seg).size(), position};
    if (!best) {
      best = std::move(c);
      continue;
    }
    // A match that carries a subdivision is more specific than one that
    // names a whole country, regardless of where it sits in the string.
    const bool c_sub = !c.entry.region.admin1.empty();
    const bool b_sub = !best->entry.region.admin1.empty();
    if (c_sub != b_sub) {
      if (c_sub) best = std::move(c);
      continue;
    }
    if (c.length != best->length) {
      if (c.length > best->length) best = std::move(c);
      continue;
    }
    // Equal specificity and length: keep the earlier segment.
  }

  if (!best) return std::nullopt;
  return std::make_pair(best->entry.point, best->entry.region);
}

RegionAggregation aggregate_by_region(const std::vector<AnnotatedPost>& posts) {
  std::map<std::string, RegionAggregate> by_key;
  RegionAggregation result;
  for (const AnnotatedPost& p : posts) {
    if (!p.region) {
      ++result.excluded;
      continue;
    }
    RegionAggregate& agg = by_key[p.region->key()];
    agg.region = *p.region;
    ++agg.post_count;
    if (p.topic_id) ++agg.topic_counts[*p.topic_id];
    if (p.sentiment) ++agg.sentiment_counts[*p.sentiment];
  }
  result.aggregates.reserve(by_key.size());
  for (auto& [key, agg] : by_key) {
    result.aggregates.push_back(std::move(agg));
  }
  return result;
}

}  // namespace atlas
