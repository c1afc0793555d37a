#include "atlas/narrative.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <limits>
#include <set>

#include "atlas/errors.hpp"
#include "atlas/sentiment.hpp"
#include "atlas/timeutil.hpp"

namespace atlas {

namespace {

// CSV field quoting per RFC 4180: quote when a comma, quote, or newline is
// present, doubling embedded quotes.
std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string xml_escape(const std::string& value) {
  std::string out;
  out.reserve(value.size());
  for (char c : value) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

}  // namespace

TrendSeries trend_series(const std::vector<AssignedPost>& posts,
                         const TopicHierarchy& hierarchy) {
  TrendSeries series;
  series.topic_ids = hierarchy.root_ids;
  for (const std::string& id : series.topic_ids) {
    series.topic_names.push_back(hierarchy.find(id)->name);
  }
  if (posts.empty()) return series;

  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t hi = std::numeric_limits<std::int64_t>::min();
  for (const AssignedPost& p : posts) {
    lo = std::min(lo, p.created_at);
    hi = std::max(hi, p.created_at);
  }
  auto [year, month] = *parse_month_key(month_key(lo));
  const std::string last = month_key(hi);
  std::map<std::string, std::size_t> month_pos;
  while (true) {
    const std::string key = make_month_key(year, month);
    month_pos.emplace(key, series.months.size());
    series.months.push_back(key);
    if (key == last) break;
    if (++month == 13) {
      month = 1;
      ++year;
    }
  }
  series.counts.assign(series.months.size(),
                       std::vector<std::uint64_t>(series.topic_ids.size(), 0));
  series.unassigned.assign(series.months.size(), 0);

  std::map<std::string, std::size_t> root_pos;
  for (std::size_t t = 0; t < series.topic_ids.size(); ++t) {
    root_pos.emplace(series.topic_ids[t], t);
  }
  for (const AssignedPost& p : posts) {
    const std::size_t m = month_pos.at(month_key(p.created_at));
    if (!p.leaf_id) {
      ++series.unassigned[m];
      continue;
    }
    const std::string& root = hierarchy.root_of(*p.leaf_id);
    ++series.counts[m][root_pos.at(root)];
  }
  return series;
}

StoryMaps build_story_maps(const RegionAggregation& aggregation,
                           const TopicHierarchy& hierarchy,
                           const Gazetteer& gazetteer) {
  StoryMaps maps;
  if (!hierarchy.root_ids.empty()) {
    maps.head_root_id = longtail_stats(hierarchy, 1.0).head_id;
  }
  for (const RegionAggregate& agg : aggregation.aggregates) {
    RegionMetrics row;
    row.region = agg.region;
    const auto anchor = gazetteer.region_anchor(agg.region);
    if (!anchor) {
      throw DataError("story map: no gazetteer anchor for region " +
                      agg.region.key());
    }
    row.anchor = *anchor;
    row.total = agg.post_count;
    for (const auto& [topic, count] : agg.topic_counts) {
      row.topic_counts[topic] = count;
    }
    auto dominant_of = [&](const std::string& excluded) {
      std::string best;
      std::uint64_t best_count = 0;
      for (const auto& [topic, count] : row.topic_counts) {
        if (topic == excluded || count == 0) continue;
        // Map iteration is ascending by id, so strict > keeps the
        // lexicographically first id on ties.
        if (count > best_count) {
          best = topic;
          best_count = count;
        }
      }
      return best;
    };
    row.dominant = dominant_of("");
    row.dominant_excluding_head = dominant_of(maps.head_root_id);
    auto count_of = [&agg](std::string_view label) -> std::uint64_t {
      const auto it = agg.sentiment_counts.find(std::string(label));
      return it == agg.sentiment_counts.end() ? 0 : it->second;
    };
    row.positive = count_of(kSentimentPositive);
    row.negative = count_of(kSentimentNegative);
    row.neutral = count_of(kSentimentNeutral);
    maps.rows.push_back(std::move(row));
  }
  // aggregate_by_region already sorts by region key; keep that order.

  auto top5 = [&maps](auto metric) {
    std::vector<const RegionMetrics*> order;
    for (const RegionMetrics& row : maps.rows) {
      if (metric(row) > 0) order.push_back(&row);
    }
    std::sort(order.begin(), order.end(),
              [&](const RegionMetrics* a, const RegionMetrics* b) {
                if (metric(*a) != metric(*b)) return metric(*a) > metric(*b);
                return a->region.key() < b->region.key();
              });
    std::vector<std::string> keys;
    for (std::size_t i = 0; i < order.size() && i < 5; ++i) {
      keys.push_back(order[i]->region.key());
    }
    return keys;
  };
  maps.top_positive_regions =
      top5([](const RegionMetrics& r) { return r.positive; });
  maps.top_negative_regions =
      top5([](const RegionMetrics& r) { return r.negative; });
  return maps;
}

void EvolutionParams::validate() const {
  if (k == 0) {
    throw ConfigError("evolution k must be positive");
  }
  if (strategy != "similarity" && strategy != "frequency") {
    throw ConfigError("evolution strategy must be similarity or frequency");
  }
  if (seed_rule != "last_seen" && seed_rule != "first_seen" &&
      seed_rule != "peak_month") {
    throw ConfigError(
        "evolution seed_rule must be last_seen, first_seen, or peak_month");
  }
  if (year_start && year_end && *year_start > *year_end) {
    throw ConfigError("evolution year range is inverted");
  }
}

namespace {

struct YearStats {
  std::uint64_t freq = 0;
  std::int64_t first_seen = std::numeric_limits<std::int64_t>::max();
  std::int64_t last_seen = std::numeric_limits<std::int64_t>::min();
  std::map<std::string, std::uint64_t> month_freq;
};

// The month whose count peaks, later months winning ties; compared as
// (month key, count) against the rule in seed selection.
std::string peak_month(const YearStats& stats) {
  std::string best;
  std::uint64_t best_count = 0;
  for (const auto& [month, count] : stats.month_freq) {
    if (count >= best_count) {  // >= : ascending iteration, later month wins
      best = month;
      best_count = count;
    }
  }
  return best;
}

const EmbeddingVector& embedding_of(
    const std::map<std::string, EmbeddingVector>& embeddings,
    const std::string& label) {
  const auto it = embeddings.find(label);
  if (it == embeddings.end()) {
    throw DataError("evolution: no embedding for label '" + label + "'");
  }
  return it->second;
}

}  // namespace

EvolutionGraph build_evolution(
    const std::vector<LabelOccurrence>& occurrences,
    const std::map<std::string, EmbeddingVector>& embeddings,
    const EvolutionParams& params) {
  params.validate();
  if (occurrences.empty()) {
    throw DataError("evolution: empty vocabulary");
  }

  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t hi = std::numeric_limits<std::int64_t>::min();
  for (const LabelOccurrence& occ : occurrences) {
    lo = std::min(lo, occ.timestamp);
    hi = std::max(hi, occ.timestamp);
  }
  const int year0 = params.year_start.value_or(year_of(lo));
  const int year1 = params.year_end.value_or(year_of(hi));
  if (year0 > year1) {
    throw ConfigError("evolution year range is inverted");
  }
  // With an explicit start the range opens in January; a derived range
  // opens in the first occupied month, which is never empty.
  const std::string first_month =
      params.year_start ? make_month_key(year0, 1) : month_key(lo);

  std::map<int, std::map<std::string, YearStats>> by_year;
  std::map<std::string, std::uint64_t> first_month_freq;
  for (const LabelOccurrence& occ : occurrences) {
    const int y = year_of(occ.timestamp);
    if (y < year0 || y > year1) continue;
    YearStats& stats = by_year[y][occ.label];
    ++stats.freq;
    stats.first_seen = std::min(stats.first_seen, occ.timestamp);
    stats.last_seen = std::max(stats.last_seen, occ.timestamp);
    const std::string mk = month_key(occ.timestamp);
    ++stats.month_freq[mk];
    if (mk == first_month) ++first_month_freq[occ.label];
  }
  if (first_month_freq.empty()) {
    throw DataError("evolution: no occurrences in first month " + first_month);
  }

  std::string seed;
  std::uint64_t seed_freq = 0;
  for (const auto& [label, freq] : first_month_freq) {
    if (freq > seed_freq) {  // ascending labels: > keeps the lexicographic min
      seed = label;
      seed_freq = freq;
    }
  }

  EvolutionGraph graph;
  std::set<std::string> used;  // all seeds and selections so far
  for (int year = year0; year <= year1; ++year) {
    graph.years.push_back(year);
    graph.seed_chain.push_back({year, seed});
    used.insert(seed);

    const auto year_it = by_year.find(year);
    struct Candidate {
      const std::string* label;
      const YearStats* stats;
      double sim;
    };
    std::vector<Candidate> candidates;
    if (year_it != by_year.end()) {
      const EmbeddingVector& seed_vec = embedding_of(embeddings, seed);
      for (const auto& [label, stats] : year_it->second) {
        if (used.contains(label)) continue;
        candidates.push_back(
            {&label, &stats,
             cosine_similarity(seed_vec, embedding_of(embeddings, label))});
      }
    }
    if (params.strategy == "similarity") {
      std::sort(candidates.begin(), candidates.end(),
                [](const Candidate& a, const Candidate& b) {
                  if (a.sim != b.sim) return a.sim > b.sim;
                  if (a.stats->freq != b.stats->freq) {
                    return a.stats->freq > b.stats->freq;
                  }
                  return *a.label < *b.label;
                });
    } else {
      std::sort(candidates.begin(), candidates.end(),
                [](const Candidate& a, const Candidate& b) {
                  if (a.stats->freq != b.stats->freq) {
                    return a.stats->freq > b.stats->freq;
                  }
                  if (a.sim != b.sim) return a.sim > b.sim;
                  return *a.label < *b.label;
                });
    }
    if (candidates.size() > params.k) candidates.resize(params.k);

    for (const Candidate& c : candidates) {
      graph.nodes.push_back(
          {year, *c.label, c.stats->freq, c.stats->last_seen, c.sim});
      graph.edges.push_back({seed, *c.label, year, c.sim});
      used.insert(*c.label);
    }

    if (candidates.empty()) continue;  // carry the seed into the next year

    const Candidate* next = &candidates.front();
    for (const Candidate& c : candidates) {
      bool better = false;
      if (params.seed_rule == "last_seen") {
        better = c.stats->last_seen > next->stats->last_seen ||
                 (c.stats->last_seen == next->stats->last_seen &&
                  (c.sim > next->sim ||
                   (c.sim == next->sim && *c.label < *next->label)));
      } else if (params.seed_rule == "first_seen") {
        better = c.stats->first_seen > next->stats->first_seen ||
                 (c.stats->first_seen == next->stats->first_seen &&
                  (c.sim > next->sim ||
                   (c.sim == next->sim && *c.label < *next->label)));
      } else {  // peak_month
        const std::string pc = peak_month(*c.stats);
        const std::string pn = peak_month(*next->stats);
        const std::uint64_t fc = c.stats->month_freq.at(pc);
        const std::uint64_t fn = next->stats->month_freq.at(pn);
        better = pc > pn ||
                 (pc == pn &&
                  (fc > fn ||
                   (fc == fn && (c.sim > next->sim ||
                                 (c.sim == next->sim && *c.label < *next->label)))));
      }
      if (better) next = &c;
    }
    seed = *next->label;
  }
  return graph;
}

std::string trend_to_csv(const TrendSeries& series) {
  std::string out = "month";
  for (const std::string& name : series.topic_names) {
    out.push_back(',');
    out += csv_field(name);
  }
  out += ",unassigned\n";
  for (std::size_t m = 0; m < series.months.size(); ++m) {
    out += series.months[m];
    for (std::uint64_t count : series.counts[m]) {
      out.push_back(',');
      out += std::to_string(count);
    }
    out.push_back(',');
    out += std::to_string(series.unassigned[m]);
    out.push_back('\n');
  }
  return out;
}

nlohmann::json trend_to_json(const TrendSeries& series) {
  nlohmann::json topics = nlohmann::json::array();
  for (std::size_t t = 0; t < series.topic_ids.size(); ++t) {
    topics.push_back(
        {{"id", series.topic_ids[t]}, {"name", series.topic_names[t]}});
  }
  nlohmann::json counts = nlohmann::json::object();
  for (std::size_t t = 0; t < series.topic_ids.size(); ++t) {
    std::vector<std::uint64_t> column;
    column.reserve(series.months.size());
    for (std::size_t m = 0; m < series.months.size(); ++m) {
      column.push_back(series.counts[m][t]);
    }
    counts[series.topic_ids[t]] = column;
  }
  return {{"months", series.months},
          {"topics", std::move(topics)},
          {"counts", std::move(counts)},
          {"unassigned", series.unassigned}};
}

namespace {

nlohmann::json feature_for(const RegionMetrics& row, nlohmann::json properties) {
  properties["region"] = row.region.key();
  return {{"type", "Feature"},
          {"geometry",
           {{"type", "Point"},
            {"coordinates", {row.anchor.lon, row.anchor.lat}}}},
          {"properties", std::move(properties)}};
}

nlohmann::json collection(nlohmann::json features) {
  return {{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

}  // namespace

std::map<std::string, nlohmann::json> story_maps_to_geojson(
    const StoryMaps& maps, const TopicHierarchy& hierarchy) {
  std::map<std::string, nlohmann::json> out;

  nlohmann::json total = nlohmann::json::array();
  nlohmann::json topics = nlohmann::json::array();
  nlohmann::json positive = nlohmann::json::array();
  nlohmann::json negative = nlohmann::json::array();
  auto name_of = [&hierarchy](const std::string& id) -> std::string {
    if (id.empty()) return "";
    const TopicNode* node = hierarchy.find(id);
    return node == nullptr ? "" : node->name;
  };
  for (const RegionMetrics& row : maps.rows) {
    total.push_back(feature_for(row, {{"count", row.total}}));
    nlohmann::json topic_counts = nlohmann::json::object();
    for (const auto& [topic, count] : row.topic_counts) {
      topic_counts[topic] = count;
    }
    topics.push_back(feature_for(
        row, {{"counts", std::move(topic_counts)},
              {"dominant", row.dominant},
              {"dominant_name", name_of(row.dominant)},
              {"dominant_excluding_head", row.dominant_excluding_head},
              {"dominant_excluding_head_name",
               name_of(row.dominant_excluding_head)}}));
    positive.push_back(feature_for(row, {{"count", row.positive}}));
    negative.push_back(feature_for(row, {{"count", row.negative}}));
  }
  out.emplace("total", collection(std::move(total)));

  nlohmann::json topics_fc = collection(std::move(topics));
  topics_fc["head_topic"] = maps.head_root_id;
  out.emplace("topics", std::move(topics_fc));

  nlohmann::json positive_fc = collection(std::move(positive));
  positive_fc["top_regions"] = maps.top_positive_regions;
  out.emplace("sentiment_positive", std::move(positive_fc));

  nlohmann::json negative_fc = collection(std::move(negative));
  negative_fc["top_regions"] = maps.top_negative_regions;
  out.emplace("sentiment_negative", std::move(negative_fc));
  return out;
}

nlohmann::json evolution_to_json(const EvolutionGraph& graph) {
  nlohmann::json seed_chain = nlohmann::json::array();
  for (const SeedEntry& s : graph.seed_chain) {
    seed_chain.push_back({{"year", s.year}, {"label", s.label}});
  }
  nlohmann::json nodes = nlohmann::json::array();
  for (const EvolutionNode& n : graph.nodes) {
    nodes.push_back({{"year", n.year},
                     {"label", n.label},
                     {"freq", n.freq},
                     {"last_seen", format_timestamp(n.last_seen)},
                     {"sim", n.sim}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const EvolutionEdge& e : graph.edges) {
    edges.push_back({{"from", e.from},
                     {"to", e.to},
                     {"year", e.year},
                     {"weight", e.weight}});
  }
  return {{"seed_chain", std::move(seed_chain)},
          {"nodes", std::move(nodes)},
          {"edges", std::move(edges)}};
}

std::string evolution_to_svg(const EvolutionGraph& graph) {
  // One column per year: the seed bubble on top, selections below it,
  // radius growing with freq. Schematic on purpose.
  constexpr double kColumnWidth = 170.0;
  constexpr double kRowHeight = 64.0;
  constexpr double kLeft = 90.0;
  constexpr double kTop = 70.0;

  std::uint64_t max_freq = 1;
  std::size_t max_rows = 1;
  std::map<int, std::vector<const EvolutionNode*>> per_year;
  for (const EvolutionNode& n : graph.nodes) {
    per_year[n.year].push_back(&n);
    max_freq = std::max(max_freq, n.freq);
  }
  for (const auto& [year, nodes] : per_year) {
    max_rows = std::max(max_rows, nodes.size() + 1);
  }
  const double width = kLeft * 2 + kColumnWidth * (graph.years.empty()
                           ? 0.0
                           : static_cast<double>(graph.years.size() - 1));
  const double height = kTop + kRowHeight * static_cast<double>(max_rows) + 40.0;

  auto radius = [max_freq](std::uint64_t freq) {
    return 6.0 + 14.0 * static_cast<double>(freq) /
                     static_cast<double>(max_freq);
  };
  auto column_x = [&graph](int year) {
    const auto it = std::find(graph.years.begin(), graph.years.end(), year);
    return kLeft + kColumnWidth *
                       static_cast<double>(it - graph.years.begin());
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         fixed(width, 0) + "\" height=\"" + fixed(height, 0) +
         "\" viewBox=\"0 0 " + fixed(width, 0) + " " + fixed(height, 0) +
         "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (std::size_t i = 0; i < graph.years.size(); ++i) {
    const double x = kLeft + kColumnWidth * static_cast<double>(i);
    svg += "<text x=\"" + fixed(x, 1) + "\" y=\"30\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"15\" font-weight=\"bold\">" +
           std::to_string(graph.years[i]) + "</text>\n";
  }

  // Edges first so bubbles draw over them.
  std::map<int, std::map<std::string, std::pair<double, double>>> positions;
  for (const SeedEntry& s : graph.seed_chain) {
    positions[s.year][s.label] = {column_x(s.year), kTop};
  }
  for (const auto& [year, nodes] : per_year) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      positions[year][nodes[i]->label] = {
          column_x(year), kTop + kRowHeight * static_cast<double>(i + 1)};
    }
  }
  for (const EvolutionEdge& e : graph.edges) {
    const auto [x1, y1] = positions[e.year][e.from];
    const auto [x2, y2] = positions[e.year][e.to];
    svg += "<line x1=\"" + fixed(x1, 1) + "\" y1=\"" + fixed(y1, 1) +
           "\" x2=\"" + fixed(x2, 1) + "\" y2=\"" + fixed(y2, 1) +
           "\" stroke=\"#999\" stroke-width=\"1\"/>\n";
  }

  for (const SeedEntry& s : graph.seed_chain) {
    const auto [x, y] = positions[s.year][s.label];
    svg += "<circle cx=\"" + fixed(x, 1) + "\" cy=\"" + fixed(y, 1) +
           "\" r=\"10\" fill=\"#2b6cb0\"/>\n";
    svg += "<text x=\"" + fixed(x + 16.0, 1) + "\" y=\"" + fixed(y + 4.0, 1) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" +
           xml_escape(s.label) + "</text>\n";
  }
  for (const auto& [year, nodes] : per_year) {
    for (const EvolutionNode* n : nodes) {
      const auto [x, y] = positions[year][n->label];
      svg += "<circle cx=\"" + fixed(x, 1) + "\" cy=\"" + fixed(y, 1) +
             "\" r=\"" + fixed(radius(n->freq), 1) +
             "\" fill=\"#ed8936\" fill-opacity=\"0.85\"/>\n";
      svg += "<text x=\"" + fixed(x + radius(n->freq) + 6.0, 1) + "\" y=\"" +
             fixed(y + 4.0, 1) +
             "\" font-family=\"sans-serif\" font-size=\"12\">" +
             xml_escape(n->label) + " (" + std::to_string(n->freq) +
             ")</text>\n";
    }
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace atlas
