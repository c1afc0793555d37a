#include <algorithm>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "atlas/errors.hpp"
#include "atlas/geospatial.hpp"

using namespace atlas;

namespace {

const char* kFixtureTsv =
    "alias\tlat\tlon\tcountry_code\tadmin1\tpopulation\n"
    "Munich\t48.14\t11.58\tDE\tBY\t1500000\n"
    "M\xc3\xbcnchen\t48.14\t11.58\tDE\tBY\t1500000\n"
    "Berlin\t52.52\t13.40\tDE\tBE\t3600000\n"
    "Germany\t51.00\t9.00\tDE\t\t83000000\n"
    "Springfield\t39.80\t-89.65\tUS\tIL\t114000\n"
    "Springfield\t44.05\t-123.02\tUS\tOR\t170000\n"
    "Paris\t48.85\t2.35\tFR\tIDF\t2100000\n"
    "Paris\t33.66\t-95.55\tUS\tTX\t25000\n"
    "Cambridge\t52.20\t0.12\tGB\tENG\t123867\n"
    "Cambridge\t42.37\t-71.11\tUS\tMA\t118403\n"
    "Twin\t1.00\t1.00\tAB\tX0\t100\n"
    "Twin\t2.00\t2.00\tAA\tX1\t100\n";

Gazetteer fixture() {
  std::istringstream in(kFixtureTsv);
  return Gazetteer::parse(in, "fixture");
}

}  // namespace

TEST_CASE("gazetteer parses and folds aliases") {
  Gazetteer g = fixture();
  auto hit = g.find_alias("munich");
  REQUIRE(hit.has_value());
  CHECK(hit->region.key() == "DE-BY");
  // Diacritic-insensitive: the München row and a bare ASCII spelling meet
  // at the same folded key.
  CHECK(g.find_alias("M\xc3\x9cNCHEN").has_value());  // MÜNCHEN
  CHECK(g.find_alias("m\xc3\xbcnchen")->region.key() == "DE-BY");
  CHECK(g.find_alias("  berlin ")->region.key() == "DE-BE");
  CHECK_FALSE(g.find_alias("xyzzy123").has_value());
  CHECK_FALSE(g.find_alias("").has_value());
}

TEST_CASE("ambiguous aliases resolve by population then lexicographic region") {
  Gazetteer g = fixture();
  auto springfield = g.find_alias("Springfield");
  REQUIRE(springfield.has_value());
  CHECK(springfield->region.key() == "US-OR");  // 170000 beats 114000
  auto paris = g.find_alias("Paris");
  REQUIRE(paris.has_value());
  CHECK(paris->region.key() == "FR-IDF");  // 2.1M beats 25K
  auto twin = g.find_alias("Twin");
  REQUIRE(twin.has_value());
  CHECK(twin->region.key() == "AA-X1");  // population tie: country AA < AB
}

TEST_CASE("gazetteer load failures are fatal with location info") {
  std::istringstream empty("");
  CHECK_THROWS_AS(Gazetteer::parse(empty, "t"), DataError);

  std::istringstream bad_header("name\tlat\tlon\tcc\tadmin\tpop\nx\t1\t1\tDE\t\t1\n");
  CHECK_THROWS_AS(Gazetteer::parse(bad_header, "t"), DataError);

  std::istringstream bad_cols(
      "alias\tlat\tlon\tcountry_code\tadmin1\tpopulation\nBerlin\t52.5\n");
  CHECK_THROWS_AS(Gazetteer::parse(bad_cols, "t"), DataError);

  std::istringstream bad_lat(
      "alias\tlat\tlon\tcountry_code\tadmin1\tpopulation\n"
      "Berlin\t99.0\t13.4\tDE\tBE\t100\n");
  CHECK_THROWS_AS(Gazetteer::parse(bad_lat, "t"), DataError);

  std::istringstream bad_cc(
      "alias\tlat\tlon\tcountry_code\tadmin1\tpopulation\n"
      "Berlin\t52.5\t13.4\tde\tBE\t100\n");
  CHECK_THROWS_AS(Gazetteer::parse(bad_cc, "t"), DataError);

  std::istringstream bad_pop(
      "alias\tlat\tlon\tcountry_code\tadmin1\tpopulation\n"
      "Berlin\t52.5\t13.4\tDE\tBE\t-5\n");
  CHECK_THROWS_AS(Gazetteer::parse(bad_pop, "t"), DataError);

  CHECK_THROWS_AS(Gazetteer::load("no_such_gazetteer.tsv"), DataError);
}

TEST_CASE("geocode matches comma-split segments") {
  Gazetteer g = fixture();

  auto munich = geocode("Munich, Germany", g);
  REQUIRE(munich.has_value());
  // Munich carries an admin1, so it outranks the country-only Germany row.
  CHECK(munich->second.key() == "DE-BY");
  CHECK(munich->first.lat == doctest::Approx(48.14));

  auto country = geocode("Germany", g);
  REQUIRE(country.has_value());
  CHECK(country->second.key() == "DE");

  auto skip_unknown = geocode("Somewhereville, Berlin", g);
  REQUIRE(skip_unknown.has_value());
  CHECK(skip_unknown->second.key() == "DE-BE");

  CHECK_FALSE(geocode("", g).has_value());
  CHECK_FALSE(geocode("xyzzy123", g).has_value());
  CHECK_FALSE(geocode(",,,", g).has_value());
}

TEST_CASE("geocode prefers longer matches, then earlier segments") {
  Gazetteer g = fixture();
  // Both segments carry admin1; "Cambridge" (9 chars) beats "Munich" (6).
  auto longer = geocode("Munich, Cambridge", g);
  REQUIRE(longer.has_value());
  CHECK(longer->second.key() == "GB-ENG");
  // Equal specificity and length: earlier segment wins.
  auto earlier = geocode("Berlin, Munich", g);
  REQUIRE(earlier.has_value());
  CHECK(earlier->second.key() == "DE-BE");
}

TEST_CASE("geocode never throws on arbitrary bytes") {
  Gazetteer g = fixture();
  std::mt19937_64 rng(4321);
  for (int trial = 0; trial < 200; ++trial) {
    std::string junk;
    std::size_t len = rng() % 24;
    for (std::size_t i = 0; i < len; ++i) {
      junk.push_back(static_cast<char>(rng() % 256));
    }
    CHECK_NOTHROW(geocode(junk, g));
  }
}

TEST_CASE("region_anchor picks the most populous entry of a region") {
  Gazetteer g = fixture();
  auto anchor = g.region_anchor(Region{"DE", "BY"});
  REQUIRE(anchor.has_value());
  CHECK(anchor->lat == doctest::Approx(48.14));
  CHECK_FALSE(g.region_anchor(Region{"ZZ", ""}).has_value());
}

TEST_CASE("aggregate_by_region matches the hand-computed example") {
  Region ca{"US", "CA"};
  Region ny{"US", "NY"};
  std::vector<AnnotatedPost> posts = {
      {"p1", ca, std::string("t0"), std::string("positive")},
      {"p2", ca, std::string("t1"), std::nullopt},
      {"p3", ny, std::nullopt, std::string("negative")},
      {"p4", std::nullopt, std::nullopt, std::nullopt},
  };
  auto agg = aggregate_by_region(posts);
  REQUIRE(agg.aggregates.size() == 2);
  CHECK(agg.excluded == 1);
  const RegionAggregate& first = agg.aggregates[0];  // sorted by key
  CHECK(first.region.key() == "US-CA");
  CHECK(first.post_count == 2);
  CHECK(first.sentiment_counts.at("positive") == 1);
  CHECK(first.topic_counts.at("t0") == 1);
  CHECK(first.topic_counts.at("t1") == 1);
  const RegionAggregate& second = agg.aggregates[1];
  CHECK(second.region.key() == "US-NY");
  CHECK(second.post_count == 1);
  CHECK(second.sentiment_counts.at("negative") == 1);

  CHECK(aggregate_by_region({}).aggregates.empty());
}

TEST_CASE("aggregate_by_region equals a brute-force group-by on fuzzed input") {
  std::mt19937_64 rng(2024);
  std::vector<Region> regions = {{"US", "CA"}, {"US", "NY"}, {"DE", "BE"},
                                 {"FR", "IDF"}, {"GB", "ENG"}};
  std::vector<std::string> topics = {"t0", "t1", "t2"};
  std::vector<std::string> sentiments = {"positive", "neutral", "negative"};

  for (int trial = 0; trial < 30; ++trial) {
    std::vector<AnnotatedPost> posts;
    std::size_t n = rng() % 120;
    for (std::size_t i = 0; i < n; ++i) {
      AnnotatedPost p;
      p.id = "p" + std::to_string(i);
      if (rng() % 4 != 0) p.region = regions[rng() % regions.size()];
      if (rng() % 3 != 0) p.topic_id = topics[rng() % topics.size()];
      if (rng() % 5 != 0) p.sentiment = sentiments[rng() % sentiments.size()];
      posts.push_back(p);
    }

    // Brute force restatement.
    std::map<std::string, std::size_t> want_posts;
    std::map<std::string, std::map<std::string, std::size_t>> want_topics;
    std::map<std::string, std::map<std::string, std::size_t>> want_sent;
    std::size_t want_excluded = 0;
    for (const auto& p : posts) {
      if (!p.region) {
        ++want_excluded;
        continue;
      }
      std::string key = p.region->key();
      ++want_posts[key];
      if (p.topic_id) ++want_topics[key][*p.topic_id];
      if (p.sentiment) ++want_sent[key][*p.sentiment];
    }

    auto agg = aggregate_by_region(posts);
    CHECK(agg.excluded == want_excluded);
    REQUIRE(agg.aggregates.size() == want_posts.size());
    std::size_t total = agg.excluded;
    for (const auto& row : agg.aggregates) {
      std::string key = row.region.key();
      CHECK(row.post_count == want_posts.at(key));
      CHECK(row.topic_counts == want_topics[key]);
      CHECK(row.sentiment_counts == want_sent[key]);
      total += row.post_count;
    }
    // Conservation: regional counts plus exclusions cover every post.
    CHECK(total == posts.size());

    // Order independence.
    std::vector<AnnotatedPost> shuffled = posts;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto again = aggregate_by_region(shuffled);
    REQUIRE(again.aggregates.size() == agg.aggregates.size());
    for (std::size_t i = 0; i < agg.aggregates.size(); ++i) {
      CHECK(again.aggregates[i].region == agg.aggregates[i].region);
      CHECK(again.aggregates[i].post_count == agg.aggregates[i].post_count);
      CHECK(again.aggregates[i].topic_counts == agg.aggregates[i].topic_counts);
      CHECK(again.aggregates[i].sentiment_counts ==
            agg.aggregates[i].sentiment_counts);
    }
  }
}
