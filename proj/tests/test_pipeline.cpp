#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "atlas/errors.hpp"
#include "atlas/hash.hpp"
#include "atlas/pipeline.hpp"

using namespace atlas;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;

  TempDir() {
    std::mt19937_64 rng(std::random_device{}());
    path = fs::temp_directory_path() /
           ("atlas_pipeline_" + std::to_string(rng()));
    fs::create_directories(path);
  }

  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }

  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json post(const std::string& id, const std::string& created_at,
          const std::string& text, const json& location,
          const std::string& lang = "en") {
  json j = {{"id", id},
            {"text", text},
            {"created_at", created_at},
            {"hashtags", json::array({"AIethics"})},
            {"lang", lang}};
  j["user_location"] = location;
  return j;
}

// A small but fully connected fixture: three recurring phrase families over
// two years, four geocodable locations plus an unknown one, and texts that
// hit both sentiment lexicons.
std::string fixture_corpus() {
  const std::string privacy =
      "Strong data privacy keeps medical records safe and good";
  const std::string fairness =
      "Algorithmic fairness audits catch unfair and harmful hiring systems";
  const std::string robots =
      "Hospital robots deliver good care with promising results";
  struct Row {
    const char* id;
    const char* date;
    const std::string* text;
    const char* location;  // nullptr = no location field value
  };
  const Row rows[] = {
      {"p01", "2015-01-04T10:00:00Z", &privacy, "Munich, Germany"},
      {"p02", "2015-01-09T11:00:00Z", &privacy, "Berlin"},
      {"p03", "2015-01-15T12:00:00Z", &fairness, "Springfield"},
      {"p04", "2015-01-21T13:00:00Z", &privacy, "Atlantis"},
      {"p05", "2015-02-04T10:00:00Z", &fairness, "Munich, Germany"},
      {"p06", "2015-02-18T10:00:00Z", &privacy, nullptr},
      {"p07", "2015-04-02T10:00:00Z", &fairness, "Berlin"},
      {"p08", "2015-04-20T10:00:00Z", &privacy, "Springfield"},
      {"p09", "2015-07-05T10:00:00Z", &robots, "Munich, Germany"},
      {"p10", "2015-07-19T10:00:00Z", &privacy, "Berlin"},
      {"p11", "2015-10-06T10:00:00Z", &fairness, "Munich, Germany"},
      {"p12", "2015-10-22T10:00:00Z", &robots, nullptr},
      {"p13", "2016-01-03T10:00:00Z", &robots, "Berlin"},
      {"p14", "2016-01-11T10:00:00Z", &privacy, "Munich, Germany"},
      {"p15", "2016-01-19T10:00:00Z", &fairness, "Springfield"},
      {"p16", "2016-01-27T10:00:00Z", &robots, "Berlin"},
      {"p17", "2016-04-05T10:00:00Z", &privacy, "Munich, Germany"},
      {"p18", "2016-04-14T10:00:00Z", &robots, "Atlantis"},
      {"p19", "2016-04-23T10:00:00Z", &fairness, "Berlin"},
      {"p20", "2016-07-06T10:00:00Z", &robots, "Munich, Germany"},
      {"p21", "2016-07-21T10:00:00Z", &privacy, "Springfield"},
      {"p22", "2016-10-05T10:00:00Z", &fairness, "Berlin"},
      {"p23", "2016-10-20T10:00:00Z", &robots, "Munich, Germany"},
      {"p24", "2016-12-30T10:00:00Z", &privacy, nullptr},
  };
  std::string out;
  for (const Row& r : rows) {
    json j = post(r.id, r.date, *r.text,
                  r.location ? json(r.location) : json(nullptr));
    out += j.dump();
    out += '\n';
  }
  // Filtered out: wrong language, out-of-range date, wrong hashtag.
  out += post("x01", "2015-05-01T00:00:00Z", privacy, nullptr, "de").dump();
  out += '\n';
  out += post("x02", "2014-05-01T00:00:00Z", privacy, nullptr).dump();
  out += '\n';
  json other = post("x03", "2015-05-01T00:00:00Z", privacy, nullptr);
  other["hashtags"] = json::array({"cooking"});
  out += other.dump();
  out += '\n';
  return out;
}

const char kFixtureGazetteer[] =
    "alias\tlat\tlon\tcountry_code\tadmin1\tpopulation\n"
    "Munich\t48.14\t11.58\tDE\tBY\t1472000\n"
    "Muenchen\t48.14\t11.58\tDE\tBY\t1472000\n"
    "Berlin\t52.52\t13.40\tDE\tBE\t3600000\n"
    "Germany\t51.16\t10.45\tDE\t\t83000000\n"
    "Springfield\t39.78\t-89.65\tUS\tIL\t114000\n";

const char kFixtureStoplist[] =
    "the\na\nan\nis\nare\nwas\nand\nor\nof\nto\nin\nwith\nless\nkeeps\n"
    "catch\nmake\ndeliver\nstrong\nsafe\n";

// The config rides on builtin providers only; dbscan.min_pts of 1 keeps the
// vocabulary fully clustered so every stage has material to work with.
json fixture_config(const std::string& out_dir) {
  return json{
      {"input", "corpus.jsonl"},
      {"out_dir", out_dir},
      {"gazetteer", "gazetteer.tsv"},
      {"stoplist", "stoplist.txt"},
      {"lexicon_positive", "lexicon_positive.txt"},
      {"lexicon_negative", "lexicon_negative.txt"},
      {"lemma_exceptions", "lemma_exceptions.txt"},
      {"filter",
       {{"hashtags", json::array({"AIethics"})},
        {"date_start", "2015-01-01"},
        {"date_end", "2016-12-31"},
        {"langs", json::array({"en"})}}},
      {"keyphrase", {{"num_candidates", 4}, {"ngram_max", 3}}},
      {"embedding_dim", 64},
      {"dbscan", {{"eps", 0.45}, {"min_pts", 1}}},
      {"taxonomy",
       {{"n_top", 2},
        {"n_leaves", 8},
        {"mid_layer", true},
        {"longtail_threshold", 0.9}}},
      {"wordcloud_k", 10},
      {"evolution", {{"k", 3}, {"strategy", "similarity"}, {"seed_rule", "last_seen"}}},
  };
}

void write_fixture(const TempDir& dir, const json& config) {
  write_file(dir.file("corpus.jsonl"), fixture_corpus());
  write_file(dir.file("gazetteer.tsv"), kFixtureGazetteer);
  write_file(dir.file("stoplist.txt"), kFixtureStoplist);
  write_file(dir.file("lexicon_positive.txt"), "good\npromising\nfair\n");
  write_file(dir.file("lexicon_negative.txt"), "unfair\nharmful\nrisky\n");
  write_file(dir.file("lemma_exceptions.txt"), "ethics\nbias\nnews\n");
  write_file(dir.file("config.json"), config.dump(2) + "\n");
}

const std::vector<std::string> kExpectedArtifacts = {
    "corpus.jsonl", "corpus_stats.json", "geocoded.jsonl",
    "geocode_stats.json", "keyphrases.jsonl", "vocabulary.json",
    "label_stats.json", "embeddings.json", "clusters.json", "hierarchy.json",
    "assignments.jsonl", "topics_stats.json", "sentiment.jsonl",
    "wordclouds.json", "sentiment_stats.json", "trend.csv", "trend.json",
    "storymap_total.geojson", "storymap_topics.geojson",
    "storymap_sentiment_positive.geojson", "storymap_sentiment_negative.geojson",
    "evolution.json", "evolution.svg", "report.json", "report.txt",
    "manifest.json"};

}  // namespace

TEST_CASE("run config parses defaults and validates strictly") {
  TempDir dir;

  SUBCASE("minimal config uses documented defaults") {
    write_file(dir.file("config.json"),
               R"({"input":"c.jsonl","filter":{"hashtags":["X"],
                   "date_start":"2015-01-01","date_end":"2016-01-01",
                   "langs":["en"]}})");
    RunConfig cfg = RunConfig::load(dir.file("config.json"));
    CHECK(cfg.input == "c.jsonl");
    CHECK(cfg.out_dir == "out");
    CHECK(cfg.embedding_dim == 384);
    CHECK(cfg.dbscan.min_pts == 5);
    CHECK(cfg.dbscan.eps == doctest::Approx(0.30));
    CHECK(cfg.taxonomy.n_top == 7);
    CHECK(cfg.taxonomy.n_leaves == 64);
    CHECK(cfg.evolution.k == 5);
    CHECK(cfg.evolution_pool == "labels");
    CHECK(cfg.remote.nli_template == "This text is about {}.");
    CHECK_FALSE(cfg.remote.embeddings.has_value());
    // Relative paths resolve against the config directory.
    CHECK(cfg.resolve("c.jsonl") == (dir.path / "c.jsonl").string());
    CHECK(cfg.resolve("/abs/x") == "/abs/x");
  }

  auto expect_config_error = [&](const json& config) {
    write_file(dir.file("config.json"), config.dump());
    CHECK_THROWS_AS(RunConfig::load(dir.file("config.json")), ConfigError);
  };
  const json valid = fixture_config("out");

  SUBCASE("unknown keys are rejected at every level") {
    json top = valid;
    top["surprise"] = 1;
    expect_config_error(top);
    json filter = valid;
    filter["filter"]["tz"] = "UTC";
    expect_config_error(filter);
    json dbscan = valid;
    dbscan["dbscan"]["metric"] = "cosine";
    expect_config_error(dbscan);
    json taxonomy = valid;
    taxonomy["taxonomy"]["depth"] = 3;
    expect_config_error(taxonomy);
    json evolution = valid;
    evolution["evolution"]["window"] = 2;
    expect_config_error(evolution);
    json remote = valid;
    remote["remote"] = {{"proxy", "http://localhost"}};
    expect_config_error(remote);
  }

  SUBCASE("required keys and value constraints") {
    json no_input = valid;
    no_input.erase("input");
    expect_config_error(no_input);
    json no_filter = valid;
    no_filter.erase("filter");
    expect_config_error(no_filter);
    json partial_filter = valid;
    partial_filter["filter"].erase("langs");
    expect_config_error(partial_filter);
    json bad_date = valid;
    bad_date["filter"]["date_start"] = "2015-99-01";
    expect_config_error(bad_date);
    json inverted = valid;
    inverted["filter"]["date_start"] = "2017-01-01";
    expect_config_error(inverted);
    json zero_dim = valid;
    zero_dim["embedding_dim"] = 0;
    expect_config_error(zero_dim);
    json bad_pool = valid;
    bad_pool["evolution"]["pool"] = "weekly";
    expect_config_error(bad_pool);
    json bad_template = valid;
    bad_template["remote"] = {{"nli_template", "no placeholder"}};
    expect_config_error(bad_template);
    json bad_strategy = valid;
    bad_strategy["evolution"]["strategy"] = "random";
    expect_config_error(bad_strategy);
  }

  SUBCASE("leaves pool and remote urls are accepted") {
    json cfg_json = valid;
    cfg_json["evolution"]["pool"] = "leaves";
    cfg_json["remote"] = {{"embeddings", "http://127.0.0.1:9"},
                          {"timeout_ms", 100},
                          {"nli_template", "about {}?"}};
    write_file(dir.file("config.json"), cfg_json.dump());
    RunConfig cfg = RunConfig::load(dir.file("config.json"));
    CHECK(cfg.evolution_pool == "leaves");
    CHECK(cfg.remote.embeddings == "http://127.0.0.1:9");
    CHECK(cfg.remote.policy.timeout_ms == 100);
  }
}

TEST_CASE("manifest round-trips and writes stable bytes") {
  TempDir dir;
  Manifest empty = Manifest::load(dir.path.string());
  CHECK(empty.stage("ingest") == nullptr);

  StageRecord rec;
  rec.inputs = {{"corpus.jsonl", "00000000deadbeef"}};
  rec.config_hash = "cafecafecafecafe";
  rec.outputs = {{"a.json", "0123456789abcdef"}, {"b.json", "fedcba9876543210"}};
  Manifest m;
  m.set_stage("ingest", rec);
  m.save(dir.path.string());

  Manifest loaded = Manifest::load(dir.path.string());
  const StageRecord* got = loaded.stage("ingest");
  REQUIRE(got != nullptr);
  CHECK(got->inputs == rec.inputs);
  CHECK(got->config_hash == rec.config_hash);
  CHECK(got->outputs == rec.outputs);

  const std::string first = read_file(dir.file("manifest.json"));
  loaded.save(dir.path.string());
  CHECK(read_file(dir.file("manifest.json")) == first);
}

TEST_CASE("stage names and dispatch") {
  CHECK(stage_names() ==
        std::vector<std::string>{"ingest", "geocode", "label", "embed",
                                 "cluster", "topics", "sentiment", "trend",
                                 "storymap", "evolve", "report"});
  TempDir dir;
  write_fixture(dir, fixture_config((dir.path / "out").string()));
  RunConfig cfg = RunConfig::load(dir.file("config.json"));
  CHECK_THROWS_AS(run_stage("bogus", cfg), ConfigError);
}

TEST_CASE("full run, no-op rerun, staleness, and tamper detection") {
  TempDir dir;
  write_fixture(dir, fixture_config((dir.path / "out").string()));
  RunConfig cfg = RunConfig::load(dir.file("config.json"));

  run_all(cfg);
  for (const std::string& name : kExpectedArtifacts) {
    CAPTURE(name);
    CHECK(fs::exists(fs::path(cfg.out_dir) / name));
  }

  // The corpus made it through the filter.
  std::istringstream corpus(read_file(cfg.out_dir + "/corpus.jsonl"));
  std::size_t lines = 0;
  for (std::string line; std::getline(corpus, line);) ++lines;
  CHECK(lines == 24);

  // A second run must not rewrite anything.
  std::map<std::string, fs::file_time_type> mtimes;
  for (const std::string& name : kExpectedArtifacts) {
    mtimes[name] = fs::last_write_time(fs::path(cfg.out_dir) / name);
  }
  run_all(cfg);
  for (const std::string& name : kExpectedArtifacts) {
    CAPTURE(name);
    CHECK(fs::last_write_time(fs::path(cfg.out_dir) / name) == mtimes[name]);
  }

  // A config change re-runs the stages it feeds.
  json manifest_before =
      json::parse(read_file(cfg.out_dir + "/manifest.json"));
  json changed = fixture_config((dir.path / "out").string());
  changed["dbscan"]["eps"] = 0.3;
  write_file(dir.file("config.json"), changed.dump(2) + "\n");
  RunConfig cfg2 = RunConfig::load(dir.file("config.json"));
  run_stage("cluster", cfg2);
  json manifest_after = json::parse(read_file(cfg.out_dir + "/manifest.json"));
  CHECK(manifest_before["stages"]["cluster"]["config_hash"] !=
        manifest_after["stages"]["cluster"]["config_hash"]);
  CHECK(manifest_before["stages"]["ingest"] ==
        manifest_after["stages"]["ingest"]);

  // Hand-editing an artifact is caught by the next dependent stage.
  write_file(cfg.out_dir + "/corpus.jsonl",
             read_file(cfg.out_dir + "/corpus.jsonl") + "tampered\n");
  try {
    run_stage("geocode", cfg2);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("re-run") != std::string::npos);
  }
}

TEST_CASE("running a stage without its dependencies fails cleanly") {
  TempDir dir;
  write_fixture(dir, fixture_config((dir.path / "out").string()));
  RunConfig cfg = RunConfig::load(dir.file("config.json"));
  try {
    run_stage("cluster", cfg);
    FAIL("expected DependencyError");
  } catch (const DependencyError& e) {
    CHECK(std::string(e.what()).find("missing: ") != std::string::npos);
  }
  // Nothing was partially created besides the output directory itself.
  CHECK_FALSE(fs::exists(fs::path(cfg.out_dir) / "clusters.json"));
}

TEST_CASE("separate output trees from one fixture are byte-identical") {
  TempDir dir;
  write_fixture(dir, fixture_config((dir.path / "out_a").string()));
  write_file(dir.file("config_b.json"),
             fixture_config((dir.path / "out_b").string()).dump(2) + "\n");

  RunConfig a = RunConfig::load(dir.file("config.json"));
  RunConfig b = RunConfig::load(dir.file("config_b.json"));
  run_all(a);
  run_all(b);
  for (const std::string& name : kExpectedArtifacts) {
    CAPTURE(name);
    CHECK(read_file((dir.path / "out_a" / name).string()) ==
          read_file((dir.path / "out_b" / name).string()));
  }
}

TEST_CASE("an empty corpus degrades to empty artifacts, not errors") {
  TempDir dir;
  json config = fixture_config((dir.path / "out").string());
  config["filter"]["hashtags"] = json::array({"nothing_matches_this"});
  write_fixture(dir, config);
  RunConfig cfg = RunConfig::load(dir.file("config.json"));
  run_all(cfg);

  CHECK(read_file(cfg.out_dir + "/corpus.jsonl").empty());
  json hierarchy = json::parse(read_file(cfg.out_dir + "/hierarchy.json"));
  CHECK(hierarchy["roots"].empty());
  json evolution = json::parse(read_file(cfg.out_dir + "/evolution.json"));
  CHECK(evolution["nodes"].empty());
  CHECK(fs::exists(fs::path(cfg.out_dir) / "report.txt"));
}
