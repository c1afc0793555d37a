#include "atlas/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "atlas/errors.hpp"
#include "atlas/geospatial.hpp"
#include "atlas/hash.hpp"
#include "atlas/sentiment.hpp"
#include "atlas/timeutil.hpp"

namespace atlas {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::size_t kRemoteBatch = 128;

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw DataError("cannot read " + path);
  return buf.str();
}

// All artifact writes go through here: write a sibling temp file, then
// rename over the target so a crash never leaves a half-written artifact.
void write_file_atomic(const std::string& path, const std::string& bytes) {
  const fs::path target(path);
  const fs::path tmp = target.parent_path() / (".tmp." + target.filename().string());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw DataError("cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw DataError("cannot replace " + path + ": " + ec.message());
}

// Two-space indent, sorted keys (nlohmann objects are ordered maps), and a
// trailing newline: the same config and data always produce identical bytes.
void write_json_atomic(const std::string& path, const json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

json parse_json(const std::string& text, const std::string& origin) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw DataError(origin + ": invalid JSON");
  return j;
}

json read_json_file(const std::string& path) {
  return parse_json(read_file(path), path);
}

std::string file_hash_hex(const std::string& path) {
  return hex_digest(hash_file(path));
}

std::string json_hash_hex(const json& j) {
  return hex_digest(Fnv1a64::of(j.dump()));
}

std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::vector<json> lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw DataError(path + ":" + std::to_string(line_no) + ": invalid JSON");
    }
    lines.push_back(std::move(j));
  }
  return lines;
}

// ---------------------------------------------------------------------------
// Strict config parsing
// ---------------------------------------------------------------------------

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError("config: unknown key \"" + it.key() + "\" in " + where);
    }
  }
}

const json* opt_member(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

std::string want_string(const json& v, const std::string& where) {
  if (!v.is_string()) throw ConfigError("config: " + where + " must be a string");
  return v.get<std::string>();
}

bool want_bool(const json& v, const std::string& where) {
  if (!v.is_boolean()) throw ConfigError("config: " + where + " must be a boolean");
  return v.get<bool>();
}

double want_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError("config: " + where + " must be a number");
  return v.get<double>();
}

std::int64_t want_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) {
    throw ConfigError("config: " + where + " must be an integer");
  }
  return v.get<std::int64_t>();
}

std::size_t want_size(const json& v, const std::string& where) {
  const std::int64_t n = want_int(v, where);
  if (n < 0) throw ConfigError("config: " + where + " must be non-negative");
  return static_cast<std::size_t>(n);
}

std::set<std::string> want_string_set(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError("config: " + where + " must be an array");
  std::set<std::string> out;
  for (const json& e : v) out.insert(want_string(e, where + " entry"));
  return out;
}

// Inclusive endpoint semantics for the filter's dates: a date-only end bound
// covers through 23:59:59 of that UTC day.
std::int64_t parse_filter_date(const std::string& text, bool is_end,
                               const std::string& where) {
  const auto ts = parse_timestamp(text);
  if (!ts) throw ConfigError("config: " + where + " is not an ISO-8601 date");
  const bool date_only = text.size() == 10;
  return (is_end && date_only) ? *ts + 86399 : *ts;
}

// ---------------------------------------------------------------------------
// Stage table
// ---------------------------------------------------------------------------

struct StageInfo {
  std::string name;
  std::vector<std::string> deps;
};

const std::vector<StageInfo>& stage_table() {
  static const std::vector<StageInfo> kStages = {
      {"ingest", {}},
      {"geocode", {"ingest"}},
      {"label", {"ingest"}},
      {"embed", {"label"}},
      {"cluster", {"label", "embed"}},
      {"topics", {"label", "embed", "cluster"}},
      {"sentiment", {"ingest"}},
      {"trend", {"topics"}},
      {"storymap", {"geocode", "topics", "sentiment"}},
      {"evolve", {"label", "embed"}},
      {"report", {"ingest", "geocode", "label", "embed", "cluster", "topics",
                  "sentiment", "trend", "storymap", "evolve"}},
  };
  return kStages;
}

const StageInfo& stage_info(const std::string& name) {
  for (const StageInfo& s : stage_table()) {
    if (s.name == name) return s;
  }
  throw ConfigError("unknown stage: " + name);
}

// ---------------------------------------------------------------------------
// Stage runner scaffolding
// ---------------------------------------------------------------------------

// Everything one stage body needs: resolved paths, the manifest, and the
// staleness bookkeeping. Stage bodies call need_run() after declaring their
// inputs, write outputs with write_*, then finish().
class StageContext {
 public:
  StageContext(const RunConfig& config, std::string stage)
      : config_(config),
        stage_(std::move(stage)),
        manifest_(Manifest::load(config.out_dir)) {
    fs::create_directories(config_.out_dir);
    for (const std::string& dep : stage_info(stage_).deps) {
      if (dep == "topics" && stage_ == "evolve" &&
          config_.evolution_pool != "leaves") {
        continue;
      }
      require_dep(dep);
    }
  }

  const RunConfig& config() const { return config_; }

  std::string out_path(const std::string& name) const {
    return (fs::path(config_.out_dir) / name).string();
  }

  // Declares an input file outside the output directory (corpus, gazetteer,
  // word lists). The manifest keys it by the path as resolved, so runs from
  // the same working directory and config agree byte for byte.
  void add_external_input(const std::string& resolved_path) {
    record_.inputs[resolved_path] = file_hash_hex(resolved_path);
  }

  // Declares an upstream artifact as input, keyed by its out_dir-relative
  // name.
  void add_artifact_input(const std::string& name) {
    record_.inputs[name] = file_hash_hex(out_path(name));
  }

  void set_config_subset(const json& subset) {
    record_.config_hash = json_hash_hex(subset);
  }

  void declare_outputs(std::vector<std::string> names) {
    output_names_ = std::move(names);
  }

  // True when the stage has to execute: no record yet, inputs or config
  // changed, or any recorded output is missing or was modified since.
  bool need_run() const {
    const StageRecord* prev = manifest_.stage(stage_);
    if (!prev) return true;
    if (prev->inputs != record_.inputs) return true;
    if (prev->config_hash != record_.config_hash) return true;
    std::map<std::string, std::string> expect;
    for (const std::string& name : output_names_) {
      auto it = prev->outputs.find(name);
      if (it == prev->outputs.end()) return true;
      expect.emplace(name, it->second);
    }
    if (prev->outputs.size() != expect.size()) return true;
    for (const auto& [name, hash] : expect) {
      const std::string path = out_path(name);
      if (!fs::exists(path) || file_hash_hex(path) != hash) return true;
    }
    return false;
  }

  void skip() const {
    std::cerr << "[" << stage_ << "] up to date, skipping\n";
  }

  void write_text(const std::string& name, const std::string& bytes) const {
    write_file_atomic(out_path(name), bytes);
  }

  void write_json(const std::string& name, const json& j) const {
    write_json_atomic(out_path(name), j);
  }

  void write_jsonl(const std::string& name,
                   const std::vector<json>& lines) const {
    std::string bytes;
    for (const json& j : lines) {
      bytes += j.dump();
      bytes += '\n';
    }
    write_file_atomic(out_path(name), bytes);
  }

  // Hashes the declared outputs and persists the manifest record.
  void finish() {
    for (const std::string& name : output_names_) {
      record_.outputs[name] = file_hash_hex(out_path(name));
    }
    manifest_.set_stage(stage_, record_);
    manifest_.save(config_.out_dir);
    std::cerr << "[" << stage_ << "] done\n";
  }

 private:
  // A dependency is satisfied when its manifest record exists and every
  // recorded output is still present with matching bytes. A missing record
  // or missing file means the stage was never (successfully) run; bytes
  // that no longer match mean someone edited an artifact by hand.
  void require_dep(const std::string& dep) const {
    const StageRecord* rec = manifest_.stage(dep);
    if (!rec) throw DependencyError("missing: " + dep);
    for (const auto& [name, hash] : rec->outputs) {
      const std::string path = out_path(name);
      if (!fs::exists(path)) throw DependencyError("missing: " + dep);
      if (file_hash_hex(path) != hash) {
        throw DataError("artifact " + name +
                        " does not match the manifest; re-run " + dep);
      }
    }
  }

  const RunConfig& config_;
  std::string stage_;
  Manifest manifest_;
  StageRecord record_;
  std::vector<std::string> output_names_;
};

// ---------------------------------------------------------------------------
// Shared artifact readers
// ---------------------------------------------------------------------------

std::vector<Post> load_corpus_artifact(const StageContext& ctx) {
  std::ifstream in(ctx.out_path("corpus.jsonl"), std::ios::binary);
  if (!in) throw DataError("cannot read " + ctx.out_path("corpus.jsonl"));
  return read_corpus(in);
}

struct KeyphraseRow {
  std::string id;
  std::int64_t created_at = 0;
  std::vector<ExtractedPhrase> phrases;
};

std::vector<KeyphraseRow> load_keyphrase_rows(const StageContext& ctx) {
  std::vector<KeyphraseRow> rows;
  for (const json& j : read_jsonl(ctx.out_path("keyphrases.jsonl"))) {
    KeyphraseRow row;
    row.id = j.at("id").get<std::string>();
    row.created_at = j.at("created_at").get<std::int64_t>();
    for (const json& p : j.at("phrases")) {
      row.phrases.push_back({p.at("surface").get<std::string>(),
                             p.at("canonical").get<std::string>()});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<Label> load_vocabulary(const StageContext& ctx) {
  std::vector<Label> labels;
  const json j = read_json_file(ctx.out_path("vocabulary.json"));
  for (const json& e : j.at("labels")) {
    Label l;
    l.surface = e.at("surface").get<std::string>();
    l.canonical = e.at("canonical").get<std::string>();
    l.first_seen = e.at("first_seen").get<std::int64_t>();
    l.last_seen = e.at("last_seen").get<std::int64_t>();
    l.freq = e.at("freq").get<std::uint64_t>();
    labels.push_back(std::move(l));
  }
  return labels;
}

struct EmbeddingTable {
  std::size_t dim = 0;
  std::vector<std::string> labels;
  std::vector<EmbeddingVector> vectors;

  std::map<std::string, EmbeddingVector> as_map() const {
    std::map<std::string, EmbeddingVector> m;
    for (std::size_t i = 0; i < labels.size(); ++i) m[labels[i]] = vectors[i];
    return m;
  }
};

EmbeddingTable load_embeddings(const StageContext& ctx) {
  const json j = read_json_file(ctx.out_path("embeddings.json"));
  EmbeddingTable table;
  table.dim = j.at("dim").get<std::size_t>();
  table.labels = j.at("labels").get<std::vector<std::string>>();
  for (const json& v : j.at("vectors")) {
    table.vectors.push_back(v.get<EmbeddingVector>());
  }
  if (table.labels.size() != table.vectors.size()) {
    throw DataError("embeddings.json: labels and vectors disagree");
  }
  return table;
}

TopicHierarchy load_hierarchy(const StageContext& ctx) {
  return hierarchy_from_json(read_json_file(ctx.out_path("hierarchy.json")));
}

struct AssignmentRow {
  std::string id;
  std::int64_t created_at = 0;
  std::optional<std::string> leaf_id;
};

std::vector<AssignmentRow> load_assignments(const StageContext& ctx) {
  std::vector<AssignmentRow> rows;
  for (const json& j : read_jsonl(ctx.out_path("assignments.jsonl"))) {
    AssignmentRow row;
    row.id = j.at("id").get<std::string>();
    row.created_at = j.at("created_at").get<std::int64_t>();
    const json& leaf = j.at("leaf_id");
    if (!leaf.is_null()) row.leaf_id = leaf.get<std::string>();
    rows.push_back(std::move(row));
  }
  return rows;
}

// The embedder every stage shares: the configured provider when present,
// the builtin trigram embedder otherwise. Leaf names and labels must live
// in one vector space, so everything goes through this one function.
std::function<EmbeddingVector(const std::string&)> name_embedder(
    const RunConfig& config) {
  if (config.remote.embeddings) {
    const std::string url = *config.remote.embeddings;
    const RemotePolicy policy = config.remote.policy;
    const std::size_t dim = config.embedding_dim;
    return [url, policy, dim](const std::string& name) {
      RemoteClient client(url, policy);
      return client.embeddings({name}, dim).front();
    };
  }
  HashedTrigramEmbedder embedder(config.embedding_dim);
  return [embedder](const std::string& name) { return embedder.embed(name); };
}

// ---------------------------------------------------------------------------
// Stage bodies
// ---------------------------------------------------------------------------

void run_ingest(const RunConfig& config) {
  StageContext ctx(config, "ingest");
  const std::string input = config.resolve(config.input);
  ctx.add_external_input(input);
  ctx.set_config_subset(json{
      {"hashtags", config.filter.hashtag_whitelist},
      {"date_start", config.filter.date_start},
      {"date_end", config.filter.date_end},
      {"langs", config.filter.lang_whitelist},
  });
  ctx.declare_outputs({"corpus.jsonl", "corpus_stats.json"});
  if (!ctx.need_run()) return ctx.skip();

  std::ifstream in(input, std::ios::binary);
  if (!in) throw DataError("cannot read " + input);
  IngestResult result = ingest(in, config.filter);
  // Downstream stages all consume normalized text, so it is fixed once here.
  for (Post& p : result.posts) p.text = normalize_text(p.text);

  std::ostringstream corpus;
  write_corpus(result.posts, corpus);
  ctx.write_text("corpus.jsonl", corpus.str());
  ctx.write_json("corpus_stats.json",
                 json{{"total_posts", result.stats.total_posts},
                      {"posts_per_month", result.stats.posts_per_month},
                      {"filtered_out", result.stats.filtered_out}});
  ctx.finish();
}

void run_geocode(const RunConfig& config) {
  StageContext ctx(config, "geocode");
  const std::string gazetteer_path = config.resolve(config.gazetteer);
  ctx.add_artifact_input("corpus.jsonl");
  ctx.add_external_input(gazetteer_path);
  ctx.set_config_subset(json::object());
  ctx.declare_outputs({"geocoded.jsonl", "geocode_stats.json"});
  if (!ctx.need_run()) return ctx.skip();

  const Gazetteer gazetteer = Gazetteer::load(gazetteer_path);
  const std::vector<Post> posts = load_corpus_artifact(ctx);

  std::vector<json> lines;
  std::size_t matched = 0;
  for (const Post& post : posts) {
    json row{{"id", post.id}, {"region", nullptr}};
    if (post.raw_location) {
      if (auto hit = geocode(*post.raw_location, gazetteer)) {
        row["region"] = json{{"country_code", hit->second.country_code},
                             {"admin1", hit->second.admin1},
                             {"lat", hit->first.lat},
                             {"lon", hit->first.lon}};
        ++matched;
      }
    }
    lines.push_back(std::move(row));
  }
  ctx.write_jsonl("geocoded.jsonl", lines);
  ctx.write_json("geocode_stats.json",
                 json{{"matched", matched},
                      {"unmatched", posts.size() - matched}});
  ctx.finish();
}

void run_label(const RunConfig& config) {
  StageContext ctx(config, "label");
  const std::string stoplist_path = config.resolve(config.stoplist);
  const std::string exceptions_path = config.resolve(config.lemma_exceptions);
  ctx.add_artifact_input("corpus.jsonl");
  ctx.add_external_input(stoplist_path);
  ctx.add_external_input(exceptions_path);
  ctx.set_config_subset(json{
      {"num_candidates", config.keyphrase.num_candidates},
      {"ngram_max", config.keyphrase.ngram_max},
      {"remote", config.remote.keyphrases ? json(*config.remote.keyphrases)
                                          : json(nullptr)},
  });
  ctx.declare_outputs({"keyphrases.jsonl", "vocabulary.json", "label_stats.json"});
  if (!ctx.need_run()) return ctx.skip();

  const std::vector<Post> posts = load_corpus_artifact(ctx);
  KeyphraseParams params = config.keyphrase;
  params.stoplist = load_word_list(stoplist_path);
  params.validate();
  const std::set<std::string> exceptions = load_word_list(exceptions_path);

  std::vector<std::vector<ExtractedPhrase>> per_post(posts.size());
  std::size_t provider_errors = 0;
  const bool remote = config.remote.keyphrases.has_value();

  if (remote) {
    RemoteClient client(*config.remote.keyphrases, config.remote.policy);
    for (std::size_t start = 0; start < posts.size(); start += kRemoteBatch) {
      const std::size_t end = std::min(posts.size(), start + kRemoteBatch);
      std::vector<std::string> texts;
      for (std::size_t i = start; i < end; ++i) texts.push_back(posts[i].text);
      try {
        const auto batch = client.keyphrases(texts, params.num_candidates);
        for (std::size_t i = start; i < end; ++i) {
          std::set<std::string> seen;
          for (const std::string& phrase : batch[i - start]) {
            std::string canonical = canonicalize(phrase, exceptions);
            if (canonical.empty() || !seen.insert(canonical).second) continue;
            per_post[i].push_back({phrase, std::move(canonical)});
            if (per_post[i].size() >= params.num_candidates) break;
          }
        }
      } catch (const RemoteError& e) {
        // A failed batch degrades to no phrases for those posts; the stage
        // keeps going and the count surfaces in label_stats.json.
        std::cerr << "[label] keyphrase batch failed: " << e.what() << "\n";
        provider_errors += end - start;
      }
    }
  } else {
    std::vector<std::string> texts;
    texts.reserve(posts.size());
    for (const Post& p : posts) texts.push_back(p.text);
    const TermStats stats = compute_term_stats(texts, params.ngram_max, exceptions);
    for (std::size_t i = 0; i < posts.size(); ++i) {
      per_post[i] = extract_keyphrases(texts[i], stats, params);
    }
  }

  std::vector<json> lines;
  std::vector<PhraseOccurrence> occurrences;
  std::size_t with_phrases = 0;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    json phrases = json::array();
    for (const ExtractedPhrase& p : per_post[i]) {
      phrases.push_back(json{{"surface", p.surface}, {"canonical", p.canonical}});
      occurrences.push_back({p.surface, p.canonical, posts[i].created_at});
    }
    if (!per_post[i].empty()) ++with_phrases;
    lines.push_back(json{{"id", posts[i].id},
                         {"created_at", posts[i].created_at},
                         {"phrases", std::move(phrases)}});
  }
  const std::vector<Label> vocabulary = build_vocabulary(occurrences);

  json vocab_json = json::array();
  for (const Label& l : vocabulary) {
    vocab_json.push_back(json{{"surface", l.surface},
                              {"canonical", l.canonical},
                              {"first_seen", l.first_seen},
                              {"last_seen", l.last_seen},
                              {"freq", l.freq}});
  }
  ctx.write_jsonl("keyphrases.jsonl", lines);
  ctx.write_json("vocabulary.json", json{{"labels", std::move(vocab_json)}});
  ctx.write_json("label_stats.json",
                 json{{"posts", posts.size()},
                      {"posts_with_phrases", with_phrases},
                      {"phrase_occurrences", occurrences.size()},
                      {"labels", vocabulary.size()},
                      {"provider_errors", provider_errors},
                      {"source", remote ? "remote" : "builtin"}});
  ctx.finish();
}

void run_embed(const RunConfig& config) {
  StageContext ctx(config, "embed");
  ctx.add_artifact_input("vocabulary.json");
  ctx.set_config_subset(json{
      {"dim", config.embedding_dim},
      {"remote", config.remote.embeddings ? json(*config.remote.embeddings)
                                          : json(nullptr)},
  });
  ctx.declare_outputs({"embeddings.json"});
  if (!ctx.need_run()) return ctx.skip();

  const std::vector<Label> vocabulary = load_vocabulary(ctx);
  std::vector<std::string> texts;
  texts.reserve(vocabulary.size());
  for (const Label& l : vocabulary) texts.push_back(l.canonical);

  std::vector<EmbeddingVector> vectors;
  if (config.remote.embeddings) {
    // No builtin fallback here: mixing provider vectors with builtin ones
    // would put labels in two different spaces, so a provider failure is
    // fatal for the run.
    RemoteClient client(*config.remote.embeddings, config.remote.policy);
    for (std::size_t start = 0; start < texts.size(); start += kRemoteBatch) {
      const std::size_t end = std::min(texts.size(), start + kRemoteBatch);
      std::vector<std::string> batch(texts.begin() + start, texts.begin() + end);
      auto part = client.embeddings(batch, config.embedding_dim);
      vectors.insert(vectors.end(), part.begin(), part.end());
    }
  } else {
    vectors = HashedTrigramEmbedder(config.embedding_dim).embed_batch(texts);
  }

  json vecs = json::array();
  for (const EmbeddingVector& v : vectors) vecs.push_back(v);
  ctx.write_json("embeddings.json", json{{"dim", config.embedding_dim},
                                         {"labels", texts},
                                         {"vectors", std::move(vecs)}});
  ctx.finish();
}

void run_cluster(const RunConfig& config) {
  StageContext ctx(config, "cluster");
  ctx.add_artifact_input("vocabulary.json");
  ctx.add_artifact_input("embeddings.json");
  ctx.set_config_subset(json{{"eps", config.dbscan.eps},
                             {"min_pts", config.dbscan.min_pts}});
  ctx.declare_outputs({"clusters.json"});
  if (!ctx.need_run()) return ctx.skip();

  const std::vector<Label> vocabulary = load_vocabulary(ctx);
  const EmbeddingTable table = load_embeddings(ctx);
  if (vocabulary.size() != table.labels.size()) {
    throw DataError("vocabulary and embeddings disagree; re-run embed");
  }

  const ClusterAssignment assignment = dbscan(table.vectors, config.dbscan);

  std::vector<std::vector<std::size_t>> members(assignment.cluster_count);
  std::size_t noise = 0;
  for (std::size_t i = 0; i < assignment.labels.size(); ++i) {
    if (assignment.labels[i] == ClusterAssignment::kNoise) {
      ++noise;
    } else {
      members[static_cast<std::size_t>(assignment.labels[i])].push_back(i);
    }
  }

  json reps = json::array();
  for (std::size_t c = 0; c < members.size(); ++c) {
    std::vector<LabeledEmbedding> group;
    for (std::size_t i : members[c]) {
      group.push_back({table.labels[i], vocabulary[i].freq, table.vectors[i]});
    }
    const std::size_t medoid = representative(group);
    reps.push_back(json{{"cluster", c},
                        {"label", group[medoid].label},
                        {"size", group.size()}});
  }

  ctx.write_json(
      "clusters.json",
      json{{"params", json{{"eps", config.dbscan.eps},
                           {"min_pts", config.dbscan.min_pts}}},
           {"labels", table.labels},
           {"assignments", assignment.labels},
           {"cluster_count", assignment.cluster_count},
           {"noise_count", noise},
           {"representatives", std::move(reps)}});
  ctx.finish();
}

void run_topics(const RunConfig& config) {
  StageContext ctx(config, "topics");
  ctx.add_artifact_input("keyphrases.jsonl");
  ctx.add_artifact_input("embeddings.json");
  ctx.add_artifact_input("clusters.json");
  ctx.set_config_subset(json{
      {"n_top", config.taxonomy.n_top},
      {"n_leaves", config.taxonomy.n_leaves},
      {"mid_layer", config.taxonomy.mid_layer},
      {"remote_hierarchy", config.remote.hierarchy
                               ? json(*config.remote.hierarchy)
                               : json(nullptr)},
      {"remote_nli",
       config.remote.nli ? json(*config.remote.nli) : json(nullptr)},
      {"nli_template", config.remote.nli_template},
  });
  ctx.declare_outputs({"hierarchy.json", "assignments.jsonl", "topics_stats.json"});
  if (!ctx.need_run()) return ctx.skip();

  const std::vector<KeyphraseRow> rows = load_keyphrase_rows(ctx);
  const EmbeddingTable table = load_embeddings(ctx);
  const std::map<std::string, EmbeddingVector> by_label = table.as_map();
  const json clusters = read_json_file(ctx.out_path("clusters.json"));

  std::unordered_map<std::string, std::uint64_t> freq_of;
  {
    const json vocab = read_json_file(ctx.out_path("vocabulary.json"));
    for (const json& e : vocab.at("labels")) {
      freq_of[e.at("canonical").get<std::string>()] =
          e.at("freq").get<std::uint64_t>();
    }
  }

  std::vector<LabeledEmbedding> representatives;
  for (const json& r : clusters.at("representatives")) {
    const std::string label = r.at("label").get<std::string>();
    auto it = by_label.find(label);
    if (it == by_label.end()) {
      throw DataError("representative " + label + " has no embedding");
    }
    representatives.push_back({label, freq_of[label], it->second});
  }

  TopicHierarchy hierarchy;
  std::size_t nli_fallbacks = 0;
  const auto embed_name = name_embedder(config);

  if (representatives.empty()) {
    // Nothing to organize (empty corpus or everything noise): an empty
    // hierarchy keeps downstream stages well-defined.
    hierarchy = TopicHierarchy{};
  } else if (config.remote.hierarchy) {
    RemoteClient client(*config.remote.hierarchy, config.remote.policy);
    std::vector<std::string> labels;
    for (const LabeledEmbedding& r : representatives) labels.push_back(r.label);
    const json tree = client.hierarchy(labels, config.taxonomy.n_top,
                                       config.taxonomy.n_leaves);
    hierarchy = hierarchy_from_remote_tree(tree, config.taxonomy, embed_name);
  } else {
    hierarchy = build_hierarchy(representatives, config.taxonomy);
  }

  // Every vocabulary label maps to a leaf; posts then inherit the leaf of
  // their top-ranked phrase.
  std::map<std::string, std::string> label_to_leaf;
  if (!hierarchy.nodes.empty()) {
    const std::vector<LeafRef> leaf_refs = make_leaf_refs(hierarchy, embed_name);
    std::optional<RemoteClient> nli;
    if (config.remote.nli) {
      nli.emplace(*config.remote.nli, config.remote.policy);
    }
    std::vector<std::string> hypotheses;
    std::vector<std::size_t> hyp_order;  // leaf_refs index, name-sorted
    if (nli) {
      std::vector<std::pair<std::string, std::size_t>> by_name;
      for (std::size_t i = 0; i < leaf_refs.size(); ++i) {
        by_name.emplace_back(leaf_refs[i].name, i);
      }
      std::sort(by_name.begin(), by_name.end());
      const std::string& tpl = config.remote.nli_template;
      const std::size_t slot = tpl.find("{}");
      for (const auto& [name, idx] : by_name) {
        hypotheses.push_back(tpl.substr(0, slot) + name + tpl.substr(slot + 2));
        hyp_order.push_back(idx);
      }
    }
    for (const auto& [label, vec] : by_label) {
      if (nli) {
        try {
          const std::vector<double> scores = nli->nli(label, hypotheses);
          // Highest entailment wins; the hypothesis list is name-sorted, so
          // the first maximum is the lexicographically smallest leaf name,
          // matching the offline tie rule.
          std::size_t best = 0;
          for (std::size_t i = 1; i < scores.size(); ++i) {
            if (scores[i] > scores[best]) best = i;
          }
          label_to_leaf[label] = leaf_refs[hyp_order[best]].id;
          continue;
        } catch (const RemoteError& e) {
          std::cerr << "[topics] nli failed for \"" << label
                    << "\": " << e.what() << "\n";
          ++nli_fallbacks;
        }
      }
      label_to_leaf[label] = map_label_to_leaf(vec, leaf_refs);
    }
    assign_members(hierarchy, label_to_leaf);
  }

  std::vector<json> assignment_lines;
  std::map<std::string, std::size_t> leaf_post_counts;
  std::size_t assigned = 0;
  for (const KeyphraseRow& row : rows) {
    json line{{"id", row.id}, {"created_at", row.created_at}, {"leaf_id", nullptr}};
    if (!row.phrases.empty()) {
      auto it = label_to_leaf.find(row.phrases.front().canonical);
      if (it != label_to_leaf.end()) {
        line["leaf_id"] = it->second;
        leaf_post_counts[it->second] += 1;
        ++assigned;
      }
    }
    assignment_lines.push_back(std::move(line));
  }
  compute_shares(hierarchy, leaf_post_counts, rows.size());

  std::size_t n_leaves = 0;
  for (const TopicNode& n : hierarchy.nodes) n_leaves += n.level == 3;

  ctx.write_json("hierarchy.json", hierarchy_to_json(hierarchy));
  ctx.write_jsonl("assignments.jsonl", assignment_lines);
  ctx.write_json(
      "topics_stats.json",
      json{{"representatives", representatives.size()},
           {"labels", by_label.size()},
           {"roots", hierarchy.root_ids.size()},
           {"leaves", n_leaves},
           {"assigned_posts", assigned},
           {"unassigned_posts", rows.size() - assigned},
           {"nli_fallbacks", nli_fallbacks},
           {"source", config.remote.hierarchy ? "remote" : "builtin"}});
  ctx.finish();
}

void run_sentiment(const RunConfig& config) {
  StageContext ctx(config, "sentiment");
  const std::string pos_path = config.resolve(config.lexicon_positive);
  const std::string neg_path = config.resolve(config.lexicon_negative);
  const std::string stop_path = config.resolve(config.stoplist);
  ctx.add_artifact_input("corpus.jsonl");
  ctx.add_external_input(pos_path);
  ctx.add_external_input(neg_path);
  ctx.add_external_input(stop_path);
  ctx.set_config_subset(json{
      {"remote", config.remote.sentiment ? json(*config.remote.sentiment)
                                         : json(nullptr)},
      {"wordcloud_k", config.wordcloud_k},
  });
  ctx.declare_outputs({"sentiment.jsonl", "wordclouds.json", "sentiment_stats.json"});
  if (!ctx.need_run()) return ctx.skip();

  const std::vector<Post> posts = load_corpus_artifact(ctx);
  SentimentLexicon lexicon;
  lexicon.positive = load_word_list(pos_path);
  lexicon.negative = load_word_list(neg_path);
  const std::set<std::string> stoplist = load_word_list(stop_path);

  std::vector<SentimentScore> scores(posts.size());
  std::size_t fallbacks = 0;
  if (config.remote.sentiment) {
    RemoteClient client(*config.remote.sentiment, config.remote.policy);
    for (std::size_t start = 0; start < posts.size(); start += kRemoteBatch) {
      const std::size_t end = std::min(posts.size(), start + kRemoteBatch);
      std::vector<std::string> texts;
      for (std::size_t i = start; i < end; ++i) texts.push_back(posts[i].text);
      try {
        const auto batch = client.sentiment(texts);
        for (std::size_t i = start; i < end; ++i) scores[i] = batch[i - start];
      } catch (const RemoteError& e) {
        std::cerr << "[sentiment] batch failed: " << e.what() << "\n";
        for (std::size_t i = start; i < end; ++i) {
          scores[i] = classify(posts[i].text, lexicon);
          ++fallbacks;
        }
      }
    }
  } else {
    for (std::size_t i = 0; i < posts.size(); ++i) {
      scores[i] = classify(posts[i].text, lexicon);
    }
  }

  std::vector<json> lines;
  std::vector<ScoredPost> scored;
  std::map<std::string, std::size_t> by_class;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    lines.push_back(json{{"id", posts[i].id},
                         {"label", scores[i].label},
                         {"confidence", scores[i].confidence}});
    scored.push_back({posts[i].text, scores[i]});
    by_class[scores[i].label] += 1;
  }

  auto cloud_json = [&](std::string_view cls) {
    json out = json::array();
    for (const auto& [term, count] :
         keywords_by_sentiment(scored, cls, stoplist, config.wordcloud_k)) {
      out.push_back(json{{"term", term}, {"count", count}});
    }
    return out;
  };

  ctx.write_jsonl("sentiment.jsonl", lines);
  ctx.write_json("wordclouds.json",
                 json{{"positive", cloud_json(kSentimentPositive)},
                      {"negative", cloud_json(kSentimentNegative)}});
  ctx.write_json(
      "sentiment_stats.json",
      json{{"positive", by_class[std::string(kSentimentPositive)]},
           {"neutral", by_class[std::string(kSentimentNeutral)]},
           {"negative", by_class[std::string(kSentimentNegative)]},
           {"fallbacks", fallbacks},
           {"source", config.remote.sentiment ? "remote" : "builtin"}});
  ctx.finish();
}

void run_trend(const RunConfig& config) {
  StageContext ctx(config, "trend");
  ctx.add_artifact_input("hierarchy.json");
  ctx.add_artifact_input("assignments.jsonl");
  ctx.set_config_subset(json::object());
  ctx.declare_outputs({"trend.csv", "trend.json"});
  if (!ctx.need_run()) return ctx.skip();

  const TopicHierarchy hierarchy = load_hierarchy(ctx);
  std::vector<AssignedPost> posts;
  for (const AssignmentRow& row : load_assignments(ctx)) {
    posts.push_back({row.created_at, row.leaf_id});
  }
  const TrendSeries series = trend_series(posts, hierarchy);
  ctx.write_text("trend.csv", trend_to_csv(series));
  ctx.write_json("trend.json", trend_to_json(series));
  ctx.finish();
}

void run_storymap(const RunConfig& config) {
  StageContext ctx(config, "storymap");
  const std::string gazetteer_path = config.resolve(config.gazetteer);
  ctx.add_artifact_input("geocoded.jsonl");
  ctx.add_artifact_input("assignments.jsonl");
  ctx.add_artifact_input("sentiment.jsonl");
  ctx.add_artifact_input("hierarchy.json");
  ctx.add_external_input(gazetteer_path);
  ctx.set_config_subset(json::object());
  ctx.declare_outputs({"storymap_total.geojson", "storymap_topics.geojson",
                       "storymap_sentiment_positive.geojson",
                       "storymap_sentiment_negative.geojson"});
  if (!ctx.need_run()) return ctx.skip();

  const TopicHierarchy hierarchy = load_hierarchy(ctx);
  const Gazetteer gazetteer = Gazetteer::load(gazetteer_path);

  std::unordered_map<std::string, Region> region_of;
  for (const json& j : read_jsonl(ctx.out_path("geocoded.jsonl"))) {
    const json& region = j.at("region");
    if (region.is_null()) continue;
    region_of[j.at("id").get<std::string>()] =
        Region{region.at("country_code").get<std::string>(),
               region.at("admin1").get<std::string>()};
  }
  std::unordered_map<std::string, std::string> sentiment_of;
  for (const json& j : read_jsonl(ctx.out_path("sentiment.jsonl"))) {
    sentiment_of[j.at("id").get<std::string>()] =
        j.at("label").get<std::string>();
  }

  std::vector<AnnotatedPost> annotated;
  for (const AssignmentRow& row : load_assignments(ctx)) {
    AnnotatedPost p;
    p.id = row.id;
    auto rit = region_of.find(row.id);
    if (rit != region_of.end()) p.region = rit->second;
    // The map layers aggregate at the coarse topic level, so the leaf is
    // lifted to its root here.
    if (row.leaf_id) p.topic_id = hierarchy.root_of(*row.leaf_id);
    auto sit = sentiment_of.find(row.id);
    if (sit != sentiment_of.end()) p.sentiment = sit->second;
    annotated.push_back(std::move(p));
  }

  const RegionAggregation aggregation = aggregate_by_region(annotated);
  const StoryMaps maps = build_story_maps(aggregation, hierarchy, gazetteer);
  for (const auto& [layer, collection] : story_maps_to_geojson(maps, hierarchy)) {
    ctx.write_json("storymap_" + layer + ".geojson", collection);
  }
  ctx.finish();
}

void run_evolve(const RunConfig& config) {
  StageContext ctx(config, "evolve");
  const bool leaves_pool = config.evolution_pool == "leaves";
  ctx.add_artifact_input("keyphrases.jsonl");
  ctx.add_artifact_input("embeddings.json");
  if (leaves_pool) {
    ctx.add_artifact_input("hierarchy.json");
    ctx.add_artifact_input("assignments.jsonl");
  }
  ctx.set_config_subset(json{
      {"k", config.evolution.k},
      {"strategy", config.evolution.strategy},
      {"seed_rule", config.evolution.seed_rule},
      {"pool", config.evolution_pool},
      {"year_start", config.evolution.year_start
                         ? json(*config.evolution.year_start)
                         : json(nullptr)},
      {"year_end", config.evolution.year_end ? json(*config.evolution.year_end)
                                             : json(nullptr)},
  });
  ctx.declare_outputs({"evolution.json", "evolution.svg"});
  if (!ctx.need_run()) return ctx.skip();

  std::vector<LabelOccurrence> occurrences;
  std::map<std::string, EmbeddingVector> embeddings;

  if (leaves_pool) {
    const TopicHierarchy hierarchy = load_hierarchy(ctx);
    std::map<std::string, std::string> leaf_name;
    for (const TopicNode& n : hierarchy.nodes) {
      if (n.level == 3) leaf_name[n.id] = n.name;
    }
    const auto embed_name = name_embedder(config);
    for (const auto& [id, name] : leaf_name) {
      if (!embeddings.count(name)) embeddings[name] = embed_name(name);
    }
    for (const AssignmentRow& row : load_assignments(ctx)) {
      if (row.leaf_id) {
        occurrences.push_back({leaf_name.at(*row.leaf_id), row.created_at});
      }
    }
  } else {
    const EmbeddingTable table = load_embeddings(ctx);
    embeddings = table.as_map();
    for (const KeyphraseRow& row : load_keyphrase_rows(ctx)) {
      for (const ExtractedPhrase& p : row.phrases) {
        occurrences.push_back({p.canonical, row.created_at});
      }
    }
  }

  EvolutionGraph graph;
  if (!occurrences.empty()) {
    graph = build_evolution(occurrences, embeddings, config.evolution);
  }
  ctx.write_json("evolution.json", evolution_to_json(graph));
  ctx.write_text("evolution.svg", evolution_to_svg(graph));
  ctx.finish();
}

void run_report(const RunConfig& config) {
  StageContext ctx(config, "report");
  const std::vector<std::string> artifact_inputs = {
      "corpus_stats.json", "geocode_stats.json", "label_stats.json",
      "clusters.json",     "hierarchy.json",     "topics_stats.json",
      "sentiment_stats.json", "trend.json",      "evolution.json"};
  for (const std::string& name : artifact_inputs) ctx.add_artifact_input(name);
  ctx.set_config_subset(
      json{{"longtail_threshold", config.taxonomy.longtail_threshold}});
  ctx.declare_outputs({"report.json", "report.txt"});
  if (!ctx.need_run()) return ctx.skip();

  const json corpus_stats = read_json_file(ctx.out_path("corpus_stats.json"));
  const json geocode_stats = read_json_file(ctx.out_path("geocode_stats.json"));
  const json label_stats = read_json_file(ctx.out_path("label_stats.json"));
  const json clusters = read_json_file(ctx.out_path("clusters.json"));
  const json topics_stats = read_json_file(ctx.out_path("topics_stats.json"));
  const json sentiment_stats = read_json_file(ctx.out_path("sentiment_stats.json"));
  const json trend = read_json_file(ctx.out_path("trend.json"));
  const json evolution = read_json_file(ctx.out_path("evolution.json"));
  const TopicHierarchy hierarchy = load_hierarchy(ctx);

  json head = nullptr;
  bool is_longtail = false;
  if (!hierarchy.root_ids.empty()) {
    const LongtailStats lt =
        longtail_stats(hierarchy, config.taxonomy.longtail_threshold);
    head = json{{"id", lt.head_id},
                {"name", lt.head_name},
                {"share", lt.head_share}};
    is_longtail = lt.is_longtail;
  }

  const json& months = corpus_stats.at("posts_per_month");
  json month_range = nullptr;
  if (!months.empty()) {
    month_range = json{{"first", months.begin().key()},
                       {"last", std::prev(months.end()).key()}};
  }

  json report{
      {"posts", json{{"total", corpus_stats.at("total_posts")},
                     {"months", month_range},
                     {"filtered_out", corpus_stats.at("filtered_out")}}},
      {"geocode", geocode_stats},
      {"vocabulary", json{{"labels", label_stats.at("labels")},
                          {"occurrences", label_stats.at("phrase_occurrences")}}},
      {"clusters", json{{"count", clusters.at("cluster_count")},
                        {"noise", clusters.at("noise_count")}}},
      {"topics", json{{"roots", topics_stats.at("roots")},
                      {"leaves", topics_stats.at("leaves")},
                      {"unassigned_share", hierarchy.unassigned},
                      {"head", head},
                      {"is_longtail", is_longtail}}},
      {"sentiment", json{{"positive", sentiment_stats.at("positive")},
                         {"neutral", sentiment_stats.at("neutral")},
                         {"negative", sentiment_stats.at("negative")}}},
      {"trend", json{{"months", trend.at("months").size()}}},
      {"evolution", json{{"years", evolution.at("seed_chain").size()},
                         {"nodes", evolution.at("nodes").size()},
                         {"edges", evolution.at("edges").size()},
                         {"seed_chain", evolution.at("seed_chain")}}},
  };

  char buf[64];
  std::ostringstream text;
  text << "corpus: " << corpus_stats.at("total_posts").get<std::uint64_t>()
       << " posts";
  if (!month_range.is_null()) {
    text << " (" << month_range.at("first").get<std::string>() << " .. "
         << month_range.at("last").get<std::string>() << ")";
  }
  text << "\n";
  text << "geocoded: " << geocode_stats.at("matched").get<std::uint64_t>()
       << " matched, " << geocode_stats.at("unmatched").get<std::uint64_t>()
       << " unmatched\n";
  text << "vocabulary: " << label_stats.at("labels").get<std::uint64_t>()
       << " labels from "
       << label_stats.at("phrase_occurrences").get<std::uint64_t>()
       << " occurrences\n";
  text << "clusters: " << clusters.at("cluster_count").get<std::uint64_t>()
       << " (" << clusters.at("noise_count").get<std::uint64_t>()
       << " noise labels)\n";
  text << "topics: " << topics_stats.at("roots").get<std::uint64_t>()
       << " roots, " << topics_stats.at("leaves").get<std::uint64_t>()
       << " leaves";
  std::snprintf(buf, sizeof(buf), "%.4f", hierarchy.unassigned);
  text << ", unassigned share " << buf << "\n";
  if (!head.is_null()) {
    std::snprintf(buf, sizeof(buf), "%.4f", head.at("share").get<double>());
    text << "head topic: " << head.at("name").get<std::string>() << " (share "
         << buf << ", " << (is_longtail ? "long-tail" : "not long-tail")
         << ")\n";
  }
  text << "sentiment: " << sentiment_stats.at("positive").get<std::uint64_t>()
       << " positive, " << sentiment_stats.at("neutral").get<std::uint64_t>()
       << " neutral, " << sentiment_stats.at("negative").get<std::uint64_t>()
       << " negative\n";
  text << "evolution: " << evolution.at("seed_chain").size() << " years, "
       << evolution.at("nodes").size() << " nodes, "
       << evolution.at("edges").size() << " edges\n";

  ctx.write_json("report.json", report);
  ctx.write_text("report.txt", text.str());
  ctx.finish();
}

}  // namespace

// ---------------------------------------------------------------------------
// RunConfig
// ---------------------------------------------------------------------------

std::string RunConfig::resolve(const std::string& path) const {
  const fs::path p(path);
  if (p.is_absolute() || config_dir.empty()) return path;
  return (fs::path(config_dir) / p).string();
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  json j = json::parse(buf.str(), nullptr, false);
  if (j.is_discarded()) throw ConfigError("config " + path + ": invalid JSON");
  if (!j.is_object()) throw ConfigError("config " + path + ": not an object");

  RunConfig cfg;
  cfg.config_dir = fs::path(path).parent_path().string();

  check_keys(j, {"input", "out_dir", "gazetteer", "stoplist",
                 "lexicon_positive", "lexicon_negative", "lemma_exceptions",
                 "filter", "keyphrase", "embedding_dim", "dbscan", "taxonomy",
                 "wordcloud_k", "evolution", "remote"},
             "top level");

  const json* input = opt_member(j, "input");
  if (!input) throw ConfigError("config: missing required key \"input\"");
  cfg.input = want_string(*input, "input");

  if (const json* v = opt_member(j, "out_dir")) cfg.out_dir = want_string(*v, "out_dir");
  if (const json* v = opt_member(j, "gazetteer")) cfg.gazetteer = want_string(*v, "gazetteer");
  if (const json* v = opt_member(j, "stoplist")) cfg.stoplist = want_string(*v, "stoplist");
  if (const json* v = opt_member(j, "lexicon_positive")) {
    cfg.lexicon_positive = want_string(*v, "lexicon_positive");
  }
  if (const json* v = opt_member(j, "lexicon_negative")) {
    cfg.lexicon_negative = want_string(*v, "lexicon_negative");
  }
  if (const json* v = opt_member(j, "lemma_exceptions")) {
    cfg.lemma_exceptions = want_string(*v, "lemma_exceptions");
  }

  const json* filter = opt_member(j, "filter");
  if (!filter || !filter->is_object()) {
    throw ConfigError("config: missing required object \"filter\"");
  }
  check_keys(*filter, {"hashtags", "date_start", "date_end", "langs"}, "filter");
  const json* tags = opt_member(*filter, "hashtags");
  const json* date_start = opt_member(*filter, "date_start");
  const json* date_end = opt_member(*filter, "date_end");
  const json* langs = opt_member(*filter, "langs");
  if (!tags || !date_start || !date_end || !langs) {
    throw ConfigError(
        "config: filter needs hashtags, date_start, date_end, langs");
  }
  for (const std::string& tag : want_string_set(*tags, "filter.hashtags")) {
    cfg.filter.hashtag_whitelist.insert(normalize_hashtag(tag));
  }
  cfg.filter.date_start = parse_filter_date(
      want_string(*date_start, "filter.date_start"), false, "filter.date_start");
  cfg.filter.date_end = parse_filter_date(
      want_string(*date_end, "filter.date_end"), true, "filter.date_end");
  for (const std::string& lang : want_string_set(*langs, "filter.langs")) {
    cfg.filter.lang_whitelist.insert(lang_primary_subtag(lang));
  }

  if (const json* kp = opt_member(j, "keyphrase")) {
    check_keys(*kp, {"num_candidates", "ngram_max"}, "keyphrase");
    if (const json* v = opt_member(*kp, "num_candidates")) {
      cfg.keyphrase.num_candidates = want_size(*v, "keyphrase.num_candidates");
    }
    if (const json* v = opt_member(*kp, "ngram_max")) {
      cfg.keyphrase.ngram_max = want_size(*v, "keyphrase.ngram_max");
    }
  }

  if (const json* v = opt_member(j, "embedding_dim")) {
    cfg.embedding_dim = want_size(*v, "embedding_dim");
    if (cfg.embedding_dim == 0) {
      throw ConfigError("config: embedding_dim must be positive");
    }
  }

  if (const json* db = opt_member(j, "dbscan")) {
    check_keys(*db, {"eps", "min_pts"}, "dbscan");
    if (const json* v = opt_member(*db, "eps")) {
      cfg.dbscan.eps = want_number(*v, "dbscan.eps");
    }
    if (const json* v = opt_member(*db, "min_pts")) {
      cfg.dbscan.min_pts = want_size(*v, "dbscan.min_pts");
    }
  }

  if (const json* tx = opt_member(j, "taxonomy")) {
    check_keys(*tx, {"n_top", "n_leaves", "mid_layer", "longtail_threshold"},
               "taxonomy");
    if (const json* v = opt_member(*tx, "n_top")) {
      cfg.taxonomy.n_top = want_size(*v, "taxonomy.n_top");
    }
    if (const json* v = opt_member(*tx, "n_leaves")) {
      cfg.taxonomy.n_leaves = want_size(*v, "taxonomy.n_leaves");
    }
    if (const json* v = opt_member(*tx, "mid_layer")) {
      cfg.taxonomy.mid_layer = want_bool(*v, "taxonomy.mid_layer");
    }
    if (const json* v = opt_member(*tx, "longtail_threshold")) {
      cfg.taxonomy.longtail_threshold = want_number(*v, "taxonomy.longtail_threshold");
    }
  }

  if (const json* v = opt_member(j, "wordcloud_k")) {
    cfg.wordcloud_k = want_size(*v, "wordcloud_k");
  }

  if (const json* ev = opt_member(j, "evolution")) {
    check_keys(*ev, {"k", "strategy", "seed_rule", "pool", "year_start", "year_end"},
               "evolution");
    if (const json* v = opt_member(*ev, "k")) {
      cfg.evolution.k = want_size(*v, "evolution.k");
    }
    if (const json* v = opt_member(*ev, "strategy")) {
      cfg.evolution.strategy = want_string(*v, "evolution.strategy");
    }
    if (const json* v = opt_member(*ev, "seed_rule")) {
      cfg.evolution.seed_rule = want_string(*v, "evolution.seed_rule");
    }
    if (const json* v = opt_member(*ev, "pool")) {
      cfg.evolution_pool = want_string(*v, "evolution.pool");
    }
    if (const json* v = opt_member(*ev, "year_start")) {
      cfg.evolution.year_start = static_cast<int>(want_int(*v, "evolution.year_start"));
    }
    if (const json* v = opt_member(*ev, "year_end")) {
      cfg.evolution.year_end = static_cast<int>(want_int(*v, "evolution.year_end"));
    }
  }

  if (const json* rm = opt_member(j, "remote")) {
    check_keys(*rm, {"keyphrases", "embeddings", "hierarchy", "nli", "sentiment",
                     "timeout_ms", "max_retries", "backoff_ms", "max_in_flight",
                     "nli_template"},
               "remote");
    auto url = [&](const char* key) -> std::optional<std::string> {
      const json* v = opt_member(*rm, key);
      if (!v) return std::nullopt;
      return want_string(*v, std::string("remote.") + key);
    };
    cfg.remote.keyphrases = url("keyphrases");
    cfg.remote.embeddings = url("embeddings");
    cfg.remote.hierarchy = url("hierarchy");
    cfg.remote.nli = url("nli");
    cfg.remote.sentiment = url("sentiment");
    if (const json* v = opt_member(*rm, "timeout_ms")) {
      cfg.remote.policy.timeout_ms = static_cast<int>(want_int(*v, "remote.timeout_ms"));
    }
    if (const json* v = opt_member(*rm, "max_retries")) {
      cfg.remote.policy.max_retries = static_cast<int>(want_int(*v, "remote.max_retries"));
    }
    if (const json* v = opt_member(*rm, "backoff_ms")) {
      cfg.remote.policy.backoff_ms = static_cast<int>(want_int(*v, "remote.backoff_ms"));
    }
    if (const json* v = opt_member(*rm, "max_in_flight")) {
      cfg.remote.policy.max_in_flight =
          static_cast<int>(want_int(*v, "remote.max_in_flight"));
    }
    if (const json* v = opt_member(*rm, "nli_template")) {
      cfg.remote.nli_template = want_string(*v, "remote.nli_template");
      if (cfg.remote.nli_template.find("{}") == std::string::npos) {
        throw ConfigError("config: remote.nli_template needs a {} placeholder");
      }
    }
  }

  cfg.filter.validate();
  cfg.keyphrase.validate();
  cfg.dbscan.validate();
  cfg.taxonomy.validate();
  cfg.evolution.validate();
  cfg.remote.policy.validate();
  if (cfg.evolution_pool != "labels" && cfg.evolution_pool != "leaves") {
    throw ConfigError("config: evolution.pool must be labels or leaves");
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

Manifest Manifest::load(const std::string& out_dir) {
  Manifest m;
  const std::string path = (fs::path(out_dir) / "manifest.json").string();
  if (!fs::exists(path)) return m;
  const json j = read_json_file(path);
  if (!j.is_object() || !j.contains("stages") || !j.at("stages").is_object()) {
    throw DataError(path + ": not a manifest");
  }
  for (auto it = j.at("stages").begin(); it != j.at("stages").end(); ++it) {
    StageRecord rec;
    rec.inputs = it.value().at("inputs").get<std::map<std::string, std::string>>();
    rec.config_hash = it.value().at("config_hash").get<std::string>();
    rec.outputs = it.value().at("outputs").get<std::map<std::string, std::string>>();
    m.stages_[it.key()] = std::move(rec);
  }
  return m;
}

void Manifest::save(const std::string& out_dir) const {
  json stages = json::object();
  for (const auto& [name, rec] : stages_) {
    stages[name] = json{{"inputs", rec.inputs},
                        {"config_hash", rec.config_hash},
                        {"outputs", rec.outputs}};
  }
  fs::create_directories(out_dir);
  write_json_atomic((fs::path(out_dir) / "manifest.json").string(),
                    json{{"stages", std::move(stages)}});
}

const StageRecord* Manifest::stage(const std::string& name) const {
  auto it = stages_.find(name);
  return it == stages_.end() ? nullptr : &it->second;
}

void Manifest::set_stage(const std::string& name, StageRecord record) {
  stages_[name] = std::move(record);
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> kNames = [] {
    std::vector<std::string> names;
    for (const StageInfo& s : stage_table()) names.push_back(s.name);
    return names;
  }();
  return kNames;
}

void run_stage(const std::string& name, const RunConfig& config) {
  if (name == "ingest") return run_ingest(config);
  if (name == "geocode") return run_geocode(config);
  if (name == "label") return run_label(config);
  if (name == "embed") return run_embed(config);
  if (name == "cluster") return run_cluster(config);
  if (name == "topics") return run_topics(config);
  if (name == "sentiment") return run_sentiment(config);
  if (name == "trend") return run_trend(config);
  if (name == "storymap") return run_storymap(config);
  if (name == "evolve") return run_evolve(config);
  if (name == "report") return run_report(config);
  throw ConfigError("unknown stage: " + name);
}

void run_all(const RunConfig& config) {
  for (const std::string& name : stage_names()) run_stage(name, config);
}

}  // namespace atlas
