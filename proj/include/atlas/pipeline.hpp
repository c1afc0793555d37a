#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "atlas/clustering.hpp"
#include "atlas/corpus.hpp"
#include "atlas/labeling.hpp"
#include "atlas/narrative.hpp"
#include "atlas/remote.hpp"
#include "atlas/taxonomy.hpp"

namespace atlas {

struct RemoteConfig {
  // Base URLs per provider; absent means the builtin implementation.
  std::optional<std::string> keyphrases;
  std::optional<std::string> embeddings;
  std::optional<std::string> hierarchy;
  std::optional<std::string> nli;
  std::optional<std::string> sentiment;
  RemotePolicy policy;
  std::string nli_template = "This text is about {}.";
};

// The single validated configuration every stage runs from. Unknown keys in
// the config file are rejected; relative paths resolve against the config
// file's directory, so a config travels with its data files.
struct RunConfig {
  std::string config_dir;
  std::string input;
  std::string out_dir = "out";
  std::string gazetteer = "gazetteer.tsv";
  std::string stoplist = "stoplist.txt";
  std::string lexicon_positive = "lexicon_positive.txt";
  std::string lexicon_negative = "lexicon_negative.txt";
  std::string lemma_exceptions = "lemma_exceptions.txt";
  CorpusFilter filter;
  KeyphraseParams keyphrase;     // stoplist set stays empty; loaded per run
  std::size_t embedding_dim = 384;
  DbscanParams dbscan;
  TaxonomyParams taxonomy;
  std::size_t wordcloud_k = 50;
  EvolutionParams evolution;
  std::string evolution_pool = "labels";  // or "leaves"
  RemoteConfig remote;

  static RunConfig load(const std::string& path);

  // Joins a config-relative path; absolute paths pass through.
  std::string resolve(const std::string& path) const;
};

struct StageRecord {
  std::map<std::string, std::string> inputs;   // path key -> fnv1a64 hex
  std::string config_hash;
  std::map<std::string, std::string> outputs;  // out_dir-relative -> hex
};

// Stage bookkeeping persisted as <out_dir>/manifest.json. The file contains
// only path keys and content hashes, so identical runs write identical
// bytes.
class Manifest {
 public:
  static Manifest load(const std::string& out_dir);
  void save(const std::string& out_dir) const;

  const StageRecord* stage(const std::string& name) const;
  void set_stage(const std::string& name, StageRecord record);

 private:
  std::map<std::string, StageRecord> stages_;
};

// The eleven stages in dependency order.
const std::vector<std::string>& stage_names();

// Runs one stage: checks upstream artifacts via the manifest (missing
// dependency -> DependencyError "missing: <stage>"; artifact bytes that no
// longer match their recorded hash -> DataError suggesting a re-run), skips
// the body when inputs, config, and outputs all match the manifest, and
// otherwise writes outputs atomically and updates the manifest.
void run_stage(const std::string& name, const RunConfig& config);

void run_all(const RunConfig& config);

}  // namespace atlas
