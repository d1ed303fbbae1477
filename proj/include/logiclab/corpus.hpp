#pragma once

#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "logiclab/semantics.hpp"

#include <nlohmann/json.hpp>

namespace logiclab {

using Json = nlohmann::ordered_json;

struct CorpusConfig {
  Variant variant = Variant::Lt;
  uint64_t n_sequences = 1;
  int max_sequence_tokens = 248;  // applies to the whole `a=b` line
  bool reflexivity = false;
  bool symmetry = false;
  uint64_t seed = 0;
  std::optional<int> per_sentence_cap;

  void validate() const;
  Json to_json() const;
};

struct PairRecord {
  std::string a;
  std::string b;
  bool equivalent;
  TruthValue denot_a;
  TruthValue denot_b;
  Variant variant;

  Json to_json() const;
  static PairRecord from_json(const Json& j);
};

struct SplitSpec {
  uint64_t train_pairs = 0;
  uint64_t valid_pairs = 0;
  uint64_t test_pairs = 0;
};

// Two independently sampled sentences with equal denotation under `variant`
// whose combined `a=b` length fits budget_tokens. Sentences already present
// in `used` are rejected and accepted ones are inserted (sampling without
// replacement across the whole corpus).
std::pair<SynTree, SynTree> sample_equal_pair(const Pcfg& pcfg, Variant variant, Rng& rng,
                                              int budget_tokens,
                                              std::optional<int> per_sentence_cap,
                                              std::unordered_set<std::string>& used,
                                              int rejection_budget = 100000);

// Writes n_sequences `a=b` lines to out_path, applying reflexivity/symmetry
// closure per the config, and returns the manifest (also written next to the
// corpus as <out_path>.manifest.json).
Json build_pretraining_corpus(const CorpusConfig& config, const std::string& out_path);

// Writes train/valid/test PairRecord files (JSON lines) under out_dir with
// balanced labels and sentence-level disjointness across splits and against
// `exclude` (e.g. sentences of a pretraining corpus).
Json build_probe_dataset(const CorpusConfig& config, const SplitSpec& split,
                         const std::string& out_dir,
                         const std::unordered_set<std::string>& exclude = {});

std::vector<PairRecord> read_pair_records(const std::string& path);

// Sentence strings appearing in a pretraining corpus file (both sides).
std::unordered_set<std::string> corpus_sentences(const std::string& path);

}  // namespace logiclab
