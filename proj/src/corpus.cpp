#include "logiclab/corpus.hpp"

#include <filesystem>
#include <fstream>

#include "logiclab/digest.hpp"

namespace logiclab {

void CorpusConfig::validate() const {
  if (n_sequences < 1) throw std::invalid_argument("n_sequences must be >= 1");
  if (max_sequence_tokens < 9)
    throw std::invalid_argument("max_sequence_tokens must be >= 9 (shortest a=b)");
  if (per_sentence_cap && *per_sentence_cap < 4)
    throw std::invalid_argument("per_sentence_cap must be >= 4");
}

Json CorpusConfig::to_json() const {
  Json j;
  j["variant"] = variant_name(variant);
  j["n_sequences"] = n_sequences;
  j["max_sequence_tokens"] = max_sequence_tokens;
  j["reflexivity"] = reflexivity;
  j["symmetry"] = symmetry;
  j["seed"] = seed;
  if (per_sentence_cap)
    j["per_sentence_cap"] = *per_sentence_cap;
  else
    j["per_sentence_cap"] = nullptr;
  return j;
}

Json PairRecord::to_json() const {
  Json j;
  j["a"] = a;
  j["b"] = b;
  j["label"] = equivalent ? "equivalent" : "non_equivalent";
  j["denot_a"] = std::string(1, truth_char(denot_a));
  j["denot_b"] = std::string(1, truth_char(denot_b));
  j["variant"] = variant_name(variant);
  return j;
}

PairRecord PairRecord::from_json(const Json& j) {
  PairRecord r;
  r.a = j.at("a").get<std::string>();
  r.b = j.at("b").get<std::string>();
  r.equivalent = j.at("label").get<std::string>() == "equivalent";
  r.denot_a = truth(j.at("denot_a").get<std::string>() == "T");
  r.denot_b = truth(j.at("denot_b").get<std::string>() == "T");
  r.variant = j.at("variant").get<std::string>() == "lt" ? Variant::Lt : Variant::Ln;
  return r;
}

namespace {

// A fresh sentence (not in `used`) of at most cap tokens.
SynTree sample_fresh(const Pcfg& pcfg, Rng& rng, int cap,
                     const std::unordered_set<std::string>& used, int budget) {
  for (int i = 0; i < budget; ++i) {
    SynTree t = sample_sentence(pcfg, rng, cap, budget);
    if (!used.contains(t.text())) return t;
  }
  throw std::runtime_error("sample_fresh: could not find an unused sentence");
}

}  // namespace

std::pair<SynTree, SynTree> sample_equal_pair(const Pcfg& pcfg, Variant variant, Rng& rng,
                                              int budget_tokens,
                                              std::optional<int> per_sentence_cap,
                                              std::unordered_set<std::string>& used,
                                              int rejection_budget) {
  if (budget_tokens < 9) throw std::invalid_argument("budget_tokens must be >= 9");
  int cap = per_sentence_cap.value_or(budget_tokens);
  for (int attempt = 0; attempt < rejection_budget; ++attempt) {
    // First sentence must leave room for `=` and a shortest partner.
    int cap_a = std::min(cap, budget_tokens - 5);
    SynTree a = sample_fresh(pcfg, rng, cap_a, used, rejection_budget);
    TruthValue va = eval(a, variant);
    int cap_b = std::min(cap, budget_tokens - 1 - a.num_tokens());
    if (cap_b < 4) continue;
    std::string a_text = a.text();
    // Denotations match with probability around 1/2, so a short inner loop
    // suffices; an exhausted loop resamples the first sentence.
    for (int inner = 0; inner < 64; ++inner) {
      SynTree b = sample_sentence(pcfg, rng, cap_b, rejection_budget);
      std::string b_text = b.text();
      if (b_text == a_text || used.contains(b_text)) continue;
      if (eval(b, variant) != va) continue;
      used.insert(std::move(a_text));
      used.insert(std::move(b_text));
      return {std::move(a), std::move(b)};
    }
  }
  throw std::runtime_error("sample_equal_pair: rejection budget exhausted");
}

Json build_pretraining_corpus(const CorpusConfig& config, const std::string& out_path) {
  config.validate();
  Rng rng(config.seed);
  Pcfg pcfg = default_pcfg(config.variant);
  std::unordered_set<std::string> used;

  std::string buffer;
  uint64_t emitted = 0, base = 0, sym = 0, refl = 0, padding = 0;
  auto emit = [&](const std::string& lhs, const std::string& rhs, uint64_t& counter) {
    buffer += lhs;
    buffer += '=';
    buffer += rhs;
    buffer += '\n';
    emitted++;
    counter++;
  };

  // Lines per fully closed group: base pair plus its closure.
  uint64_t group = 1 + (config.symmetry ? 1 : 0) + (config.reflexivity ? 2 : 0);
  int cap = config.per_sentence_cap.value_or(config.max_sequence_tokens / 2 - 1);
  while (emitted < config.n_sequences) {
    if (config.n_sequences - emitted < group) {
      // Not enough room for a whole group. A lone self-pair keeps every
      // closure property intact, so pad with those.
      SynTree t = sample_fresh(pcfg, rng, std::min(cap, (config.max_sequence_tokens - 1) / 2),
                               used, 100000);
      used.insert(t.text());
      emit(t.text(), t.text(), padding);
      continue;
    }
    auto [ta, tb] = sample_equal_pair(pcfg, config.variant, rng, config.max_sequence_tokens,
                                      config.per_sentence_cap, used);
    std::string a = ta.text(), b = tb.text();
    emit(a, b, base);
    if (config.symmetry) emit(b, a, sym);
    if (config.reflexivity) {
      emit(a, a, refl);
      emit(b, b, refl);
    }
  }

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << buffer;
  out.close();

  Json manifest;
  manifest["config"] = config.to_json();
  manifest["lines"] = emitted;
  manifest["base_lines"] = base;
  manifest["symmetry_lines"] = sym;
  manifest["reflexivity_lines"] = refl;
  manifest["padding_lines"] = padding;
  manifest["sha256"] = sha256_hex(buffer);
  std::ofstream mf(out_path + ".manifest.json");
  mf << manifest.dump(2) << "\n";
  return manifest;
}

Json build_probe_dataset(const CorpusConfig& config, const SplitSpec& split,
                         const std::string& out_dir,
                         const std::unordered_set<std::string>& exclude) {
  config.validate();
  std::filesystem::create_directories(out_dir);
  Rng rng(config.seed);
  Pcfg pcfg = default_pcfg(config.variant);
  std::unordered_set<std::string> used = exclude;
  int cap = config.per_sentence_cap.value_or(config.max_sequence_tokens);

  Json manifest;
  manifest["config"] = config.to_json();
  const std::pair<const char*, uint64_t> splits[] = {
      {"train", split.train_pairs}, {"valid", split.valid_pairs}, {"test", split.test_pairs}};

  for (auto& [name, n_pairs] : splits) {
    std::string buffer;
    uint64_t n_equivalent = 0;
    for (uint64_t i = 0; i < n_pairs; ++i) {
      bool want_equivalent = i % 2 == 0;  // balanced 50/50 by construction
      PairRecord rec;
      rec.variant = config.variant;
      if (want_equivalent) {
        auto [ta, tb] = sample_equal_pair(pcfg, config.variant, rng,
                                          config.max_sequence_tokens,
                                          config.per_sentence_cap, used);
        rec.a = ta.text();
        rec.b = tb.text();
        rec.denot_a = rec.denot_b = eval(ta, config.variant);
      } else {
        SynTree ta = sample_fresh(pcfg, rng, cap, used, 100000);
        used.insert(ta.text());
        TruthValue va = eval(ta, config.variant);
        for (;;) {
          SynTree tb = sample_fresh(pcfg, rng, cap, used, 100000);
          TruthValue vb = eval(tb, config.variant);
          if (vb == va) continue;
          used.insert(tb.text());
          rec.a = ta.text();
          rec.b = tb.text();
          rec.denot_a = va;
          rec.denot_b = vb;
          break;
        }
      }
      rec.equivalent = rec.denot_a == rec.denot_b;
      if (rec.equivalent) n_equivalent++;
      buffer += rec.to_json().dump();
      buffer += '\n';
    }
    std::string path = out_dir + "/" + name + ".jsonl";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << buffer;
    Json split_info;
    split_info["pairs"] = n_pairs;
    split_info["equivalent"] = n_equivalent;
    split_info["non_equivalent"] = n_pairs - n_equivalent;
    split_info["sha256"] = sha256_hex(buffer);
    manifest[name] = split_info;
  }
  std::ofstream mf(out_dir + "/manifest.json");
  mf << manifest.dump(2) << "\n";
  return manifest;
}

std::vector<PairRecord> read_pair_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<PairRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(PairRecord::from_json(Json::parse(line)));
  }
  return out;
}

std::unordered_set<std::string> corpus_sentences(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::unordered_set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    out.insert(line.substr(0, eq));
    out.insert(line.substr(eq + 1));
  }
  return out;
}

}  // namespace logiclab
