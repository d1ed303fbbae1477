#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "logiclab/corpus.hpp"
#include "logiclab/digest.hpp"
#include "logiclab/validate.hpp"

using namespace logiclab;
namespace fs = std::filesystem;

namespace {

fs::path tmpdir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("logiclab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> lines_of(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("corpus config validation") {
  CorpusConfig cfg;
  cfg.n_sequences = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.n_sequences = 1;
  cfg.max_sequence_tokens = 5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.max_sequence_tokens = 248;
  cfg.per_sentence_cap = 2;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.per_sentence_cap = 32;
  cfg.validate();
}

TEST_CASE("all four closure configurations validate cleanly") {
  fs::path dir = tmpdir("closure");
  int idx = 0;
  for (bool refl : {false, true})
    for (bool sym : {false, true}) {
      CorpusConfig cfg;
      cfg.variant = Variant::Lt;
      cfg.n_sequences = 400;
      cfg.reflexivity = refl;
      cfg.symmetry = sym;
      cfg.per_sentence_cap = 24;
      cfg.seed = 100 + idx;
      std::string path = (dir / ("corpus" + std::to_string(idx++) + ".txt")).string();
      Json manifest = build_pretraining_corpus(cfg, path);
      CHECK(manifest["lines"].get<uint64_t>() == 400);
      CHECK(lines_of(path).size() == 400);
      ValidationReport report = validate_corpus(path, Variant::Lt, refl, sym);
      CHECK(report.ok());
      CHECK(report.lines_checked == 400);
      // Manifest digest matches the bytes on disk.
      CHECK(manifest["sha256"].get<std::string>() == sha256_file(path));
    }
}

TEST_CASE("corpus respects token caps and deduplicates sentences") {
  fs::path dir = tmpdir("caps");
  CorpusConfig cfg;
  cfg.n_sequences = 300;
  cfg.per_sentence_cap = 16;
  cfg.max_sequence_tokens = 40;
  cfg.seed = 5;
  std::string path = (dir / "c.txt").string();
  build_pretraining_corpus(cfg, path);
  std::set<std::string> seen;
  for (auto& line : lines_of(path)) {
    CHECK(line.size() <= 40);
    auto eq = line.find('=');
    std::string a = line.substr(0, eq), b = line.substr(eq + 1);
    CHECK(a.size() <= 16);
    CHECK(b.size() <= 16);
    // Without closure every sentence occurs exactly once across the corpus.
    CHECK_FALSE(seen.contains(a));
    CHECK_FALSE(seen.contains(b));
    seen.insert(a);
    seen.insert(b);
  }
}

TEST_CASE("corpus generation is seed-deterministic") {
  fs::path dir = tmpdir("determinism");
  CorpusConfig cfg;
  cfg.n_sequences = 100;
  cfg.seed = 9;
  cfg.per_sentence_cap = 20;
  Json m1 = build_pretraining_corpus(cfg, (dir / "a.txt").string());
  Json m2 = build_pretraining_corpus(cfg, (dir / "b.txt").string());
  cfg.seed = 10;
  Json m3 = build_pretraining_corpus(cfg, (dir / "c.txt").string());
  CHECK(m1["sha256"] == m2["sha256"]);
  CHECK(m1["sha256"] != m3["sha256"]);
}

TEST_CASE("pair record serialization round-trips with fixed key order") {
  PairRecord rec;
  rec.a = "(T&F)";
  rec.b = "(F|F)";
  rec.equivalent = true;
  rec.denot_a = rec.denot_b = TruthValue::F;
  rec.variant = Variant::Lt;
  Json j = rec.to_json();
  CHECK(j.dump() ==
        R"json({"a":"(T&F)","b":"(F|F)","label":"equivalent","denot_a":"F","denot_b":"F","variant":"lt"})json");
  PairRecord back = PairRecord::from_json(j);
  CHECK(back.a == rec.a);
  CHECK(back.b == rec.b);
  CHECK(back.equivalent == rec.equivalent);
  CHECK(back.denot_a == rec.denot_a);
  CHECK(back.variant == rec.variant);
}

TEST_CASE("probe dataset is balanced, disjoint, and respects exclusions") {
  fs::path dir = tmpdir("probe");
  CorpusConfig ccfg;
  ccfg.n_sequences = 200;
  ccfg.per_sentence_cap = 20;
  ccfg.seed = 1;
  std::string corpus_path = (dir / "corpus.txt").string();
  build_pretraining_corpus(ccfg, corpus_path);
  auto exclude = corpus_sentences(corpus_path);

  CorpusConfig pcfg;
  pcfg.n_sequences = 1;
  pcfg.per_sentence_cap = 20;
  pcfg.seed = 2;
  SplitSpec split{200, 60, 60};
  Json manifest = build_probe_dataset(pcfg, split, (dir / "splits").string(), exclude);
  CHECK(manifest["train"]["pairs"].get<uint64_t>() == 200);
  CHECK(manifest["train"]["equivalent"].get<uint64_t>() == 100);
  CHECK(manifest["valid"]["non_equivalent"].get<uint64_t>() == 30);

  CHECK(validate_split_disjointness((dir / "splits").string()).ok());

  std::set<std::string> probe_sentences;
  for (const char* name : {"train", "valid", "test"}) {
    auto records = read_pair_records((dir / "splits" / (std::string(name) + ".jsonl")).string());
    for (auto& rec : records) {
      CHECK(rec.equivalent == (rec.denot_a == rec.denot_b));
      CHECK_FALSE(exclude.contains(rec.a));
      CHECK_FALSE(exclude.contains(rec.b));
      // Sentence-level disjointness across splits.
      CHECK_FALSE(probe_sentences.contains(rec.a));
      CHECK_FALSE(probe_sentences.contains(rec.b));
      probe_sentences.insert(rec.a);
      probe_sentences.insert(rec.b);
    }
    CHECK(validate_pair_file((dir / "splits" / (std::string(name) + ".jsonl")).string()).ok());
  }
}

TEST_CASE("validator flags corrupt and mislabeled fixtures") {
  fs::path dir = tmpdir("fixtures");

  std::ofstream((dir / "corrupt.txt").string()) << "(T&F)=(F|F)\n(T=(F|F)\n";
  ValidationReport r1 = validate_corpus((dir / "corrupt.txt").string(), Variant::Lt, false, false);
  REQUIRE(r1.violations.size() == 1);
  CHECK(r1.violations[0].line == 2);
  CHECK(r1.violations[0].kind == "parse");

  // Symmetric corpus with one mirror removed.
  std::ofstream((dir / "sym.txt").string())
      << "(T&F)=(F|F)\n(F|F)=(T&F)\n(!T)=(F&F)\n";
  ValidationReport r2 = validate_corpus((dir / "sym.txt").string(), Variant::Lt, false, true);
  REQUIRE(r2.violations.size() == 1);
  CHECK(r2.violations[0].kind == "closure");

  // Sides with different denotations.
  std::ofstream((dir / "denot.txt").string()) << "(!T)=(!F)\n";
  ValidationReport r3 = validate_corpus((dir / "denot.txt").string(), Variant::Lt, false, false);
  REQUIRE(r3.violations.size() == 1);
  CHECK(r3.violations[0].kind == "denotation");

  // Reflexivity closure requires s=s for every sentence that appears.
  std::ofstream((dir / "refl.txt").string()) << "(T&F)=(F|F)\n(T&F)=(T&F)\n";
  ValidationReport r4 = validate_corpus((dir / "refl.txt").string(), Variant::Lt, true, false);
  REQUIRE(r4.violations.size() == 1);
  CHECK(r4.violations[0].message.find("(F|F)") != std::string::npos);

  // A mislabeled pair record.
  PairRecord rec;
  rec.a = "(!T)";
  rec.b = "(!F)";
  rec.equivalent = true;  // wrong: F vs T
  rec.denot_a = TruthValue::F;
  rec.denot_b = TruthValue::T;
  rec.variant = Variant::Lt;
  std::ofstream((dir / "pairs.jsonl").string()) << rec.to_json().dump() << "\n";
  ValidationReport r5 = validate_pair_file((dir / "pairs.jsonl").string());
  REQUIRE(r5.violations.size() == 1);
  CHECK(r5.violations[0].kind == "denotation");
}

TEST_CASE("equal-pair sampling respects budget and novelty") {
  Pcfg pcfg = default_pcfg(Variant::Lt);
  Rng rng(3);
  std::unordered_set<std::string> used;
  for (int i = 0; i < 50; ++i) {
    auto [a, b] = sample_equal_pair(pcfg, Variant::Lt, rng, 60, 25, used);
    CHECK(assertion_oracle(a, b, Variant::Lt) == 1);
    CHECK(a.num_tokens() <= 25);
    CHECK(b.num_tokens() <= 25);
    CHECK(a.num_tokens() + 1 + b.num_tokens() <= 60);
    CHECK(a.text() != b.text());
    CHECK(used.contains(a.text()));
    CHECK(used.contains(b.text()));
  }
  CHECK(used.size() == 100);
  CHECK_THROWS_AS(
      [&] {
        std::unordered_set<std::string> u2;
        Rng r2(1);
        // Budget 9 only fits (!T)=(!F) variants, which never match in value.
        sample_equal_pair(pcfg, Variant::Lt, r2, 9, std::nullopt, u2, 200);
      }(),
      std::runtime_error);
}
