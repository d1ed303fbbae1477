#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unordered_set>

#include "logiclab/directeval.hpp"
#include "logiclab/probe.hpp"

using namespace logiclab;

namespace {

// Synthetic encoder: every layer is noise except where the truth value of
// the sentence is planted as +/-1 in coordinate 0. `signal_token` < 0 plants
// it at every token; otherwise only there, with a constant marker in
// coordinate 1 so pooling can find the token.
EncodeFn planted_encoder(int d, int n_layers, int signal_layer, int signal_token,
                         float noise, float layer0_noise = 0.0f) {
  return [=](const std::string& s) {
    float sign = eval_lt(parse(s)) == TruthValue::T ? 1.0f : -1.0f;
    Rng rng(std::hash<std::string>{}(s));
    int n = int(s.size()) + 2;
    std::vector<Eigen::MatrixXf> layers;
    for (int l = 0; l <= n_layers; ++l) {
      float amp = (l == 0 && layer0_noise > 0) ? layer0_noise : noise;
      Eigen::MatrixXf m(n, d);
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = amp * float(rng.normal());
      if (l == signal_layer) {
        if (signal_token < 0) {
          m.col(0).array() += sign;
        } else {
          m(signal_token, 0) += sign;
          m(signal_token, 1) += 1.0f;
        }
      }
      layers.push_back(m);
    }
    return layers;
  };
}

// Balanced labeled pairs over distinct short sentences.
std::vector<PairRecord> make_pairs(int n, uint64_t seed) {
  Pcfg pcfg = default_pcfg(Variant::Lt);
  Rng rng(seed);
  std::vector<PairRecord> out;
  while (int(out.size()) < n) {
    bool want_equal = out.size() % 2 == 0;
    SynTree a = sample_sentence(pcfg, rng, 14);
    SynTree b = sample_sentence(pcfg, rng, 14);
    if (a.text() == b.text()) continue;
    if ((eval_lt(a) == eval_lt(b)) != want_equal) continue;
    PairRecord rec;
    rec.a = a.text();
    rec.b = b.text();
    rec.denot_a = eval_lt(a);
    rec.denot_b = eval_lt(b);
    rec.equivalent = want_equal;
    rec.variant = Variant::Lt;
    out.push_back(rec);
  }
  return out;
}

std::vector<std::string> sample_sentences(int n, uint64_t seed, int max_tokens = 14) {
  Pcfg pcfg = default_pcfg(Variant::Lt);
  Rng rng(seed);
  std::unordered_set<std::string> seen;
  std::vector<std::string> out;
  while (int(out.size()) < n) {
    std::string s = sample_sentence(pcfg, rng, max_tokens).text();
    if (seen.insert(s).second) out.push_back(s);
  }
  return out;
}

ProbeConfig fast_probe_config() {
  ProbeConfig cfg;
  cfg.lr = 5e-3;
  cfg.epochs = 40;
  cfg.batch_size = 16;
  cfg.warmup_steps = 20;
  cfg.seed = 0;
  return cfg;
}

}  // namespace

TEST_CASE("probe recovers a linearly separable planted representation") {
  EncodeFn enc = planted_encoder(8, 1, 1, -1, 0.1f);
  auto train = make_pairs(200, 11);
  auto valid = make_pairs(60, 12);
  ProbeMetrics metrics;
  BilinearProbe probe =
      train_probe_fn(enc, Arch::ALM, 8, 1, train, valid, fast_probe_config(), &metrics);
  EvalBreakdown ev = eval_probe_fn(enc, probe, make_pairs(100, 13));
  CHECK(ev.overall >= 0.99);
  CHECK(ev.n == 100);
  CHECK(ev.n_equivalent == 50);
  CHECK(ev.n_non_equivalent == 50);
  CHECK(metrics.best_valid_accuracy >= 0.99);
  CHECK(metrics.best_epoch >= 0);
  CHECK(int(metrics.valid_accuracy_per_epoch.size()) == 40);
}

TEST_CASE("hand-built probe on a noiseless planted encoder is an oracle") {
  EncodeFn enc = planted_encoder(2, 1, 1, -1, 0.0f);
  BilinearProbe probe;
  probe.arch = Arch::ALM;
  probe.strategy.pooling = Pooling::MinusAttn;
  probe.w = Eigen::MatrixXf::Zero(2, 2);
  probe.w(0, 0) = 10.0f;
  probe.bias = 0.0f;
  auto pairs = make_pairs(80, 21);
  EvalBreakdown ev = eval_probe_fn(enc, probe, pairs);
  CHECK(ev.overall == 1.0);
  CHECK(ev.equivalent_accuracy == 1.0);
  CHECK(ev.non_equivalent_accuracy == 1.0);
  probe.w(0, 0) = -10.0f;  // flipped sign inverts every decision
  ev = eval_probe_fn(enc, probe, pairs);
  CHECK(ev.overall == 0.0);
}

TEST_CASE("attention pooling finds a single-token signal that last-token pooling misses") {
  // Signal lives at token 0 of the final layer; the ALM -Attn strategy reads
  // only the last token and sees noise.
  EncodeFn enc = planted_encoder(8, 1, 1, 0, 0.1f);
  auto train = make_pairs(200, 31);
  auto valid = make_pairs(60, 32);
  auto test = make_pairs(100, 33);

  ProbeConfig minus = fast_probe_config();
  minus.strategy.pooling = Pooling::MinusAttn;
  BilinearProbe p_minus = train_probe_fn(enc, Arch::ALM, 8, 1, train, valid, minus);
  double acc_minus = eval_probe_fn(enc, p_minus, test).overall;

  ProbeConfig plus = fast_probe_config();
  plus.strategy.pooling = Pooling::PlusAttn;
  BilinearProbe p_plus = train_probe_fn(enc, Arch::ALM, 8, 1, train, valid, plus);
  double acc_plus = eval_probe_fn(enc, p_plus, test).overall;

  CHECK(acc_plus >= 0.9);
  CHECK(acc_minus <= 0.75);
}

TEST_CASE("scalar mix learns to prefer the informative layer") {
  // Layer 1 carries the signal; layer 0 is loud noise that a good mix
  // learns to suppress.
  EncodeFn enc = planted_encoder(8, 2, 1, -1, 0.1f, /*layer0_noise=*/2.0f);
  auto train = make_pairs(200, 41);
  auto valid = make_pairs(60, 42);
  ProbeConfig cfg = fast_probe_config();
  BilinearProbe probe = train_probe_fn(enc, Arch::MLM, 8, 2, train, valid, cfg);
  CHECK(probe.strategy.scalar_mix);
  double acc = eval_probe_fn(enc, probe, make_pairs(100, 43)).overall;
  CHECK(acc >= 0.9);
  Eigen::VectorXf w = probe.mix_weights();
  REQUIRE(w.size() == 3);
  CHECK(w[1] > w[0]);
  CHECK(w.sum() == doctest::Approx(1.0f));
}

TEST_CASE("probes round-trip through their file format") {
  EncodeFn enc = planted_encoder(8, 2, 1, 0, 0.1f);
  auto train = make_pairs(60, 51);
  auto valid = make_pairs(20, 52);
  ProbeConfig cfg = fast_probe_config();
  cfg.epochs = 5;
  cfg.strategy.pooling = Pooling::PlusAttn;
  BilinearProbe probe = train_probe_fn(enc, Arch::MLM, 8, 2, train, valid, cfg);

  namespace fs = std::filesystem;
  std::string path = (fs::temp_directory_path() / "logiclab_probe.json").string();
  probe.save(path);
  BilinearProbe back = BilinearProbe::load(path);
  CHECK(back.arch == Arch::MLM);
  CHECK(back.strategy.pooling == Pooling::PlusAttn);
  CHECK(back.strategy.scalar_mix == probe.strategy.scalar_mix);
  CHECK(back.bias == probe.bias);
  CHECK(back.w == probe.w);
  CHECK(back.mix_logits == probe.mix_logits);
  CHECK(back.attn_query == probe.attn_query);
  CHECK(back.attn_key == probe.attn_key);
  auto pairs = make_pairs(40, 53);
  EvalBreakdown a = eval_probe_fn(enc, probe, pairs);
  EvalBreakdown b = eval_probe_fn(enc, back, pairs);
  CHECK(a.overall == b.overall);
}

TEST_CASE("probe training needs data") {
  EncodeFn enc = planted_encoder(4, 1, 1, -1, 0.1f);
  CHECK_THROWS_AS(train_probe_fn(enc, Arch::ALM, 4, 1, {}, {}, fast_probe_config()),
                  std::invalid_argument);
}

TEST_CASE("seed aggregate formats mean and spread") {
  SeedAggregate agg = SeedAggregate::of({50.0, 52.0, 48.0});
  CHECK(agg.mean == doctest::Approx(50.0));
  CHECK(agg.stddev == doctest::Approx(2.0));
  CHECK(agg.format() == std::string("50.00 +/- 2.00"));
  CHECK(SeedAggregate::of({3.5}).stddev == 0.0);
  CHECK_THROWS_AS(SeedAggregate::of({}), std::invalid_argument);
}

TEST_CASE("the evaluation templates are fixed") {
  const auto& ts = templates();
  REQUIRE(ts.size() == 5);
  CHECK(ts[0].name == "and-right");
  CHECK(ts[0].pattern == "(T&_)");
  CHECK(ts[1].name == "or-right");
  CHECK(ts[1].pattern == "(F|_)");
  CHECK(ts[2].name == "and-left");
  CHECK(ts[2].pattern == "(_&T)");
  CHECK(ts[3].name == "or-left");
  CHECK(ts[3].pattern == "(_|F)");
  CHECK(ts[4].name == "not");
  CHECK(ts[4].pattern == "(!_)");
  CHECK(ts[4].negated);

  CHECK(ts[0].filled(TruthValue::T) == "(T&T)");
  CHECK(ts[0].filled(TruthValue::F) == "(T&F)");
  CHECK(ts[4].filled(TruthValue::T) == "(!T)");

  // The four conjunctive/disjunctive templates echo the value; negation
  // flips it. In all cases pattern[fill] then denotes the value itself.
  for (const Template& t : ts) {
    for (TruthValue v : {TruthValue::F, TruthValue::T}) {
      TruthValue fill = t.expected_fill(v);
      CHECK(eval_lt(parse(t.filled(fill))) == v);
    }
  }
  CHECK(ts[0].expected_fill(TruthValue::T) == TruthValue::T);
  CHECK(ts[4].expected_fill(TruthValue::T) == TruthValue::F);
}

TEST_CASE("an oracle chooser scores 1.0 and its negation 0.0") {
  auto sentences = sample_sentences(50, 61);
  FillChooser oracle = [](const std::string& s, const Template& t) {
    return t.expected_fill(eval_lt(parse(s)));
  };
  DirectEvalReport r = direct_eval(sentences, Variant::Lt, 256, oracle);
  CHECK(r.mean == 1.0);
  CHECK(r.stddev == 0.0);
  CHECK(r.skipped_overlength == 0);
  REQUIRE(r.per_template_accuracy.size() == 5);
  for (double a : r.per_template_accuracy) CHECK(a == 1.0);

  FillChooser anti = [&](const std::string& s, const Template& t) {
    return negate(oracle(s, t));
  };
  r = direct_eval(sentences, Variant::Lt, 256, anti);
  CHECK(r.mean == 0.0);

  // The oracle for the other variant uses its denotations.
  FillChooser ln_oracle = [](const std::string& s, const Template& t) {
    return t.expected_fill(eval_ln(parse(s)));
  };
  r = direct_eval(sentences, Variant::Ln, 256, ln_oracle);
  CHECK(r.mean == 1.0);
}

TEST_CASE("overlength sentences are skipped and counted per template") {
  // "(T&F)" fits everywhere; "((T&F)|T)" plus "=" plus any template exceeds
  // 15 positions with BOS/EOS.
  std::vector<std::string> sentences = {"(T&F)", "((T&F)|T)"};
  FillChooser oracle = [](const std::string& s, const Template& t) {
    return t.expected_fill(eval_lt(parse(s)));
  };
  DirectEvalReport r = direct_eval(sentences, Variant::Lt, 15, oracle);
  CHECK(r.skipped_overlength == 5);
  CHECK(r.mean == 1.0);  // computed over the surviving sentence
}

TEST_CASE("direct evaluation of untrained models is deterministic and arch-checked") {
  ModelConfig mc;
  mc.d_model = 8;
  mc.n_layers = 1;
  mc.n_heads = 2;
  mc.d_ff = 16;
  mc.max_positions = 64;
  auto sentences = sample_sentences(40, 71);

  mc.arch = Arch::ALM;
  Checkpoint alm = random_init_model(mc, 5);
  DirectEvalReport r1 = direct_eval_alm(alm, sentences, Variant::Lt);
  DirectEvalReport r2 = direct_eval_alm(alm, sentences, Variant::Lt);
  CHECK(r1.per_template_accuracy == r2.per_template_accuracy);
  CHECK(r1.mean >= 0.0);
  CHECK(r1.mean <= 1.0);
  CHECK(r1.skipped_overlength == 0);
  CHECK_THROWS_AS(direct_eval_mlm(alm, sentences, Variant::Lt), std::invalid_argument);

  mc.arch = Arch::MLM;
  Checkpoint mlm = random_init_model(mc, 5);
  DirectEvalReport r3 = direct_eval_mlm(mlm, sentences, Variant::Lt);
  CHECK(r3.mean >= 0.0);
  CHECK(r3.mean <= 1.0);
  CHECK_THROWS_AS(direct_eval_alm(mlm, sentences, Variant::Lt), std::invalid_argument);

  Json j = r1.to_json();
  CHECK(j.at("per_template").size() == 5);
  CHECK(j.at("skipped_overlength").get<int>() == 0);
}

TEST_CASE("frozen-encoder probe training on a real checkpoint") {
  ModelConfig mc;
  mc.arch = Arch::ALM;
  mc.d_model = 8;
  mc.n_layers = 1;
  mc.n_heads = 2;
  mc.d_ff = 16;
  mc.max_positions = 64;
  Checkpoint ckpt = random_init_model(mc, 17);
  std::string digest = ckpt.parameter_digest();

  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "logiclab_probe_ds";
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::vector<PairRecord>& recs) {
    std::ofstream out(dir / name);
    for (auto& r : recs) out << r.to_json().dump() << "\n";
  };
  write("train.jsonl", make_pairs(60, 81));
  write("valid.jsonl", make_pairs(20, 82));

  ProbeConfig cfg = fast_probe_config();
  cfg.epochs = 3;
  ProbeMetrics metrics;
  BilinearProbe probe = train_probe(ckpt, dir.string(), cfg, &metrics);
  CHECK(ckpt.parameter_digest() == digest);
  CHECK(probe.arch == Arch::ALM);
  EvalBreakdown ev = eval_probe(ckpt, probe, make_pairs(40, 83));
  CHECK(ev.n == 40);
  CHECK(ev.overall >= 0.0);
  CHECK(ev.overall <= 1.0);
}
