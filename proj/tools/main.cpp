#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "logiclab/corpus.hpp"
#include "logiclab/digest.hpp"
#include "logiclab/directeval.hpp"
#include "logiclab/grammar.hpp"
#include "logiclab/neural.hpp"
#include "logiclab/opacity.hpp"
#include "logiclab/probe.hpp"
#include "logiclab/semantics.hpp"
#include "logiclab/stats.hpp"
#include "logiclab/validate.hpp"

namespace fs = std::filesystem;
using namespace logiclab;

namespace {

// Exit codes: 0 ok, 1 validation problem, 2 stage/runtime failure.
struct ValidationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool g_force = false;

void ensure_fresh(const std::string& path) {
  if (!g_force && fs::exists(path))
    throw ValidationFailure("output path '" + path + "' exists; pass --force to overwrite");
}

Variant parse_variant(const std::string& s) {
  if (s == "lt") return Variant::Lt;
  if (s == "ln") return Variant::Ln;
  throw ValidationFailure("variant must be 'lt' or 'ln', got '" + s + "'");
}

const char* variant_name(Variant v) { return v == Variant::Lt ? "lt" : "ln"; }

void write_json(const std::string& path, const Json& j) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationFailure("cannot open " + path);
  return Json::parse(in);
}

// Every stage returns a summary plus the output paths to digest into the
// run manifest.
struct StageResult {
  Json info;
  std::vector<std::string> outputs;
};

template <typename T>
T param(const Json& p, const std::string& key, T fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->get<T>();
}

template <typename T>
T required(const Json& p, const std::string& key) {
  auto it = p.find(key);
  if (it == p.end()) throw ValidationFailure("missing required parameter '" + key + "'");
  return it->get<T>();
}

CorpusConfig corpus_config_from(const Json& p) {
  CorpusConfig cfg;
  cfg.variant = parse_variant(param<std::string>(p, "variant", "lt"));
  cfg.n_sequences = param<uint64_t>(p, "n_sequences", 1);
  cfg.max_sequence_tokens = param<int>(p, "max_sequence_tokens", 248);
  cfg.reflexivity = param<bool>(p, "reflexivity", false);
  cfg.symmetry = param<bool>(p, "symmetry", false);
  cfg.seed = param<uint64_t>(p, "seed", 0);
  if (p.contains("per_sentence_cap")) cfg.per_sentence_cap = p["per_sentence_cap"].get<int>();
  cfg.validate();
  return cfg;
}

StageResult stage_corpus(const Json& p) {
  CorpusConfig cfg = corpus_config_from(p);
  std::string out = required<std::string>(p, "out");
  ensure_fresh(out);
  fs::path op(out);
  if (op.has_parent_path()) fs::create_directories(op.parent_path());
  Json manifest = build_pretraining_corpus(cfg, out);
  return {manifest, {out, out + ".manifest.json"}};
}

StageResult stage_probe_split(const Json& p) {
  CorpusConfig cfg = corpus_config_from(p);
  SplitSpec split;
  split.train_pairs = param<uint64_t>(p, "train_pairs", 2000);
  split.valid_pairs = param<uint64_t>(p, "valid_pairs", 500);
  split.test_pairs = param<uint64_t>(p, "test_pairs", 500);
  std::string out_dir = required<std::string>(p, "out");
  ensure_fresh(out_dir + "/train.jsonl");
  std::unordered_set<std::string> exclude;
  if (p.contains("exclude_corpus"))
    exclude = corpus_sentences(p["exclude_corpus"].get<std::string>());
  Json manifest = build_probe_dataset(cfg, split, out_dir, exclude);
  return {manifest,
          {out_dir + "/train.jsonl", out_dir + "/valid.jsonl", out_dir + "/test.jsonl",
           out_dir + "/manifest.json"}};
}

ModelConfig model_config_from(const Json& p) {
  ModelConfig mc;
  mc.arch = param<std::string>(p, "arch", "alm") == "mlm" ? Arch::MLM : Arch::ALM;
  mc.d_model = param<int>(p, "d_model", mc.d_model);
  mc.n_layers = param<int>(p, "n_layers", mc.n_layers);
  mc.n_heads = param<int>(p, "n_heads", mc.n_heads);
  mc.d_ff = param<int>(p, "d_ff", mc.d_ff);
  mc.max_positions = param<int>(p, "max_positions", mc.max_positions);
  mc.dropout = param<double>(p, "dropout", mc.dropout);
  mc.seed = param<uint64_t>(p, "seed", mc.seed);
  mc.validate();
  return mc;
}

TrainConfig train_config_from(const Json& p) {
  TrainConfig tc;
  tc.steps = param<int>(p, "steps", tc.steps);
  tc.batch_size = param<int>(p, "batch_size", tc.batch_size);
  tc.lr = param<double>(p, "lr", tc.lr);
  tc.warmup_steps = param<int>(p, "warmup_steps", tc.warmup_steps);
  tc.weight_decay = param<double>(p, "weight_decay", tc.weight_decay);
  tc.grad_clip_norm = param<double>(p, "grad_clip_norm", tc.grad_clip_norm);
  tc.mask_rate = param<double>(p, "mask_rate", tc.mask_rate);
  tc.seed = param<uint64_t>(p, "seed", tc.seed);
  return tc;
}

StageResult stage_pretrain(const Json& p) {
  std::string corpus = required<std::string>(p, "corpus");
  std::string out = required<std::string>(p, "out");
  ensure_fresh(out + "/config.json");
  ModelConfig mc = model_config_from(p);
  TrainConfig tc = train_config_from(p);
  TrainReport report;
  bool quiet = param<bool>(p, "quiet", false);
  TrainCallback cb = quiet ? TrainCallback{} : [](int step, double loss) {
    std::cerr << "step " << step << " loss " << loss << "\n";
  };
  Checkpoint ckpt = param<bool>(p, "random_init", false)
                        ? random_init_model(mc, mc.seed)
                        : (mc.arch == Arch::ALM ? train_alm(corpus, mc, tc, &report, cb)
                                                : train_mlm(corpus, mc, tc, &report, cb));
  if (param<bool>(p, "random_init", false)) ckpt.corpus_digest = sha256_file(corpus);
  ckpt.save(out);
  Json info;
  info["parameter_digest"] = ckpt.parameter_digest();
  info["initial_loss"] = report.initial_loss;
  info["final_loss"] = report.final_loss;
  info["step"] = ckpt.step;
  return {info, {out + "/config.json", out + "/params.bin"}};
}

ProbeConfig probe_config_from(const Json& p) {
  ProbeConfig cfg;
  cfg.strategy.pooling = param<std::string>(p, "pooling", "minus-attn") == "plus-attn"
                             ? Pooling::PlusAttn
                             : Pooling::MinusAttn;
  cfg.lr = param<double>(p, "lr", cfg.lr);
  cfg.epochs = param<int>(p, "epochs", cfg.epochs);
  cfg.batch_size = param<int>(p, "batch_size", cfg.batch_size);
  cfg.warmup_steps = param<int>(p, "warmup_steps", cfg.warmup_steps);
  cfg.seed = param<uint64_t>(p, "seed", cfg.seed);
  return cfg;
}

StageResult stage_probe_train(const Json& p) {
  Checkpoint encoder = Checkpoint::load(required<std::string>(p, "encoder"));
  std::string out = required<std::string>(p, "out");
  ensure_fresh(out);
  ProbeConfig cfg = probe_config_from(p);
  ProbeMetrics metrics;
  BilinearProbe probe = train_probe(encoder, required<std::string>(p, "data"), cfg, &metrics);
  fs::path op(out);
  if (op.has_parent_path()) fs::create_directories(op.parent_path());
  probe.save(out);
  Json info;
  info["best_valid_accuracy"] = metrics.best_valid_accuracy;
  info["best_epoch"] = metrics.best_epoch;
  info["valid_accuracy_per_epoch"] = metrics.valid_accuracy_per_epoch;
  return {info, {out}};
}

Json breakdown_json(const EvalBreakdown& b) {
  Json j;
  j["overall"] = b.overall;
  j["equivalent_accuracy"] = b.equivalent_accuracy;
  j["non_equivalent_accuracy"] = b.non_equivalent_accuracy;
  j["n"] = b.n;
  j["n_equivalent"] = b.n_equivalent;
  j["n_non_equivalent"] = b.n_non_equivalent;
  return j;
}

StageResult stage_probe_eval(const Json& p) {
  Checkpoint encoder = Checkpoint::load(required<std::string>(p, "encoder"));
  BilinearProbe probe = BilinearProbe::load(required<std::string>(p, "probe"));
  EvalBreakdown b = eval_probe(encoder, probe, required<std::string>(p, "data"));
  Json info = breakdown_json(b);
  std::vector<std::string> outputs;
  if (p.contains("out")) {
    std::string out = p["out"].get<std::string>();
    ensure_fresh(out);
    write_json(out, info);
    outputs.push_back(out);
  }
  return {info, outputs};
}

std::vector<std::string> sample_sentences(Variant variant, uint64_t n, uint64_t seed,
                                          int max_tokens) {
  Pcfg pcfg = default_pcfg(variant);
  Rng rng(seed);
  std::vector<std::string> out;
  out.reserve(n);
  for (uint64_t i = 0; i < n; ++i) out.push_back(sample_sentence(pcfg, rng, max_tokens).text());
  return out;
}

StageResult stage_direct_eval(const Json& p) {
  Checkpoint ckpt = Checkpoint::load(required<std::string>(p, "encoder"));
  Variant variant = parse_variant(param<std::string>(p, "variant", "lt"));
  std::vector<std::string> sentences;
  if (p.contains("sentences")) {
    std::ifstream in(p["sentences"].get<std::string>());
    if (!in) throw ValidationFailure("cannot open sentence file");
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) sentences.push_back(line);
  } else {
    sentences = sample_sentences(variant, param<uint64_t>(p, "n", 500),
                                 param<uint64_t>(p, "seed", 0),
                                 param<int>(p, "max_tokens", 64));
  }
  DirectEvalReport report = ckpt.model_config.arch == Arch::ALM
                                ? direct_eval_alm(ckpt, sentences, variant)
                                : direct_eval_mlm(ckpt, sentences, variant);
  Json info = report.to_json();
  std::vector<std::string> outputs;
  if (p.contains("out")) {
    std::string out = p["out"].get<std::string>();
    ensure_fresh(out);
    write_json(out, info);
    outputs.push_back(out);
  }
  return {info, outputs};
}

StageResult stage_opacity(const Json& p) {
  std::vector<FactEntry> facts = read_facts(required<std::string>(p, "facts"));
  std::string out_dir = required<std::string>(p, "out");
  ensure_fresh(out_dir + "/pairs.jsonl");
  fs::create_directories(out_dir);
  VerbInventory inventory = VerbInventory::standard();
  Rng rng(param<uint64_t>(p, "seed", 0));
  std::vector<OpacityPair> pairs = generate_simple_pairs(facts, inventory);
  size_t n_coordinated = param<size_t>(p, "coordinated", 0);
  if (n_coordinated > 0) {
    auto coord = generate_coordinated_pairs(facts, inventory, rng, n_coordinated);
    pairs.insert(pairs.end(), coord.begin(), coord.end());
  }
  write_pairs(pairs, out_dir + "/pairs.jsonl");
  OpacitySplit split = split_dataset(pairs, rng);
  write_pairs(split.train, out_dir + "/train.jsonl");
  write_pairs(split.valid, out_dir + "/valid.jsonl");
  write_pairs(split.test, out_dir + "/test.jsonl");
  Json info;
  info["n_pairs"] = pairs.size();
  info["n_train"] = split.train.size();
  info["n_valid"] = split.valid.size();
  info["n_test"] = split.test.size();
  write_json(out_dir + "/manifest.json", info);
  return {info,
          {out_dir + "/pairs.jsonl", out_dir + "/train.jsonl", out_dir + "/valid.jsonl",
           out_dir + "/test.jsonl", out_dir + "/manifest.json"}};
}

// Pair file records need "a", "b", "verb" and either "class" or an
// equivalence label from which the class is inferred.
std::vector<VerbPair> read_verb_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationFailure("cannot open " + path);
  std::vector<VerbPair> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line);
    VerbPair vp;
    vp.a = j.at("a").get<std::string>();
    vp.b = j.at("b").get<std::string>();
    vp.verb = j.at("verb").get<std::string>();
    if (j.contains("class"))
      vp.verb_class = j["class"].get<std::string>() == "transparent" ? VerbClass::Transparent
                                                                     : VerbClass::Opaque;
    else
      vp.verb_class = j.at("label").get<std::string>() == "equivalent" ? VerbClass::Transparent
                                                                       : VerbClass::Opaque;
    out.push_back(std::move(vp));
  }
  return out;
}

StageResult stage_similarity(const Json& p) {
  Checkpoint encoder = Checkpoint::load(required<std::string>(p, "encoder"));
  BilinearProbe probe = BilinearProbe::load(required<std::string>(p, "probe"));
  std::vector<VerbPair> pairs = read_verb_pairs(required<std::string>(p, "pairs"));
  Embedder embed = [&](const std::string& s) {
    Eigen::VectorXf v = sentence_representation(encode(encoder, s), probe);
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  SimilarityReport report =
      similarity_report(embed, pairs, param<int>(p, "bootstrap_iterations", 1000),
                        param<uint64_t>(p, "seed", 0));
  Json info = report.to_json();
  std::vector<std::string> outputs;
  if (p.contains("report")) {
    std::string out = p["report"].get<std::string>();
    ensure_fresh(out);
    write_json(out, info);
    outputs.push_back(out);
  }
  return {info, outputs};
}

StageResult run_stage(const std::string& op, const Json& params) {
  if (op == "corpus") return stage_corpus(params);
  if (op == "probe-split") return stage_probe_split(params);
  if (op == "pretrain") return stage_pretrain(params);
  if (op == "probe-train") return stage_probe_train(params);
  if (op == "probe-eval") return stage_probe_eval(params);
  if (op == "direct-eval") return stage_direct_eval(params);
  if (op == "opacity") return stage_opacity(params);
  if (op == "similarity") return stage_similarity(params);
  throw ValidationFailure("unknown stage op '" + op + "'");
}

int cmd_run(const std::string& config_path, const std::string& manifest_path) {
  Json config = read_json(config_path);
  if (!config.contains("stages") || !config["stages"].is_array() || config["stages"].empty())
    throw ValidationFailure("config must declare a non-empty 'stages' array");

  Json manifest;
  manifest["config"] = config_path;
  manifest["config_digest"] = sha256_file(config_path);
  manifest["stages"] = Json::array();
  auto t0 = std::chrono::steady_clock::now();
  for (const Json& stage : config["stages"]) {
    std::string name = stage.value("name", std::string("unnamed"));
    std::string op = required<std::string>(stage, "op");
    std::cerr << "[stage " << name << "] op=" << op << "\n";
    Json entry;
    entry["name"] = name;
    entry["op"] = op;
    entry["params"] = stage;
    auto s0 = std::chrono::steady_clock::now();
    try {
      StageResult result = run_stage(op, stage);
      entry["info"] = result.info;
      entry["outputs"] = Json::object();
      for (const std::string& path : result.outputs)
        entry["outputs"][path] = sha256_file(path);
      entry["ok"] = true;
    } catch (const std::exception& e) {
      entry["ok"] = false;
      entry["error"] = e.what();
      manifest["stages"].push_back(entry);
      if (!manifest_path.empty()) write_json(manifest_path, manifest);
      std::cerr << "[stage " << name << "] FAILED: " << e.what() << "\n";
      return 2;
    }
    entry["seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - s0).count();
    manifest["stages"].push_back(entry);
  }
  manifest["total_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!manifest_path.empty()) write_json(manifest_path, manifest);
  std::cout << manifest.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"propositional-logic language emulation lab"};
  app.require_subcommand(1);
  app.add_flag("--force", g_force, "allow overwriting existing outputs");

  // grammar sample
  auto* grammar = app.add_subcommand("grammar", "grammar tools")->require_subcommand(1);
  auto* gsample = grammar->add_subcommand("sample", "sample sentences from the grammar");
  std::string gs_variant = "lt";
  uint64_t gs_n = 10, gs_seed = 0;
  int gs_max_tokens = 248;
  bool gs_stats = false;
  std::string gs_out;
  gsample->add_option("--variant", gs_variant, "lt or ln");
  gsample->add_option("--n", gs_n, "number of sentences");
  gsample->add_option("--seed", gs_seed, "rng seed");
  gsample->add_option("--max-tokens", gs_max_tokens, "per-sentence token cap");
  gsample->add_option("--out", gs_out, "output file (default stdout)");
  gsample->add_flag("--stats", gs_stats, "print rule frequencies to stderr");

  // oracle check
  auto* oracle = app.add_subcommand("oracle", "denotation oracles")->require_subcommand(1);
  auto* ocheck = oracle->add_subcommand("check", "evaluate sentences under both variants");
  std::string oc_in = "-";
  ocheck->add_option("--in", oc_in, "sentence file, one per line ('-' = stdin)");

  // transparency
  auto* transparency = app.add_subcommand("transparency", "sample-based transparency check");
  std::string tr_variant = "lt", tr_sentence;
  int tr_n = 10000, tr_max_tokens = 248;
  uint64_t tr_seed = 0;
  transparency->add_option("--variant", tr_variant, "lt or ln");
  transparency->add_option("--n", tr_n, "number of samples");
  transparency->add_option("--seed", tr_seed, "rng seed");
  transparency->add_option("--max-tokens", tr_max_tokens, "per-sentence token cap");
  transparency->add_option("--sentence", tr_sentence, "additionally check this sentence");

  // corpus build / probe-split
  auto* corpus = app.add_subcommand("corpus", "corpus builders")->require_subcommand(1);
  auto* cbuild = corpus->add_subcommand("build", "build a pretraining corpus");
  std::string cb_variant = "lt", cb_out;
  uint64_t cb_n = 1000, cb_seed = 0;
  int cb_max_seq = 248, cb_cap = 0;
  bool cb_refl = false, cb_sym = false;
  cbuild->add_option("--variant", cb_variant);
  cbuild->add_option("--n", cb_n, "number of sequences (closure lines included)");
  cbuild->add_option("--seed", cb_seed);
  cbuild->add_option("--max-seq-tokens", cb_max_seq, "whole a=b line cap");
  cbuild->add_option("--sentence-cap", cb_cap, "per-sentence token cap (0 = none)");
  cbuild->add_flag("--refl", cb_refl, "reflexivity closure");
  cbuild->add_flag("--sym", cb_sym, "symmetry closure");
  cbuild->add_option("--out", cb_out)->required();

  auto* csplit = corpus->add_subcommand("probe-split", "build labeled probe splits");
  std::string cs_variant = "lt", cs_out, cs_exclude;
  uint64_t cs_train = 2000, cs_valid = 500, cs_test = 500, cs_seed = 0;
  int cs_max_seq = 248, cs_cap = 0;
  csplit->add_option("--variant", cs_variant);
  csplit->add_option("--train", cs_train);
  csplit->add_option("--valid", cs_valid);
  csplit->add_option("--test", cs_test);
  csplit->add_option("--seed", cs_seed);
  csplit->add_option("--max-seq-tokens", cs_max_seq);
  csplit->add_option("--sentence-cap", cs_cap, "per-sentence token cap (0 = none)");
  csplit->add_option("--exclude-corpus", cs_exclude, "keep sentences of this corpus out");
  csplit->add_option("--out", cs_out)->required();

  // pretrain
  auto* pretrain = app.add_subcommand("pretrain", "train a language model");
  std::string pt_arch = "alm", pt_corpus, pt_out;
  Json pt_overrides = Json::object();
  bool pt_random = false, pt_quiet = false;
  int pt_steps = 3000, pt_batch = 64, pt_dmodel = 128, pt_layers = 2, pt_heads = 4, pt_dff = 512;
  double pt_lr = 3e-4;
  int pt_warmup = 200;
  uint64_t pt_seed = 0;
  pretrain->add_option("--arch", pt_arch, "alm or mlm");
  pretrain->add_option("--corpus", pt_corpus)->required();
  pretrain->add_option("--out", pt_out)->required();
  pretrain->add_option("--steps", pt_steps);
  pretrain->add_option("--batch-size", pt_batch);
  pretrain->add_option("--lr", pt_lr);
  pretrain->add_option("--warmup-steps", pt_warmup);
  pretrain->add_option("--d-model", pt_dmodel);
  pretrain->add_option("--n-layers", pt_layers);
  pretrain->add_option("--n-heads", pt_heads);
  pretrain->add_option("--d-ff", pt_dff);
  pretrain->add_option("--seed", pt_seed);
  pretrain->add_flag("--random-init", pt_random, "skip training (control model)");
  pretrain->add_flag("--quiet", pt_quiet, "no per-step loss logging");

  // probe train / eval
  auto* probe = app.add_subcommand("probe", "equivalence probing")->require_subcommand(1);
  auto* ptrain = probe->add_subcommand("train", "train a bilinear probe on a frozen encoder");
  std::string pr_encoder, pr_data, pr_out, pr_pooling = "minus-attn";
  int pr_epochs = 5, pr_batch = 64;
  double pr_lr = 1e-4;
  uint64_t pr_seed = 0;
  ptrain->add_option("--encoder", pr_encoder)->required();
  ptrain->add_option("--data", pr_data, "directory with train/valid.jsonl")->required();
  ptrain->add_option("--out", pr_out)->required();
  ptrain->add_option("--pooling", pr_pooling, "minus-attn or plus-attn");
  ptrain->add_option("--epochs", pr_epochs);
  ptrain->add_option("--batch-size", pr_batch);
  ptrain->add_option("--lr", pr_lr);
  ptrain->add_option("--seed", pr_seed);

  auto* peval = probe->add_subcommand("eval", "evaluate a probe");
  std::string pe_encoder, pe_probe, pe_data, pe_out;
  peval->add_option("--encoder", pe_encoder)->required();
  peval->add_option("--probe", pe_probe)->required();
  peval->add_option("--data", pe_data, "PairRecord JSONL file")->required();
  peval->add_option("--out", pe_out, "write the breakdown here too");

  // direct-eval
  auto* deval = app.add_subcommand("direct-eval", "training-free template evaluation");
  std::string de_encoder, de_variant = "lt", de_sentences, de_out;
  uint64_t de_n = 500, de_seed = 0;
  int de_max_tokens = 64;
  deval->add_option("--encoder", de_encoder)->required();
  deval->add_option("--variant", de_variant);
  deval->add_option("--n", de_n, "number of sampled sentences");
  deval->add_option("--seed", de_seed);
  deval->add_option("--max-tokens", de_max_tokens);
  deval->add_option("--sentences", de_sentences, "use these sentences instead of sampling");
  deval->add_option("--out", de_out);

  // opacity build
  auto* opacity = app.add_subcommand("opacity", "referential-opacity datasets")
                      ->require_subcommand(1);
  auto* obuild = opacity->add_subcommand("build", "generate pairs and splits from a facts file");
  std::string ob_facts, ob_out;
  uint64_t ob_coordinated = 0, ob_seed = 0;
  obuild->add_option("--facts", ob_facts)->required();
  obuild->add_option("--out", ob_out)->required();
  obuild->add_option("--coordinated", ob_coordinated, "number of coordinated pairs");
  obuild->add_option("--seed", ob_seed);

  // similarity
  auto* similarity = app.add_subcommand("similarity", "verb-class cosine similarity tests");
  std::string si_encoder, si_probe, si_pairs, si_report;
  int si_boot = 1000;
  uint64_t si_seed = 0;
  similarity->add_option("--encoder", si_encoder)->required();
  similarity->add_option("--probe", si_probe, "probe file fixing the representation")->required();
  similarity->add_option("--pairs", si_pairs)->required();
  similarity->add_option("--report", si_report);
  similarity->add_option("--bootstrap-iterations", si_boot);
  similarity->add_option("--seed", si_seed);

  // validate
  auto* validate = app.add_subcommand("validate", "dataset validators");
  std::string va_kind = "corpus", va_path, va_variant = "lt";
  bool va_refl = false, va_sym = false;
  validate->add_option("--kind", va_kind, "corpus, pairs, or splits");
  validate->add_option("--path", va_path)->required();
  validate->add_option("--variant", va_variant, "corpus kind only");
  validate->add_flag("--refl", va_refl, "expect reflexivity closure");
  validate->add_flag("--sym", va_sym, "expect symmetry closure");

  // run
  auto* run = app.add_subcommand("run", "execute a staged experiment config");
  std::string rn_config, rn_manifest;
  run->add_option("--config", rn_config)->required();
  run->add_option("--manifest", rn_manifest, "write the run manifest here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gsample->parsed()) {
      Pcfg pcfg = default_pcfg(parse_variant(gs_variant));
      Rng rng(gs_seed);
      SampleStats stats;
      std::ofstream file;
      std::ostream* out = &std::cout;
      if (!gs_out.empty()) {
        ensure_fresh(gs_out);
        file.open(gs_out, std::ios::binary);
        out = &file;
      }
      for (uint64_t i = 0; i < gs_n; ++i)
        *out << sample_sentence(pcfg, rng, gs_max_tokens, 10000, &stats).text() << "\n";
      if (gs_stats) {
        long total = 0;
        for (long c : stats.e_rule_counts) total += c;
        std::cerr << "e-rule frequencies:";
        for (long c : stats.e_rule_counts) std::cerr << " " << double(c) / double(total);
        std::cerr << "\nrejected: " << stats.rejected << "\n";
      }
    } else if (ocheck->parsed()) {
      std::ifstream file;
      std::istream* in = &std::cin;
      if (oc_in != "-") {
        file.open(oc_in);
        if (!file) throw ValidationFailure("cannot open " + oc_in);
        in = &file;
      }
      std::string line;
      while (std::getline(*in, line)) {
        if (line.empty()) continue;
        SynTree tree = parse(line);
        std::cout << "Lt=" << truth_char(eval_lt(tree)) << " Ln=" << truth_char(eval_ln(tree))
                  << "\n";
      }
    } else if (transparency->parsed()) {
      Variant v = parse_variant(tr_variant);
      Rng rng(tr_seed);
      TransparencyReport report = transparency_check(v, default_pcfg(v), tr_n, rng, tr_max_tokens);
      if (!tr_sentence.empty()) transparency_check_tree(parse(tr_sentence), v, report);
      for (const auto& viol : report.violations) {
        Json j;
        j["sentence"] = viol.sentence;
        j["node_id"] = viol.node_id;
        j["in_situ"] = std::string(1, truth_char(viol.in_situ_value));
        j["standalone"] = std::string(1, truth_char(viol.standalone_value));
        std::cout << j.dump() << "\n";
      }
      std::cerr << report.sentences_checked << " sentences, " << report.nodes_checked
                << " nodes, " << report.violations.size() << " violations\n";
    } else if (cbuild->parsed()) {
      Json p;
      p["variant"] = cb_variant;
      p["n_sequences"] = cb_n;
      p["seed"] = cb_seed;
      p["max_sequence_tokens"] = cb_max_seq;
      p["reflexivity"] = cb_refl;
      p["symmetry"] = cb_sym;
      if (cb_cap > 0) p["per_sentence_cap"] = cb_cap;
      p["out"] = cb_out;
      std::cout << stage_corpus(p).info.dump(2) << "\n";
    } else if (csplit->parsed()) {
      Json p;
      p["variant"] = cs_variant;
      p["train_pairs"] = cs_train;
      p["valid_pairs"] = cs_valid;
      p["test_pairs"] = cs_test;
      p["seed"] = cs_seed;
      p["max_sequence_tokens"] = cs_max_seq;
      if (cs_cap > 0) p["per_sentence_cap"] = cs_cap;
      if (!cs_exclude.empty()) p["exclude_corpus"] = cs_exclude;
      p["out"] = cs_out;
      std::cout << stage_probe_split(p).info.dump(2) << "\n";
    } else if (pretrain->parsed()) {
      Json p = pt_overrides;
      p["arch"] = pt_arch;
      p["corpus"] = pt_corpus;
      p["out"] = pt_out;
      p["steps"] = pt_steps;
      p["batch_size"] = pt_batch;
      p["lr"] = pt_lr;
      p["warmup_steps"] = pt_warmup;
      p["d_model"] = pt_dmodel;
      p["n_layers"] = pt_layers;
      p["n_heads"] = pt_heads;
      p["d_ff"] = pt_dff;
      p["seed"] = pt_seed;
      p["random_init"] = pt_random;
      p["quiet"] = pt_quiet;
      std::cout << stage_pretrain(p).info.dump(2) << "\n";
    } else if (ptrain->parsed()) {
      Json p;
      p["encoder"] = pr_encoder;
      p["data"] = pr_data;
      p["out"] = pr_out;
      p["pooling"] = pr_pooling;
      p["epochs"] = pr_epochs;
      p["batch_size"] = pr_batch;
      p["lr"] = pr_lr;
      p["seed"] = pr_seed;
      std::cout << stage_probe_train(p).info.dump(2) << "\n";
    } else if (peval->parsed()) {
      Json p;
      p["encoder"] = pe_encoder;
      p["probe"] = pe_probe;
      p["data"] = pe_data;
      if (!pe_out.empty()) p["out"] = pe_out;
      std::cout << stage_probe_eval(p).info.dump(2) << "\n";
    } else if (deval->parsed()) {
      Json p;
      p["encoder"] = de_encoder;
      p["variant"] = de_variant;
      p["n"] = de_n;
      p["seed"] = de_seed;
      p["max_tokens"] = de_max_tokens;
      if (!de_sentences.empty()) p["sentences"] = de_sentences;
      if (!de_out.empty()) p["out"] = de_out;
      std::cout << stage_direct_eval(p).info.dump(2) << "\n";
    } else if (obuild->parsed()) {
      Json p;
      p["facts"] = ob_facts;
      p["out"] = ob_out;
      p["coordinated"] = ob_coordinated;
      p["seed"] = ob_seed;
      std::cout << stage_opacity(p).info.dump(2) << "\n";
    } else if (similarity->parsed()) {
      Json p;
      p["encoder"] = si_encoder;
      p["probe"] = si_probe;
      p["pairs"] = si_pairs;
      if (!si_report.empty()) p["report"] = si_report;
      p["bootstrap_iterations"] = si_boot;
      p["seed"] = si_seed;
      std::cout << stage_similarity(p).info.dump(2) << "\n";
    } else if (validate->parsed()) {
      ValidationReport report;
      if (va_kind == "corpus")
        report = validate_corpus(va_path, parse_variant(va_variant), va_refl, va_sym);
      else if (va_kind == "pairs")
        report = validate_pair_file(va_path);
      else if (va_kind == "splits")
        report = validate_split_disjointness(va_path);
      else
        throw ValidationFailure("unknown validate kind '" + va_kind + "'");
      std::cout << report.to_json().dump(2) << "\n";
      return report.ok() ? 0 : 1;
    } else if (run->parsed()) {
      return cmd_run(rn_config, rn_manifest);
    }
  } catch (const ValidationFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: parse failure at index " << e.index << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
