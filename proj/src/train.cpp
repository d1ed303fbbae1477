#include "logiclab/neural.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "logiclab/digest.hpp"
#include "logiclab/optimizer.hpp"

namespace logiclab {

namespace {

std::string params_blob(const Transformer& model) {
  std::vector<double> flat = model.flatten();
  return std::string(reinterpret_cast<const char*>(flat.data()),
                     flat.size() * sizeof(double));
}

std::vector<Transformer::Var> registry_vars(const Transformer& model) {
  std::vector<Transformer::Var> vars;
  for (auto& [name, p] : model.parameters()) vars.push_back(p);
  return vars;
}

double scalar_loss(const VarT<float>& node) { return double(node->val(0, 0)); }

// One optimizer step over a batch of per-sequence graphs.
template <typename LossFn>
double train_steps(Transformer& model, const std::vector<std::vector<int>>& lines,
                   const TrainConfig& cfg, LossFn&& sequence_loss, TrainReport* report,
                   const TrainCallback& callback) {
  if (lines.empty()) throw std::invalid_argument("empty corpus");
  AdamWT<float> opt(registry_vars(model), cfg.lr, cfg.adam_beta1, cfg.adam_beta2,
                    cfg.adam_eps, cfg.weight_decay);
  Rng rng(cfg.seed);
  double last_loss = 0;
  for (int step = 0; step < cfg.steps; ++step) {
    model.zero_grad();
    double batch_loss = 0;
    for (int b = 0; b < cfg.batch_size; ++b) {
      const auto& ids = lines[rng.uniform_int(lines.size())];
      GraphT<float> g;
      auto loss = sequence_loss(g, ids, rng);
      batch_loss += scalar_loss(loss);
      g.backward(loss, 1.0f / float(cfg.batch_size));
    }
    batch_loss /= cfg.batch_size;
    if (!std::isfinite(batch_loss))
      throw std::runtime_error("non-finite loss at step " + std::to_string(step) +
                               " (loss=" + std::to_string(batch_loss) + ")");
    opt.clip(cfg.grad_clip_norm);
    opt.step(lr_schedule(step, cfg.warmup_steps, cfg.steps));
    last_loss = batch_loss;
    if (report) {
      if (step == 0) report->initial_loss = batch_loss;
      if (step % 50 == 0 || step == cfg.steps - 1) report->losses.push_back(batch_loss);
    }
    if (callback) callback(step, batch_loss);
  }
  return last_loss;
}

}  // namespace

std::vector<std::vector<int>> load_corpus_ids(const std::string& path, int max_positions) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<int>> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<int> ids = to_ids(line);
    if (static_cast<int>(ids.size()) > max_positions)
      throw std::runtime_error("corpus line exceeds max_positions: " + line);
    lines.push_back(std::move(ids));
  }
  return lines;
}

Checkpoint random_init_model(const ModelConfig& config, uint64_t seed) {
  Checkpoint ckpt{config, TrainConfig{}, Transformer(config, seed), 0, ""};
  return ckpt;
}

Checkpoint train_alm(const std::string& corpus_path, const ModelConfig& model_config,
                     const TrainConfig& train_config, TrainReport* report,
                     TrainCallback callback) {
  if (model_config.arch != Arch::ALM) throw std::invalid_argument("config arch must be alm");
  auto lines = load_corpus_ids(corpus_path, model_config.max_positions);
  Checkpoint ckpt{model_config, train_config, Transformer(model_config, model_config.seed),
                  0, sha256_file(corpus_path)};
  double final_loss =
      train_steps(ckpt.model, lines, train_config,
                  [&](GraphT<float>& g, const std::vector<int>& ids, Rng& rng) {
                    auto acts = ckpt.model.forward(g, ids, &rng);
                    int n = static_cast<int>(ids.size());
                    // Predict tokens 1..n-1 from rows 0..n-2.
                    auto pred = g.rows(acts.logits, 0, n - 1);
                    std::vector<int> targets(ids.begin() + 1, ids.end());
                    return g.cross_entropy(pred, targets);
                  },
                  report, callback);
  if (report) report->final_loss = final_loss;
  ckpt.step = train_config.steps;
  return ckpt;
}

Checkpoint train_mlm(const std::string& corpus_path, const ModelConfig& model_config,
                     const TrainConfig& train_config, TrainReport* report,
                     TrainCallback callback) {
  if (model_config.arch != Arch::MLM) throw std::invalid_argument("config arch must be mlm");
  if (train_config.mask_rate <= 0.0 || train_config.mask_rate >= 1.0)
    throw std::invalid_argument("mask_rate must be in (0,1)");
  auto lines = load_corpus_ids(corpus_path, model_config.max_positions);
  Checkpoint ckpt{model_config, train_config, Transformer(model_config, model_config.seed),
                  0, sha256_file(corpus_path)};
  double final_loss = train_steps(
      ckpt.model, lines, train_config,
      [&](GraphT<float>& g, const std::vector<int>& ids, Rng& rng) {
        int n = static_cast<int>(ids.size());
        std::vector<int> corrupted = ids;
        std::vector<uint8_t> select(n, 0);
        int n_selected = 0;
        // Content positions only; BOS/EOS are never masked.
        for (int i = 1; i < n - 1; ++i) {
          if (rng.uniform() >= train_config.mask_rate) continue;
          select[i] = 1;
          n_selected++;
          double u = rng.uniform();
          if (u < 0.8)
            corrupted[i] = kMaskId;
          else if (u < 0.9)
            corrupted[i] = static_cast<int>(rng.uniform_int(kNumTokens));
          // else keep
        }
        if (n_selected == 0) {
          int i = 1 + static_cast<int>(rng.uniform_int(n - 2));
          select[i] = 1;
          corrupted[i] = kMaskId;
        }
        auto acts = ckpt.model.forward(g, corrupted, &rng);
        return g.cross_entropy(acts.logits, ids, select);
      },
      report, callback);
  if (report) report->final_loss = final_loss;
  ckpt.step = train_config.steps;
  return ckpt;
}

double score_sequence(const Checkpoint& ckpt, const std::string& line) {
  if (ckpt.model_config.arch != Arch::ALM)
    throw std::invalid_argument("score_sequence requires an ALM checkpoint");
  std::vector<int> ids = to_ids(line);
  GraphT<float> g;
  auto acts = ckpt.model.forward(g, ids);
  const auto& logits = acts.logits->val;
  double total = 0;
  for (int i = 0; i + 1 < static_cast<int>(ids.size()); ++i) {
    double m = logits.row(i).maxCoeff();
    double lse = std::log((logits.row(i).array() - float(m)).exp().sum()) + m;
    total += double(logits(i, ids[i + 1])) - lse;
  }
  return total;
}

std::vector<double> mlm_fill_logits(const Checkpoint& ckpt, const std::string& line_with_mask) {
  if (ckpt.model_config.arch != Arch::MLM)
    throw std::invalid_argument("mlm_fill_logits requires an MLM checkpoint");
  std::vector<int> ids = to_ids(line_with_mask);
  int mask_pos = -1;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == kMaskId) {
      if (mask_pos >= 0) throw std::invalid_argument("multiple MASK tokens");
      mask_pos = static_cast<int>(i);
    }
  }
  if (mask_pos < 0) throw std::invalid_argument("no MASK token");
  GraphT<float> g;
  auto acts = ckpt.model.forward(g, ids);
  Eigen::VectorXf row = acts.logits->val.row(mask_pos);
  float m = row.maxCoeff();
  Eigen::ArrayXf p = (row.array() - m).exp();
  p /= p.sum();
  return std::vector<double>(p.data(), p.data() + p.size());
}

std::vector<Eigen::MatrixXf> encode(const Checkpoint& ckpt, const std::string& line) {
  std::vector<int> ids = to_ids(line);
  GraphT<float> g;
  auto acts = ckpt.model.forward(g, ids);
  std::vector<Eigen::MatrixXf> out;
  out.reserve(acts.layers.size());
  for (auto& layer : acts.layers) out.push_back(layer->val);
  return out;
}

FinetuneResult finetune_pair_classifier(const Checkpoint& ckpt,
                                        const std::vector<PairRecord>& pairs,
                                        const FinetuneConfig& config) {
  FinetuneResult result{ckpt.clone(), {}, 0, 0};
  Transformer& model = result.checkpoint.model;
  int d = model.config().d_model;
  Rng init_rng(config.seed);
  Eigen::MatrixXf w0(d, d);
  for (Eigen::Index i = 0; i < w0.size(); ++i) w0.data()[i] = float(init_rng.normal() * 0.02);
  auto head_w = GraphT<float>::leaf(w0, true);
  auto head_b = GraphT<float>::leaf(Eigen::MatrixXf::Zero(1, 1), true);

  size_t n_use = pairs.size();
  if (config.max_examples >= 0) n_use = std::min(n_use, size_t(config.max_examples));

  std::vector<Transformer::Var> vars = registry_vars(model);
  vars.push_back(head_w);
  vars.push_back(head_b);
  AdamWT<float> opt(vars, config.lr, 0.9, 0.98, 1e-8, 0.0);

  auto embed = [&](GraphT<float>& g, const std::string& text) -> Transformer::Var {
    auto acts = model.forward(g, to_ids(text));
    auto last = acts.layers.back();
    if (model.config().arch == Arch::ALM)
      return g.rows(last, int(last->val.rows()) - 1, 1);
    return g.mean_rows(last);
  };

  Rng rng(config.seed + 1);
  long correct = 0, total = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (size_t i = 0; i < n_use; ++i) {
      const PairRecord& rec = pairs[rng.uniform_int(n_use)];
      model.zero_grad();
      head_w->grad.setZero();
      head_b->grad.setZero();
      GraphT<float> g;
      auto ha = embed(g, rec.a);
      auto hb = embed(g, rec.b);
      auto logit = g.add(g.matmul_nt(g.matmul(ha, head_w), hb), head_b);
      auto loss = g.bce_with_logit(logit, rec.equivalent);
      if ((logit->val(0, 0) > 0) == rec.equivalent) correct++;
      total++;
      g.backward(loss);
      opt.clip(config.grad_clip_norm);
      opt.step();
    }
  }
  result.head_w = head_w->val;
  result.head_bias = head_b->val(0, 0);
  result.train_accuracy = total ? double(correct) / double(total) : 0.0;
  return result;
}

std::string Checkpoint::parameter_digest() const { return sha256_hex(params_blob(model)); }

void Checkpoint::save(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  Json j;
  j["model_config"] = model_config.to_json();
  j["train_config"] = train_config.to_json();
  j["step"] = step;
  j["corpus_digest"] = corpus_digest;
  Json shapes = Json::array();
  for (auto& [name, p] : model.parameters()) {
    Json s;
    s["name"] = name;
    s["rows"] = p->val.rows();
    s["cols"] = p->val.cols();
    shapes.push_back(s);
  }
  j["parameters"] = shapes;
  std::ofstream cf(dir + "/config.json");
  cf << j.dump(2) << "\n";
  std::string blob = params_blob(model);
  std::ofstream pf(dir + "/params.bin", std::ios::binary);
  pf << blob;
  std::ofstream df(dir + "/digest.txt");
  df << sha256_hex(blob) << "\n";
}

Checkpoint Checkpoint::load(const std::string& dir) {
  std::ifstream cf(dir + "/config.json");
  if (!cf) throw std::runtime_error("cannot open " + dir + "/config.json");
  Json j = Json::parse(cf);
  ModelConfig mc = ModelConfig::from_json(j.at("model_config"));
  Checkpoint ckpt{mc, TrainConfig::from_json(j.at("train_config")), Transformer(mc, 0),
                  j.at("step").get<long>(), j.at("corpus_digest").get<std::string>()};
  std::ifstream pf(dir + "/params.bin", std::ios::binary);
  if (!pf) throw std::runtime_error("cannot open " + dir + "/params.bin");
  std::string blob((std::istreambuf_iterator<char>(pf)), std::istreambuf_iterator<char>());
  std::vector<double> flat(blob.size() / sizeof(double));
  std::memcpy(flat.data(), blob.data(), flat.size() * sizeof(double));
  ckpt.model.unflatten(flat);
  return ckpt;
}

}  // namespace logiclab
