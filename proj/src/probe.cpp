#include "logiclab/probe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include "logiclab/optimizer.hpp"

namespace logiclab {

namespace {

using G = GraphT<float>;
using Var = VarT<float>;
using Mat = Eigen::MatrixXf;

// Per-sentence cached encoder output, reduced to what the strategy needs.
struct Prepped {
  Mat single;               // -Attn ALM: 1 x d final-layer last token
                            // -Attn MLM: (L+1) x d per-layer token means
  std::vector<Mat> layers;  // +Attn: token matrices (final layer only for ALM)
};

Prepped prep(const std::vector<Mat>& layers, const RepStrategy& strategy, Arch arch) {
  Prepped p;
  if (strategy.pooling == Pooling::MinusAttn) {
    if (arch == Arch::ALM) {
      p.single = layers.back().row(layers.back().rows() - 1);
    } else {
      p.single.resize(static_cast<Eigen::Index>(layers.size()), layers[0].cols());
      for (size_t l = 0; l < layers.size(); ++l) p.single.row(l) = layers[l].colwise().mean();
    }
  } else {
    if (arch == Arch::ALM)
      p.layers = {layers.back()};
    else
      p.layers = layers;
  }
  return p;
}

struct ProbeParams {
  Var w, bias, mix_logits, attn_query, attn_key;
  RepStrategy strategy;
  Arch arch;

  std::vector<Var> all() const {
    std::vector<Var> v{w, bias};
    if (arch == Arch::MLM) v.push_back(mix_logits);
    if (strategy.pooling == Pooling::PlusAttn) {
      v.push_back(attn_query);
      v.push_back(attn_key);
    }
    return v;
  }
};

// Builds the sentence vector (1 x d Var) for one prepped sentence.
Var build_rep(G& g, const Prepped& p, const ProbeParams& params) {
  bool mlm = params.arch == Arch::MLM;
  if (params.strategy.pooling == Pooling::MinusAttn) {
    if (!mlm) return G::leaf(p.single);
    std::vector<Mat> rows;
    for (Eigen::Index l = 0; l < p.single.rows(); ++l) rows.push_back(p.single.row(l));
    return g.scalar_mix(rows, params.mix_logits);
  }
  Var tokens = mlm ? g.scalar_mix(p.layers, params.mix_logits) : G::leaf(p.layers[0]);
  Var keys = g.matmul(tokens, params.attn_key);
  Var scores = g.transpose(g.matmul_nt(keys, params.attn_query));  // 1 x n
  Var weights = g.softmax_rows(scores);
  return g.matmul(weights, tokens);
}

Var build_logit(G& g, const Prepped& a, const Prepped& b, const ProbeParams& params) {
  Var ha = build_rep(g, a, params);
  Var hb = build_rep(g, b, params);
  return g.add(g.matmul_nt(g.matmul(ha, params.w), hb), params.bias);
}

float logit_value(const Prepped& a, const Prepped& b, const ProbeParams& params) {
  G g;
  return build_logit(g, a, b, params)->val(0, 0);
}

}  // namespace

Eigen::VectorXf sentence_representation(const std::vector<Mat>& layers,
                                        const BilinearProbe& probe) {
  Prepped p = prep(layers, probe.strategy, probe.arch);
  bool mlm = probe.arch == Arch::MLM;
  Mat tokens;
  if (probe.strategy.pooling == Pooling::MinusAttn) {
    if (!mlm) return p.single.row(0).transpose();
    return (probe.mix_weights().transpose() * p.single).transpose();
  }
  if (mlm) {
    Eigen::VectorXf w = probe.mix_weights();
    tokens = Mat::Zero(p.layers[0].rows(), p.layers[0].cols());
    for (size_t l = 0; l < p.layers.size(); ++l) tokens += w[l] * p.layers[l];
  } else {
    tokens = p.layers[0];
  }
  Eigen::VectorXf scores = tokens * probe.attn_key * probe.attn_query;
  Eigen::ArrayXf a = (scores.array() - scores.maxCoeff()).exp();
  a /= a.sum();
  return tokens.transpose() * a.matrix();
}

BilinearProbe train_probe_fn(const EncodeFn& encode_fn, Arch arch, int d_model, int n_layers,
                             const std::vector<PairRecord>& train,
                             const std::vector<PairRecord>& valid, const ProbeConfig& config,
                             ProbeMetrics* metrics) {
  if (train.empty()) throw std::invalid_argument("empty probe training set");

  RepStrategy strategy = config.strategy;
  strategy.scalar_mix = arch == Arch::MLM;  // scalar mix compensates MLM pooling
  int d = d_model;

  // Encode each distinct sentence once.
  std::unordered_map<std::string, Prepped> cache;
  auto prepped = [&](const std::string& s) -> const Prepped& {
    auto it = cache.find(s);
    if (it == cache.end())
      it = cache.emplace(s, prep(encode_fn(s), strategy, arch)).first;
    return it->second;
  };
  for (auto set : {&train, &valid})
    for (auto& rec : *set) {
      prepped(rec.a);
      prepped(rec.b);
    }

  Rng rng(config.seed);
  auto normal_mat = [&](int r, int c, double std) {
    Mat m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = float(rng.normal() * std);
    return m;
  };
  ProbeParams params;
  params.strategy = strategy;
  params.arch = arch;
  params.w = G::leaf(normal_mat(d, d, 0.02), true);
  params.bias = G::leaf(Mat::Zero(1, 1), true);
  params.mix_logits = G::leaf(Mat::Zero(n_layers + 1, 1), true);
  params.attn_query = G::leaf(normal_mat(1, d, 0.02), true);
  params.attn_key = G::leaf(normal_mat(d, d, 0.02), true);

  AdamWT<float> opt(params.all(), config.lr, 0.9, 0.98, 1e-8, 0.0);
  int steps_per_epoch = (int(train.size()) + config.batch_size - 1) / config.batch_size;
  int total_steps = steps_per_epoch * config.epochs;

  auto accuracy = [&](const std::vector<PairRecord>& set) {
    if (set.empty()) return 0.0;
    long correct = 0;
    for (auto& rec : set) {
      bool pred = logit_value(prepped(rec.a), prepped(rec.b), params) > 0;
      if (pred == rec.equivalent) correct++;
    }
    return double(correct) / double(set.size());
  };

  std::vector<size_t> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  BilinearProbe best;
  double best_valid = -1;
  int best_epoch = -1;
  auto snapshot = [&]() {
    BilinearProbe probe;
    probe.w = params.w->val;
    probe.bias = params.bias->val(0, 0);
    probe.mix_logits = params.mix_logits->val.col(0);
    probe.attn_query = params.attn_query->val.row(0);
    probe.attn_key = params.attn_key->val;
    probe.strategy = strategy;
    probe.arch = arch;
    return probe;
  };

  int step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Fisher-Yates with the probe seed; training order is deterministic.
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.uniform_int(i)]);
    long correct = 0;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      size_t end = std::min(order.size(), start + config.batch_size);
      for (auto& p : params.all()) p->grad.setZero();
      for (size_t i = start; i < end; ++i) {
        const PairRecord& rec = train[order[i]];
        G g;
        Var logit = build_logit(g, prepped(rec.a), prepped(rec.b), params);
        if ((logit->val(0, 0) > 0) == rec.equivalent) correct++;
        Var loss = g.bce_with_logit(logit, rec.equivalent);
        if (!std::isfinite(loss->val(0, 0))) throw std::runtime_error("non-finite probe loss");
        g.backward(loss, 1.0f / float(end - start));
      }
      opt.clip(config.grad_clip_norm);
      opt.step(lr_schedule(step, config.warmup_steps, total_steps));
      step++;
    }
    double train_acc = double(correct) / double(train.size());
    double valid_acc = accuracy(valid);
    if (metrics) {
      metrics->train_accuracy_per_epoch.push_back(train_acc);
      metrics->valid_accuracy_per_epoch.push_back(valid_acc);
    }
    if (valid_acc > best_valid) {
      best_valid = valid_acc;
      best_epoch = epoch;
      best = snapshot();
    }
  }
  if (best_epoch < 0) best = snapshot();
  if (metrics) {
    metrics->best_valid_accuracy = best_valid;
    metrics->best_epoch = best_epoch;
  }
  return best;
}

BilinearProbe train_probe(const Checkpoint& encoder, const std::string& dataset_dir,
                          const ProbeConfig& config, ProbeMetrics* metrics) {
  std::vector<PairRecord> train = read_pair_records(dataset_dir + "/train.jsonl");
  std::vector<PairRecord> valid = read_pair_records(dataset_dir + "/valid.jsonl");
  std::string before_digest = encoder.parameter_digest();
  EncodeFn fn = [&](const std::string& s) { return encode(encoder, s); };
  BilinearProbe probe =
      train_probe_fn(fn, encoder.model_config.arch, encoder.model_config.d_model,
                     encoder.model_config.n_layers, train, valid, config, metrics);
  if (encoder.parameter_digest() != before_digest)
    throw std::logic_error("frozen-encoder contract violated");
  return probe;
}

EvalBreakdown eval_probe_fn(const EncodeFn& encode_fn, const BilinearProbe& probe,
                            const std::vector<PairRecord>& records) {
  EvalBreakdown out;
  std::unordered_map<std::string, Eigen::VectorXf> cache;
  auto rep = [&](const std::string& s) -> const Eigen::VectorXf& {
    auto it = cache.find(s);
    if (it == cache.end())
      it = cache.emplace(s, sentence_representation(encode_fn(s), probe)).first;
    return it->second;
  };
  long correct_eq = 0, correct_neq = 0;
  for (auto& rec : records) {
    const Eigen::VectorXf& ha = rep(rec.a);
    const Eigen::VectorXf& hb = rep(rec.b);
    float logit = ha.transpose() * probe.w * hb;
    logit += probe.bias;
    bool pred = logit > 0;
    if (rec.equivalent) {
      out.n_equivalent++;
      if (pred) correct_eq++;
    } else {
      out.n_non_equivalent++;
      if (!pred) correct_neq++;
    }
  }
  out.n = out.n_equivalent + out.n_non_equivalent;
  out.overall = out.n ? double(correct_eq + correct_neq) / double(out.n) : 0.0;
  out.equivalent_accuracy =
      out.n_equivalent ? double(correct_eq) / double(out.n_equivalent) : 0.0;
  out.non_equivalent_accuracy =
      out.n_non_equivalent ? double(correct_neq) / double(out.n_non_equivalent) : 0.0;
  return out;
}

EvalBreakdown eval_probe(const Checkpoint& encoder, const BilinearProbe& probe,
                         const std::vector<PairRecord>& records) {
  return eval_probe_fn([&](const std::string& s) { return encode(encoder, s); }, probe, records);
}

EvalBreakdown eval_probe(const Checkpoint& encoder, const BilinearProbe& probe,
                         const std::string& dataset_file) {
  return eval_probe(encoder, probe, read_pair_records(dataset_file));
}

namespace {

Json mat_json(const Mat& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Mat mat_from_json(const Json& j) {
  Mat m(j.size(), j.empty() ? 0 : j[0].size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index jj = 0; jj < m.cols(); ++jj) m(i, jj) = j[i][jj].get<float>();
  return m;
}

}  // namespace

void BilinearProbe::save(const std::string& path) const {
  Json j;
  j["pooling"] = pooling_name(strategy.pooling);
  j["scalar_mix"] = strategy.scalar_mix;
  j["arch"] = arch_name(arch);
  j["bias"] = bias;
  j["w"] = mat_json(w);
  j["mix_logits"] = mat_json(mix_logits);
  j["attn_query"] = mat_json(attn_query);
  j["attn_key"] = mat_json(attn_key);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump() << "\n";
}

SeedAggregate SeedAggregate::of(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("SeedAggregate needs at least one value");
  SeedAggregate agg;
  for (double v : values) agg.mean += v;
  agg.mean /= double(values.size());
  double ss = 0;
  for (double v : values) ss += (v - agg.mean) * (v - agg.mean);
  agg.stddev = values.size() > 1 ? std::sqrt(ss / double(values.size() - 1)) : 0.0;
  return agg;
}

std::string SeedAggregate::format() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f +/- %.2f", mean, stddev);
  return buf;
}

BilinearProbe BilinearProbe::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Json j = Json::parse(in);
  BilinearProbe p;
  p.strategy.pooling =
      j.at("pooling").get<std::string>() == "plus-attn" ? Pooling::PlusAttn : Pooling::MinusAttn;
  p.strategy.scalar_mix = j.at("scalar_mix").get<bool>();
  p.arch = j.at("arch").get<std::string>() == "alm" ? Arch::ALM : Arch::MLM;
  p.bias = j.at("bias").get<float>();
  p.w = mat_from_json(j.at("w"));
  p.mix_logits = mat_from_json(j.at("mix_logits")).col(0);
  p.attn_query = mat_from_json(j.at("attn_query")).col(0);
  p.attn_key = mat_from_json(j.at("attn_key"));
  return p;
}

}  // namespace logiclab
