#pragma once

#include <string>
#include <vector>

#include "logiclab/graph.hpp"
#include "logiclab/token.hpp"

#include <nlohmann/json.hpp>

namespace logiclab {

using Json = nlohmann::ordered_json;

enum class Arch { ALM, MLM };

inline const char* arch_name(Arch a) { return a == Arch::ALM ? "alm" : "mlm"; }

// Vocabulary: the nine surface tokens (same ids as Token) plus BOS/EOS.
inline constexpr int kBosId = kNumTokens;
inline constexpr int kEosId = kNumTokens + 1;
inline constexpr int kVocabSize = kNumTokens + 2;
inline constexpr int kMaskId = static_cast<int>(Token::Mask);

std::vector<int> to_ids(const std::string& line);        // adds BOS/EOS
std::vector<int> to_ids_raw(const std::string& line);    // no specials

struct ModelConfig {
  Arch arch = Arch::ALM;
  int vocab_size = kVocabSize;
  int d_model = 128;
  int n_layers = 2;
  int n_heads = 4;
  int d_ff = 512;
  int max_positions = 256;
  double dropout = 0.0;
  uint64_t seed = 0;

  void validate() const;
  Json to_json() const;
  static ModelConfig from_json(const Json& j);
};

struct TrainConfig {
  int steps = 3000;
  int batch_size = 64;
  double lr = 3e-4;
  int warmup_steps = 200;
  double weight_decay = 0.1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.95;
  double adam_eps = 1e-8;
  double grad_clip_norm = 1.0;
  double mask_rate = 0.15;  // MLM only
  uint64_t seed = 0;

  Json to_json() const;
  static TrainConfig from_json(const Json& j);
};

// Pre-LN transformer with learned absolute position embeddings. The same
// network serves as ALM (causal mask) and MLM (bidirectional).
template <typename S>
class TransformerT {
 public:
  using Graph = GraphT<S>;
  using Var = VarT<S>;
  using Mat = typename Graph::Mat;

  TransformerT() = default;
  // Parameters are shared_ptr nodes: copying would alias them, so copies are
  // explicit via clone().
  TransformerT(const TransformerT&) = delete;
  TransformerT& operator=(const TransformerT&) = delete;
  TransformerT(TransformerT&&) = default;
  TransformerT& operator=(TransformerT&&) = default;

  TransformerT clone() const {
    TransformerT out(config_, 0);
    out.unflatten(flatten());
    return out;
  }

  TransformerT(const ModelConfig& config, uint64_t init_seed) : config_(config) {
    config.validate();
    Rng rng(init_seed);
    auto normal = [&](int r, int c) {
      Mat m(r, c);
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = S(rng.normal() * 0.02);
      return Graph::leaf(std::move(m), true);
    };
    auto zeros = [&](int r, int c) { return Graph::leaf(Mat::Zero(r, c), true); };
    auto ones = [&](int r, int c) { return Graph::leaf(Mat::Ones(r, c), true); };
    int d = config.d_model, ff = config.d_ff;
    add("tok_emb", tok_emb_ = normal(config.vocab_size, d));
    add("pos_emb", pos_emb_ = normal(config.max_positions, d));
    layers_.resize(config.n_layers);
    for (int l = 0; l < config.n_layers; ++l) {
      auto& L = layers_[l];
      std::string p = "layer" + std::to_string(l) + ".";
      add(p + "ln1_g", L.ln1_g = ones(1, d));
      add(p + "ln1_b", L.ln1_b = zeros(1, d));
      add(p + "wq", L.wq = normal(d, d));
      add(p + "bq", L.bq = zeros(1, d));
      add(p + "wk", L.wk = normal(d, d));
      add(p + "bk", L.bk = zeros(1, d));
      add(p + "wv", L.wv = normal(d, d));
      add(p + "bv", L.bv = zeros(1, d));
      add(p + "wo", L.wo = normal(d, d));
      add(p + "bo", L.bo = zeros(1, d));
      add(p + "ln2_g", L.ln2_g = ones(1, d));
      add(p + "ln2_b", L.ln2_b = zeros(1, d));
      add(p + "w1", L.w1 = normal(d, ff));
      add(p + "b1", L.b1 = zeros(1, ff));
      add(p + "w2", L.w2 = normal(ff, d));
      add(p + "b2", L.b2 = zeros(1, d));
    }
    add("lnf_g", lnf_g_ = ones(1, d));
    add("lnf_b", lnf_b_ = zeros(1, d));
    add("w_out", w_out_ = normal(d, config.vocab_size));
    add("b_out", b_out_ = zeros(1, config.vocab_size));
  }

  const ModelConfig& config() const { return config_; }
  const std::vector<std::pair<std::string, Var>>& parameters() const { return params_; }

  void set_requires_grad(bool on) {
    for (auto& [name, p] : params_) {
      p->requires_grad = on;
      if (on) p->ensure_grad();
    }
  }

  void zero_grad() {
    for (auto& [name, p] : params_) {
      p->ensure_grad();
      p->grad.setZero();
    }
  }

  struct Activations {
    std::vector<Var> layers;  // embeddings output + every transformer block
    Var final_norm;
    Var logits;
  };

  // Dropout applies only when train_rng is given and config.dropout > 0.
  Activations forward(Graph& g, const std::vector<int>& ids, Rng* train_rng = nullptr) const {
    int n = static_cast<int>(ids.size());
    if (n > config_.max_positions)
      throw std::invalid_argument("sequence length " + std::to_string(n) +
                                  " exceeds max_positions");
    bool causal = config_.arch == Arch::ALM;
    S drop = train_rng ? S(config_.dropout) : S(0);

    std::vector<int> positions(n);
    for (int i = 0; i < n; ++i) positions[i] = i;
    Var x = g.add(g.embedding(tok_emb_, ids), g.embedding(pos_emb_, positions));

    Mat mask;
    if (causal) {
      mask = Mat::Zero(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) mask(i, j) = S(-1e9);
    }

    Activations acts;
    acts.layers.push_back(x);
    int d = config_.d_model, nh = config_.n_heads, dk = d / nh;
    S scale = S(1.0 / std::sqrt(double(dk)));
    for (auto& L : layers_) {
      Var xn = g.layernorm(x, L.ln1_g, L.ln1_b);
      Var q = g.add_row(g.matmul(xn, L.wq), L.bq);
      Var k = g.add_row(g.matmul(xn, L.wk), L.bk);
      Var v = g.add_row(g.matmul(xn, L.wv), L.bv);
      std::vector<Var> heads;
      heads.reserve(nh);
      for (int h = 0; h < nh; ++h) {
        Var qh = g.cols(q, h * dk, dk);
        Var kh = g.cols(k, h * dk, dk);
        Var vh = g.cols(v, h * dk, dk);
        Var scores = g.scale(g.matmul_nt(qh, kh), scale);
        Var probs = g.softmax_rows(scores, causal ? &mask : nullptr);
        heads.push_back(g.matmul(probs, vh));
      }
      Var attn = g.add_row(g.matmul(g.hcat(heads), L.wo), L.bo);
      if (drop > 0) attn = g.dropout(attn, drop, *train_rng);
      x = g.add(x, attn);
      Var xn2 = g.layernorm(x, L.ln2_g, L.ln2_b);
      Var h1 = g.gelu(g.add_row(g.matmul(xn2, L.w1), L.b1));
      Var mlp = g.add_row(g.matmul(h1, L.w2), L.b2);
      if (drop > 0) mlp = g.dropout(mlp, drop, *train_rng);
      x = g.add(x, mlp);
      acts.layers.push_back(x);
    }
    acts.final_norm = g.layernorm(x, lnf_g_, lnf_b_);
    acts.logits = g.add_row(g.matmul(acts.final_norm, w_out_), b_out_);
    return acts;
  }

  // Flat parameter vector in registry order, as doubles (serialization and
  // digests are scalar-type independent).
  std::vector<double> flatten() const {
    std::vector<double> out;
    for (auto& [name, p] : params_)
      for (Eigen::Index i = 0; i < p->val.size(); ++i)
        out.push_back(double(p->val.data()[i]));
    return out;
  }

  void unflatten(const std::vector<double>& flat) {
    size_t off = 0;
    for (auto& [name, p] : params_) {
      if (off + p->val.size() > flat.size()) throw std::runtime_error("parameter blob too short");
      for (Eigen::Index i = 0; i < p->val.size(); ++i) p->val.data()[i] = S(flat[off++]);
    }
    if (off != flat.size()) throw std::runtime_error("parameter blob size mismatch");
  }

 private:
  struct Layer {
    Var ln1_g, ln1_b, wq, bq, wk, bk, wv, bv, wo, bo, ln2_g, ln2_b, w1, b1, w2, b2;
  };

  void add(const std::string& name, Var v) { params_.emplace_back(name, v); }

  ModelConfig config_;
  Var tok_emb_, pos_emb_, lnf_g_, lnf_b_, w_out_, b_out_;
  std::vector<Layer> layers_;
  std::vector<std::pair<std::string, Var>> params_;
};

using Transformer = TransformerT<float>;

}  // namespace logiclab
