#pragma once

#include "logiclab/neural.hpp"

namespace logiclab {

enum class Pooling { MinusAttn, PlusAttn };

inline const char* pooling_name(Pooling p) {
  return p == Pooling::MinusAttn ? "minus-attn" : "plus-attn";
}

// How to turn per-layer token representations into one sentence vector.
// -Attn: last token (ALM) / token mean (MLM). +Attn: trained attention
// pooling over tokens. Scalar mix (softmax-weighted layer combination)
// applies to MLM only; ALM uses the final layer.
struct RepStrategy {
  Pooling pooling = Pooling::MinusAttn;
  bool scalar_mix = false;  // set automatically for MLM
};

struct ProbeConfig {
  RepStrategy strategy;
  double lr = 1e-4;
  int epochs = 5;
  int batch_size = 64;
  int warmup_steps = 100;
  double grad_clip_norm = 1.0;
  uint64_t seed = 0;
};

// Bilinear pair classifier plus the probe-side representation parameters.
// logit(h_a, h_b) = h_a^T W h_b + bias.
struct BilinearProbe {
  Eigen::MatrixXf w;           // d x d
  float bias = 0;
  Eigen::VectorXf mix_logits;  // scalar-mix logits over L+1 layers (MLM)
  Eigen::VectorXf attn_query;  // +Attn query (d)
  Eigen::MatrixXf attn_key;    // +Attn key transform (d x d)
  RepStrategy strategy;
  Arch arch = Arch::ALM;

  Eigen::VectorXf mix_weights() const {  // softmax of mix_logits
    Eigen::ArrayXf w = mix_logits.array();
    w = (w - w.maxCoeff()).exp();
    return (w / w.sum()).matrix();
  }

  void save(const std::string& path) const;
  static BilinearProbe load(const std::string& path);
};

// Pools per-layer token representations (from neural::encode) into one
// sentence vector under the probe's strategy and parameters.
Eigen::VectorXf sentence_representation(const std::vector<Eigen::MatrixXf>& layers,
                                        const BilinearProbe& probe);

struct ProbeMetrics {
  std::vector<double> train_accuracy_per_epoch;
  std::vector<double> valid_accuracy_per_epoch;
  double best_valid_accuracy = 0;
  int best_epoch = -1;
};

// Trains the probe-side parameters on a frozen encoder. dataset_dir must
// hold train.jsonl and valid.jsonl; checkpoint selection is by validation
// accuracy at epoch ends.
BilinearProbe train_probe(const Checkpoint& encoder, const std::string& dataset_dir,
                          const ProbeConfig& config, ProbeMetrics* metrics = nullptr);

// Same training loop over an arbitrary sentence-to-layers map (layer count
// and width given explicitly). The encoder stays untouched by construction.
using EncodeFn = std::function<std::vector<Eigen::MatrixXf>(const std::string&)>;
BilinearProbe train_probe_fn(const EncodeFn& encode_fn, Arch arch, int d_model, int n_layers,
                             const std::vector<PairRecord>& train,
                             const std::vector<PairRecord>& valid, const ProbeConfig& config,
                             ProbeMetrics* metrics = nullptr);

struct EvalBreakdown {
  double overall = 0;
  double equivalent_accuracy = 0;
  double non_equivalent_accuracy = 0;
  long n = 0, n_equivalent = 0, n_non_equivalent = 0;
};

EvalBreakdown eval_probe(const Checkpoint& encoder, const BilinearProbe& probe,
                         const std::vector<PairRecord>& records);
EvalBreakdown eval_probe(const Checkpoint& encoder, const BilinearProbe& probe,
                         const std::string& dataset_file);
EvalBreakdown eval_probe_fn(const EncodeFn& encode_fn, const BilinearProbe& probe,
                            const std::vector<PairRecord>& records);

// Mean/std formatting across probe seeds ("96.4 ± 0.3").
struct SeedAggregate {
  double mean = 0, stddev = 0;
  static SeedAggregate of(const std::vector<double>& values);
  std::string format() const;
};

}  // namespace logiclab
