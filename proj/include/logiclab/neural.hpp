#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "logiclab/corpus.hpp"
#include "logiclab/transformer.hpp"

namespace logiclab {

// A trained (or random-init) model plus everything needed to reproduce it.
struct Checkpoint {
  ModelConfig model_config;
  TrainConfig train_config;
  Transformer model;
  long step = 0;
  std::string corpus_digest;

  Checkpoint clone() const {
    return Checkpoint{model_config, train_config, model.clone(), step, corpus_digest};
  }

  void save(const std::string& dir) const;
  static Checkpoint load(const std::string& dir);

  // SHA-256 of the serialized parameter blob.
  std::string parameter_digest() const;
};

struct TrainReport {
  std::vector<double> losses;       // per logged interval
  double final_loss = 0;
  double initial_loss = 0;
};

using TrainCallback = std::function<void(int step, double loss)>;

Checkpoint random_init_model(const ModelConfig& config, uint64_t seed);

// Next-token objective over full `a=b` lines (BOS..EOS added).
Checkpoint train_alm(const std::string& corpus_path, const ModelConfig& model_config,
                     const TrainConfig& train_config, TrainReport* report = nullptr,
                     TrainCallback callback = nullptr);

// Masked-token objective: mask_rate of content positions per sequence,
// 80% MASK / 10% random token / 10% kept.
Checkpoint train_mlm(const std::string& corpus_path, const ModelConfig& model_config,
                     const TrainConfig& train_config, TrainReport* report = nullptr,
                     TrainCallback callback = nullptr);

// Total log-probability (nats) of the line under teacher forcing, including
// the end-of-sequence token. ALM checkpoints only.
double score_sequence(const Checkpoint& ckpt, const std::string& line);

// Softmax distribution over the vocabulary at the single MASK position.
// MLM checkpoints only.
std::vector<double> mlm_fill_logits(const Checkpoint& ckpt, const std::string& line_with_mask);

// Per-layer token representations: (n_layers + 1) matrices of shape
// (len + 2 specials) x d_model. Deterministic, dropout off.
std::vector<Eigen::MatrixXf> encode(const Checkpoint& ckpt, const std::string& line);

struct FinetuneResult {
  Checkpoint checkpoint;
  Eigen::MatrixXf head_w;  // bilinear head trained jointly
  float head_bias = 0;
  double train_accuracy = 0;
};

struct FinetuneConfig {
  int epochs = 1;
  int max_examples = -1;  // cap on training pairs; negative = all, 0 = no-op
  double lr = 1e-4;
  double grad_clip_norm = 1.0;
  uint64_t seed = 0;
};

// Unfreezes the whole encoder and trains it jointly with a bilinear pair
// classifier head on labeled PairRecords.
FinetuneResult finetune_pair_classifier(const Checkpoint& ckpt,
                                        const std::vector<PairRecord>& pairs,
                                        const FinetuneConfig& config);

// Sentence lines of a corpus file that fit the model, tokenized.
std::vector<std::vector<int>> load_corpus_ids(const std::string& path, int max_positions);

}  // namespace logiclab
