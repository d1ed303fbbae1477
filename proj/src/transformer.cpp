#include "logiclab/transformer.hpp"

namespace logiclab {

std::vector<int> to_ids_raw(const std::string& line) {
  std::vector<int> ids;
  ids.reserve(line.size());
  for (size_t i = 0; i < line.size(); ++i) {
    auto t = token_from_char(line[i]);
    if (!t) throw std::invalid_argument("unknown character at index " + std::to_string(i));
    ids.push_back(static_cast<int>(*t));
  }
  return ids;
}

std::vector<int> to_ids(const std::string& line) {
  std::vector<int> ids;
  ids.reserve(line.size() + 2);
  ids.push_back(kBosId);
  for (int id : to_ids_raw(line)) ids.push_back(id);
  ids.push_back(kEosId);
  return ids;
}

void ModelConfig::validate() const {
  if (d_model <= 0 || n_layers <= 0 || n_heads <= 0 || d_ff <= 0 || max_positions <= 0)
    throw std::invalid_argument("model dimensions must be positive");
  if (d_model % n_heads != 0)
    throw std::invalid_argument("d_model must be divisible by n_heads");
  if (vocab_size < kVocabSize) throw std::invalid_argument("vocab_size too small");
  if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("dropout out of range");
}

Json ModelConfig::to_json() const {
  Json j;
  j["arch"] = arch_name(arch);
  j["vocab_size"] = vocab_size;
  j["d_model"] = d_model;
  j["n_layers"] = n_layers;
  j["n_heads"] = n_heads;
  j["d_ff"] = d_ff;
  j["max_positions"] = max_positions;
  j["dropout"] = dropout;
  j["seed"] = seed;
  return j;
}

ModelConfig ModelConfig::from_json(const Json& j) {
  ModelConfig c;
  c.arch = j.at("arch").get<std::string>() == "alm" ? Arch::ALM : Arch::MLM;
  c.vocab_size = j.at("vocab_size").get<int>();
  c.d_model = j.at("d_model").get<int>();
  c.n_layers = j.at("n_layers").get<int>();
  c.n_heads = j.at("n_heads").get<int>();
  c.d_ff = j.at("d_ff").get<int>();
  c.max_positions = j.at("max_positions").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.seed = j.at("seed").get<uint64_t>();
  return c;
}

Json TrainConfig::to_json() const {
  Json j;
  j["steps"] = steps;
  j["batch_size"] = batch_size;
  j["lr"] = lr;
  j["warmup_steps"] = warmup_steps;
  j["weight_decay"] = weight_decay;
  j["adam_beta1"] = adam_beta1;
  j["adam_beta2"] = adam_beta2;
  j["adam_eps"] = adam_eps;
  j["grad_clip_norm"] = grad_clip_norm;
  j["mask_rate"] = mask_rate;
  j["seed"] = seed;
  return j;
}

TrainConfig TrainConfig::from_json(const Json& j) {
  TrainConfig c;
  c.steps = j.at("steps").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.lr = j.at("lr").get<double>();
  c.warmup_steps = j.at("warmup_steps").get<int>();
  c.weight_decay = j.at("weight_decay").get<double>();
  c.adam_beta1 = j.at("adam_beta1").get<double>();
  c.adam_beta2 = j.at("adam_beta2").get<double>();
  c.adam_eps = j.at("adam_eps").get<double>();
  c.grad_clip_norm = j.at("grad_clip_norm").get<double>();
  c.mask_rate = j.at("mask_rate").get<double>();
  c.seed = j.at("seed").get<uint64_t>();
  return c;
}

}  // namespace logiclab
