#include "logiclab/directeval.hpp"

#include <cmath>

namespace logiclab {

const std::vector<Template>& templates() {
  static const std::vector<Template> kTemplates = {
      {"and-right", "(T&_)"},
      {"or-right", "(F|_)"},
      {"and-left", "(_&T)"},
      {"or-left", "(_|F)"},
      {"not", "(!_)", true},
  };
  return kTemplates;
}

DirectEvalReport direct_eval(const std::vector<std::string>& sentences, Variant variant,
                             int max_positions, const FillChooser& choose) {
  DirectEvalReport report;
  for (const Template& t : templates()) {
    long correct = 0, total = 0;
    for (const std::string& s : sentences) {
      // `s=filled` plus BOS/EOS must fit the model.
      if (static_cast<int>(s.size() + 1 + t.pattern.size()) + 2 > max_positions) {
        report.skipped_overlength++;
        continue;
      }
      TruthValue v = eval(parse(s), variant);
      TruthValue expected = t.expected_fill(v);
      if (choose(s, t) == expected) correct++;
      total++;
    }
    report.template_names.push_back(t.name);
    report.per_template_accuracy.push_back(total ? double(correct) / double(total) : 0.0);
  }
  double sum = 0;
  for (double a : report.per_template_accuracy) sum += a;
  report.mean = sum / report.per_template_accuracy.size();
  double sq = 0;
  for (double a : report.per_template_accuracy) sq += (a - report.mean) * (a - report.mean);
  report.stddev = std::sqrt(sq / report.per_template_accuracy.size());
  return report;
}

DirectEvalReport direct_eval_alm(const Checkpoint& ckpt, const std::vector<std::string>& sentences,
                                 Variant variant) {
  if (ckpt.model_config.arch != Arch::ALM)
    throw std::invalid_argument("direct_eval_alm requires an ALM checkpoint");
  // Both candidates share length, so raw sequence scores are comparable
  // without length normalization.
  auto choose = [&](const std::string& s, const Template& t) {
    double score_t = score_sequence(ckpt, s + "=" + t.filled(TruthValue::T));
    double score_f = score_sequence(ckpt, s + "=" + t.filled(TruthValue::F));
    return score_t > score_f ? TruthValue::T : TruthValue::F;
  };
  return direct_eval(sentences, variant, ckpt.model_config.max_positions, choose);
}

DirectEvalReport direct_eval_mlm(const Checkpoint& ckpt, const std::vector<std::string>& sentences,
                                 Variant variant) {
  if (ckpt.model_config.arch != Arch::MLM)
    throw std::invalid_argument("direct_eval_mlm requires an MLM checkpoint");
  auto choose = [&](const std::string& s, const Template& t) {
    std::vector<double> dist = mlm_fill_logits(ckpt, s + "=" + t.pattern);
    return dist[static_cast<int>(Token::LitT)] > dist[static_cast<int>(Token::LitF)]
               ? TruthValue::T
               : TruthValue::F;
  };
  return direct_eval(sentences, variant, ckpt.model_config.max_positions, choose);
}

Json DirectEvalReport::to_json() const {
  Json j;
  Json per;
  for (size_t i = 0; i < template_names.size(); ++i)
    per[template_names[i]] = per_template_accuracy[i];
  j["per_template"] = per;
  j["mean"] = mean;
  j["stddev"] = stddev;
  j["skipped_overlength"] = skipped_overlength;
  return j;
}

}  // namespace logiclab
