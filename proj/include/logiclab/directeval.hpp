#pragma once

#include <functional>

#include "logiclab/neural.hpp"
#include "logiclab/semantics.hpp"

namespace logiclab {

// One right-hand-side template for training-free evaluation. The pattern is
// a minimal sentence with exactly one mask slot.
struct Template {
  std::string name;
  std::string pattern;  // e.g. "(T&_)"
  // Fill whose presence makes `pattern[fill] = v` consistent: v for the four
  // binary templates, the negated value for "(!_)".
  TruthValue expected_fill(TruthValue v) const { return negated ? negate(v) : v; }
  bool negated = false;

  std::string filled(TruthValue fill) const {
    std::string s = pattern;
    s[s.find('_')] = truth_char(fill);
    return s;
  }
};

// The five templates, in fixed order.
const std::vector<Template>& templates();

struct DirectEvalReport {
  std::vector<std::string> template_names;
  std::vector<double> per_template_accuracy;
  double mean = 0;
  double stddev = 0;  // across the five templates
  int skipped_overlength = 0;
  Json to_json() const;
};

// Two-way forced choice T vs F on `s=pattern[fill]`, scored by the given
// chooser: returns the preferred fill for one (sentence, template) query.
using FillChooser = std::function<TruthValue(const std::string& sentence, const Template& t)>;

DirectEvalReport direct_eval(const std::vector<std::string>& sentences, Variant variant,
                             int max_positions, const FillChooser& choose);

// ALM: compares score_sequence of the two filled sequences.
DirectEvalReport direct_eval_alm(const Checkpoint& ckpt, const std::vector<std::string>& sentences,
                                 Variant variant);

// MLM: compares mlm_fill_logits at the mask restricted to {T, F}.
DirectEvalReport direct_eval_mlm(const Checkpoint& ckpt, const std::vector<std::string>& sentences,
                                 Variant variant);

}  // namespace logiclab
