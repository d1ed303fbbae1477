#pragma once

#include <string>
#include <vector>

#include "logiclab/corpus.hpp"
#include "logiclab/grammar.hpp"

namespace logiclab {

struct Violation {
  size_t line;  // 1-based; 0 when the violation is file-level
  std::string kind;  // "parse", "denotation", "closure", "disjoint"
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  size_t lines_checked = 0;

  bool ok() const { return violations.empty(); }
  Json to_json() const;
};

// Pretraining corpus file of `a=b` lines: every line must parse, both sides
// must have equal denotations under `variant`, and the closure declared by
// the flags must hold (symmetry: each a=b with a != b has a matching b=a;
// reflexivity: s=s is present for every sentence that appears).
ValidationReport validate_corpus(const std::string& path, Variant variant, bool reflexivity,
                                 bool symmetry);

// Probe pair JSONL: records must parse, denotation fields must match the
// evaluator, and the label must agree with denotation equality.
ValidationReport validate_pair_file(const std::string& path);

// Splits under `dir` (train/valid/test.jsonl) must not share any (a, b) pair.
ValidationReport validate_split_disjointness(const std::string& dir);

}  // namespace logiclab
