#pragma once

#include <set>
#include <vector>

#include "logiclab/grammar.hpp"

namespace logiclab {

enum class TruthValue : uint8_t { F = 0, T = 1 };

inline TruthValue truth(bool b) { return b ? TruthValue::T : TruthValue::F; }
inline bool as_bool(TruthValue v) { return v == TruthValue::T; }
inline TruthValue negate(TruthValue v) { return truth(!as_bool(v)); }
inline char truth_char(TruthValue v) { return as_bool(v) ? 'T' : 'F'; }

struct Binder {
  int binder_node_id;
  TruthValue polarity;        // literal kind the binder inverts
  int bound_scope_node_id;    // sibling e-subtree the binder scopes over
};

struct BinderMarking {
  std::set<int> inverted_literals;  // terminal literal node ids, set semantics
  std::vector<Binder> binders;
};

// Denotation of every node (indexed by node id; terminals carry their own /
// inverted value, punctuation terminals carry the enclosing value and are
// not meaningful).
using NodeValues = std::vector<TruthValue>;

// Conventional propositional-logic evaluation.
TruthValue eval_lt(const SynTree& tree, NodeValues* per_node = nullptr);

// Syntactic binder detection: every node expanding to (¬T) or (¬F) inverts
// matching literals in the e-subtrees its siblings head. Idempotent; an
// additional binder of the same polarity does not invert back.
BinderMarking mark_binders(const SynTree& tree);

TruthValue eval_ln(const SynTree& tree, NodeValues* per_node = nullptr);

inline TruthValue eval(const SynTree& tree, Variant v, NodeValues* per_node = nullptr) {
  return v == Variant::Lt ? eval_lt(tree, per_node) : eval_ln(tree, per_node);
}

// Assertion oracle over sentence queries: 1 iff the two sides denote alike.
int assertion_oracle(const SynTree& a, const SynTree& b, Variant variant);

struct TransparencyViolation {
  std::string sentence;
  int node_id;
  TruthValue in_situ_value;
  TruthValue standalone_value;
};

struct TransparencyReport {
  std::vector<TransparencyViolation> violations;
  int sentences_checked = 0;
  int nodes_checked = 0;
};

// Compares every nonterminal subexpression's in-situ denotation against its
// standalone denotation under the same variant.
void transparency_check_tree(const SynTree& tree, Variant variant, TransparencyReport& report);

TransparencyReport transparency_check(Variant variant, const Pcfg& pcfg, int n_samples,
                                      Rng& rng, int max_tokens = 248);

}  // namespace logiclab
