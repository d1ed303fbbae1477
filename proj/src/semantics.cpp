#include "logiclab/semantics.hpp"

namespace logiclab {

namespace {

// Bottom-up evaluation with an optional set of literals whose meaning is
// inverted. Reverse preorder visits children before parents.
TruthValue eval_marked(const SynTree& tree, const std::set<int>& inverted,
                       NodeValues* per_node) {
  std::vector<TruthValue> val(tree.nodes.size(), TruthValue::F);
  for (auto it = tree.nodes.rbegin(); it != tree.nodes.rend(); ++it) {
    const TreeNode& n = *it;
    if (n.kind == NodeKind::Terminal) {
      if (n.token == Token::LitT || n.token == Token::LitF) {
        TruthValue v = truth(n.token == Token::LitT);
        if (inverted.contains(n.id)) v = negate(v);
        val[n.id] = v;
      }
      continue;
    }
    switch (n.rule) {
      case Rule::LitTRule:
      case Rule::LitFRule:
        val[n.id] = val[n.children.front()];
        break;
      case Rule::NotRule:
        val[n.id] = negate(val[n.children[2]]);
        break;
      case Rule::AndRule:
        val[n.id] = truth(as_bool(val[n.children[1]]) && as_bool(val[n.children[3]]));
        break;
      case Rule::OrRule:
        val[n.id] = truth(as_bool(val[n.children[1]]) || as_bool(val[n.children[3]]));
        break;
    }
  }
  if (per_node) *per_node = val;
  return val[tree.root_id()];
}

// A binder is any node whose expansion is syntactically (¬T) or (¬F): a
// negation whose operand expands directly to a literal.
bool is_binder(const SynTree& tree, const TreeNode& n, TruthValue* polarity) {
  if (n.kind == NodeKind::Terminal || n.rule != Rule::NotRule) return false;
  const TreeNode& operand = tree.nodes[n.children[2]];
  if (operand.rule == Rule::LitTRule) { *polarity = TruthValue::T; return true; }
  if (operand.rule == Rule::LitFRule) { *polarity = TruthValue::F; return true; }
  return false;
}

void collect_literals(const SynTree& tree, int id, TruthValue polarity, std::set<int>& out) {
  const TreeNode& n = tree.nodes[id];
  if (n.kind == NodeKind::Terminal) {
    if ((n.token == Token::LitT && polarity == TruthValue::T) ||
        (n.token == Token::LitF && polarity == TruthValue::F))
      out.insert(id);
    return;
  }
  for (int c : n.children) collect_literals(tree, c, polarity, out);
}

}  // namespace

TruthValue eval_lt(const SynTree& tree, NodeValues* per_node) {
  return eval_marked(tree, {}, per_node);
}

BinderMarking mark_binders(const SynTree& tree) {
  BinderMarking marking;
  for (const TreeNode& n : tree.nodes) {
    TruthValue polarity;
    if (!is_binder(tree, n, &polarity)) continue;
    if (n.parent < 0) continue;  // root has no siblings
    for (int sib : tree.nodes[n.parent].children) {
      if (sib == n.id) continue;
      if (tree.nodes[sib].kind == NodeKind::Terminal) continue;
      marking.binders.push_back({n.id, polarity, sib});
      collect_literals(tree, sib, polarity, marking.inverted_literals);
    }
  }
  return marking;
}

TruthValue eval_ln(const SynTree& tree, NodeValues* per_node) {
  return eval_marked(tree, mark_binders(tree).inverted_literals, per_node);
}

int assertion_oracle(const SynTree& a, const SynTree& b, Variant variant) {
  return eval(a, variant) == eval(b, variant) ? 1 : 0;
}

void transparency_check_tree(const SynTree& tree, Variant variant,
                             TransparencyReport& report) {
  NodeValues in_situ;
  eval(tree, variant, &in_situ);
  report.sentences_checked++;
  std::string text = tree.text();
  for (const TreeNode& n : tree.nodes) {
    if (n.kind == NodeKind::Terminal || n.id == tree.root_id()) continue;
    report.nodes_checked++;
    SynTree standalone = subtree_copy(tree, n.id);
    TruthValue solo = eval(standalone, variant);
    if (solo != in_situ[n.id])
      report.violations.push_back({text, n.id, in_situ[n.id], solo});
  }
}

TransparencyReport transparency_check(Variant variant, const Pcfg& pcfg, int n_samples,
                                      Rng& rng, int max_tokens) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  TransparencyReport report;
  for (int i = 0; i < n_samples; ++i)
    transparency_check_tree(sample_sentence(pcfg, rng, max_tokens), variant, report);
  return report;
}

}  // namespace logiclab
