#include <doctest.h>

#include <functional>
#include <set>

#include "logiclab/semantics.hpp"

using namespace logiclab;

namespace {

// Independent string-level evaluator (no tree, no Rule enum).
bool beval(const std::string& s, size_t& i) {
  if (s.at(i) == 'T') { i++; return true; }
  if (s.at(i) == 'F') { i++; return false; }
  REQUIRE(s.at(i) == '(');
  i++;
  if (s.at(i) == '!') {
    i++;
    bool v = beval(s, i);
    REQUIRE(s.at(i) == ')');
    i++;
    return !v;
  }
  bool l = beval(s, i);
  char op = s.at(i++);
  bool r = beval(s, i);
  REQUIRE(s.at(i) == ')');
  i++;
  return op == '&' ? (l && r) : (l || r);
}

bool beval(const std::string& s) {
  size_t i = 0;
  bool v = beval(s, i);
  REQUIRE(i == s.size());
  return v;
}

// Reference binder marking built from scratch: find every "(!T)"/"(!F)"
// subexpression by its surface string, then invert each matching literal it
// c-commands, where c-command is recomputed from ancestor chains.
std::set<int> reference_inverted(const SynTree& t) {
  std::string text = t.text();
  std::set<int> inverted;
  for (const TreeNode& n : t.nodes) {
    if (n.kind == NodeKind::Terminal) continue;
    std::string sub = text.substr(n.span_begin, n.span_end - n.span_begin);
    if (sub != "(!T)" && sub != "(!F)") continue;
    char polarity = sub[2];
    for (const TreeNode& leaf : t.nodes) {
      if (leaf.kind != NodeKind::Terminal) continue;
      if (token_char(leaf.token) != polarity) continue;
      if (c_commands(t, n.id, leaf.id)) inverted.insert(leaf.id);
    }
  }
  return inverted;
}

// Evaluates under the non-transparent reading by rewriting inverted literal
// tokens in the surface string and delegating to the plain evaluator.
bool ln_reference(const SynTree& t) {
  std::string text = t.text();
  for (int id : reference_inverted(t)) {
    char& c = text[t.node(id).span_begin];
    c = c == 'T' ? 'F' : 'T';
  }
  return beval(text);
}

// All sentences with at most max_tokens tokens, by exhaustive expansion.
void enumerate_e(int budget, std::vector<std::string>& out) {
  if (budget >= 1) { out.push_back("T"); out.push_back("F"); }
  if (budget >= 4) {
    std::vector<std::string> inner;
    enumerate_e(budget - 3, inner);
    for (auto& e : inner)
      if (int(e.size()) + 3 <= budget) out.push_back("(!" + e + ")");
  }
  if (budget >= 5) {
    std::vector<std::string> sub;
    enumerate_e(budget - 4, sub);
    for (auto& l : sub)
      for (auto& r : sub)
        if (int(l.size() + r.size()) + 3 <= budget) {
          out.push_back("(" + l + "&" + r + ")");
          out.push_back("(" + l + "|" + r + ")");
        }
  }
}

std::vector<std::string> enumerate_sentences(int max_tokens) {
  std::vector<std::string> es;
  enumerate_e(max_tokens - 3, es);
  std::vector<std::string> out;
  for (auto& e : es)
    if (int(e.size()) + 3 <= max_tokens) out.push_back("(!" + e + ")");
  std::vector<std::string> sub;
  enumerate_e(max_tokens - 4, sub);
  for (auto& l : sub)
    for (auto& r : sub)
      if (int(l.size() + r.size()) + 3 <= max_tokens) {
        out.push_back("(" + l + "&" + r + ")");
        out.push_back("(" + l + "|" + r + ")");
      }
  return out;
}

}  // namespace

TEST_CASE("transparent evaluation goldens") {
  CHECK(eval_lt(parse("(((!T)|F)|(!T))")) == TruthValue::F);
  CHECK(eval_lt(parse("(T&(!F))")) == TruthValue::T);
  CHECK(eval_lt(parse("(!T)")) == TruthValue::F);
}

TEST_CASE("non-transparent evaluation goldens") {
  CHECK(eval_ln(parse("(((!T)|F)|(!T))")) == TruthValue::T);
  CHECK(eval_ln(parse("(T&F)")) == eval_lt(parse("(T&F)")));
}

TEST_CASE("per-node annotation of the binder example") {
  SynTree t = parse("(((!T)|F)|(!T))");
  NodeValues lt, ln;
  eval_lt(t, &lt);
  eval_ln(t, &ln);
  // (node, transparent value, non-transparent value); node 8 is the bound
  // T literal itself.
  struct Row { int id; TruthValue vt, vn; };
  const Row rows[] = {
      {0, TruthValue::F, TruthValue::T},   // whole sentence
      {2, TruthValue::F, TruthValue::T},   // ((!T)|F)
      {4, TruthValue::F, TruthValue::T},   // left (!T)
      {7, TruthValue::T, TruthValue::F},   // e over the bound T
      {8, TruthValue::T, TruthValue::F},   // the bound T leaf
      {11, TruthValue::F, TruthValue::F},  // e over F
      {15, TruthValue::F, TruthValue::F},  // right (!T), the binder
      {18, TruthValue::T, TruthValue::T},  // e over the binder's own T
  };
  for (const Row& r : rows) {
    CHECK(lt.at(r.id) == r.vt);
    CHECK(ln.at(r.id) == r.vn);
  }
}

TEST_CASE("binder marking structure") {
  SynTree t = parse("(((!T)|F)|(!T))");
  BinderMarking m = mark_binders(t);
  CHECK(m.inverted_literals == std::set<int>{8});
  // Two binders exist syntactically; only the right one scopes a subtree
  // with a matching literal. Both still get scope entries.
  bool right_binder_scopes_left = false;
  for (auto& b : m.binders)
    if (b.binder_node_id == 15 && b.bound_scope_node_id == 2 && b.polarity == TruthValue::T)
      right_binder_scopes_left = true;
  CHECK(right_binder_scopes_left);
}

TEST_CASE("mutual binders invert each other's literals once") {
  SynTree t = parse("((!T)&(!T))");
  BinderMarking m = mark_binders(t);
  CHECK(m.inverted_literals.size() == 2);
  // Each (!T) becomes (!F) = T, so the conjunction is T.
  CHECK(eval_ln(t) == TruthValue::T);
  CHECK(eval_lt(t) == TruthValue::F);
  // Idempotence: marking is a pure function of the tree.
  CHECK(mark_binders(t).inverted_literals == m.inverted_literals);
}

TEST_CASE("no binder means both variants coincide") {
  Pcfg pcfg = default_pcfg(Variant::Lt);
  Rng rng(3);
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    SynTree t = sample_sentence(pcfg, rng, 40);
    if (!mark_binders(t).inverted_literals.empty()) continue;
    checked++;
    CHECK(eval_ln(t) == eval_lt(t));
  }
  CHECK(checked > 100);
}

TEST_CASE("transparent evaluator agrees with the string evaluator exhaustively") {
  std::vector<std::string> all = enumerate_sentences(16);
  CHECK(all.size() > 100);
  for (auto& s : all) CHECK(eval_lt(parse(s)) == truth(beval(s)));
}

TEST_CASE("both evaluators agree with references on random samples") {
  Pcfg pcfg = default_pcfg(Variant::Ln);
  Rng rng(17);
  for (int i = 0; i < 10000; ++i) {
    SynTree t = sample_sentence(pcfg, rng, 60);
    CHECK(as_bool(eval_lt(t)) == beval(t.text()));
    CHECK(as_bool(eval_ln(t)) == ln_reference(t));
  }
}

TEST_CASE("De Morgan holds under the transparent semantics") {
  for (const char* a : {"T", "F"})
    for (const char* b : {"T", "F"}) {
      std::string lhs = std::string("(!(") + a + "&" + b + "))";
      std::string rhs = std::string("((!") + a + ")|(!" + b + "))";
      CHECK(eval_lt(parse(lhs)) == eval_lt(parse(rhs)));
    }
}

TEST_CASE("assertion oracle") {
  CHECK(assertion_oracle(parse("(T&F)"), parse("(F|F)"), Variant::Lt) == 1);
  SynTree s = parse("((!T)|F)");
  CHECK(assertion_oracle(s, s, Variant::Lt) == 1);
  CHECK(assertion_oracle(s, s, Variant::Ln) == 1);
  CHECK(assertion_oracle(parse("(!T)"), parse("(!F)"), Variant::Lt) == 0);
}

TEST_CASE("transparency check finds no violations in the transparent language") {
  Rng rng(23);
  TransparencyReport report =
      transparency_check(Variant::Lt, default_pcfg(Variant::Lt), 2000, rng);
  CHECK(report.sentences_checked == 2000);
  CHECK(report.violations.empty());
}

TEST_CASE("transparency violation at the bound literal's expression") {
  TransparencyReport report;
  transparency_check_tree(parse("(((!T)|F)|(!T))"), Variant::Ln, report);
  REQUIRE_FALSE(report.violations.empty());
  bool found = false;
  for (auto& v : report.violations)
    if (v.node_id == 7 && v.in_situ_value == TruthValue::F && v.standalone_value == TruthValue::T)
      found = true;
  CHECK(found);
}

TEST_CASE("binder-free sentences are transparent under both variants") {
  TransparencyReport report;
  transparency_check_tree(parse("(T&F)"), Variant::Ln, report);
  transparency_check_tree(parse("(!(T|F))"), Variant::Ln, report);
  CHECK(report.violations.empty());
}

TEST_CASE("transparency check rejects a non-positive sample count") {
  Rng rng(1);
  CHECK_THROWS_AS(transparency_check(Variant::Lt, default_pcfg(Variant::Lt), 0, rng),
                  std::invalid_argument);
}
