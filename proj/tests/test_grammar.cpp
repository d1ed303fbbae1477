#include <doctest.h>

#include <set>

#include "logiclab/grammar.hpp"

using namespace logiclab;

namespace {

// Reference c-command: walk b's ancestor chain explicitly instead of using
// the recursive domination predicate.
bool cc_reference(const SynTree& t, int a, int b) {
  if (a == b) return false;
  std::set<int> b_chain;  // b and all its ancestors
  for (int x = b; x >= 0; x = t.node(x).parent) b_chain.insert(x);
  if (b_chain.contains(a)) return false;  // a dominates b (a is an ancestor) or a == b
  // b dominates a?
  for (int x = a; x >= 0; x = t.node(x).parent)
    if (x == b) return false;
  int p = t.node(a).parent;
  if (p < 0) return false;
  for (int sib : t.node(p).children)
    if (sib != a && b_chain.contains(sib)) return true;
  return false;
}

}  // namespace

TEST_CASE("default rule distributions") {
  Pcfg lt = default_pcfg(Variant::Lt);
  REQUIRE(lt.e_rules.size() == 5);
  CHECK(lt.e_rules[0].second == doctest::Approx(0.06));
  CHECK(lt.e_rules[1].second == doctest::Approx(0.06));
  CHECK(lt.e_rules[2].second == doctest::Approx(0.44));
  CHECK(lt.e_rules[3].second == doctest::Approx(0.22));
  CHECK(lt.e_rules[4].second == doctest::Approx(0.22));
  REQUIRE(lt.s_rules.size() == 3);
  CHECK(lt.s_rules[0].second == doctest::Approx(0.06 / 0.56));
  CHECK(lt.s_rules[2].second == doctest::Approx(0.44 / 0.56));

  Pcfg ln = default_pcfg(Variant::Ln);
  CHECK(ln.e_rules[0].second == doctest::Approx(0.03));
  CHECK(ln.e_rules[2].second == doctest::Approx(0.47));
  CHECK(ln.e_rules[3].second == doctest::Approx(0.235));

  for (auto* p : {&lt, &ln}) {
    double se = 0, ss = 0;
    for (auto& [r, v] : p->e_rules) se += v;
    for (auto& [r, v] : p->s_rules) ss += v;
    CHECK(se == doctest::Approx(1.0));
    CHECK(ss == doctest::Approx(1.0));
    p->validate();
  }

  Pcfg bad = lt;
  bad.e_rules[0].second = 0.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("parser accepts grammar sentences and round-trips") {
  for (const char* s : {"(T&F)", "(!T)", "(F|F)", "(((!T)|F)|(!T))", "(!(!(!T)))",
                        "((T&F)|(!(F|T)))"}) {
    SynTree t = parse(s);
    CHECK(t.text() == s);
    SynTree again = parse(t.tokens());
    CHECK(again == t);
  }
}

TEST_CASE("parser rejects malformed input with an index") {
  auto index_of = [](const char* s) {
    try {
      parse(s);
    } catch (const ParseError& e) {
      return e.index;
    }
    return -1;
  };
  CHECK(index_of("T") >= 0);        // bare literal is not a sentence
  CHECK(index_of("(T=") == 2);
  CHECK(index_of("(T&F") == 4);     // missing ')'
  CHECK(index_of("(T&F))") == 5);   // trailing garbage
  CHECK(index_of("()") == 1);
  CHECK(index_of("") == 0);
  CHECK(index_of("(T&_)") >= 0);    // mask is not part of the sentence grammar
  CHECK_THROWS_AS(parse("(a&b)"), std::invalid_argument);  // unknown character
}

TEST_CASE("node ids are dense preorder and spans cover the yield") {
  Rng rng(7);
  Pcfg pcfg = default_pcfg(Variant::Lt);
  for (int i = 0; i < 200; ++i) {
    SynTree t = sample_sentence(pcfg, rng, 64);
    REQUIRE(t.node(0).parent == -1);
    std::string text = t.text();
    int expected = 0;
    for (const TreeNode& n : t.nodes) {
      CHECK(n.id == expected++);
      CHECK(n.span_begin < n.span_end);
      for (int c : n.children) CHECK(t.node(c).parent == n.id);
      if (n.kind != NodeKind::Terminal) {
        // Preorder: children occupy the id range right after the parent.
        CHECK(n.children.front() == n.id + 1);
        SynTree sub = subtree_copy(t, n.id);
        CHECK(sub.text() == text.substr(n.span_begin, n.span_end - n.span_begin));
        CHECK(sub.node(0).parent == -1);
        CHECK(sub.num_tokens() == n.span_end - n.span_begin);
      } else {
        CHECK(n.span_end == n.span_begin + 1);
        CHECK(text[n.span_begin] == token_char(n.token));
      }
    }
  }
}

TEST_CASE("sampler respects the token cap and is deterministic") {
  Pcfg pcfg = default_pcfg(Variant::Lt);
  Rng r1(42), r2(42), r3(43);
  std::vector<std::string> a, b, c;
  for (int i = 0; i < 100; ++i) {
    a.push_back(sample_sentence(pcfg, r1, 30).text());
    b.push_back(sample_sentence(pcfg, r2, 30).text());
    c.push_back(sample_sentence(pcfg, r3, 30).text());
  }
  CHECK(a == b);
  CHECK(a != c);
  for (auto& s : a) CHECK(s.size() <= 30);
}

TEST_CASE("caps below the shortest sentence are rejected up front") {
  Pcfg pcfg = default_pcfg(Variant::Lt);
  Rng rng(1);
  // The shortest sentence, (!T), has four tokens.
  CHECK_THROWS_AS(sample_sentence(pcfg, rng, 3, 50), std::invalid_argument);
  CHECK_THROWS_AS(sample_sentence(pcfg, rng, 8, 0), std::runtime_error);
}

TEST_CASE("sampled e-rule frequencies match the configuration") {
  Pcfg pcfg = default_pcfg(Variant::Lt);
  Rng rng(5);
  SampleStats stats;
  for (int i = 0; i < 20000; ++i) sample_sentence(pcfg, rng, 248, 10000, &stats);
  double total = 0;
  for (auto c : stats.e_rule_counts) total += double(c);
  const double expected[] = {0.06, 0.06, 0.44, 0.22, 0.22};
  for (int r = 0; r < 5; ++r)
    CHECK(double(stats.e_rule_counts[r]) / total == doctest::Approx(expected[r]).epsilon(0.25));
}

TEST_CASE("c-command agrees with the ancestor-chain reference") {
  Pcfg pcfg = default_pcfg(Variant::Lt);
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    SynTree t = sample_sentence(pcfg, rng, 40);
    int n = int(t.nodes.size());
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        CHECK(c_commands(t, a, b) == cc_reference(t, a, b));
  }
}

TEST_CASE("domination is reflexive and follows edges") {
  SynTree t = parse("(((!T)|F)|(!T))");
  for (const TreeNode& n : t.nodes) {
    CHECK(t.dominates(n.id, n.id));
    for (int c : n.children) {
      CHECK(t.dominates(n.id, c));
      CHECK_FALSE(t.dominates(c, n.id));
    }
  }
  CHECK(t.dominates(0, int(t.nodes.size()) - 1));
}
