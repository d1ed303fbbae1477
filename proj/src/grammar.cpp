#include "logiclab/grammar.hpp"

#include <cmath>

namespace logiclab {

void Pcfg::validate() const {
  auto check = [](const std::vector<std::pair<Rule, double>>& rules, const char* name) {
    double sum = 0.0;
    for (auto& [rule, p] : rules) {
      if (p < 0.0) throw std::invalid_argument(std::string(name) + ": negative probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument(std::string(name) + ": probabilities must sum to 1");
  };
  check(s_rules, "S");
  check(e_rules, "e");
  for (auto& [rule, p] : s_rules)
    if (rule == Rule::LitTRule || rule == Rule::LitFRule)
      throw std::invalid_argument("S has no literal production");
}

Pcfg default_pcfg(Variant variant) {
  double binary = variant == Variant::Lt ? 0.06 : 0.03;
  // Remaining mass: negation p, literals p/2 each, so 2*binary + 2p = 1.
  double neg = (1.0 - 2.0 * binary) / 2.0;
  double lit = neg / 2.0;
  double s_mass = 2.0 * binary + neg;

  Pcfg g;
  g.variant = variant;
  g.e_rules = {{Rule::AndRule, binary},
               {Rule::OrRule, binary},
               {Rule::NotRule, neg},
               {Rule::LitTRule, lit},
               {Rule::LitFRule, lit}};
  g.s_rules = {{Rule::AndRule, binary / s_mass},
               {Rule::OrRule, binary / s_mass},
               {Rule::NotRule, neg / s_mass}};
  g.validate();
  return g;
}

std::vector<Token> SynTree::tokens() const {
  std::vector<Token> out(num_tokens());
  for (const TreeNode& n : nodes)
    if (n.kind == NodeKind::Terminal) out[n.span_begin] = n.token;
  return out;
}

bool SynTree::dominates(int a, int b) const {
  node(a);
  for (int cur = b; cur != -1; cur = nodes[cur].parent)
    if (cur == a) return true;
  return false;
}

bool SynTree::operator==(const SynTree& other) const {
  if (nodes.size() != other.nodes.size()) return false;
  for (size_t i = 0; i < nodes.size(); ++i) {
    const TreeNode& x = nodes[i];
    const TreeNode& y = other.nodes[i];
    if (x.kind != y.kind || x.parent != y.parent || x.children != y.children ||
        x.span_begin != y.span_begin || x.span_end != y.span_end)
      return false;
    if (x.kind == NodeKind::Terminal && x.token != y.token) return false;
    if (x.kind != NodeKind::Terminal && x.rule != y.rule) return false;
  }
  return true;
}

namespace {

Rule draw_rule(const std::vector<std::pair<Rule, double>>& rules, Rng& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  for (auto& [rule, p] : rules) {
    acc += p;
    if (u < acc) return rule;
  }
  return rules.back().first;
}

class Sampler {
 public:
  Sampler(const Pcfg& pcfg, Rng& rng, int max_tokens, SampleStats* stats)
      : pcfg_(pcfg), rng_(rng), max_tokens_(max_tokens), stats_(stats) {}

  // One attempt; false on length rejection. Tokens are emitted left to
  // right, so the attempt aborts as soon as the partial yield exceeds the
  // cap rather than finishing an oversized derivation.
  bool attempt(SynTree& tree) {
    tree.nodes.clear();
    n_tokens_ = 0;
    int root = new_node(tree, NodeKind::S, -1);
    Rule rule = draw_rule(pcfg_.s_rules, rng_);
    tree.nodes[root].rule = rule;
    if (!expand(tree, root, rule)) return false;
    assign_spans(tree);
    return true;
  }

 private:
  int new_node(SynTree& tree, NodeKind kind, int parent) {
    int id = static_cast<int>(tree.nodes.size());
    TreeNode n;
    n.id = id;
    n.kind = kind;
    n.parent = parent;
    tree.nodes.push_back(std::move(n));
    if (parent >= 0) tree.nodes[parent].children.push_back(id);
    return id;
  }

  bool emit(SynTree& tree, int parent, Token tok) {
    if (++n_tokens_ > max_tokens_) return false;
    int id = new_node(tree, NodeKind::Terminal, parent);
    tree.nodes[id].token = tok;
    return true;
  }

  // Depth-first, left-to-right expansion keeps node ids in preorder.
  bool expand(SynTree& tree, int id, Rule rule) {
    switch (rule) {
      case Rule::LitTRule: return emit(tree, id, Token::LitT);
      case Rule::LitFRule: return emit(tree, id, Token::LitF);
      case Rule::NotRule: {
        if (!emit(tree, id, Token::LParen)) return false;
        if (!emit(tree, id, Token::Not)) return false;
        if (!expand_child(tree, id)) return false;
        return emit(tree, id, Token::RParen);
      }
      case Rule::AndRule:
      case Rule::OrRule: {
        if (!emit(tree, id, Token::LParen)) return false;
        if (!expand_child(tree, id)) return false;
        if (!emit(tree, id, rule == Rule::AndRule ? Token::And : Token::Or)) return false;
        if (!expand_child(tree, id)) return false;
        return emit(tree, id, Token::RParen);
      }
    }
    return false;
  }

  bool expand_child(SynTree& tree, int parent) {
    int id = new_node(tree, NodeKind::E, parent);
    Rule rule = draw_rule(pcfg_.e_rules, rng_);
    if (stats_) stats_->e_rule_counts[static_cast<size_t>(rule)]++;
    tree.nodes[id].rule = rule;
    return expand(tree, id, rule);
  }

  void assign_spans(SynTree& tree) {
    int pos = 0;
    for (TreeNode& n : tree.nodes) {
      if (n.kind == NodeKind::Terminal) {
        n.span_begin = pos;
        n.span_end = ++pos;
      }
    }
    // Nonterminal spans: children are contiguous; last node first (postorder
    // via reverse preorder works since children have larger ids).
    for (auto it = tree.nodes.rbegin(); it != tree.nodes.rend(); ++it) {
      if (it->kind != NodeKind::Terminal) {
        it->span_begin = tree.nodes[it->children.front()].span_begin;
        it->span_end = tree.nodes[it->children.back()].span_end;
      }
    }
  }

  const Pcfg& pcfg_;
  Rng& rng_;
  int max_tokens_;
  SampleStats* stats_;
  int n_tokens_ = 0;
};

}  // namespace

SynTree sample_sentence(const Pcfg& pcfg, Rng& rng, int max_tokens, int rejection_budget,
                        SampleStats* stats) {
  if (max_tokens < 4) throw std::invalid_argument("max_tokens must be >= 4");
  Sampler sampler(pcfg, rng, max_tokens, stats);
  SynTree tree;
  for (int i = 0; i < rejection_budget; ++i) {
    if (sampler.attempt(tree)) return tree;
    if (stats) stats->rejected++;
  }
  throw std::runtime_error("sample_sentence: rejection budget exhausted (max_tokens=" +
                           std::to_string(max_tokens) + ")");
}

namespace {

// Recursive-descent parser. The grammar is fully parenthesized, so one token
// of lookahead suffices and derivations are unique.
class Parser {
 public:
  explicit Parser(const std::vector<Token>& tokens) : tokens_(tokens) {}

  SynTree run() {
    SynTree tree;
    parse_node(tree, NodeKind::S, -1);
    if (pos_ != static_cast<int>(tokens_.size()))
      throw ParseError("trailing input", pos_);
    return tree;
  }

 private:
  Token peek() {
    if (pos_ >= static_cast<int>(tokens_.size()))
      throw ParseError("unexpected end of input", pos_);
    return tokens_[pos_];
  }

  void expect(SynTree& tree, int parent, Token want) {
    Token got = peek();
    if (got != want) throw ParseError("unexpected token", pos_);
    int id = new_node(tree, NodeKind::Terminal, parent);
    tree.nodes[id].token = got;
    tree.nodes[id].span_begin = pos_;
    tree.nodes[id].span_end = pos_ + 1;
    ++pos_;
  }

  int new_node(SynTree& tree, NodeKind kind, int parent) {
    int id = static_cast<int>(tree.nodes.size());
    TreeNode n;
    n.id = id;
    n.kind = kind;
    n.parent = parent;
    tree.nodes.push_back(std::move(n));
    if (parent >= 0) tree.nodes[parent].children.push_back(id);
    return id;
  }

  int parse_node(SynTree& tree, NodeKind kind, int parent) {
    int id = new_node(tree, kind, parent);
    int begin = pos_;
    Token t = peek();
    if (t == Token::LitT || t == Token::LitF) {
      if (kind == NodeKind::S) throw ParseError("S cannot be a bare literal", pos_);
      tree.nodes[id].rule = t == Token::LitT ? Rule::LitTRule : Rule::LitFRule;
      expect(tree, id, t);
    } else if (t == Token::LParen) {
      expect(tree, id, Token::LParen);
      if (peek() == Token::Not) {
        tree.nodes[id].rule = Rule::NotRule;
        expect(tree, id, Token::Not);
        parse_node(tree, NodeKind::E, id);
        expect(tree, id, Token::RParen);
      } else {
        parse_node(tree, NodeKind::E, id);
        Token op = peek();
        if (op != Token::And && op != Token::Or)
          throw ParseError("expected connective", pos_);
        tree.nodes[id].rule = op == Token::And ? Rule::AndRule : Rule::OrRule;
        expect(tree, id, op);
        parse_node(tree, NodeKind::E, id);
        expect(tree, id, Token::RParen);
      }
    } else {
      throw ParseError("unexpected token", pos_);
    }
    tree.nodes[id].span_begin = begin;
    tree.nodes[id].span_end = pos_;
    return id;
  }

  const std::vector<Token>& tokens_;
  int pos_ = 0;
};

}  // namespace

SynTree parse(const std::vector<Token>& tokens) { return Parser(tokens).run(); }

bool c_commands(const SynTree& tree, int a, int b) {
  tree.node(a);
  tree.node(b);
  if (a == b) return false;
  if (tree.dominates(a, b) || tree.dominates(b, a)) return false;
  int parent = tree.nodes[a].parent;
  if (parent < 0) return false;
  for (int sib : tree.nodes[parent].children)
    if (sib != a && tree.dominates(sib, b)) return true;
  return false;
}

SynTree subtree_copy(const SynTree& tree, int id) {
  const TreeNode& root = tree.node(id);
  SynTree out;
  int base_span = root.span_begin;
  // Preorder ids are contiguous within a subtree.
  int base_id = id;
  int end_id = id + 1;
  while (end_id < static_cast<int>(tree.nodes.size()) &&
         tree.nodes[end_id].span_end <= root.span_end && tree.dominates(id, end_id))
    ++end_id;
  out.nodes.reserve(end_id - base_id);
  for (int i = base_id; i < end_id; ++i) {
    TreeNode n = tree.nodes[i];
    n.id = i - base_id;
    n.parent = i == base_id ? -1 : n.parent - base_id;
    for (int& c : n.children) c -= base_id;
    n.span_begin -= base_span;
    n.span_end -= base_span;
    out.nodes.push_back(std::move(n));
  }
  // A standalone literal subexpression is an e node, still a valid tree here.
  return out;
}

}  // namespace logiclab
