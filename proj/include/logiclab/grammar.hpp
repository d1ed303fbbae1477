#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "logiclab/rng.hpp"
#include "logiclab/token.hpp"

namespace logiclab {

enum class Variant { Lt, Ln };

inline const char* variant_name(Variant v) { return v == Variant::Lt ? "lt" : "ln"; }

// The five expansion rules. S uses only the first three.
enum class Rule : uint8_t { AndRule, OrRule, NotRule, LitTRule, LitFRule };

struct Pcfg {
  // (rule, probability), in the fixed grammar order.
  std::vector<std::pair<Rule, double>> s_rules;
  std::vector<std::pair<Rule, double>> e_rules;
  Variant variant = Variant::Lt;

  void validate() const;  // throws std::invalid_argument on bad mass
};

// Hand-designed rule distribution: binary rules 0.06 each (Lt) or 0.03 each
// (Ln); T and F each take half the negation rule's mass; S renormalizes the
// three non-literal rules proportionally.
Pcfg default_pcfg(Variant variant);

enum class NodeKind : uint8_t { S, E, Terminal };

struct TreeNode {
  int id = -1;
  NodeKind kind = NodeKind::Terminal;
  Token token = Token::LitT;  // meaningful only for terminals
  Rule rule = Rule::LitTRule; // meaningful only for nonterminals
  int parent = -1;
  std::vector<int> children;
  int span_begin = 0;  // half-open token interval covered by this node
  int span_end = 0;
};

// Parse tree of one logic sentence. Node ids are dense preorder integers;
// node 0 is the root.
struct SynTree {
  std::vector<TreeNode> nodes;

  const TreeNode& node(int id) const {
    if (id < 0 || id >= static_cast<int>(nodes.size())) throw std::out_of_range("node id");
    return nodes[id];
  }
  int root_id() const { return 0; }
  int num_tokens() const { return nodes.empty() ? 0 : nodes[0].span_end; }

  std::vector<Token> tokens() const;
  std::string text() const { return detokenize(tokens()); }

  // Reflexive domination: a node dominates itself and all its descendants.
  bool dominates(int a, int b) const;

  bool operator==(const SynTree& other) const;
};

struct ParseError : std::runtime_error {
  int index;  // offending token index (== length for unexpected end)
  ParseError(const std::string& msg, int idx)
      : std::runtime_error(msg + " at index " + std::to_string(idx)), index(idx) {}
};

// Unique derivation from S, or ParseError. Round trip: parse(t.tokens()) == t.
SynTree parse(const std::vector<Token>& tokens);
inline SynTree parse(const std::string& s) { return parse(tokenize(s)); }

struct SampleStats {
  // Pre-rejection e-expansion counts, indexed by Rule. Used to verify the
  // sampler draws from the configured distribution.
  std::array<uint64_t, 5> e_rule_counts{};
  uint64_t rejected = 0;
};

// Top-down ancestral sampling from S; whole-sentence rejection when the yield
// exceeds max_tokens. Throws std::runtime_error once the rejection budget is
// exhausted.
SynTree sample_sentence(const Pcfg& pcfg, Rng& rng, int max_tokens,
                        int rejection_budget = 10000, SampleStats* stats = nullptr);

// True iff a != b, neither dominates the other, and some sibling of a
// dominates b.
bool c_commands(const SynTree& tree, int a, int b);

// Standalone copy of the subtree rooted at `id` (ids reindexed to preorder,
// spans rebased to 0).
SynTree subtree_copy(const SynTree& tree, int id);

}  // namespace logiclab
