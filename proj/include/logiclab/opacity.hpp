#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "logiclab/rng.hpp"
#include "logiclab/stats.hpp"

#include <nlohmann/json.hpp>

namespace logiclab {

// One co-referring (proper name, definite description) pair from the user
// supplied facts file.
struct FactEntry {
  std::string name;
  std::string description;
  std::string category;                 // e.g. "official-language", "person"
  std::vector<std::string> pronoun_pool;  // subset of {"She", "He"}

  static FactEntry from_json(const Json& j);
  Json to_json() const;
};

// Per-category surface templates.
struct CategoryTemplates {
  std::string embedded_verb_phrase;  // e.g. "to speak" -> "[P] [V] to speak [E]."
  std::optional<std::string> mainclause_transparent_verb;  // e.g. "speaks"
};

struct VerbInventory {
  std::vector<std::string> transparent;
  std::vector<std::string> opaque;
  std::string mainclause_opaque;  // "dislikes"

  static VerbInventory standard();
};

// Built-in template registry; throws for a category with no templates.
const CategoryTemplates& category_templates(const std::string& category);

enum class PairShape { Simple, Coordinated };

struct OpacityPair {
  std::string sentence_a;  // proper-name variant
  std::string sentence_b;  // definite-description variant
  bool equivalent;
  std::string verb;            // alternation-site verb
  std::string attractor_verb;  // coordinated shape only
  std::string fact_name;
  std::string attractor_fact;  // coordinated shape only
  PairShape shape = PairShape::Simple;

  Json to_json() const;
};

// Every fact x pronoun x embedded verb, plus main-clause pairs; label =
// non-equivalent iff the alternation site's verb is opaque.
std::vector<OpacityPair> generate_simple_pairs(const std::vector<FactEntry>& facts,
                                               const VerbInventory& inventory);

// Conjoined clauses over distinct facts: one opaque-verb clause, one
// transparent-verb clause, the name/description alternation in exactly one
// of them. Label = equivalent iff the alternation is in the transparent
// clause. Subsampled to n_target.
std::vector<OpacityPair> generate_coordinated_pairs(const std::vector<FactEntry>& facts,
                                                    const VerbInventory& inventory, Rng& rng,
                                                    size_t n_target);

// Stratified-by-label 8/1/1 split (pair level).
struct OpacitySplit {
  std::vector<OpacityPair> train, valid, test;
};
OpacitySplit split_dataset(std::vector<OpacityPair> pairs, Rng& rng);

std::vector<FactEntry> read_facts(const std::string& path);
void write_pairs(const std::vector<OpacityPair>& pairs, const std::string& path);

}  // namespace logiclab
