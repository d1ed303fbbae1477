#include "logiclab/opacity.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace logiclab {

VerbInventory VerbInventory::standard() {
  VerbInventory inv;
  inv.transparent = {"starts", "begins", "ceases", "stops", "managed", "failed"};
  inv.opaque = {"wants", "intends", "hopes", "begs", "preferred", "suggested"};
  inv.mainclause_opaque = "dislikes";
  return inv;
}

const CategoryTemplates& category_templates(const std::string& category) {
  static const std::map<std::string, CategoryTemplates> kRegistry = {
      {"official-language", {"to speak", "speaks"}},
      {"native-language", {"to speak", "speaks"}},
      {"original-language", {"to speak", "speaks"}},
      {"religion", {"to follow", "follows"}},
      {"capital", {"to visit", "visits"}},
      {"person", {"to meet", std::nullopt}},
  };
  auto it = kRegistry.find(category);
  if (it == kRegistry.end())
    throw std::invalid_argument("no templates registered for category '" + category + "'");
  return it->second;
}

FactEntry FactEntry::from_json(const Json& j) {
  FactEntry f;
  f.name = j.at("name").get<std::string>();
  f.description = j.at("description").get<std::string>();
  f.category = j.at("category").get<std::string>();
  for (auto& p : j.at("pronouns")) f.pronoun_pool.push_back(p.get<std::string>());
  if (f.name == f.description) throw std::invalid_argument("fact name equals description");
  if (f.pronoun_pool.empty()) throw std::invalid_argument("fact needs at least one pronoun");
  for (auto& p : f.pronoun_pool)
    if (p != "She" && p != "He") throw std::invalid_argument("pronoun must be She or He");
  category_templates(f.category);  // must be registered
  return f;
}

Json FactEntry::to_json() const {
  Json j;
  j["name"] = name;
  j["description"] = description;
  j["category"] = category;
  j["pronouns"] = pronoun_pool;
  return j;
}

Json OpacityPair::to_json() const {
  Json j;
  j["a"] = sentence_a;
  j["b"] = sentence_b;
  j["label"] = equivalent ? "equivalent" : "non_equivalent";
  j["shape"] = shape == PairShape::Simple ? "simple" : "coordinated";
  j["verb"] = verb;
  j["attractor_verb"] = attractor_verb;
  j["fact"] = fact_name;
  j["attractor_fact"] = attractor_fact;
  return j;
}

namespace {

std::string lower_first(std::string s) {
  if (!s.empty() && s[0] >= 'A' && s[0] <= 'Z') s[0] = char(s[0] - 'A' + 'a');
  return s;
}

// Clause without final period: "She wants to meet <entity>" or
// "He speaks <entity>".
std::string embedded_clause(const std::string& pronoun, const std::string& verb,
                            const CategoryTemplates& tpl, const std::string& entity) {
  return pronoun + " " + verb + " " + tpl.embedded_verb_phrase + " " + entity;
}

std::string main_clause(const std::string& pronoun, const std::string& verb,
                        const std::string& entity) {
  return pronoun + " " + verb + " " + entity;
}

// All clause verbs of one class usable for a fact's category: the six
// embedded verbs plus the main-clause verb where one exists.
struct ClauseChoice {
  std::string verb;
  bool is_main = false;
};

std::vector<ClauseChoice> clause_choices(const VerbInventory& inv, VerbClass cls,
                                         const CategoryTemplates& tpl) {
  std::vector<ClauseChoice> out;
  const auto& verbs = cls == VerbClass::Transparent ? inv.transparent : inv.opaque;
  for (auto& v : verbs) out.push_back({v, false});
  if (cls == VerbClass::Transparent) {
    if (tpl.mainclause_transparent_verb) out.push_back({*tpl.mainclause_transparent_verb, true});
  } else {
    out.push_back({inv.mainclause_opaque, true});
  }
  return out;
}

std::string render_clause(const ClauseChoice& choice, const std::string& pronoun,
                          const CategoryTemplates& tpl, const std::string& entity) {
  return choice.is_main ? main_clause(pronoun, choice.verb, entity)
                        : embedded_clause(pronoun, choice.verb, tpl, entity);
}

}  // namespace

std::vector<OpacityPair> generate_simple_pairs(const std::vector<FactEntry>& facts,
                                               const VerbInventory& inventory) {
  std::vector<OpacityPair> out;
  for (const FactEntry& fact : facts) {
    const CategoryTemplates& tpl = category_templates(fact.category);
    for (const std::string& pronoun : fact.pronoun_pool) {
      auto add = [&](const std::string& verb, bool is_main, bool transparent) {
        ClauseChoice c{verb, is_main};
        OpacityPair pair;
        pair.sentence_a = render_clause(c, pronoun, tpl, fact.name) + ".";
        pair.sentence_b = render_clause(c, pronoun, tpl, fact.description) + ".";
        pair.equivalent = transparent;
        pair.verb = verb;
        pair.fact_name = fact.name;
        pair.shape = PairShape::Simple;
        out.push_back(std::move(pair));
      };
      // Embedded-clause pairs.
      for (auto& v : inventory.transparent) add(v, false, true);
      for (auto& v : inventory.opaque) add(v, false, false);
      // Main-clause pairs.
      if (tpl.mainclause_transparent_verb) add(*tpl.mainclause_transparent_verb, true, true);
      add(inventory.mainclause_opaque, true, false);
    }
  }
  return out;
}

std::vector<OpacityPair> generate_coordinated_pairs(const std::vector<FactEntry>& facts,
                                                    const VerbInventory& inventory, Rng& rng,
                                                    size_t n_target) {
  if (facts.size() < 2) throw std::invalid_argument("coordinated pairs need >= 2 facts");
  std::vector<OpacityPair> out;
  std::set<std::pair<std::string, std::string>> seen;
  size_t attempts = 0, max_attempts = n_target * 200 + 1000;
  while (out.size() < n_target && attempts++ < max_attempts) {
    size_t i = rng.uniform_int(facts.size());
    size_t j = rng.uniform_int(facts.size() - 1);
    if (j >= i) j++;
    const FactEntry& alt_fact = facts[i];   // carries the name/description alternation
    const FactEntry& att_fact = facts[j];   // attractor clause, proper name only
    const CategoryTemplates& alt_tpl = category_templates(alt_fact.category);
    const CategoryTemplates& att_tpl = category_templates(att_fact.category);

    bool alt_transparent = rng.uniform() < 0.5;
    auto alt_pool = clause_choices(inventory, alt_transparent ? VerbClass::Transparent
                                                              : VerbClass::Opaque, alt_tpl);
    auto att_pool = clause_choices(inventory, alt_transparent ? VerbClass::Opaque
                                                              : VerbClass::Transparent, att_tpl);
    ClauseChoice alt_verb = alt_pool[rng.uniform_int(alt_pool.size())];
    ClauseChoice att_verb = att_pool[rng.uniform_int(att_pool.size())];
    std::string alt_pron = alt_fact.pronoun_pool[rng.uniform_int(alt_fact.pronoun_pool.size())];
    std::string att_pron = att_fact.pronoun_pool[rng.uniform_int(att_fact.pronoun_pool.size())];

    std::string alt_a = render_clause(alt_verb, alt_pron, alt_tpl, alt_fact.name);
    std::string alt_b = render_clause(alt_verb, alt_pron, alt_tpl, alt_fact.description);
    std::string att = render_clause(att_verb, att_pron, att_tpl, att_fact.name);

    bool alt_first = rng.uniform() < 0.5;
    auto join = [](const std::string& first, const std::string& second) {
      return first + " and " + lower_first(second) + ".";
    };
    OpacityPair pair;
    if (alt_first) {
      pair.sentence_a = join(alt_a, att);
      pair.sentence_b = join(alt_b, att);
    } else {
      pair.sentence_a = join(att, alt_a);
      pair.sentence_b = join(att, alt_b);
    }
    if (!seen.insert({pair.sentence_a, pair.sentence_b}).second) continue;
    pair.equivalent = alt_transparent;
    pair.verb = alt_verb.verb;
    pair.attractor_verb = att_verb.verb;
    pair.fact_name = alt_fact.name;
    pair.attractor_fact = att_fact.name;
    pair.shape = PairShape::Coordinated;
    out.push_back(std::move(pair));
  }
  if (out.size() < n_target)
    throw std::runtime_error("could not generate enough distinct coordinated pairs");
  return out;
}

OpacitySplit split_dataset(std::vector<OpacityPair> pairs, Rng& rng) {
  if (pairs.size() < 10) throw std::invalid_argument("need at least 10 pairs to split 8/1/1");
  OpacitySplit split;
  // Stratified by label so every split keeps the global balance.
  std::vector<OpacityPair> strata[2];
  for (auto& p : pairs) strata[p.equivalent ? 1 : 0].push_back(std::move(p));
  for (auto& stratum : strata) {
    for (size_t i = stratum.size(); i > 1; --i)
      std::swap(stratum[i - 1], stratum[rng.uniform_int(i)]);
    size_t n = stratum.size();
    size_t n_valid = (n + 5) / 10;  // round(n/10)
    size_t n_test = (n + 5) / 10;
    size_t n_train = n - n_valid - n_test;
    for (size_t i = 0; i < n; ++i) {
      if (i < n_train)
        split.train.push_back(std::move(stratum[i]));
      else if (i < n_train + n_valid)
        split.valid.push_back(std::move(stratum[i]));
      else
        split.test.push_back(std::move(stratum[i]));
    }
  }
  return split;
}

std::vector<FactEntry> read_facts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<FactEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(FactEntry::from_json(Json::parse(line)));
  }
  return out;
}

void write_pairs(const std::vector<OpacityPair>& pairs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (auto& p : pairs) out << p.to_json().dump() << "\n";
}

}  // namespace logiclab
