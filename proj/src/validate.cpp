#include "logiclab/validate.hpp"

#include <fstream>
#include <map>
#include <set>

#include "logiclab/semantics.hpp"

namespace logiclab {

Json ValidationReport::to_json() const {
  Json j;
  j["lines_checked"] = lines_checked;
  j["ok"] = ok();
  j["violations"] = Json::array();
  for (const auto& v : violations) {
    Json vj;
    vj["line"] = v.line;
    vj["kind"] = v.kind;
    vj["message"] = v.message;
    j["violations"].push_back(vj);
  }
  return j;
}

namespace {

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

// Parses a sentence and returns its root denotation, or records a parse
// violation and returns nullopt.
std::optional<TruthValue> checked_eval(const std::string& text, Variant variant, size_t line,
                                       const std::string& side, ValidationReport& report) {
  try {
    SynTree tree = parse(text);
    return eval(tree, variant);
  } catch (const ParseError& e) {
    report.violations.push_back(
        {line, "parse", side + " '" + text + "' fails to parse at index " +
                            std::to_string(e.index)});
    return std::nullopt;
  }
}

}  // namespace

ValidationReport validate_corpus(const std::string& path, Variant variant, bool reflexivity,
                                 bool symmetry) {
  auto in = open_or_throw(path);
  ValidationReport report;
  std::map<std::pair<std::string, std::string>, size_t> pair_counts;
  std::set<std::string> sentences;
  std::set<std::string> reflexive;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    report.lines_checked++;
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      report.violations.push_back({lineno, "parse", "no '=' separator"});
      continue;
    }
    std::string a = line.substr(0, eq);
    std::string b = line.substr(eq + 1);
    auto va = checked_eval(a, variant, lineno, "left side", report);
    auto vb = checked_eval(b, variant, lineno, "right side", report);
    if (!va || !vb) continue;
    if (*va != *vb)
      report.violations.push_back(
          {lineno, "denotation", "sides evaluate to " + std::string(1, truth_char(*va)) +
                                     " and " + std::string(1, truth_char(*vb))});
    pair_counts[{a, b}]++;
    sentences.insert(a);
    sentences.insert(b);
    if (a == b) reflexive.insert(a);
  }
  if (symmetry) {
    for (const auto& [key, count] : pair_counts) {
      if (key.first >= key.second) continue;
      auto mirror = pair_counts.find({key.second, key.first});
      size_t mirror_count = mirror == pair_counts.end() ? 0 : mirror->second;
      if (count != mirror_count)
        report.violations.push_back(
            {0, "closure", "'" + key.first + "=" + key.second + "' appears " +
                               std::to_string(count) + " times but its mirror appears " +
                               std::to_string(mirror_count)});
    }
  }
  if (reflexivity) {
    for (const auto& s : sentences)
      if (!reflexive.count(s))
        report.violations.push_back({0, "closure", "missing reflexive line '" + s + "=" + s + "'"});
  }
  return report;
}

ValidationReport validate_pair_file(const std::string& path) {
  auto in = open_or_throw(path);
  ValidationReport report;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    if (line.empty()) continue;
    report.lines_checked++;
    PairRecord rec;
    try {
      rec = PairRecord::from_json(Json::parse(line));
    } catch (const std::exception& e) {
      report.violations.push_back({lineno, "parse", e.what()});
      continue;
    }
    auto va = checked_eval(rec.a, rec.variant, lineno, "a", report);
    auto vb = checked_eval(rec.b, rec.variant, lineno, "b", report);
    if (!va || !vb) continue;
    if (*va != rec.denot_a || *vb != rec.denot_b) {
      report.violations.push_back({lineno, "denotation", "recorded denotations disagree with evaluator"});
      continue;
    }
    if (rec.equivalent != (*va == *vb))
      report.violations.push_back({lineno, "denotation", "label disagrees with denotations"});
  }
  return report;
}

ValidationReport validate_split_disjointness(const std::string& dir) {
  ValidationReport report;
  const char* splits[] = {"train", "valid", "test"};
  std::map<std::pair<std::string, std::string>, std::string> owner;
  for (const char* split : splits) {
    std::string path = dir + "/" + split + ".jsonl";
    for (const PairRecord& rec : read_pair_records(path)) {
      report.lines_checked++;
      auto [it, inserted] = owner.insert({{rec.a, rec.b}, split});
      if (!inserted && it->second != split)
        report.violations.push_back(
            {0, "disjoint",
             "pair '" + rec.a + "' / '" + rec.b + "' appears in both " + it->second + " and " +
                 split});
    }
  }
  return report;
}

}  // namespace logiclab
