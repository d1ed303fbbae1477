#pragma once

#include <functional>
#include <string>
#include <vector>

#include "logiclab/rng.hpp"

#include <nlohmann/json.hpp>

namespace logiclab {

using Json = nlohmann::ordered_json;

enum class VerbClass { Transparent, Opaque };

struct VerbGroupStats {
  std::string verb;
  VerbClass verb_class;
  double mean_cosine = 0;
  int n_pairs = 0;
};

enum class TestMethod { ExactPermutation, MonteCarloPermutation, Bootstrap };

struct SignificanceResult {
  double observed_stat = 0;
  double p_two_sided = 1;
  double p_one_sided = 1;
  TestMethod method = TestMethod::ExactPermutation;
  long n_resamples = 0;
  uint64_t seed = 0;  // Monte-Carlo / bootstrap only
  Json to_json() const;
};

// cos(u, v), clamped to [-1, 1]. Throws on a zero vector.
double cosine(const std::vector<double>& u, const std::vector<double>& v);

// Statistic: mean(transparent means) - mean(opaque means). Exact enumeration
// over all class-size-preserving relabelings when C(n, k) <= 10^6, otherwise
// Monte-Carlo with >= 10^5 draws. Two-sided p counts |stat| >= |observed|,
// observed labeling included.
SignificanceResult permutation_test(const std::vector<VerbGroupStats>& groups,
                                    long max_exact = 1000000, long mc_draws = 100000,
                                    uint64_t mc_seed = 0);

// Resamples verbs within each class with replacement. Two-sided p: fraction
// of bootstrap statistics on the opposite side of 0 from the observed sign,
// doubled and clamped to [0, 1].
SignificanceResult bootstrap_test(const std::vector<VerbGroupStats>& groups,
                                  int iterations = 1000, uint64_t seed = 0);

// A sentence pair keyed by the verb whose class determines its group.
struct VerbPair {
  std::string verb;
  VerbClass verb_class;
  std::string a, b;
};

// Maps a sentence to its vector representation.
using Embedder = std::function<std::vector<double>(const std::string&)>;

struct SimilarityReport {
  std::vector<VerbGroupStats> per_verb;
  SignificanceResult permutation;
  SignificanceResult bootstrap;
  Json to_json() const;
};

// Embeds both sentences of every pair, averages the cosines per verb, then
// runs both significance tests on the per-verb means.
SimilarityReport similarity_report(const Embedder& embed, const std::vector<VerbPair>& pairs,
                                   int bootstrap_iterations = 1000, uint64_t seed = 0);

}  // namespace logiclab
