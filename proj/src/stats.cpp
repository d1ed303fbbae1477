#include "logiclab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace logiclab {

double cosine(const std::vector<double>& u, const std::vector<double>& v) {
  if (u.size() != v.size()) throw std::invalid_argument("cosine: dimension mismatch");
  double dot = 0, nu = 0, nv = 0;
  for (size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0 || nv == 0) throw std::invalid_argument("cosine: zero vector");
  return std::clamp(dot / std::sqrt(nu * nv), -1.0, 1.0);
}

namespace {

struct Layout {
  std::vector<double> values;  // per-verb mean cosines
  int n_transparent = 0;
};

Layout check_groups(const std::vector<VerbGroupStats>& groups) {
  Layout lay;
  int n_opaque = 0;
  // Transparent verbs first; the statistic only depends on which indices are
  // labeled transparent.
  for (auto& g : groups)
    if (g.verb_class == VerbClass::Transparent) {
      lay.values.push_back(g.mean_cosine);
      lay.n_transparent++;
    }
  for (auto& g : groups)
    if (g.verb_class == VerbClass::Opaque) {
      lay.values.push_back(g.mean_cosine);
      n_opaque++;
    }
  if (lay.n_transparent < 2 || n_opaque < 2)
    throw std::invalid_argument("each verb class needs at least 2 verbs");
  return lay;
}

double stat_for(const Layout& lay, const std::vector<int>& transparent_idx) {
  double sum_t = 0, sum_all = 0;
  for (double v : lay.values) sum_all += v;
  for (int i : transparent_idx) sum_t += lay.values[i];
  int n = static_cast<int>(lay.values.size());
  int k = lay.n_transparent;
  return sum_t / k - (sum_all - sum_t) / (n - k);
}

long binomial(int n, int k) {
  long r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

}  // namespace

SignificanceResult permutation_test(const std::vector<VerbGroupStats>& groups,
                                    long max_exact, long mc_draws, uint64_t mc_seed) {
  Layout lay = check_groups(groups);
  int n = static_cast<int>(lay.values.size());
  int k = lay.n_transparent;

  std::vector<int> observed_idx(k);
  for (int i = 0; i < k; ++i) observed_idx[i] = i;
  double observed = stat_for(lay, observed_idx);
  // Tie tolerance so affine rescalings of the inputs give identical p-values.
  double eps = 1e-12 * (1.0 + std::abs(observed));

  SignificanceResult res;
  res.observed_stat = observed;

  long n_combos = binomial(n, k);
  if (n_combos <= max_exact) {
    res.method = TestMethod::ExactPermutation;
    long ge_abs = 0, ge_signed = 0, total = 0;
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    for (;;) {
      double s = stat_for(lay, idx);
      if (std::abs(s) >= std::abs(observed) - eps) ge_abs++;
      if (s >= observed - eps) ge_signed++;
      total++;
      // next k-combination of {0..n-1}
      int i = k - 1;
      while (i >= 0 && idx[i] == n - k + i) --i;
      if (i < 0) break;
      idx[i]++;
      for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
    res.n_resamples = total;
    res.p_two_sided = double(ge_abs) / double(total);
    res.p_one_sided = double(ge_signed) / double(total);
  } else {
    res.method = TestMethod::MonteCarloPermutation;
    res.seed = mc_seed;
    Rng rng(mc_seed);
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    long ge_abs = 1, ge_signed = 1;  // observed labeling included
    for (long it = 0; it < mc_draws; ++it) {
      for (int i = n - 1; i > 0; --i) std::swap(pool[i], pool[rng.uniform_int(i + 1)]);
      std::vector<int> idx(pool.begin(), pool.begin() + k);
      double s = stat_for(lay, idx);
      if (std::abs(s) >= std::abs(observed) - eps) ge_abs++;
      if (s >= observed - eps) ge_signed++;
    }
    res.n_resamples = mc_draws + 1;
    res.p_two_sided = double(ge_abs) / double(mc_draws + 1);
    res.p_one_sided = double(ge_signed) / double(mc_draws + 1);
  }
  res.p_two_sided = std::min(1.0, res.p_two_sided);
  return res;
}

SignificanceResult bootstrap_test(const std::vector<VerbGroupStats>& groups, int iterations,
                                  uint64_t seed) {
  Layout lay = check_groups(groups);
  int n = static_cast<int>(lay.values.size());
  int k = lay.n_transparent;

  std::vector<int> observed_idx(k);
  for (int i = 0; i < k; ++i) observed_idx[i] = i;
  double observed = stat_for(lay, observed_idx);

  Rng rng(seed);
  long opposite = 0;
  for (int it = 0; it < iterations; ++it) {
    double sum_t = 0, sum_o = 0;
    for (int i = 0; i < k; ++i) sum_t += lay.values[rng.uniform_int(k)];
    for (int i = k; i < n; ++i) sum_o += lay.values[k + rng.uniform_int(n - k)];
    double s = sum_t / k - sum_o / (n - k);
    if (observed > 0 ? s <= 0 : s >= 0) opposite++;
  }
  SignificanceResult res;
  res.observed_stat = observed;
  res.method = TestMethod::Bootstrap;
  res.n_resamples = iterations;
  res.seed = seed;
  double frac = double(opposite) / double(iterations);
  res.p_one_sided = frac;
  res.p_two_sided = std::min(1.0, 2.0 * frac);
  return res;
}

SimilarityReport similarity_report(const Embedder& embed, const std::vector<VerbPair>& pairs,
                                   int bootstrap_iterations, uint64_t seed) {
  if (pairs.empty()) throw std::invalid_argument("no pairs");
  // verb -> (class, cosine sum, count); keyed in first-seen order.
  std::vector<VerbGroupStats> per_verb;
  std::map<std::string, size_t> index;
  for (const VerbPair& p : pairs) {
    double c = cosine(embed(p.a), embed(p.b));
    auto it = index.find(p.verb);
    if (it == index.end()) {
      index[p.verb] = per_verb.size();
      per_verb.push_back({p.verb, p.verb_class, c, 1});
    } else {
      VerbGroupStats& g = per_verb[it->second];
      if (g.verb_class != p.verb_class)
        throw std::invalid_argument("verb '" + p.verb + "' appears in both classes");
      g.mean_cosine += c;
      g.n_pairs++;
    }
  }
  for (VerbGroupStats& g : per_verb) g.mean_cosine /= g.n_pairs;

  SimilarityReport report;
  report.per_verb = per_verb;
  report.permutation = permutation_test(per_verb, 1000000, 100000, seed);
  report.bootstrap = bootstrap_test(per_verb, bootstrap_iterations, seed);
  return report;
}

Json SimilarityReport::to_json() const {
  Json j;
  j["per_verb"] = Json::array();
  for (const auto& g : per_verb) {
    Json gj;
    gj["verb"] = g.verb;
    gj["class"] = g.verb_class == VerbClass::Transparent ? "transparent" : "opaque";
    gj["mean_cosine"] = g.mean_cosine;
    gj["n_pairs"] = g.n_pairs;
    j["per_verb"].push_back(gj);
  }
  j["permutation"] = permutation.to_json();
  j["bootstrap"] = bootstrap.to_json();
  return j;
}

Json SignificanceResult::to_json() const {
  Json j;
  j["observed_stat"] = observed_stat;
  switch (method) {
    case TestMethod::ExactPermutation: j["method"] = "exact_permutation"; break;
    case TestMethod::MonteCarloPermutation: j["method"] = "monte_carlo_permutation"; break;
    case TestMethod::Bootstrap: j["method"] = "bootstrap"; break;
  }
  j["p_two_sided"] = p_two_sided;
  j["p_one_sided"] = p_one_sided;
  j["n_resamples"] = n_resamples;
  j["seed"] = seed;
  return j;
}

}  // namespace logiclab
