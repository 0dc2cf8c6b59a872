#include "aggrlab/generators.hpp"

#include <cmath>

#include "aggrlab/hard_instances.hpp"

namespace aggrlab {

DiscreteJoint random_joint(Rng& rng, int n, int m, int k, double min_cell) {
  std::vector<int> sizes(n, m);
  std::size_t cells = 1;
  for (int i = 0; i < n; ++i) cells *= m;
  std::vector<double> table(cells * k);
  for (double& v : table) v = rng.uniform(min_cell, 1.0);
  double total = 0.0;
  for (double v : table) total += v;
  for (double& v : table) v /= total;
  return build_joint(n, sizes, k, table);
}

CondIndepModel random_cond_indep(Rng& rng, int n, int m, int k,
                                 double prior_lo, double prior_hi) {
  std::vector<double> prior(k);
  double total = 0.0;
  for (double& v : prior) {
    v = rng.uniform(prior_lo, prior_hi);
    total += v;
  }
  for (double& v : prior) v /= total;

  std::vector<std::vector<std::vector<double>>> cond(
      n, std::vector<std::vector<double>>(k, std::vector<double>(m)));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) {
      double row_total = 0.0;
      for (double& v : cond[i][j]) {
        v = rng.uniform(0.1, 1.0);
        row_total += v;
      }
      for (double& v : cond[i][j]) v /= row_total;
    }
  }
  return build_cond_indep(prior, cond);
}

CondIndepModel uninformative_model(double p, int n, int m) {
  std::vector<double> prior = {1.0 - p, p};
  std::vector<std::vector<std::vector<double>>> cond(
      n, std::vector<std::vector<double>>(2, std::vector<double>(m, 1.0 / m)));
  return build_cond_indep(prior, cond);
}

DiscreteJoint xor_model() {
  // cells ordered (s1, s2) lexicographic, outcome fastest
  std::vector<double> table(8, 0.0);
  for (int s1 = 0; s1 < 2; ++s1)
    for (int s2 = 0; s2 < 2; ++s2)
      table[std::size_t((s1 * 2 + s2) * 2 + (s1 ^ s2))] = 0.25;
  return build_joint(2, {2, 2}, 2, table);
}

CondIndepModel symmetric_binary(int n, double accuracy, double p) {
  std::vector<double> prior = {1.0 - p, p};
  std::vector<std::vector<double>> expert = {
      {accuracy, 1.0 - accuracy},   // P(s | omega = 0): s=0 likely
      {1.0 - accuracy, accuracy}};  // P(s | omega = 1): s=1 likely
  std::vector<std::vector<std::vector<double>>> cond(n, expert);
  return build_cond_indep(prior, cond);
}

CondIndepModel weakly_informative_model(Rng& rng, int n, double gamma, double p) {
  // Amplitude a gives likelihood ratio (1+a)/(1-a) <= (1+gamma) when
  // a <= gamma/(2+gamma).
  const double a_max = gamma / (2.0 + gamma);
  std::vector<double> prior = {1.0 - p, p};
  std::vector<std::vector<std::vector<double>>> cond(n);
  for (int i = 0; i < n; ++i) {
    double a = rng.uniform(0.2 * a_max, a_max);
    if (rng.bernoulli(0.5)) a = -a;
    cond[i] = {{0.5 * (1.0 - a), 0.5 * (1.0 + a)},
               {0.5 * (1.0 + a), 0.5 * (1.0 - a)}};
  }
  return build_cond_indep(prior, cond);
}

GeneratedModel generate_model(const std::string& name,
                              const std::map<std::string, double>& params,
                              std::uint64_t seed) {
  auto get = [&](const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  Rng rng = Rng(seed).substream("gen-model").substream(name);

  GeneratedModel out{false, DiscreteJoint(build_joint(1, {1}, 2, {0.5, 0.5})),
                     uninformative_model(0.5, 1, 1)};
  if (name == "random_joint") {
    out.is_joint = true;
    out.joint = random_joint(rng, int(get("n", 2)), int(get("m", 2)),
                             int(get("k", 2)), get("min_cell", 0.05));
  } else if (name == "random_ci") {
    out.cond_indep = random_cond_indep(rng, int(get("n", 2)), int(get("m", 2)),
                                       int(get("k", 2)));
  } else if (name == "uninformative") {
    out.cond_indep =
        uninformative_model(get("p", 0.5), int(get("n", 2)), int(get("m", 2)));
  } else if (name == "xor") {
    out.is_joint = true;
    out.joint = xor_model();
  } else if (name == "symmetric_ci") {
    out.cond_indep =
        symmetric_binary(int(get("n", 2)), get("accuracy", 0.8), get("p", 0.5));
  } else if (name == "weakly_informative") {
    out.cond_indep = weakly_informative_model(rng, int(get("n", 2)),
                                              get("gamma", 0.1), get("p", 0.5));
  } else if (name == "dz") {
    DzFamily family(int(get("m", 2)), int(get("n", 2)), get("eps", 0.01));
    std::vector<int> z = random_sign_vector(family, rng);
    out.is_joint = true;
    out.joint = dz_to_aggregation_instance(family, z);
  } else if (name == "cipair1" || name == "cipair2") {
    CiPair pair = ci_pair_build(int(get("n", 4)), get("eps", 1e-6));
    out.cond_indep = (name == "cipair1") ? pair.model1 : pair.model2;
  } else {
    throw InvalidConfig("unknown model generator: " + name);
  }
  return out;
}

}  // namespace aggrlab
