#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "aggrlab/aggregators.hpp"
#include "aggrlab/generators.hpp"
#include "aggrlab/hard_instances.hpp"
#include "aggrlab/metrics.hpp"

#include "support/oracles.hpp"

using namespace aggrlab;

TEST_CASE("dz_base: normalization, entry ratio, small case by hand") {
  DzFamily family(2, 2, 0.01);
  DiscreteDist base = dz_base(family);
  double total = 0.0;
  for (double v : base.probs) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  // max/min entry ratio is gamma^(m^n - 1) <= e; W within [m^n, e m^n]
  double gamma = family.gamma_base();
  CHECK(base.probs.back() / base.probs.front() ==
        doctest::Approx(std::pow(gamma, 3)).epsilon(1e-12));
  CHECK(std::pow(gamma, 3) <= 2.718281828459045);
  CHECK(family.weight() >= 4.0);
  CHECK(family.weight() <= 2.718281828459045 * 4.0);

  // m=2, n=2: entries proportional to gamma^1..gamma^4 with gamma = 1 + 1/16?
  // no: m^n = 4, gamma = 1.25; check the m=2,n=2 exponents directly
  for (int l = 0; l < 4; ++l)
    CHECK(base.probs[l] ==
          doctest::Approx(std::pow(1.25, l + 1) / family.weight()).epsilon(1e-12));

  // the spec's 2x2x... example with gamma = 1 + 1/16 is the m=2, n=4 family
  DzFamily family16(2, 4, 0.01);
  CHECK(family16.gamma_base() == doctest::Approx(1.0 + 1.0 / 16.0));

  CHECK_THROWS_AS(DzFamily(3, 2, 0.01), OddSignalSpace);
  CHECK_THROWS_AS(DzFamily(2, 2, 0.03), EpsilonTooLarge);  // c eps > 1/2
}

TEST_CASE("dz_build validates z and keeps distributions honest") {
  DzFamily family(2, 3, 0.02);
  CHECK(family.num_buckets() == 2);
  CHECK_THROWS_AS(dz_build(family, {1}), SignVectorMismatch);
  CHECK_THROWS_AS(dz_build(family, {1, 2}), SignVectorMismatch);
  DiscreteDist dz = dz_build(family, {1, -1});
  double total = 0.0;
  for (double v : dz.probs) {
    CHECK(v > 0.0);
    total += v;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dz_build: TV between opposite signs and marginal invariance") {
  for (auto [m, n] : {std::pair{2, 2}, std::pair{2, 3}, std::pair{4, 2}}) {
    DzFamily family(m, n, 0.015);
    std::vector<int> z(family.num_buckets(), 1);
    std::vector<int> flipped(family.num_buckets(), -1);
    DiscreteDist plus = dz_build(family, z);
    DiscreteDist minus = dz_build(family, flipped);
    double expected =
        double(family.num_cells()) * DzFamily::kC * family.eps() / family.weight();
    CHECK(std::abs(tv_distance(plus, minus) - expected) <= 1e-12);

    for (double v : plus.probs)
      CHECK(v <= family.uniform_bound() / double(family.num_cells()));
  }
}

TEST_CASE("dz aggregation instance: injective reports and the f* formula") {
  DzFamily family(2, 3, 0.02);
  Rng rng(51);
  std::vector<int> z = random_sign_vector(family, rng);
  DiscreteJoint joint = dz_to_aggregation_instance(family, z);
  CHECK(joint.p() == doctest::Approx(0.5).epsilon(1e-12));

  // distinct signals produce distinct reports for every expert
  for (int i = 0; i < 3; ++i) {
    double r0 = expert_report(joint, i, 0)[1];
    double r1 = expert_report(joint, i, 1)[1];
    CHECK(r0 != r1);
  }

  // f*(r_s) = D(s) / (1/m^n + D(s)) cell by cell (profiles are injective)
  DiscreteDist dz = dz_build(family, z);
  Aggregator best = bayes_optimal(joint);
  for (std::size_t c = 0; c < joint.num_signal_cells(); ++c) {
    std::vector<int> signals = joint.decode_signals(c);
    std::vector<double> matrix;
    for (int i = 0; i < 3; ++i) {
      double r = expert_report(joint, i, signals[i])[1];
      matrix.push_back(1.0 - r);
      matrix.push_back(r);
    }
    double expected = dz.probs[c] / (1.0 / 8.0 + dz.probs[c]);
    CHECK(best.apply_binary(ProfileView(matrix.data(), 3, 2)) ==
          doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("dz instance with vanishing eps has f* near 1/2") {
  DzFamily family(2, 2, 1e-9);
  std::vector<int> z(family.num_buckets(), 1);
  DiscreteJoint joint = dz_to_aggregation_instance(family, z);
  Aggregator best = bayes_optimal(joint);
  auto support = report_support(joint);
  for (const auto& entry : support) {
    double v = best.apply_binary(entry.profile);
    CHECK(std::abs(v - 0.5) < 0.2);  // D ~ D_base ~ near-uniform
  }
}

TEST_CASE("aggregator_to_distribution inverts f* exactly") {
  DzFamily family(4, 2, 0.01);
  Rng rng(52);
  std::vector<int> z = random_sign_vector(family, rng);
  DiscreteDist dz = dz_build(family, z);
  DiscreteJoint joint = dz_to_aggregation_instance(family, z);
  RecoveredDistribution recovered =
      aggregator_to_distribution(family, bayes_optimal(joint), &dz.probs);
  CHECK(recovered.normalized);
  CHECK(*recovered.tv_to_reference <= 1e-12);
}

TEST_CASE("aggregator_to_distribution flags the degenerate zero aggregator") {
  DzFamily family(2, 2, 0.01);
  Aggregator zero = Aggregator::make_lookup(AggregatorKind::empirical_erm, 2, {});
  zero.set_default_output({1.0, 0.0});
  RecoveredDistribution recovered = aggregator_to_distribution(family, zero);
  CHECK_FALSE(recovered.normalized);
  for (double v : recovered.table) CHECK(v == 0.0);
}

TEST_CASE("ci_pair_build: reports, priors, and the rho range") {
  const int n = 4;
  const double eps = std::pow(2.0, -20.0);
  CiPair pair = ci_pair_build(n, eps);

  for (const CondIndepModel* model : {&pair.model1, &pair.model2}) {
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(expert_report(*model, i, 0)[1] - 0.5) <= 1e-12);  // r_a
      CHECK(expert_report(*model, i, 1)[1] == 0.0);                    // r_b
    }
    double rho_pow = std::pow(model->rho(), n - 1);
    CHECK(rho_pow > 0.5);
    CHECK(rho_pow <= 1.0);
  }
  CHECK(std::abs((pair.p1 - pair.p2) - 64.0 * std::sqrt(eps) / n) <= 1e-18);

  CHECK_THROWS_AS(ci_pair_build(4, 1e-3), EpsilonTooLarge);
  CHECK_THROWS_AS(ci_pair_build(1, eps), DimensionMismatch);
}

TEST_CASE("distinguish_experiment: identical distributions are a coin flip") {
  Rng rng(53);
  CondIndepModel model = uninformative_model(0.4, 2, 2);
  DiscreteDist d = ci_model_to_dist(model);
  auto report = distinguish_experiment(d, d, 20, 800,
                                       DistinguisherKind::likelihood_ratio, 5);
  CHECK(std::abs(report.empirical_error - 0.5) <= 3.0 * report.stderr_);
  CHECK(report.hellinger_sq == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("distinguish_experiment: T = 0 sits at the exact half floor") {
  CiPair pair = ci_pair_build(3, 1e-6);
  DiscreteDist d1 = ci_model_to_dist(pair.model1);
  DiscreteDist d2 = ci_model_to_dist(pair.model2);
  auto report = distinguish_experiment(d1, d2, 0, 1000,
                                       DistinguisherKind::likelihood_ratio, 6);
  CHECK(report.floor_sqrt_t == doctest::Approx(0.5));
  CHECK(std::abs(report.empirical_error - 0.5) <= 3.0 * report.stderr_);
}

TEST_CASE("distinguish_experiment respects the sqrt(T) error floor") {
  CiPair pair = ci_pair_build(4, 1e-6);
  DiscreteDist d1 = ci_model_to_dist(pair.model1);
  DiscreteDist d2 = ci_model_to_dist(pair.model2);
  std::size_t T = std::size_t(0.01 / 1e-6);
  auto report = distinguish_experiment(d1, d2, T, 2000,
                                       DistinguisherKind::likelihood_ratio, 1);
  CHECK(report.empirical_error >=
        report.floor_sqrt_t - 3.0 * report.stderr_);
}

TEST_CASE("ci hellinger chain bound dominates the exact value") {
  CiPair pair = ci_pair_build(4, 1e-6);
  double exact = hellinger_sq(ci_model_to_dist(pair.model1),
                              ci_model_to_dist(pair.model2));
  double bound = ci_hellinger_sq_chain_bound(pair.model1, pair.model2);
  CHECK(exact <= bound + 1e-12);
  CHECK(exact > 0.0);
}

TEST_CASE("distinguisher names parse; unknown ones are rejected") {
  CHECK(distinguisher_from_string("likelihood_ratio") ==
        DistinguisherKind::likelihood_ratio);
  CHECK(distinguisher_from_string("tv_nearest") == DistinguisherKind::tv_nearest);
  CHECK_THROWS_AS(distinguisher_from_string("psychic"), InvalidDistinguisher);
  CiPair pair = ci_pair_build(3, 1e-6);
  DiscreteDist d1 = ci_model_to_dist(pair.model1);
  DiscreteDist d2 = ci_model_to_dist(pair.model2);
  CHECK_THROWS_AS(distinguish_experiment(d1, d2, 10, 10,
                                         DistinguisherKind::custom, 1, nullptr),
                  InvalidDistinguisher);
}
