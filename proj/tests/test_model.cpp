#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "aggrlab/json.hpp"

#include "aggrlab/generators.hpp"
#include "aggrlab/io.hpp"
#include "aggrlab/model.hpp"

using namespace aggrlab;

TEST_CASE("build_joint accepts the uniform table and computes p") {
  std::vector<double> table(8, 0.125);
  DiscreteJoint joint = build_joint(2, {2, 2}, 2, table);
  CHECK(joint.p() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(joint.num_signal_cells() == 4);
}

TEST_CASE("build_joint rejects negative entries and bad normalization") {
  std::vector<double> negative(8, 0.125);
  negative[3] = -0.1;
  negative[4] = 0.35;
  CHECK_THROWS_AS(build_joint(2, {2, 2}, 2, negative), NotADistribution);

  std::vector<double> short_sum(8, 0.9 / 8.0);
  CHECK_THROWS_AS(build_joint(2, {2, 2}, 2, short_sum), NotADistribution);

  CHECK_THROWS_AS(build_joint(2, {2, 2}, 2, std::vector<double>(4, 0.25)),
                  DimensionMismatch);
}

TEST_CASE("build_joint renormalizes tiny drift") {
  std::vector<double> table(8, 0.125);
  table[0] += 5e-7;
  DiscreteJoint joint = build_joint(2, {2, 2}, 2, table);
  double total = 0.0;
  for (double v : joint.table()) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("build_cond_indep: uninformative signals report the prior") {
  CondIndepModel model = uninformative_model(0.5, 3, 2);
  for (int i = 0; i < 3; ++i)
    for (int s = 0; s < 2; ++s)
      CHECK(expert_report(model, i, s)[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("degenerate prior is valid but rho errors") {
  CondIndepModel model = build_cond_indep(
      {0.0, 1.0}, {{{0.5, 0.5}, {0.5, 0.5}}});
  CHECK(model.p() == 1.0);
  CHECK_THROWS_AS(model.rho(), DegeneratePrior);
  // report is the degenerate prior on any positive-mass signal
  CHECK(expert_report(model, 0, 0)[1] == doctest::Approx(1.0));
}

TEST_CASE("to_joint is the product measure") {
  // P(a|omega=1)=0.8, P(a|omega=0)=0.4, two experts, fair prior
  std::vector<std::vector<double>> expert = {{0.4, 0.6}, {0.8, 0.2}};
  CondIndepModel model = build_cond_indep(
      {0.5, 0.5}, {expert, expert});
  DiscreteJoint joint = to_joint(model);
  CHECK(joint.prob(std::vector<int>{0, 0}, 1) == doctest::Approx(0.32).epsilon(1e-12));

  // single expert reduces to prior * conditional
  CondIndepModel single = build_cond_indep({0.5, 0.5}, {expert});
  DiscreteJoint sj = to_joint(single);
  CHECK(sj.prob(std::vector<int>{1}, 0) == doctest::Approx(0.5 * 0.6).epsilon(1e-12));
}

TEST_CASE("to_joint enforces the cell cap") {
  CondIndepModel wide = uninformative_model(0.5, 30, 4);
  CHECK_THROWS_AS(to_joint(wide), SupportTooLarge);
}

TEST_CASE("expert_report does direct Bayes arithmetic") {
  std::vector<std::vector<double>> expert = {{0.4, 0.6}, {0.8, 0.2}};
  CondIndepModel model = build_cond_indep({0.5, 0.5}, {expert, expert});
  // r_a = 0.4/0.6 = 2/3
  CHECK(expert_report(model, 0, 0)[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  DiscreteJoint joint = to_joint(model);
  CHECK(expert_report(joint, 0, 0)[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("expert_report rejects zero-marginal signals") {
  // second signal of the first expert has zero mass under both outcomes
  std::vector<double> table = {0.25, 0.25, 0.25, 0.25, 0.0, 0.0, 0.0, 0.0};
  DiscreteJoint joint = build_joint(2, {2, 2}, 2, table);
  CHECK_THROWS_AS(expert_report(joint, 0, 1), ZeroProbabilitySignal);
}

TEST_CASE("report_support collapses the uninformative model to one profile") {
  CondIndepModel model = uninformative_model(0.3, 2, 3);
  auto support = report_support(to_joint(model));
  CHECK(support.size() == 2);  // one profile, two outcomes
  double p1 = 0.0;
  for (const auto& entry : support) {
    for (int i = 0; i < 2; ++i)
      CHECK(entry.profile.binary(i) == doctest::Approx(0.3).epsilon(1e-12));
    if (entry.outcome == 1) p1 = entry.prob;
  }
  CHECK(p1 == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("report_support on the XOR instance") {
  DiscreteJoint joint = xor_model();
  auto support = report_support(joint);
  REQUIRE(support.size() == 2);
  for (const auto& entry : support) {
    CHECK(entry.prob == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(entry.profile.binary(0) == doctest::Approx(0.5));
    CHECK(entry.profile.binary(1) == doctest::Approx(0.5));
  }
}

TEST_CASE("report_support size is bounded by k * prod m_i") {
  Rng rng(11);
  DiscreteJoint joint = random_joint(rng, 2, 2, 2);
  auto support = report_support(joint);
  CHECK(support.size() <= 8);
  double total = 0.0;
  for (const auto& entry : support) total += entry.prob;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("sample: empty draw, determinism, concentration") {
  CondIndepModel model = uninformative_model(0.37, 2, 2);

  SampleSet empty = sample(model, 0, 5);
  CHECK(empty.size() == 0);

  SampleSet a = sample(model, 500, 42);
  SampleSet b = sample(model, 500, 42);
  REQUIRE(a.size() == b.size());
  bool identical = true;
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a.outcome(t) != b.outcome(t)) identical = false;
    for (int i = 0; i < 2; ++i)
      if (a.binary_report(t, i) != b.binary_report(t, i)) identical = false;
  }
  CHECK(identical);

  // binomial concentration: 0.02 is > 4 sigma at T = 10^4
  SampleSet big = sample(model, 10000, 7);
  double freq = 0.0;
  for (std::size_t t = 0; t < big.size(); ++t) freq += big.outcome(t);
  freq /= double(big.size());
  CHECK(std::abs(freq - 0.37) < 0.02);
}

TEST_CASE("joint and cond-indep samplers agree in distribution") {
  Rng rng(3);
  CondIndepModel model = random_cond_indep(rng, 2, 2, 2);
  DiscreteJoint joint = to_joint(model);
  SampleSet from_model = sample(model, 20000, 9);
  SampleSet from_joint = sample(joint, 20000, 10);
  double mean_model = 0.0, mean_joint = 0.0;
  for (std::size_t t = 0; t < from_model.size(); ++t) {
    mean_model += from_model.outcome(t);
    mean_joint += from_joint.outcome(t);
  }
  CHECK(std::abs(mean_model - mean_joint) / 20000.0 < 0.02);
}

TEST_CASE("binary accessors round-trip") {
  for (double p : {1e-6, 0.3, 0.5, 0.9, 1.0 - 1e-9}) {
    CHECK(std::abs(p_from_rho(rho_from_p(p)) - p) <= 1e-12);
  }
  CHECK_THROWS_AS(rho_from_p(0.0), DegeneratePrior);
  CHECK_THROWS_AS(rho_from_p(1.0), DegeneratePrior);
}

TEST_CASE("model json round trip") {
  Rng rng(21);
  CondIndepModel model = random_cond_indep(rng, 2, 3, 2);
  ModelFile loaded = model_from_json(cond_indep_to_json(model));
  REQUIRE_FALSE(loaded.is_joint);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int s = 0; s < 3; ++s)
        CHECK(loaded.cond_indep.cond(i, j, s) == model.cond(i, j, s));

  DiscreteJoint joint = random_joint(rng, 2, 2, 3);
  ModelFile loaded_joint = model_from_json(joint_to_json(joint));
  REQUIRE(loaded_joint.is_joint);
  CHECK(loaded_joint.joint.table() == joint.table());
}

TEST_CASE("sample csv round trip, binary and multi-outcome") {
  Rng rng(22);
  CondIndepModel binary = random_cond_indep(rng, 3, 2, 2);
  SampleSet s = sample(binary, 50, 4);
  SampleSet back = samples_from_csv(samples_to_csv(s));
  REQUIRE(back.size() == s.size());
  CHECK(back.num_experts() == 3);
  CHECK(back.num_outcomes() == 2);
  bool identical = true;
  for (std::size_t t = 0; t < s.size(); ++t) {
    if (back.outcome(t) != s.outcome(t)) identical = false;
    for (int i = 0; i < 3; ++i)
      if (back.binary_report(t, i) != s.binary_report(t, i)) identical = false;
  }
  CHECK(identical);

  CondIndepModel multi = random_cond_indep(rng, 2, 2, 3);
  SampleSet ms = sample(multi, 30, 5);
  SampleSet mback = samples_from_csv(samples_to_csv(ms));
  REQUIRE(mback.size() == ms.size());
  CHECK(mback.num_outcomes() == 3);
  bool multi_identical = true;
  for (std::size_t t = 0; t < ms.size(); ++t)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 3; ++j)
        if (mback.profile(t).at(i, j) != ms.profile(t).at(i, j))
          multi_identical = false;
  CHECK(multi_identical);
}
