#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aggrlab/errors.hpp"
#include "aggrlab/model.hpp"

namespace aggrlab {

enum class AggregatorKind {
  bayes_optimal,
  averaging,
  bordley_theta,
  empirical_erm,
  empirical_bayes,
  strong_informative,
  weak_informative,
  multi_theta,
};

std::string to_string(AggregatorKind kind);
AggregatorKind aggregator_kind_from_string(const std::string& name);

// A function object mapping a report profile to a distribution over
// outcomes, with metadata on how it was built.  Binary kinds natively
// produce the scalar P(omega = 1); apply() wraps it as (1 - v, v).
class Aggregator {
 public:
  // Lookup table keyed by 12-decimal-rounded profile.
  struct Lookup {
    std::map<ProfileKey, std::vector<double>> table;
    std::map<ProfileKey, ReportProfile> representatives;  // for serialization
    bool error_on_unseen = false;
  };
  struct Bordley {
    double theta = 1.0;
    int n = 1;
  };
  struct MultiTheta {
    std::vector<double> theta;
    int n = 1;
  };
  // Count-threshold classifier for strongly informative experts: X counts
  // reports whose odds fall on u's side of rho_hat; predicts u iff X > M.
  struct StrongThreshold {
    double rho_hat = 1.0;
    int u = 1;
    double threshold_m = 0.0;
    double slack_a = 0.0;
    int n = 1;
  };

  AggregatorKind kind() const { return kind_; }
  // 0 means any outcome count (averaging).
  int num_outcomes() const { return k_; }
  bool binary_output() const;
  const std::vector<double>& default_output() const { return default_output_; }
  void set_default_output(std::vector<double> dist);

  // Distribution over outcomes; always sums to 1.
  std::vector<double> apply(ProfileView profile) const;
  // Scalar P(omega = 1); requires a binary aggregator or k == 2 profile.
  double apply_binary(ProfileView profile) const;

  const Lookup* lookup_params() const;
  const Bordley* bordley_params() const;
  const MultiTheta* multi_theta_params() const;
  const StrongThreshold* strong_params() const;

  // Constructors (see also the learner free functions below).
  static Aggregator make_lookup(AggregatorKind kind, int k, Lookup lookup);
  static Aggregator make_averaging();
  static Aggregator make_bordley(AggregatorKind kind, double theta, int n);
  static Aggregator make_multi_theta(std::vector<double> theta, int n);
  static Aggregator make_strong(StrongThreshold params);

 private:
  Aggregator() = default;

  AggregatorKind kind_ = AggregatorKind::averaging;
  int k_ = 0;
  std::vector<double> default_output_;
  Lookup lookup_;
  Bordley bordley_;
  MultiTheta multi_theta_;
  StrongThreshold strong_;
};

// ---- Exact constructions ----------------------------------------------------

// Lookup-table aggregator: the conditional outcome distribution of every
// profile in the support.  Unseen profiles error on apply.
Aggregator bayes_optimal(const DiscreteJoint& joint,
                         std::size_t cell_cap = kDefaultCellCap);
Aggregator bayes_optimal_from_support(const std::vector<SupportEntry>& support, int k);

// f(r) = (1/n) sum_i r_i, column-wise for k > 2.
Aggregator averaging();

// Binary posterior for conditionally independent experts:
// f(r) = 1 / (1 + theta^(n-1) prod_i (1 - r_i) / r_i).
Aggregator bordley(double theta, int n);

// Multi-outcome form: f_j(r) ∝ theta_j prod_i r_ij, computed in log space.
Aggregator multi_bordley(std::vector<double> theta, int n);

// ---- Sample-based learners --------------------------------------------------

// Empirical conditional outcome frequency per distinct (rounded) profile;
// unseen profiles fall back to the uniform distribution.
Aggregator erm_empirical(const SampleSet& samples, int k);

// Binary empirical Bayes: f(r) = #(r, omega=1) / #(r).
Aggregator empirical_bayes(const SampleSet& samples);

struct ThetaGridSpec {
  double theta_min = 1e-4;
  double theta_max = 1e4;
  int points = 400;
  double refine_rel_width = 1e-6;
};

// theta minimizing empirical squared loss over a log grid, refined by
// golden section on the best bracket; ties break toward smaller theta.
Aggregator erm_theta(const SampleSet& samples, const ThetaGridSpec& grid = {});

struct MultiThetaGridSpec {
  double logit_bound = 9.2103403719761836;  // ln(1e4)
  int coarse_points = 47;
  std::vector<double> refine_steps = {0.4, 0.08, 0.016, 0.0032, 0.00064};
  int passes_per_step = 4;
};

// theta-vector ERM parameterized through implied priors q (theta_j =
// q_j^-(n-1), sum q = 1), searched by coordinate descent on a logit grid.
Aggregator multi_erm_theta(const SampleSet& samples, int k,
                           const MultiThetaGridSpec& grid = {});

struct RhoEstimate {
  double rho_hat;
  std::size_t count0;
  std::size_t count1;
};

// rho_hat = [ (1/#0) sum_{omega=0} sum_i r_i ] / [ (1/#1) sum_{omega=1} sum_i (1 - r_i) ].
RhoEstimate estimate_rho(const SampleSet& samples);

enum class MeanRegime { below_eps, above_half_eps };

// Tells whether E[ 1{omega=0} * mean_i r_i ] is below eps or above eps/2 by
// comparing the empirical mean against (3/4) eps.
MeanRegime mean_regime_test(const SampleSet& samples, double eps, double delta);

// Threshold-count learner for gamma-strongly informative experts.
Aggregator strongly_informative_learn(const SampleSet& samples, double gamma,
                                      double eps, double delta, int n);

// Grouped-product rho estimation for gamma-weakly informative experts,
// returning the Bordley aggregator at the estimate.
Aggregator weakly_informative_learn(const SampleSet& samples, double gamma, int n);

// ---- Sample budgets (the proofs' explicit constants) -------------------------

std::size_t mean_regime_test_budget(double eps, double delta);
// Needs lower bounds on (1-p) mu0 and min{p, 1-p}.
std::size_t estimate_rho_budget(double pmu0_lower, double minp_lower, int n,
                                double accuracy_delta, double delta);
struct StrongBudget {
  std::size_t regime;  // T0
  std::size_t rho;     // T1
  std::size_t task2;   // T2
  std::size_t total() const { return regime + rho + task2; }
};
StrongBudget strongly_informative_budget(int n, double gamma, double eps, double delta);
std::size_t weakly_informative_budget(double gamma, int n, double eps, double delta);
std::size_t empirical_bayes_budget(std::size_t signal_cells, double c, double eps,
                                   double delta);

}  // namespace aggrlab
