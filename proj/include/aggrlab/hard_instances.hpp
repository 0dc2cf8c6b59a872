#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "aggrlab/aggregators.hpp"
#include "aggrlab/metrics.hpp"
#include "aggrlab/model.hpp"
#include "aggrlab/rng.hpp"

namespace aggrlab {

// Bucket-perturbed family of joint-signal distributions.  Members share all
// single-coordinate marginals; only the within-bucket quadrant pattern flips
// with the sign vector z, which is what makes them hard to tell apart.
class DzFamily {
 public:
  DzFamily(int m, int n, double eps, std::size_t cell_cap = kDefaultCellCap);

  int m() const { return m_; }
  int n() const { return n_; }
  double eps() const { return eps_; }
  double gamma_base() const { return gamma_; }  // 1 + 1/m^n
  double weight() const { return weight_; }     // W = sum_l gamma^l
  double perturbation() const { return kC * eps_ / weight_; }
  std::size_t num_cells() const { return cells_; }      // m^n
  std::size_t num_buckets() const { return buckets_; }  // m^(n-2)
  double uniform_bound() const;                         // B = e + 1/2

  static constexpr double kC = 20.0;

 private:
  int m_;
  int n_;
  double eps_;
  double gamma_;
  double weight_;
  std::size_t cells_;
  std::size_t buckets_;
};

// D_base(s) = gamma^num(s) / W with num(s) the 1-based lexicographic index.
DiscreteDist dz_base(const DzFamily& family);
DiscreteDist dz_base(int m, int n, double eps);

// Perturbed member: +z_b c eps / W on the two diagonal quadrants of each
// bucket, -z_b c eps / W off-diagonal.  z holds one +-1 per bucket.
DiscreteDist dz_build(const DzFamily& family, const std::vector<int>& z);

std::vector<int> random_sign_vector(const DzFamily& family, Rng& rng);

// The aggregation instance P_D: omega uniform, signals uniform given
// omega = 0, D_z given omega = 1.
DiscreteJoint dz_to_aggregation_instance(const DzFamily& family,
                                         const std::vector<int>& z);

// Label helper shared by dz_base and the joint, "s1,s2,...".
std::vector<std::string> dz_labels(const DzFamily& family);

struct RecoveredDistribution {
  std::vector<double> table;  // indexed like dz_base
  bool normalized;            // sums to 1 within kValidationTol
  std::optional<double> tv_to_reference;
};

// Inverts D(s) = (1/m^n) f(r_s) / (1 - f(r_s)) profile-by-profile, after
// truncating f at B/(1+B).
RecoveredDistribution aggregator_to_distribution(
    const DzFamily& family, const Aggregator& f,
    const std::vector<double>* reference = nullptr);

// Pair of conditionally independent distributions that induce the constant
// report levels r_a = 0.5, r_b = 0 and differ only through the prior nudge
// +-c sqrt(eps)/n.
struct CiPair {
  int n;
  double eps;
  double p1;
  double p2;
  CondIndepModel model1;
  CondIndepModel model2;

  static constexpr double kC = 32.0;
};

CiPair ci_pair_build(int n, double eps);

// Full (omega, joint signal) distribution of a binary CondIndepModel with
// two signals per expert; labels "w=<omega>|<s_1><s_2>..." with a/b signals.
DiscreteDist ci_model_to_dist(const CondIndepModel& model);

// Chain-rule upper bound on d_H^2 between two conditionally independent
// models: d_H^2(priors) + max_omega [1 - prod_i (1 - d_H^2(cond_i | omega))].
double ci_hellinger_sq_chain_bound(const CondIndepModel& m1, const CondIndepModel& m2);

enum class DistinguisherKind { likelihood_ratio, tv_nearest, custom };

DistinguisherKind distinguisher_from_string(const std::string& name);

// Maps T observed support indices to a guess in {1, 2}.
using Distinguisher = std::function<int(const std::vector<std::size_t>& samples,
                                        const DiscreteDist& d1,
                                        const DiscreteDist& d2, Rng& rng)>;

struct DistinguishTrialRow {
  std::size_t trial;
  int truth;
  int guess;
  std::size_t T;
};

struct DistinguishReport {
  std::size_t trials;
  std::size_t T;
  std::size_t mistakes;
  double empirical_error;
  double stderr_;
  double hellinger_sq;      // exact, on the given supports
  double floor_sqrt_t;      // 1/2 - sqrt(T/2) d_H
  double floor_exp;         // (1/4) (1 - d_H^2)^(2T)
  std::vector<DistinguishTrialRow> rows;
};

// `trials` rounds of: pick i in {1,2} uniformly, draw T samples from d_i,
// ask the distinguisher, record the mistake.
DistinguishReport distinguish_experiment(const DiscreteDist& d1,
                                         const DiscreteDist& d2, std::size_t T,
                                         std::size_t trials,
                                         DistinguisherKind kind,
                                         std::uint64_t seed,
                                         const Distinguisher* custom = nullptr);

}  // namespace aggrlab
