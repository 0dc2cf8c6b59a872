#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aggrlab/errors.hpp"
#include "aggrlab/model.hpp"

namespace aggrlab {

class Aggregator;

// Labeled discrete distribution.  Distances refuse mismatched supports;
// callers must co-index.
struct DiscreteDist {
  std::vector<std::string> labels;
  std::vector<double> probs;

  DiscreteDist() = default;
  DiscreteDist(std::vector<std::string> labels_, std::vector<double> probs_);
};

double tv_distance(const DiscreteDist& d1, const DiscreteDist& d2);
double hellinger_sq(const DiscreteDist& d1, const DiscreteDist& d2);

// Unlabeled variants over co-indexed vectors.
double tv_distance(const std::vector<double>& p1, const std::vector<double>& p2);
double hellinger_sq(const std::vector<double>& p1, const std::vector<double>& p2);

// d_H^2 of T-fold i.i.d. products: 1 - (1 - h2)^T, which never exceeds T*h2.
double hellinger_sq_iid_product(double h2, std::size_t T);

enum class LossMethod { exact, monte_carlo };

// Expected squared loss of an aggregator, optimal loss, and the optimality
// gap.  Exact mode carries the gap computed both as a loss difference and
// directly as the expected squared distance to the optimum; the two must
// agree to 1e-9.
struct LossReport {
  double loss = 0.0;
  std::optional<double> optimal_loss;
  std::optional<double> gap;         // loss - optimal_loss
  std::optional<double> gap_direct;  // E || f - f* ||^2 (1/k-normalized for k > 2)
  LossMethod method = LossMethod::exact;
  std::optional<double> stderr_;     // monte_carlo only
};

// Exact sums over the report-profile pushforward.  The optimal aggregator is
// derived from the same joint.
LossReport expected_loss_exact(const DiscreteJoint& joint, const Aggregator& f,
                               std::size_t cell_cap = kDefaultCellCap);

// As above but with the support already enumerated (joint not needed).
LossReport expected_loss_on_support(const std::vector<SupportEntry>& support,
                                    const Aggregator& f);

// Empirical mean of per-record losses; no access to f*, so gap fields
// are absent.
LossReport expected_loss_mc(const SampleSet& samples, const Aggregator& f);

// Per-record squared loss; binary aggregators score |f - omega|^2, k > 2
// score (1/k) sum_j |f_j - 1[omega = j]|^2.
double record_loss(const Aggregator& f, ProfileView profile, int outcome);

}  // namespace aggrlab
