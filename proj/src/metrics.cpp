#include "aggrlab/metrics.hpp"

#include <cmath>

#include "aggrlab/aggregators.hpp"

namespace aggrlab {

DiscreteDist::DiscreteDist(std::vector<std::string> labels_,
                           std::vector<double> probs_)
    : labels(std::move(labels_)), probs(std::move(probs_)) {
  if (labels.size() != probs.size())
    throw DimensionMismatch("DiscreteDist: labels/probs arity mismatch");
  double total = 0.0, carry = 0.0;
  for (double v : probs) {
    if (v < 0.0 || !std::isfinite(v))
      throw NotADistribution("DiscreteDist: negative or non-finite entry");
    double y = v - carry;
    double t = total + y;
    carry = (t - total) - y;
    total = t;
  }
  if (std::abs(total - 1.0) > kValidationTol)
    throw NotADistribution("DiscreteDist: sums to " + std::to_string(total));
}

namespace {

void check_same_support(const DiscreteDist& d1, const DiscreteDist& d2) {
  if (d1.labels != d2.labels)
    throw SupportMismatch("distance: distributions must share support labels");
}

}  // namespace

double tv_distance(const std::vector<double>& p1, const std::vector<double>& p2) {
  if (p1.size() != p2.size()) throw SupportMismatch("tv_distance: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < p1.size(); ++i) acc += std::abs(p1[i] - p2[i]);
  return 0.5 * acc;
}

double hellinger_sq(const std::vector<double>& p1, const std::vector<double>& p2) {
  if (p1.size() != p2.size()) throw SupportMismatch("hellinger_sq: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < p1.size(); ++i) acc += std::sqrt(p1[i] * p2[i]);
  return 1.0 - std::min(acc, 1.0);
}

double tv_distance(const DiscreteDist& d1, const DiscreteDist& d2) {
  check_same_support(d1, d2);
  return tv_distance(d1.probs, d2.probs);
}

double hellinger_sq(const DiscreteDist& d1, const DiscreteDist& d2) {
  check_same_support(d1, d2);
  return hellinger_sq(d1.probs, d2.probs);
}

double hellinger_sq_iid_product(double h2, std::size_t T) {
  if (h2 < 0.0 || h2 > 1.0)
    throw NotADistribution("hellinger_sq_iid_product: h2 must be in [0, 1]");
  double out = 1.0 - std::pow(1.0 - h2, double(T));
  if (out > double(T) * h2 + 1e-12)
    throw Error("hellinger_sq_iid_product: subadditivity violated");
  return out;
}

double record_loss(const Aggregator& f, ProfileView profile, int outcome) {
  const int k = profile.num_outcomes();
  if (k == 2) {
    double d = f.apply_binary(profile) - (outcome == 1 ? 1.0 : 0.0);
    return d * d;
  }
  std::vector<double> out = f.apply(profile);
  double acc = 0.0;
  for (int j = 0; j < k; ++j) {
    double d = out[j] - (outcome == j ? 1.0 : 0.0);
    acc += d * d;
  }
  return acc / k;
}

LossReport expected_loss_on_support(const std::vector<SupportEntry>& support,
                                    const Aggregator& f) {
  if (support.empty()) throw EmptySample("expected_loss_on_support: empty support");
  const int k = support.front().profile.num_outcomes();
  Aggregator optimal = bayes_optimal_from_support(support, k);

  double loss = 0.0;
  double optimal_loss = 0.0;
  double gap_direct = 0.0;
  for (const auto& entry : support) {
    loss += entry.prob * record_loss(f, entry.profile, entry.outcome);
    optimal_loss += entry.prob * record_loss(optimal, entry.profile, entry.outcome);
  }
  // One squared-distance term per distinct profile, weighted by P(profile).
  std::map<ProfileKey, std::pair<const ReportProfile*, double>> by_profile;
  for (const auto& entry : support) {
    auto [it, inserted] = by_profile.try_emplace(profile_key(entry.profile),
                                                 std::make_pair(&entry.profile, 0.0));
    it->second.second += entry.prob;
  }
  for (const auto& [key, item] : by_profile) {
    const ReportProfile& profile = *item.first;
    double mass = item.second;
    double dist_sq;
    if (k == 2) {
      double d = f.apply_binary(profile) - optimal.apply_binary(profile);
      dist_sq = d * d;
    } else {
      std::vector<double> fv = f.apply(profile);
      std::vector<double> ov = optimal.apply(profile);
      double acc = 0.0;
      for (int j = 0; j < k; ++j) {
        double d = fv[j] - ov[j];
        acc += d * d;
      }
      dist_sq = acc / k;
    }
    gap_direct += mass * dist_sq;
  }

  LossReport report;
  report.method = LossMethod::exact;
  report.loss = loss;
  report.optimal_loss = optimal_loss;
  report.gap = loss - optimal_loss;
  report.gap_direct = gap_direct;
  if (std::abs(*report.gap - gap_direct) > 1e-9)
    throw Error("expected_loss_exact: loss-difference identity violated (gap=" +
                std::to_string(*report.gap) + ", direct=" + std::to_string(gap_direct) +
                ")");
  return report;
}

LossReport expected_loss_exact(const DiscreteJoint& joint, const Aggregator& f,
                               std::size_t cell_cap) {
  return expected_loss_on_support(report_support(joint, cell_cap), f);
}

LossReport expected_loss_mc(const SampleSet& samples, const Aggregator& f) {
  if (samples.size() == 0) throw EmptySample("expected_loss_mc: empty sample set");
  const std::size_t T = samples.size();
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    double loss = record_loss(f, samples.profile(t), samples.outcome(t));
    sum += loss;
    sum_sq += loss * loss;
  }
  double mean = sum / double(T);

  LossReport report;
  report.method = LossMethod::monte_carlo;
  report.loss = mean;
  if (T > 1) {
    double variance = (sum_sq - double(T) * mean * mean) / double(T - 1);
    report.stderr_ = std::sqrt(std::max(0.0, variance) / double(T));
  } else {
    report.stderr_ = 0.0;
  }
  return report;
}

}  // namespace aggrlab
