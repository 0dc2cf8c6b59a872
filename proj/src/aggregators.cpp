#include "aggrlab/aggregators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aggrlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double stable_sigmoid_neg(double logit) {
  // 1 / (1 + e^logit)
  if (logit == kInf) return 0.0;
  if (logit == -kInf) return 1.0;
  if (logit > 0.0) {
    double e = std::exp(-logit);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(logit));
}

// Per-profile sufficient statistic of the Bordley formula.
struct OddsStats {
  double logsum = 0.0;  // sum of log((1 - r_i) / r_i) over interior reports
  int infinities = 0;   // reports at 0
  int zeros = 0;        // reports at 1
};

OddsStats odds_stats(ProfileView profile) {
  OddsStats stats;
  for (int i = 0; i < profile.num_experts(); ++i) {
    double r = profile.binary(i);
    if (r <= 0.0) ++stats.infinities;
    else if (r >= 1.0) ++stats.zeros;
    else stats.logsum += std::log((1.0 - r) / r);
  }
  return stats;
}

double bordley_from_stats(double log_theta_pow, const OddsStats& stats) {
  if (stats.infinities > 0 && stats.zeros > 0)
    throw ContradictoryReports("bordley: product mixes 0 and +inf factors");
  if (stats.infinities > 0) return 0.0;
  if (stats.zeros > 0) return 1.0;
  return stable_sigmoid_neg(log_theta_pow + stats.logsum);
}

std::vector<double> wrap_binary(double v) { return {1.0 - v, v}; }

}  // namespace

std::string to_string(AggregatorKind kind) {
  switch (kind) {
    case AggregatorKind::bayes_optimal: return "bayes_optimal";
    case AggregatorKind::averaging: return "averaging";
    case AggregatorKind::bordley_theta: return "bordley_theta";
    case AggregatorKind::empirical_erm: return "empirical_erm";
    case AggregatorKind::empirical_bayes: return "empirical_bayes";
    case AggregatorKind::strong_informative: return "strong_informative";
    case AggregatorKind::weak_informative: return "weak_informative";
    case AggregatorKind::multi_theta: return "multi_theta";
  }
  return "unknown";
}

AggregatorKind aggregator_kind_from_string(const std::string& name) {
  for (AggregatorKind kind :
       {AggregatorKind::bayes_optimal, AggregatorKind::averaging,
        AggregatorKind::bordley_theta, AggregatorKind::empirical_erm,
        AggregatorKind::empirical_bayes, AggregatorKind::strong_informative,
        AggregatorKind::weak_informative, AggregatorKind::multi_theta}) {
    if (to_string(kind) == name) return kind;
  }
  throw InvalidConfig("unknown aggregator kind: " + name);
}

bool Aggregator::binary_output() const {
  switch (kind_) {
    case AggregatorKind::bordley_theta:
    case AggregatorKind::empirical_bayes:
    case AggregatorKind::strong_informative:
    case AggregatorKind::weak_informative:
      return true;
    default:
      return k_ == 2;
  }
}

void Aggregator::set_default_output(std::vector<double> dist) {
  if (k_ != 0 && dist.size() != std::size_t(k_))
    throw DimensionMismatch("set_default_output: arity mismatch");
  default_output_ = std::move(dist);
}

const Aggregator::Lookup* Aggregator::lookup_params() const {
  return (kind_ == AggregatorKind::bayes_optimal ||
          kind_ == AggregatorKind::empirical_erm ||
          kind_ == AggregatorKind::empirical_bayes)
             ? &lookup_
             : nullptr;
}
const Aggregator::Bordley* Aggregator::bordley_params() const {
  return (kind_ == AggregatorKind::bordley_theta ||
          kind_ == AggregatorKind::weak_informative)
             ? &bordley_
             : nullptr;
}
const Aggregator::MultiTheta* Aggregator::multi_theta_params() const {
  return kind_ == AggregatorKind::multi_theta ? &multi_theta_ : nullptr;
}
const Aggregator::StrongThreshold* Aggregator::strong_params() const {
  return kind_ == AggregatorKind::strong_informative ? &strong_ : nullptr;
}

std::vector<double> Aggregator::apply(ProfileView profile) const {
  const int k = profile.num_outcomes();
  if (k_ != 0 && k != k_)
    throw DimensionMismatch("Aggregator::apply: outcome arity mismatch");

  switch (kind_) {
    case AggregatorKind::averaging: {
      std::vector<double> out(k, 0.0);
      const int n = profile.num_experts();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) out[j] += profile.at(i, j);
      for (double& v : out) v /= n;
      return out;
    }
    case AggregatorKind::bayes_optimal:
    case AggregatorKind::empirical_erm:
    case AggregatorKind::empirical_bayes: {
      auto it = lookup_.table.find(profile_key(profile));
      if (it != lookup_.table.end()) return it->second;
      if (lookup_.error_on_unseen)
        throw UnseenProfile("lookup aggregator: profile not in support");
      return default_output_;
    }
    case AggregatorKind::bordley_theta:
    case AggregatorKind::weak_informative: {
      if (profile.num_experts() != bordley_.n)
        throw DimensionMismatch("bordley: expert arity mismatch");
      double v = bordley_from_stats((bordley_.n - 1) * std::log(bordley_.theta),
                                    odds_stats(profile));
      return wrap_binary(v);
    }
    case AggregatorKind::multi_theta: {
      std::vector<double> logits(k);
      bool any_finite = false;
      for (int j = 0; j < k; ++j) {
        double acc = std::log(multi_theta_.theta[j]);
        for (int i = 0; i < profile.num_experts(); ++i) {
          double r = profile.at(i, j);
          acc += (r > 0.0) ? std::log(r) : -kInf;
        }
        logits[j] = acc;
        if (acc > -kInf) any_finite = true;
      }
      if (!any_finite)
        throw AllZeroLikelihood("multi_bordley: all outcome likelihoods vanish");
      double top = *std::max_element(logits.begin(), logits.end());
      std::vector<double> out(k);
      double total = 0.0;
      for (int j = 0; j < k; ++j) {
        out[j] = (logits[j] == -kInf) ? 0.0 : std::exp(logits[j] - top);
        total += out[j];
      }
      for (double& v : out) v /= total;
      return out;
    }
    case AggregatorKind::strong_informative: {
      if (profile.num_experts() != strong_.n)
        throw DimensionMismatch("strong_informative: expert arity mismatch");
      int count = 0;
      for (int i = 0; i < strong_.n; ++i) {
        double r = profile.binary(i);
        double ratio = (r >= 1.0) ? kInf : (r <= 0.0 ? 0.0 : r / (1.0 - r));
        if (strong_.u == 1 ? (ratio > strong_.rho_hat) : (ratio < strong_.rho_hat))
          ++count;
      }
      int prediction = (count > strong_.threshold_m) ? strong_.u : 1 - strong_.u;
      return wrap_binary(double(prediction));
    }
  }
  throw Error("Aggregator::apply: unreachable");
}

double Aggregator::apply_binary(ProfileView profile) const {
  if (profile.num_outcomes() != 2)
    throw DimensionMismatch("apply_binary: profile is not binary");
  return apply(profile)[1];
}

Aggregator Aggregator::make_lookup(AggregatorKind kind, int k, Lookup lookup) {
  Aggregator f;
  f.kind_ = kind;
  f.k_ = k;
  f.lookup_ = std::move(lookup);
  f.default_output_.assign(k, 1.0 / k);
  return f;
}

Aggregator Aggregator::make_averaging() {
  Aggregator f;
  f.kind_ = AggregatorKind::averaging;
  f.k_ = 0;
  return f;
}

Aggregator Aggregator::make_bordley(AggregatorKind kind, double theta, int n) {
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw PreconditionViolated("bordley: theta must be positive and finite");
  if (n < 1) throw DimensionMismatch("bordley: n must be >= 1");
  Aggregator f;
  f.kind_ = kind;
  f.k_ = 2;
  f.bordley_ = {theta, n};
  f.default_output_ = {0.5, 0.5};
  return f;
}

Aggregator Aggregator::make_multi_theta(std::vector<double> theta, int n) {
  if (theta.size() < 2) throw DimensionMismatch("multi_bordley: k must be >= 2");
  for (double t : theta)
    if (!(t > 0.0) || !std::isfinite(t))
      throw PreconditionViolated("multi_bordley: theta entries must be positive");
  if (n < 1) throw DimensionMismatch("multi_bordley: n must be >= 1");
  Aggregator f;
  f.kind_ = AggregatorKind::multi_theta;
  f.k_ = int(theta.size());
  f.multi_theta_ = {std::move(theta), n};
  f.default_output_.assign(f.k_, 1.0 / f.k_);
  return f;
}

Aggregator Aggregator::make_strong(StrongThreshold params) {
  Aggregator f;
  f.kind_ = AggregatorKind::strong_informative;
  f.k_ = 2;
  f.strong_ = std::move(params);
  f.default_output_ = {0.5, 0.5};
  return f;
}

// ---- Exact constructions ----------------------------------------------------

Aggregator bayes_optimal_from_support(const std::vector<SupportEntry>& support, int k) {
  Aggregator::Lookup lookup;
  lookup.error_on_unseen = true;
  std::map<ProfileKey, std::vector<double>> totals;
  for (const auto& entry : support) {
    ProfileKey key = profile_key(entry.profile);
    auto [it, inserted] = totals.try_emplace(key, std::vector<double>(k, 0.0));
    it->second[entry.outcome] += entry.prob;
    lookup.representatives.try_emplace(key, entry.profile);
  }
  for (auto& [key, dist] : totals) {
    double total = 0.0;
    for (double v : dist) total += v;
    for (double& v : dist) v /= total;
    lookup.table.emplace(key, std::move(dist));
  }
  return Aggregator::make_lookup(AggregatorKind::bayes_optimal, k, std::move(lookup));
}

Aggregator bayes_optimal(const DiscreteJoint& joint, std::size_t cell_cap) {
  return bayes_optimal_from_support(report_support(joint, cell_cap),
                                    joint.num_outcomes());
}

Aggregator averaging() { return Aggregator::make_averaging(); }

Aggregator bordley(double theta, int n) {
  return Aggregator::make_bordley(AggregatorKind::bordley_theta, theta, n);
}

Aggregator multi_bordley(std::vector<double> theta, int n) {
  return Aggregator::make_multi_theta(std::move(theta), n);
}

// ---- Lookup learners ----------------------------------------------------------

namespace {

Aggregator empirical_lookup(const SampleSet& samples, int k, AggregatorKind kind) {
  if (samples.size() == 0) throw EmptySample("empirical learner: no samples");
  if (k != samples.num_outcomes())
    throw DimensionMismatch("empirical learner: outcome arity mismatch");

  std::map<ProfileKey, std::vector<double>> counts;
  Aggregator::Lookup lookup;
  for (std::size_t t = 0; t < samples.size(); ++t) {
    ProfileView profile = samples.profile(t);
    ProfileKey key = profile_key(profile);
    auto [it, inserted] = counts.try_emplace(key, std::vector<double>(k, 0.0));
    it->second[samples.outcome(t)] += 1.0;
    if (inserted) lookup.representatives.emplace(key, profile.materialize());
  }
  for (auto& [key, dist] : counts) {
    double total = 0.0;
    for (double v : dist) total += v;
    for (double& v : dist) v /= total;
    lookup.table.emplace(key, std::move(dist));
  }
  return Aggregator::make_lookup(kind, k, std::move(lookup));
}

}  // namespace

Aggregator erm_empirical(const SampleSet& samples, int k) {
  return empirical_lookup(samples, k, AggregatorKind::empirical_erm);
}

Aggregator empirical_bayes(const SampleSet& samples) {
  if (samples.size() == 0) throw EmptySample("empirical_bayes: no samples");
  if (samples.num_outcomes() != 2)
    throw DimensionMismatch("empirical_bayes: binary outcomes required");
  // f(r) = #(r, omega = 1) / #(r); identical to the per-profile conditional
  // frequency, so it shares the lookup construction.
  return empirical_lookup(samples, 2, AggregatorKind::empirical_bayes);
}

// ---- theta-family ERM ---------------------------------------------------------

namespace {

struct BordleyTrainingData {
  std::vector<OddsStats> stats;
  std::vector<int> outcomes;
  int n;

  double empirical_loss(double log_theta_pow) const {
    double acc = 0.0;
    for (std::size_t t = 0; t < stats.size(); ++t) {
      double f = bordley_from_stats(log_theta_pow, stats[t]);
      double d = f - outcomes[t];
      acc += d * d;
    }
    return acc / double(stats.size());
  }
};

BordleyTrainingData bordley_training_data(const SampleSet& samples) {
  BordleyTrainingData data;
  data.n = samples.num_experts();
  data.stats.reserve(samples.size());
  data.outcomes.reserve(samples.size());
  for (std::size_t t = 0; t < samples.size(); ++t) {
    OddsStats stats = odds_stats(samples.profile(t));
    if (stats.infinities > 0 && stats.zeros > 0)
      throw ContradictoryReports("erm_theta: sample mixes 0 and 1 reports");
    data.stats.push_back(stats);
    data.outcomes.push_back(samples.outcome(t));
  }
  return data;
}

}  // namespace

Aggregator erm_theta(const SampleSet& samples, const ThetaGridSpec& grid) {
  if (samples.size() == 0) throw EmptySample("erm_theta: no samples");
  if (samples.num_outcomes() != 2)
    throw DimensionMismatch("erm_theta: binary outcomes required");
  if (!(grid.theta_min > 0.0) || !(grid.theta_min < grid.theta_max) ||
      grid.points < 2 || !(grid.refine_rel_width > 0.0))
    throw InvalidGrid("erm_theta: invalid grid spec");

  BordleyTrainingData data = bordley_training_data(samples);
  const int n = data.n;
  const double u_lo = std::log(grid.theta_min);
  const double u_hi = std::log(grid.theta_max);
  const double step = (u_hi - u_lo) / (grid.points - 1);

  double best_u = u_lo;
  double best_loss = kInf;
  auto consider = [&](double u) {
    double loss = data.empirical_loss((n - 1) * u);
    // strict improvement only, and candidates are visited smallest-u first
    // on the grid, so ties resolve toward smaller theta
    if (loss < best_loss || (loss == best_loss && u < best_u)) {
      best_loss = loss;
      best_u = u;
    }
    return loss;
  };

  int best_index = 0;
  double best_grid_loss = kInf;
  for (int j = 0; j < grid.points; ++j) {
    double u = u_lo + j * step;
    double loss = consider(u);
    if (loss < best_grid_loss) {
      best_grid_loss = loss;
      best_index = j;
    }
  }

  // Golden-section refinement on the bracket around the best grid point.
  double a = u_lo + std::max(0, best_index - 1) * step;
  double b = u_lo + std::min(grid.points - 1, best_index + 1) * step;
  const double phi = 0.6180339887498949;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = consider(c);
  double fd = consider(d);
  while (b - a > grid.refine_rel_width) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = consider(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = consider(d);
    }
  }

  return bordley(std::exp(best_u), n);
}

namespace {

struct MultiThetaTrainingData {
  // log_rprod[t][j] = sum_i log r_ij
  std::vector<std::vector<double>> log_rprod;
  std::vector<int> outcomes;
  int k;

  // logits l (l_0 = 0 fixed); f_j = softmax_j(log_rprod[t][j] - (n-1) l_j)
  double empirical_loss(const std::vector<double>& neg_scaled_logits) const {
    double acc = 0.0;
    std::vector<double> a(k), f(k);
    for (std::size_t t = 0; t < log_rprod.size(); ++t) {
      double top = -kInf;
      for (int j = 0; j < k; ++j) {
        a[j] = log_rprod[t][j] + neg_scaled_logits[j];
        top = std::max(top, a[j]);
      }
      double total = 0.0;
      for (int j = 0; j < k; ++j) {
        f[j] = (a[j] == -kInf) ? 0.0 : std::exp(a[j] - top);
        total += f[j];
      }
      double record = 0.0;
      for (int j = 0; j < k; ++j) {
        double d = f[j] / total - (outcomes[t] == j ? 1.0 : 0.0);
        record += d * d;
      }
      acc += record / k;
    }
    return acc / double(log_rprod.size());
  }
};

}  // namespace

Aggregator multi_erm_theta(const SampleSet& samples, int k,
                           const MultiThetaGridSpec& grid) {
  if (samples.size() == 0) throw EmptySample("multi_erm_theta: no samples");
  if (k != samples.num_outcomes())
    throw DimensionMismatch("multi_erm_theta: outcome arity mismatch");
  const int n = samples.num_experts();

  MultiThetaTrainingData data;
  data.k = k;
  data.outcomes.reserve(samples.size());
  data.log_rprod.reserve(samples.size());
  for (std::size_t t = 0; t < samples.size(); ++t) {
    ProfileView profile = samples.profile(t);
    std::vector<double> row(k);
    bool any_finite = false;
    for (int j = 0; j < k; ++j) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        double r = profile.at(i, j);
        acc += (r > 0.0) ? std::log(r) : -kInf;
      }
      row[j] = acc;
      if (acc > -kInf) any_finite = true;
    }
    if (!any_finite)
      throw AllZeroLikelihood("multi_erm_theta: sample with all-zero likelihood");
    data.log_rprod.push_back(std::move(row));
    data.outcomes.push_back(samples.outcome(t));
  }

  // Coordinate descent over logits l_1..l_{k-1} (l_0 = 0 quotients out the
  // common rescaling of theta).
  std::vector<double> logits(k, 0.0);
  auto loss_of = [&](const std::vector<double>& l) {
    std::vector<double> neg(k);
    for (int j = 0; j < k; ++j) neg[j] = -(n - 1) * l[j];
    return data.empirical_loss(neg);
  };

  double current = loss_of(logits);
  // coarse scan per coordinate
  for (int j = 1; j < k; ++j) {
    std::vector<double> trial = logits;
    for (int c = 0; c < grid.coarse_points; ++c) {
      trial[j] = -grid.logit_bound +
                 2.0 * grid.logit_bound * c / (grid.coarse_points - 1);
      double loss = loss_of(trial);
      if (loss < current) {
        current = loss;
        logits[j] = trial[j];
      }
    }
  }
  for (double step : grid.refine_steps) {
    for (int pass = 0; pass < grid.passes_per_step; ++pass) {
      bool moved = false;
      for (int j = 1; j < k; ++j) {
        std::vector<double> trial = logits;
        for (double offset : {-2.0 * step, -step, step, 2.0 * step}) {
          trial[j] = std::clamp(logits[j] + offset, -grid.logit_bound,
                                grid.logit_bound);
          double loss = loss_of(trial);
          if (loss < current) {
            current = loss;
            logits[j] = trial[j];
            moved = true;
          }
          trial[j] = logits[j];
        }
      }
      if (!moved) break;
    }
  }

  // theta_j = q_j^-(n-1) with q = softmax(logits), so sum_j q_j = 1.
  double top = *std::max_element(logits.begin(), logits.end());
  double lse = 0.0;
  for (double l : logits) lse += std::exp(l - top);
  lse = top + std::log(lse);
  std::vector<double> theta(k);
  for (int j = 0; j < k; ++j) theta[j] = std::exp(-(n - 1) * (logits[j] - lse));
  return multi_bordley(std::move(theta), n);
}

// ---- rho estimation and regime test -------------------------------------------

RhoEstimate estimate_rho(const SampleSet& samples) {
  if (samples.num_outcomes() != 2)
    throw DimensionMismatch("estimate_rho: binary outcomes required");
  const int n = samples.num_experts();
  double sum0 = 0.0, sum1 = 0.0;
  std::size_t count0 = 0, count1 = 0;
  for (std::size_t t = 0; t < samples.size(); ++t) {
    if (samples.outcome(t) == 0) {
      for (int i = 0; i < n; ++i) sum0 += samples.binary_report(t, i);
      ++count0;
    } else {
      for (int i = 0; i < n; ++i) sum1 += 1.0 - samples.binary_report(t, i);
      ++count1;
    }
  }
  if (count0 == 0 || count1 == 0)
    throw MissingOutcomeClass("estimate_rho: need both outcome classes");
  double numerator = sum0 / double(count0);
  double denominator = sum1 / double(count1);
  if (denominator == 0.0) throw ZeroDenominator("estimate_rho: denominator is 0");
  return {numerator / denominator, count0, count1};
}

std::size_t mean_regime_test_budget(double eps, double delta) {
  return std::size_t(std::ceil(40.0 / eps * std::log(2.0 / delta)));
}

MeanRegime mean_regime_test(const SampleSet& samples, double eps, double delta) {
  if (samples.num_outcomes() != 2)
    throw DimensionMismatch("mean_regime_test: binary outcomes required");
  if (samples.size() < mean_regime_test_budget(eps, delta))
    throw InsufficientSamples("mean_regime_test: need >= ceil((40/eps) log(2/delta))");
  const int n = samples.num_experts();
  double acc = 0.0;
  for (std::size_t t = 0; t < samples.size(); ++t) {
    if (samples.outcome(t) != 0) continue;
    double mean_report = 0.0;
    for (int i = 0; i < n; ++i) mean_report += samples.binary_report(t, i);
    acc += mean_report / n;
  }
  double empirical_mean = acc / double(samples.size());
  return empirical_mean < 0.75 * eps ? MeanRegime::below_eps
                                     : MeanRegime::above_half_eps;
}

// ---- strongly informative -------------------------------------------------------

std::size_t estimate_rho_budget(double pmu0_lower, double minp_lower, int n,
                                double accuracy_delta, double delta) {
  double log_term = std::log(2.0 / delta);
  return std::size_t(
      std::ceil(6.0 / (pmu0_lower * n * accuracy_delta * accuracy_delta) * log_term +
                12.0 / minp_lower * log_term));
}

StrongBudget strongly_informative_budget(int n, double gamma, double eps,
                                         double delta) {
  // After the regime test, (1-p) mu0 = p mu1 >= eps/4 and hence
  // min{p, 1-p} >= eps/4.
  double accuracy_delta = gamma / (1.0 + gamma) / 4.0;
  StrongBudget budget;
  budget.regime = mean_regime_test_budget(eps, delta);
  budget.rho = estimate_rho_budget(eps / 4.0, eps / 4.0, n, accuracy_delta, delta);
  budget.task2 = std::size_t(std::ceil(48.0 / eps * std::log(2.0 / delta)));
  return budget;
}

Aggregator strongly_informative_learn(const SampleSet& samples, double gamma,
                                      double eps, double delta, int n) {
  if (samples.num_outcomes() != 2)
    throw DimensionMismatch("strongly_informative_learn: binary outcomes required");
  if (n != samples.num_experts())
    throw DimensionMismatch("strongly_informative_learn: expert arity mismatch");
  if (!(n >= 32.0 * std::log(2.0 / eps)))
    throw PreconditionViolated("strongly_informative_learn: n < 32 log(2/eps)");
  double share = gamma / (1.0 + gamma);
  if (!(share >= 8.0 * std::sqrt(2.0 / n * std::log(2.0 / eps))))
    throw PreconditionViolated(
        "strongly_informative_learn: gamma/(1+gamma) < 8 sqrt((2/n) log(2/eps))");

  StrongBudget budget = strongly_informative_budget(n, gamma, eps, delta);
  if (samples.size() < budget.total())
    throw InsufficientSamples("strongly_informative_learn: sample budget not met");

  // (0) small-mean regime: averaging is already eps-optimal there.
  SampleSet regime_part = samples.slice(0, budget.regime);
  if (mean_regime_test(regime_part, eps, delta) == MeanRegime::below_eps)
    return averaging();

  // (1) estimate rho tightly enough to separate the two signal classes.
  SampleSet rho_part = samples.slice(budget.regime, budget.rho);
  double rho_hat = estimate_rho(rho_part).rho_hat;

  // (2) pick the side u whose count concentrates above n/2 - a, and set the
  // decision threshold M two slacks below its estimated mean.
  SampleSet task2 = samples.slice(budget.regime + budget.rho,
                                  samples.size() - budget.regime - budget.rho);
  const double slack_a = std::sqrt(n / 2.0 * std::log(2.0 / eps));
  double mean[2];
  bool qualified[2] = {false, false};
  for (int u = 0; u < 2; ++u) {
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < task2.size(); ++t) {
      if (task2.outcome(t) != u) continue;
      int x = 0;
      for (int i = 0; i < n; ++i) {
        double r = task2.binary_report(t, i);
        double ratio = (r >= 1.0) ? kInf : (r <= 0.0 ? 0.0 : r / (1.0 - r));
        if (u == 1 ? (ratio > rho_hat) : (ratio < rho_hat)) ++x;
      }
      acc += x;
      ++count;
    }
    if (count == 0)
      throw MissingOutcomeClass("strongly_informative_learn: outcome class absent");
    mean[u] = acc / double(count);
    qualified[u] = mean[u] >= n / 2.0 - slack_a;
  }
  int u;
  if (qualified[0] && qualified[1]) u = (mean[1] >= mean[0]) ? 1 : 0;
  else if (qualified[0]) u = 0;
  else if (qualified[1]) u = 1;
  else throw NoQualifyingIndex("strongly_informative_learn: no index passes n/2 - a");

  Aggregator::StrongThreshold params;
  params.rho_hat = rho_hat;
  params.u = u;
  params.slack_a = slack_a;
  params.threshold_m = mean[u] - 2.0 * slack_a;
  params.n = n;
  return Aggregator::make_strong(params);
}

// ---- weakly informative ----------------------------------------------------------

std::size_t weakly_informative_budget(double gamma, int n, double eps, double delta) {
  constexpr double e = 2.718281828459045;
  return std::size_t(
      std::ceil(54.0 * e * gamma * n / eps * std::log(2.0 / delta)));
}

Aggregator weakly_informative_learn(const SampleSet& samples, double gamma, int n) {
  if (samples.size() == 0) throw EmptySample("weakly_informative_learn: no samples");
  if (samples.num_outcomes() != 2)
    throw DimensionMismatch("weakly_informative_learn: binary outcomes required");
  if (n != samples.num_experts())
    throw DimensionMismatch("weakly_informative_learn: expert arity mismatch");
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw PreconditionViolated("weakly_informative_learn: gamma must be in (0, 1]");

  // floor(1/gamma); the nudge keeps exact reciprocals like 1/20 intact
  const std::size_t group_size =
      std::max<std::size_t>(1, std::size_t(std::floor(1.0 / gamma + 1e-9)));

  std::size_t count[2] = {0, 0};
  for (std::size_t t = 0; t < samples.size(); ++t) ++count[samples.outcome(t)];
  const int cls = (count[1] > count[0]) ? 1 : 0;

  // Pool the per-expert odds terms of the chosen class in record order and
  // average complete-group products; leftovers are dropped.
  double mean = 0.0;
  std::size_t groups = 0;
  double product = 1.0;
  std::size_t in_group = 0;
  for (std::size_t t = 0; t < samples.size(); ++t) {
    if (samples.outcome(t) != cls) continue;
    for (int i = 0; i < n; ++i) {
      double r = samples.binary_report(t, i);
      double term;
      if (cls == 0) term = (r >= 1.0) ? kInf : r / (1.0 - r);
      else term = (r <= 0.0) ? kInf : (1.0 - r) / r;
      product *= term;
      if (++in_group == group_size) {
        mean += product;
        ++groups;
        product = 1.0;
        in_group = 0;
      }
    }
  }
  if (groups == 0)
    throw InsufficientGroups("weakly_informative_learn: fewer than one complete group");
  mean /= double(groups);
  if (!(mean > 0.0) || !std::isfinite(mean))
    throw PreconditionViolated(
        "weakly_informative_learn: degenerate odds terms (reports at 0 or 1)");

  double rho_hat = (cls == 0) ? std::pow(mean, 1.0 / double(group_size))
                              : std::pow(mean, -1.0 / double(group_size));
  return Aggregator::make_bordley(AggregatorKind::weak_informative, rho_hat, n);
}

std::size_t empirical_bayes_budget(std::size_t signal_cells, double c, double eps,
                                   double delta) {
  double cells = double(signal_cells);
  return std::size_t(
      std::ceil(48.0 * cells / (c * eps) * std::log(cells / delta)));
}

}  // namespace aggrlab
