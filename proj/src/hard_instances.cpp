#include "aggrlab/hard_instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aggrlab/parallel.hpp"

namespace aggrlab {

namespace {

constexpr double kE = 2.718281828459045;

}  // namespace

DzFamily::DzFamily(int m, int n, double eps, std::size_t cell_cap)
    : m_(m), n_(n), eps_(eps) {
  if (m < 2 || m % 2 != 0) throw OddSignalSpace("DzFamily: m must be even and >= 2");
  if (n < 2) throw DimensionMismatch("DzFamily: n must be >= 2");
  if (!(eps > 0.0) || !(kC * eps <= 0.5))
    throw EpsilonTooLarge("DzFamily: requires c*eps <= 1/2 (eps < 1/40)");
  cells_ = 1;
  for (int i = 0; i < n; ++i) {
    if (cells_ > cell_cap / std::size_t(m)) throw SupportTooLarge("DzFamily: m^n too large");
    cells_ *= std::size_t(m);
  }
  buckets_ = cells_ / (std::size_t(m) * m);
  gamma_ = 1.0 + 1.0 / double(cells_);
  // W = sum_{l=1}^{m^n} gamma^l, compensated so normalization stays exact
  // even for large supports.
  double sum = 0.0, carry = 0.0, term = gamma_;
  for (std::size_t l = 0; l < cells_; ++l) {
    double y = term - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
    term *= gamma_;
  }
  weight_ = sum;
}

double DzFamily::uniform_bound() const { return kE + 0.5; }

std::vector<std::string> dz_labels(const DzFamily& family) {
  std::vector<std::string> labels(family.num_cells());
  std::vector<int> signal(family.n(), 1);
  for (std::size_t c = 0; c < family.num_cells(); ++c) {
    std::string label;
    for (int i = 0; i < family.n(); ++i) {
      if (i) label += ',';
      label += std::to_string(signal[i]);
    }
    labels[c] = std::move(label);
    for (int i = family.n() - 1; i >= 0; --i) {
      if (++signal[i] <= family.m()) break;
      signal[i] = 1;
    }
  }
  return labels;
}

DiscreteDist dz_base(const DzFamily& family) {
  const std::size_t cells = family.num_cells();
  std::vector<double> probs(cells);
  double gamma = family.gamma_base();
  // num(s) runs 1..m^n in lexicographic order, which is cell order + 1.
  double value = gamma / family.weight();
  for (std::size_t c = 0; c < cells; ++c) {
    probs[c] = value;
    value *= gamma;
  }
  return DiscreteDist(dz_labels(family), std::move(probs));
}

DiscreteDist dz_base(int m, int n, double eps) {
  return dz_base(DzFamily(m, n, eps));
}

DiscreteDist dz_build(const DzFamily& family, const std::vector<int>& z) {
  if (z.size() != family.num_buckets())
    throw SignVectorMismatch("dz_build: one sign per bucket required");
  for (int s : z)
    if (s != 1 && s != -1) throw SignVectorMismatch("dz_build: signs must be +-1");

  DiscreteDist base = dz_base(family);
  const int m = family.m();
  const double shift = family.perturbation();
  const std::size_t bucket_size = std::size_t(m) * m;
  for (std::size_t b = 0; b < family.num_buckets(); ++b) {
    for (int x = 1; x <= m; ++x) {
      for (int y = 1; y <= m; ++y) {
        std::size_t cell = b * bucket_size + std::size_t(x - 1) * m + (y - 1);
        bool diagonal = (x <= m / 2) == (y <= m / 2);
        base.probs[cell] += (diagonal ? 1.0 : -1.0) * z[b] * shift;
      }
    }
  }
  return DiscreteDist(std::move(base.labels), std::move(base.probs));
}

std::vector<int> random_sign_vector(const DzFamily& family, Rng& rng) {
  std::vector<int> z(family.num_buckets());
  for (int& s : z) s = rng.bernoulli(0.5) ? 1 : -1;
  return z;
}

DiscreteJoint dz_to_aggregation_instance(const DzFamily& family,
                                         const std::vector<int>& z) {
  DiscreteDist dz = dz_build(family, z);
  const std::size_t cells = family.num_cells();
  const double uniform = 1.0 / double(cells);
  std::vector<double> table(cells * 2);
  for (std::size_t c = 0; c < cells; ++c) {
    table[c * 2 + 0] = 0.5 * uniform;
    table[c * 2 + 1] = 0.5 * dz.probs[c];
  }
  return build_joint(family.n(), std::vector<int>(family.n(), family.m()), 2, table);
}

RecoveredDistribution aggregator_to_distribution(
    const DzFamily& family, const Aggregator& f,
    const std::vector<double>* reference) {
  // Reports of the P_D instance depend only on D_base marginals, so any
  // member of the family yields the same signal -> profile map.
  DiscreteJoint joint =
      dz_to_aggregation_instance(family, std::vector<int>(family.num_buckets(), 1));
  const int n = family.n();
  const std::size_t cells = family.num_cells();
  const double cap = family.uniform_bound() / (1.0 + family.uniform_bound());

  // Per-expert report rows are shared across cells.
  std::vector<std::vector<double>> reports(n);
  for (int i = 0; i < n; ++i) {
    reports[i].resize(family.m());
    for (int s = 0; s < family.m(); ++s)
      reports[i][s] = expert_report(joint, i, s)[1];
  }

  RecoveredDistribution out;
  out.table.resize(cells);
  std::vector<double> matrix(std::size_t(n) * 2);
  std::vector<int> signal(n, 0);
  for (std::size_t c = 0; c < cells; ++c) {
    for (int i = 0; i < n; ++i) {
      double r = reports[i][signal[i]];
      matrix[std::size_t(i) * 2] = 1.0 - r;
      matrix[std::size_t(i) * 2 + 1] = r;
    }
    double value = f.apply_binary(ProfileView(matrix.data(), n, 2));
    value = std::min(value, cap);
    out.table[c] = value / (double(cells) * (1.0 - value));
    for (int i = n - 1; i >= 0; --i) {
      if (++signal[i] < family.m()) break;
      signal[i] = 0;
    }
  }

  double total = std::accumulate(out.table.begin(), out.table.end(), 0.0);
  out.normalized = std::abs(total - 1.0) <= kValidationTol;
  if (reference) {
    if (reference->size() != cells)
      throw SupportMismatch("aggregator_to_distribution: reference size mismatch");
    out.tv_to_reference = tv_distance(out.table, *reference);
  }
  return out;
}

// ---- CiPair ------------------------------------------------------------------

CiPair ci_pair_build(int n, double eps) {
  if (n < 2) throw DimensionMismatch("ci_pair_build: n must be >= 2");
  if (!(eps > 0.0) || !(eps < std::pow(2.0, -18.0)))
    throw EpsilonTooLarge("ci_pair_build: requires eps < 2^-18");

  const double root = std::sqrt(eps);
  const double nudge = CiPair::kC * root / n;

  auto build = [&](double sign) {
    // sign = +1 for P^1, -1 for P^2.
    double denom = 1.0 + 1.0 / (8.0 * n) - sign * 2.0 * nudge;
    double a_given_0 = (1.0 - 1.0 / (8.0 * n) + sign * 2.0 * nudge) / denom;
    double b_given_0 = (1.0 / (4.0 * n) - sign * 4.0 * CiPair::kC * root / n) / denom;
    double p = 0.5 - 1.0 / (16.0 * n) + sign * nudge;
    std::vector<double> prior = {1.0 - p, p};
    std::vector<std::vector<double>> expert = {{a_given_0, b_given_0}, {1.0, 0.0}};
    return build_cond_indep(prior,
                            std::vector<std::vector<std::vector<double>>>(n, expert));
  };
  return CiPair{n,
                eps,
                0.5 - 1.0 / (16.0 * n) + nudge,
                0.5 - 1.0 / (16.0 * n) - nudge,
                build(+1.0),
                build(-1.0)};
}

DiscreteDist ci_model_to_dist(const CondIndepModel& model) {
  const int n = model.num_experts();
  const int k = model.num_outcomes();
  std::size_t cells = 1;
  for (int i = 0; i < n; ++i) cells *= std::size_t(model.signal_size(i));

  std::vector<std::string> labels;
  std::vector<double> probs;
  labels.reserve(cells * k);
  probs.reserve(cells * k);
  for (int w = 0; w < k; ++w) {
    std::vector<int> signal(n, 0);
    for (std::size_t c = 0; c < cells; ++c) {
      double v = model.prior()[w];
      std::string label = "w=" + std::to_string(w) + "|";
      for (int i = 0; i < n; ++i) {
        v *= model.cond(i, w, signal[i]);
        label += char('a' + signal[i]);
      }
      labels.push_back(std::move(label));
      probs.push_back(v);
      for (int i = n - 1; i >= 0; --i) {
        if (++signal[i] < model.signal_size(i)) break;
        signal[i] = 0;
      }
    }
  }
  return DiscreteDist(std::move(labels), std::move(probs));
}

double ci_hellinger_sq_chain_bound(const CondIndepModel& m1,
                                   const CondIndepModel& m2) {
  double prior_h2 = hellinger_sq(m1.prior(), m2.prior());
  double worst = 0.0;
  for (int w = 0; w < m1.num_outcomes(); ++w) {
    double survival = 1.0;
    for (int i = 0; i < m1.num_experts(); ++i) {
      double h2 = hellinger_sq(m1.cond_tables()[i][w], m2.cond_tables()[i][w]);
      survival *= 1.0 - h2;
    }
    worst = std::max(worst, 1.0 - survival);
  }
  return prior_h2 + worst;
}

// ---- Distinguishing ------------------------------------------------------------

DistinguisherKind distinguisher_from_string(const std::string& name) {
  if (name == "likelihood_ratio") return DistinguisherKind::likelihood_ratio;
  if (name == "tv_nearest") return DistinguisherKind::tv_nearest;
  if (name == "custom") return DistinguisherKind::custom;
  throw InvalidDistinguisher("unknown distinguisher: " + name);
}

namespace {

int likelihood_ratio_guess(const std::vector<std::size_t>& samples,
                           const DiscreteDist& d1, const DiscreteDist& d2,
                           Rng& rng) {
  double llr = 0.0;
  bool impossible1 = false, impossible2 = false;
  for (std::size_t x : samples) {
    double p1 = d1.probs[x];
    double p2 = d2.probs[x];
    if (p1 == 0.0) impossible1 = true;
    if (p2 == 0.0) impossible2 = true;
    if (p1 > 0.0 && p2 > 0.0) llr += std::log(p1) - std::log(p2);
  }
  if (impossible1 != impossible2) return impossible2 ? 1 : 2;
  if (llr > 0.0) return 1;
  if (llr < 0.0) return 2;
  return rng.bernoulli(0.5) ? 1 : 2;  // exact tie
}

int tv_nearest_guess(const std::vector<std::size_t>& samples,
                     const DiscreteDist& d1, const DiscreteDist& d2, Rng& rng) {
  std::vector<double> empirical(d1.probs.size(), 0.0);
  for (std::size_t x : samples) empirical[x] += 1.0 / double(samples.size());
  double tv1 = samples.empty() ? 0.5 : tv_distance(empirical, d1.probs);
  double tv2 = samples.empty() ? 0.5 : tv_distance(empirical, d2.probs);
  if (tv1 < tv2) return 1;
  if (tv2 < tv1) return 2;
  return rng.bernoulli(0.5) ? 1 : 2;
}

}  // namespace

DistinguishReport distinguish_experiment(const DiscreteDist& d1,
                                         const DiscreteDist& d2, std::size_t T,
                                         std::size_t trials,
                                         DistinguisherKind kind,
                                         std::uint64_t seed,
                                         const Distinguisher* custom) {
  if (d1.labels != d2.labels)
    throw SupportMismatch("distinguish_experiment: supports must match");
  if (kind == DistinguisherKind::custom && custom == nullptr)
    throw InvalidDistinguisher("distinguish_experiment: custom function missing");

  std::vector<double> cdf1(d1.probs.size()), cdf2(d2.probs.size());
  std::partial_sum(d1.probs.begin(), d1.probs.end(), cdf1.begin());
  std::partial_sum(d2.probs.begin(), d2.probs.end(), cdf2.begin());

  DistinguishReport report;
  report.trials = trials;
  report.T = T;
  report.mistakes = 0;
  report.hellinger_sq = hellinger_sq(d1, d2);
  double d_h = std::sqrt(report.hellinger_sq);
  report.floor_sqrt_t = 0.5 - std::sqrt(double(T) / 2.0) * d_h;
  report.floor_exp = 0.25 * std::pow(1.0 - report.hellinger_sq, 2.0 * double(T));
  report.rows.reserve(trials);

  // Trials run concurrently on substreamed generators; each writes its own
  // row, and the counts are aggregated afterwards in trial order.
  Rng base = Rng(seed).substream("distinguish");
  report.rows.resize(trials);
  parallel_for(trials, [&](std::size_t trial) {
    Rng rng = base.substream(trial);
    int truth = rng.bernoulli(0.5) ? 1 : 2;
    const auto& cdf = (truth == 1) ? cdf1 : cdf2;
    std::vector<std::size_t> samples(T);
    for (std::size_t t = 0; t < T; ++t) samples[t] = rng.categorical_from_cdf(cdf);
    int guess;
    switch (kind) {
      case DistinguisherKind::likelihood_ratio:
        guess = likelihood_ratio_guess(samples, d1, d2, rng);
        break;
      case DistinguisherKind::tv_nearest:
        guess = tv_nearest_guess(samples, d1, d2, rng);
        break;
      default:
        guess = (*custom)(samples, d1, d2, rng);
        break;
    }
    report.rows[trial] = {trial, truth, guess, T};
  });
  for (const auto& row : report.rows)
    if (row.guess != row.truth) ++report.mistakes;
  report.empirical_error = double(report.mistakes) / double(trials);
  report.stderr_ = std::sqrt(report.empirical_error *
                             (1.0 - report.empirical_error) / double(trials));
  return report;
}

}  // namespace aggrlab
