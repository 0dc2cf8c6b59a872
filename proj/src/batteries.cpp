#include "aggrlab/batteries.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "aggrlab/json.hpp"

#include "aggrlab/aggregators.hpp"
#include "aggrlab/curve.hpp"
#include "aggrlab/generators.hpp"
#include "aggrlab/hard_instances.hpp"
#include "aggrlab/io.hpp"
#include "aggrlab/metrics.hpp"
#include "aggrlab/model.hpp"

namespace aggrlab {

namespace {

struct Battery {
  BatteryReport report;

  void assert_le(const std::string& name, double measured, double tolerance) {
    report.assertions.push_back({name, tolerance, measured, measured <= tolerance});
  }
  void assert_true(const std::string& name, bool ok) {
    report.assertions.push_back({name, 0.0, ok ? 0.0 : 1.0, ok});
  }
  void assert_ge(const std::string& name, double measured, double threshold) {
    // recorded as measured >= threshold; tolerance column stores threshold
    report.assertions.push_back({name, threshold, measured, measured >= threshold});
  }
};

// ---- exact oracles shared by several batteries --------------------------------

double joint_mu0(const DiscreteJoint& joint) {
  const int n = joint.num_experts();
  const double p0 = joint.outcome_prob(0);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int s = 0; s < joint.signal_sizes()[i]; ++s) {
      double mass = joint.signal_outcome_prob(i, s, 0) / p0;
      if (mass == 0.0) continue;
      acc += mass * expert_report(joint, i, s)[1];
    }
  }
  return acc / n;
}

double joint_mu1(const DiscreteJoint& joint) {
  const int n = joint.num_experts();
  const double p1 = joint.outcome_prob(1);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int s = 0; s < joint.signal_sizes()[i]; ++s) {
      double mass = joint.signal_outcome_prob(i, s, 1) / p1;
      if (mass == 0.0) continue;
      acc += mass * expert_report(joint, i, s)[0];
    }
  }
  return acc / n;
}

// Profile of a signal cell from per-expert reports.
ReportProfile cell_profile(const DiscreteJoint& joint, std::size_t cell) {
  const int n = joint.num_experts();
  const int k = joint.num_outcomes();
  std::vector<int> signals = joint.decode_signals(cell);
  std::vector<double> matrix(std::size_t(n) * k);
  for (int i = 0; i < n; ++i) {
    auto row = expert_report(joint, i, signals[i]);
    std::copy(row.begin(), row.end(), matrix.begin() + std::size_t(i) * k);
  }
  return ReportProfile(n, k, std::move(matrix));
}

// Constant aggregator: lookup with an empty table falling back to `output`.
Aggregator constant_aggregator(std::vector<double> output) {
  Aggregator f = Aggregator::make_lookup(AggregatorKind::empirical_erm,
                                         int(output.size()), {});
  f.set_default_output(std::move(output));
  return f;
}

Aggregator random_lookup_aggregator(Rng& rng, const std::vector<SupportEntry>& support,
                                    int k) {
  Aggregator::Lookup lookup;
  for (const auto& entry : support) {
    ProfileKey key = profile_key(entry.profile);
    if (lookup.table.count(key)) continue;
    std::vector<double> out(k);
    double total = 0.0;
    for (double& v : out) {
      v = rng.uniform(0.01, 1.0);
      total += v;
    }
    for (double& v : out) v /= total;
    lookup.table.emplace(key, std::move(out));
    lookup.representatives.emplace(key, entry.profile);
  }
  return Aggregator::make_lookup(AggregatorKind::empirical_erm, k, std::move(lookup));
}

DiscreteDist random_dist(Rng& rng, std::size_t size, double lo = 0.0) {
  std::vector<std::string> labels(size);
  std::vector<double> probs(size);
  double total = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    labels[i] = std::to_string(i);
    probs[i] = rng.uniform(lo, 1.0);
    total += probs[i];
  }
  for (double& v : probs) v /= total;
  return DiscreteDist(std::move(labels), std::move(probs));
}

// ---- model_core -----------------------------------------------------------------

void battery_report_identities(Battery& battery, Rng rng) {
  double worst_row = 0.0, worst_support = 0.0, worst_self = 0.0;
  double worst_ci = 0.0, worst_roundtrip = 0.0;
  for (int rep = 0; rep < 30; ++rep) {
    Rng local = rng.substream(rep);
    int n = 1 + int(local.below(3));
    int m = 2 + int(local.below(2));
    int k = 2 + int(local.below(2));
    bool use_joint = local.bernoulli(0.5);
    DiscreteJoint joint = use_joint
                              ? random_joint(local, n, m, k)
                              : to_joint(random_cond_indep(local, n, m, k));

    for (int i = 0; i < n; ++i)
      for (int s = 0; s < m; ++s) {
        auto row = expert_report(joint, i, s);
        double total = 0.0;
        for (double v : row) total += v;
        worst_row = std::max(worst_row, std::abs(total - 1.0));
      }

    auto support = report_support(joint);
    double mass = 0.0;
    for (const auto& entry : support) mass += entry.prob;
    worst_support = std::max(worst_support, std::abs(mass - 1.0));

    std::map<ProfileKey, const ReportProfile*> by_key;
    for (const auto& entry : support)
      by_key.emplace(profile_key(entry.profile), &entry.profile);
    for (std::size_t c = 0; c < joint.num_signal_cells(); ++c) {
      double cell_mass = 0.0;
      for (int j = 0; j < k; ++j) cell_mass += joint.prob_by_cell(c, j);
      if (cell_mass == 0.0) continue;
      ReportProfile profile = cell_profile(joint, c);
      auto it = by_key.find(profile_key(profile));
      if (it == by_key.end()) {
        worst_self = 1.0;
        continue;
      }
      for (std::size_t v = 0; v < profile.values().size(); ++v)
        worst_self = std::max(
            worst_self, std::abs(profile.values()[v] - it->second->values()[v]));
    }

    if (!use_joint) {
      CondIndepModel model = random_cond_indep(local, n, m, k);
      DiscreteJoint expanded = to_joint(model);
      for (int i = 0; i < n; ++i)
        for (int s = 0; s < m; ++s) {
          auto direct = expert_report(model, i, s);
          auto via_joint = expert_report(expanded, i, s);
          for (int j = 0; j < k; ++j)
            worst_ci = std::max(worst_ci, std::abs(direct[j] - via_joint[j]));
        }
    }
  }
  for (int rep = 0; rep < 100; ++rep) {
    double p = rng.uniform(1e-6, 1.0 - 1e-6);
    worst_roundtrip =
        std::max(worst_roundtrip, std::abs(p - p_from_rho(rho_from_p(p))));
  }
  battery.assert_le("report rows sum to 1", worst_row, 1e-12);
  battery.assert_le("report_support sums to 1", worst_support, 1e-9);
  battery.assert_le("support profiles self-consistent", worst_self, 1e-12);
  battery.assert_le("cond-indep reports match to_joint reports", worst_ci, 1e-12);
  battery.assert_le("p <-> rho round trip", worst_roundtrip, 1e-12);
}

void battery_p_mu(Battery& battery, Rng rng) {
  for (int rep = 0; rep < 100; ++rep) {
    Rng local = rng.substream(rep);
    double p, mu0, mu1;
    if (rep % 2 == 0) {
      CondIndepModel model =
          random_cond_indep(local, 1 + int(local.below(4)), 2 + int(local.below(3)), 2);
      p = model.p();
      mu0 = model.mu0();
      mu1 = model.mu1();
    } else {
      DiscreteJoint joint =
          random_joint(local, 1 + int(local.below(3)), 2 + int(local.below(2)), 2);
      p = joint.p();
      mu0 = joint_mu0(joint);
      mu1 = joint_mu1(joint);
    }
    battery.assert_le("model " + std::to_string(rep) + ": |(1-p) mu0 - p mu1|",
                      std::abs((1.0 - p) * mu0 - p * mu1), 1e-10);
  }
}

void battery_expectation_product_rho(Battery& battery, Rng rng) {
  double worst0 = 0.0, worst1 = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    Rng local = rng.substream(rep);
    CondIndepModel model =
        random_cond_indep(local, 1 + int(local.below(4)), 2 + int(local.below(3)), 2);
    double rho = model.rho();
    for (int i = 0; i < model.num_experts(); ++i) {
      double e0 = 0.0, e1 = 0.0;
      for (int s = 0; s < model.signal_size(i); ++s) {
        double r = expert_report(model, i, s)[1];
        e0 += model.cond(i, 0, s) * r / (1.0 - r);
        e1 += model.cond(i, 1, s) * (1.0 - r) / r;
      }
      worst0 = std::max(worst0, std::abs(e0 - rho));
      worst1 = std::max(worst1, std::abs(e1 - 1.0 / rho));
    }
  }
  battery.assert_le("E[r/(1-r) | omega=0] = rho", worst0, 1e-10);
  battery.assert_le("E[(1-r)/r | omega=1] = 1/rho", worst1, 1e-10);
}

// ---- metrics ---------------------------------------------------------------------

void battery_difference_loss(Battery& battery, Rng rng) {
  for (int rep = 0; rep < 100; ++rep) {
    Rng local = rng.substream(rep);
    int n = 1 + int(local.below(3));
    int m = 2 + int(local.below(2));
    DiscreteJoint joint = random_joint(local, n, m, 2);
    auto support = report_support(joint);

    std::vector<Aggregator> candidates;
    candidates.push_back(averaging());
    candidates.push_back(bordley(std::exp(local.uniform(-2.0, 2.0)), n));
    double c = local.uniform(0.05, 0.95);
    candidates.push_back(constant_aggregator({1.0 - c, c}));
    candidates.push_back(random_lookup_aggregator(local, support, 2));
    candidates.push_back(
        erm_empirical(sample(joint, 50, local.next_u64()), 2));

    double worst = 0.0;
    for (const auto& f : candidates) {
      LossReport report = expected_loss_on_support(support, f);
      worst = std::max(worst, std::abs(*report.gap - *report.gap_direct));
    }
    battery.assert_le(
        "joint " + std::to_string(rep) +
            ": |(L(f) - L(f*)) - E|f - f*|^2| over 5 aggregators",
        worst, 1e-9);
  }
}

void battery_d_tv_d_h(Battery& battery, Rng rng) {
  double worst_tv_h = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    Rng local = rng.substream(rep);
    std::size_t size = 2 + local.below(29);
    DiscreteDist d1 = random_dist(local, size);
    DiscreteDist d2 = random_dist(local, size);
    worst_tv_h = std::max(worst_tv_h, tv_distance(d1, d2) -
                                          std::sqrt(2.0 * hellinger_sq(d1, d2)));
  }
  battery.assert_le("d_TV <= sqrt(2) d_H", worst_tv_h, 1e-12);

  double worst_property = 0.0;
  for (int rep = 0; rep < 300; ++rep) {
    Rng local = rng.substream(1000 + rep);
    std::size_t size = 2 + local.below(20);
    DiscreteDist d1 = random_dist(local, size);
    DiscreteDist d2 = random_dist(local, size);
    double e1 = 0.0, e2 = 0.0;
    for (std::size_t x = 0; x < size; ++x) {
      double h = local.next_double();
      e1 += d1.probs[x] * h;
      e2 += d2.probs[x] * h;
    }
    worst_property =
        std::max(worst_property, std::abs(e1 - e2) - tv_distance(d1, d2));
  }
  battery.assert_le("|E_d1 h - E_d2 h| <= d_TV", worst_property, 1e-12);

  double worst_ratio_bound = 0.0;
  for (int rep = 0; rep < 300; ++rep) {
    Rng local = rng.substream(2000 + rep);
    std::size_t size = 2 + local.below(20);
    DiscreteDist d1 = random_dist(local, size, 0.05);
    double eps = local.uniform(0.01, 0.5);
    double amplitude = eps / (2.0 + eps);
    std::vector<double> w(size);
    double total = 0.0;
    for (std::size_t x = 0; x < size; ++x) {
      w[x] = d1.probs[x] * (1.0 + local.uniform(-amplitude, amplitude));
      total += w[x];
    }
    for (double& v : w) v /= total;
    double eps_actual = 0.0;
    for (std::size_t x = 0; x < size; ++x)
      eps_actual = std::max(eps_actual, std::abs(w[x] / d1.probs[x] - 1.0));
    DiscreteDist d2(d1.labels, w);
    worst_ratio_bound = std::max(
        worst_ratio_bound, hellinger_sq(d1, d2) - 0.5 * eps_actual * eps_actual);
  }
  battery.assert_le("ratio in [1-eps,1+eps] => d_H^2 <= eps^2/2",
                    worst_ratio_bound, 1e-12);

  double worst_chain = 0.0, worst_indep = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    Rng local = rng.substream(3000 + rep);
    const std::size_t nx = 3, ny = 4;
    DiscreteDist d1 = random_dist(local, nx * ny, 0.05);
    DiscreteDist d2 = random_dist(local, nx * ny, 0.05);
    auto marginal_x = [&](const DiscreteDist& d) {
      std::vector<double> out(nx, 0.0);
      for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y) out[x] += d.probs[x * ny + y];
      return out;
    };
    auto cond_y = [&](const DiscreteDist& d, std::size_t x, double margin) {
      std::vector<double> out(ny);
      for (std::size_t y = 0; y < ny; ++y) out[y] = d.probs[x * ny + y] / margin;
      return out;
    };
    auto m1 = marginal_x(d1), m2 = marginal_x(d2);
    double max_cond = 0.0;
    for (std::size_t x = 0; x < nx; ++x)
      max_cond = std::max(max_cond,
                          hellinger_sq(cond_y(d1, x, m1[x]), cond_y(d2, x, m2[x])));
    worst_chain =
        std::max(worst_chain, hellinger_sq(d1, d2) - hellinger_sq(m1, m2) - max_cond);

    DiscreteDist ax = random_dist(local, nx, 0.05);
    DiscreteDist bx = random_dist(local, nx, 0.05);
    DiscreteDist ay = random_dist(local, ny, 0.05);
    DiscreteDist by = random_dist(local, ny, 0.05);
    std::vector<double> prod1(nx * ny), prod2(nx * ny);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y) {
        prod1[x * ny + y] = ax.probs[x] * ay.probs[y];
        prod2[x * ny + y] = bx.probs[x] * by.probs[y];
      }
    worst_indep = std::max(worst_indep,
                           hellinger_sq(prod1, prod2) -
                               hellinger_sq(ax.probs, bx.probs) -
                               hellinger_sq(ay.probs, by.probs));
  }
  battery.assert_le("chain rule: d_H^2(joint) <= d_H^2(marg) + max cond",
                    worst_chain, 1e-12);
  battery.assert_le("independent product bound", worst_indep, 1e-12);

  double worst_iid = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    Rng local = rng.substream(4000 + rep);
    double h2 = local.next_double();
    std::size_t T = local.below(50);
    double value = hellinger_sq_iid_product(h2, T);
    worst_iid = std::max(worst_iid, value - double(T) * h2);
    worst_iid =
        std::max(worst_iid, std::abs(value - (1.0 - std::pow(1.0 - h2, double(T)))));
  }
  battery.assert_le("iid product identity and subadditivity", worst_iid, 1e-12);
}

void battery_multi_outcome_loss_bound(Battery& battery, Rng rng) {
  double worst = 0.0;
  double worst_norm = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    Rng local = rng.substream(rep);
    int n = 1 + int(local.below(2));
    int m = 2 + int(local.below(2));
    int k = 2 + int(local.below(4));
    CondIndepModel model = random_cond_indep(local, n, m, k);
    DiscreteJoint joint = to_joint(model);
    auto support = report_support(joint);

    std::vector<Aggregator> candidates;
    candidates.push_back(averaging());
    std::vector<double> theta(k);
    for (double& t : theta) t = std::exp(local.uniform(-2.0, 2.0));
    candidates.push_back(multi_bordley(theta, n));
    candidates.push_back(erm_empirical(sample(joint, 40, local.next_u64()), k));
    candidates.push_back(bayes_optimal_from_support(support, k));

    for (const auto& f : candidates) {
      for (const auto& entry : support) {
        double loss = record_loss(f, entry.profile, entry.outcome);
        worst = std::max(worst, loss - 2.0 / k);
        worst = std::max(worst, -loss);
        double total = 0.0;
        for (double v : f.apply(entry.profile)) total += v;
        worst_norm = std::max(worst_norm, std::abs(total - 1.0));
      }
    }
  }
  battery.assert_le("per-record loss within [0, 2/k]", worst, 1e-12);
  battery.assert_le("aggregator outputs sum to 1", worst_norm, 1e-9);
}

// ---- aggregators --------------------------------------------------------------------

void battery_bordley_bruteforce(Battery& battery, Rng rng) {
  for (int rep = 0; rep < 50; ++rep) {
    Rng local = rng.substream(rep);
    int n = 1 + int(local.below(4));
    int m = 2 + int(local.below(3));
    double p = local.uniform(0.1, 0.9);
    CondIndepModel model = random_cond_indep(local, n, m, 2);
    // overwrite the prior with the requested p
    model = build_cond_indep({1.0 - p, p}, model.cond_tables());
    DiscreteJoint joint = to_joint(model);
    Aggregator f = bordley(model.rho(), n);
    double worst = 0.0;
    for (std::size_t c = 0; c < joint.num_signal_cells(); ++c) {
      double mass = joint.prob_by_cell(c, 0) + joint.prob_by_cell(c, 1);
      if (mass == 0.0) continue;
      double posterior = joint.prob_by_cell(c, 1) / mass;
      double predicted = f.apply_binary(cell_profile(joint, c));
      worst = std::max(worst, std::abs(predicted - posterior));
    }
    battery.assert_le("model " + std::to_string(rep) +
                          ": sup |bordley(rho) - posterior|",
                      worst, 1e-10);
  }
}

void battery_multi_bordley_bruteforce(Battery& battery, Rng rng) {
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    Rng local = rng.substream(rep);
    int n = 1 + int(local.below(3));
    int m = 2 + int(local.below(2));
    CondIndepModel model = random_cond_indep(local, n, m, 3);
    DiscreteJoint joint = to_joint(model);
    std::vector<double> theta(3);
    for (int j = 0; j < 3; ++j)
      theta[j] = std::pow(model.prior()[j], -(n - 1));
    Aggregator f = multi_bordley(theta, n);
    for (std::size_t c = 0; c < joint.num_signal_cells(); ++c) {
      double mass = 0.0;
      for (int j = 0; j < 3; ++j) mass += joint.prob_by_cell(c, j);
      if (mass == 0.0) continue;
      auto predicted = f.apply(cell_profile(joint, c));
      for (int j = 0; j < 3; ++j)
        worst = std::max(
            worst, std::abs(predicted[j] - joint.prob_by_cell(c, j) / mass));
    }
  }
  battery.assert_le("multi_bordley(1/prior^(n-1)) matches posterior", worst, 1e-10);
}

void battery_erm_dominance(Battery& battery, Rng rng) {
  double worst = 0.0;
  for (int rep = 0; rep < 30; ++rep) {
    Rng local = rng.substream(rep);
    int n = 1 + int(local.below(3));
    int m = 2 + int(local.below(2));
    DiscreteJoint joint = random_joint(local, n, m, 2);
    SampleSet samples = sample(joint, 200, local.next_u64());
    Aggregator erm = erm_empirical(samples, 2);
    double erm_loss = expected_loss_mc(samples, erm).loss;

    std::vector<Aggregator> competitors;
    competitors.push_back(averaging());
    competitors.push_back(bordley(std::exp(local.uniform(-1.5, 1.5)), n));
    double c = local.uniform(0.1, 0.9);
    competitors.push_back(constant_aggregator({1.0 - c, c}));
    competitors.push_back(bayes_optimal(joint));
    for (const auto& f : competitors)
      worst = std::max(worst, erm_loss - expected_loss_mc(samples, f).loss);
  }
  battery.assert_le("erm_empirical empirical loss <= competitors", worst, 1e-12);
}

void battery_projective_invariance(Battery& battery, Rng rng) {
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    Rng local = rng.substream(rep);
    int n = 1 + int(local.below(4));
    int k = 2 + int(local.below(3));
    std::vector<double> theta(k);
    for (double& t : theta) t = std::exp(local.uniform(-3.0, 3.0));
    Aggregator f = multi_bordley(theta, n);
    for (double scale : {3.0, 0.017, 1e6}) {
      std::vector<double> scaled = theta;
      for (double& t : scaled) t *= scale;
      Aggregator g = multi_bordley(scaled, n);
      for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> matrix(std::size_t(n) * k);
        for (int i = 0; i < n; ++i) {
          double total = 0.0;
          for (int j = 0; j < k; ++j) {
            matrix[std::size_t(i) * k + j] = local.uniform(0.05, 1.0);
            total += matrix[std::size_t(i) * k + j];
          }
          for (int j = 0; j < k; ++j) matrix[std::size_t(i) * k + j] /= total;
        }
        ProfileView profile(matrix.data(), n, k);
        auto a = f.apply(profile);
        auto b = g.apply(profile);
        for (int j = 0; j < k; ++j)
          worst = std::max(worst, std::abs(a[j] - b[j]));
      }
    }
  }
  battery.assert_le("multi_bordley(c theta) == multi_bordley(theta)", worst, 1e-12);
}

void battery_good_rho_good_aggregator(Battery& battery, Rng rng) {
  double worst_pointwise = 0.0;
  double worst_gap = 0.0;
  for (int rep = 0; rep < 40; ++rep) {
    Rng local = rng.substream(rep);
    int n = 2 + int(local.below(3));
    int m = 2 + int(local.below(2));
    CondIndepModel model = random_cond_indep(local, n, m, 2);
    DiscreteJoint joint = to_joint(model);
    double rho = model.rho();
    double eps = local.bernoulli(0.5) ? 0.01 : 0.05;
    double t = 2.0 * std::sqrt(eps) / (n - 1);
    if (t >= 0.5) continue;
    for (double sign : {-1.0, 1.0}) {
      Aggregator f = bordley(rho * (1.0 + sign * t), n);
      Aggregator best = bordley(rho, n);
      for (std::size_t c = 0; c < joint.num_signal_cells(); ++c) {
        ReportProfile profile = cell_profile(joint, c);
        double diff = std::abs(f.apply_binary(profile) - best.apply_binary(profile));
        worst_pointwise =
            std::max(worst_pointwise, diff - (n - 1) / 2.0 * t - 1e-9);
      }
      LossReport report = expected_loss_exact(joint, f);
      worst_gap = std::max(worst_gap, *report.gap_direct - eps);
    }
  }
  battery.assert_le("sup |bordley(rho_hat) - f*| <= (n-1)/2 t", worst_pointwise, 0.0);
  battery.assert_le("gap of bordley(rho_hat) <= eps", worst_gap, 0.0);
}

void battery_strong_classification(Battery& battery, Rng rng) {
  bool all_exact = true;
  for (int rep = 0; rep < 50; ++rep) {
    Rng local = rng.substream(rep);
    int n = 2 + int(local.below(4));
    double gamma = local.uniform(0.5, 8.0);
    double ratio = (1.0 + gamma) * (1.0 + local.next_double());
    double accuracy = ratio / (1.0 + ratio);
    double p = local.uniform(0.2, 0.8);
    CondIndepModel model = symmetric_binary(n, accuracy, p);
    double rho = model.rho();
    double t = local.uniform(0.0, 0.99) * gamma / (1.0 + gamma);
    double rho_hat = rho * (1.0 + (local.bernoulli(0.5) ? t : -t));
    for (int i = 0; i < n; ++i) {
      for (int s = 0; s < 2; ++s) {
        bool in_s1 = model.cond(i, 1, s) / model.cond(i, 0, s) >= 1.0 + gamma;
        double r = expert_report(model, i, s)[1];
        bool classified_s1 = r / (1.0 - r) > rho_hat;
        if (in_s1 != classified_s1) all_exact = false;
      }
    }
  }
  battery.assert_true("threshold test recovers signal classes exactly", all_exact);
}

// ---- hard instances ---------------------------------------------------------------

void battery_dz_properties(Battery& battery, Rng rng) {
  double worst_bound = 0.0, worst_marginal = 0.0, worst_tv = 0.0;
  bool distinct = true;
  const std::pair<int, int> shapes[] = {{2, 2}, {2, 3}, {4, 2}};
  int shape_index = 0;
  for (auto [m, n] : shapes) {
    for (double eps : {0.001, 0.02}) {
      DzFamily family(m, n, eps);
      DiscreteDist base = dz_base(family);
      std::vector<std::vector<std::vector<double>>> marginals;  // [z][coord][signal]
      Rng local = rng.substream(shape_index);
      for (int zrep = 0; zrep < 10; ++zrep) {
        std::vector<int> z = random_sign_vector(family, local);
        DiscreteDist dz = dz_build(family, z);

        for (double v : dz.probs)
          worst_bound = std::max(
              worst_bound, v - family.uniform_bound() / double(family.num_cells()));

        // coordinate marginals by exact summation
        std::vector<std::vector<double>> per_coord(n, std::vector<double>(m, 0.0));
        std::vector<int> signal(n, 0);
        for (std::size_t c = 0; c < family.num_cells(); ++c) {
          for (int i = 0; i < n; ++i) per_coord[i][signal[i]] += dz.probs[c];
          for (int i = n - 1; i >= 0; --i) {
            if (++signal[i] < m) break;
            signal[i] = 0;
          }
        }
        for (int i = 0; i < n; ++i)
          for (int s = 0; s + 1 < m; ++s)
            if (!(per_coord[i][s] < per_coord[i][s + 1])) distinct = false;
        marginals.push_back(std::move(per_coord));

        std::vector<int> flipped(z);
        for (int& s : flipped) s = -s;
        DiscreteDist dz_neg = dz_build(family, flipped);
        double expected_tv = double(family.num_cells()) * DzFamily::kC * eps /
                             family.weight();
        worst_tv = std::max(worst_tv,
                            std::abs(tv_distance(dz, dz_neg) - expected_tv));
      }
      for (std::size_t zi = 1; zi < marginals.size(); ++zi)
        for (int i = 0; i < n; ++i)
          for (int s = 0; s < m; ++s)
            worst_marginal = std::max(
                worst_marginal,
                std::abs(marginals[zi][i][s] - marginals[0][i][s]));
    }
    ++shape_index;
  }
  battery.assert_le("all entries <= (e + 1/2)/m^n", worst_bound, 0.0);
  battery.assert_le("coordinate marginals identical across z", worst_marginal, 1e-12);
  battery.assert_true("coordinate marginals strictly increasing", distinct);
  battery.assert_le("TV(D_z, D_-z) = m^n c eps / W", worst_tv, 1e-12);
}

void battery_reduction_soundness(Battery& battery, Rng rng) {
  double worst = 0.0;
  const std::pair<int, int> shapes[] = {{2, 3}, {4, 2}};
  int shape_index = 0;
  for (auto [m, n] : shapes) {
    DzFamily family(m, n, 0.01);
    DiscreteDist base = dz_base(family);
    // D_base coordinate marginals
    std::vector<std::vector<double>> marginal(n, std::vector<double>(m, 0.0));
    std::vector<int> signal(n, 0);
    for (std::size_t c = 0; c < family.num_cells(); ++c) {
      for (int i = 0; i < n; ++i) marginal[i][signal[i]] += base.probs[c];
      for (int i = n - 1; i >= 0; --i) {
        if (++signal[i] < m) break;
        signal[i] = 0;
      }
    }
    Rng local = rng.substream(shape_index++);
    for (int zrep = 0; zrep < 5; ++zrep) {
      std::vector<int> z = random_sign_vector(family, local);
      DiscreteJoint joint = dz_to_aggregation_instance(family, z);
      for (int i = 0; i < n; ++i)
        for (int s = 0; s < m; ++s) {
          double expected = marginal[i][s] / (1.0 / m + marginal[i][s]);
          double actual = expert_report(joint, i, s)[1];
          worst = std::max(worst, std::abs(actual - expected));
        }
    }
  }
  battery.assert_le("P_D reports equal D_base(s_i)/(1/m + D_base(s_i))", worst, 1e-12);
}

void battery_reduction_round_trip(Battery& battery, Rng rng) {
  double worst_exact = 0.0;
  double worst_bound = 0.0;
  const std::pair<int, int> shapes[] = {{2, 3}, {4, 2}};
  int shape_index = 0;
  for (auto [m, n] : shapes) {
    DzFamily family(m, n, 0.02);
    Rng local = rng.substream(shape_index++);
    std::vector<int> z = random_sign_vector(family, local);
    DiscreteDist dz = dz_build(family, z);
    DiscreteJoint joint = dz_to_aggregation_instance(family, z);
    Aggregator best = bayes_optimal(joint);

    // f_hat = f* round trips to D exactly
    RecoveredDistribution recovered =
        aggregator_to_distribution(family, best, &dz.probs);
    worst_exact = std::max(worst_exact, *recovered.tv_to_reference);

    for (double eps_budget : {1e-4, 1e-6}) {
      // perturb f* by +-sqrt(eps) per profile: the L2 budget is exactly eps
      Aggregator::Lookup lookup;
      lookup.error_on_unseen = false;
      auto support = report_support(joint);
      std::map<ProfileKey, std::pair<ReportProfile, double>> profiles;
      for (const auto& entry : support) {
        auto [it, inserted] = profiles.try_emplace(
            profile_key(entry.profile), std::make_pair(entry.profile, 0.0));
        it->second.second += entry.prob;
      }
      for (auto& [key, item] : profiles) {
        double v = best.apply_binary(item.first);
        double sign = local.bernoulli(0.5) ? 1.0 : -1.0;
        double perturbed = v + sign * std::sqrt(eps_budget);
        lookup.table[key] = {1.0 - perturbed, perturbed};
        lookup.representatives.emplace(key, item.first);
      }
      Aggregator f_hat = Aggregator::make_lookup(AggregatorKind::empirical_erm, 2,
                                                 std::move(lookup));
      RecoveredDistribution hat =
          aggregator_to_distribution(family, f_hat, &dz.probs);
      double cap = 1.0 + family.uniform_bound();
      worst_bound = std::max(*hat.tv_to_reference -
                                 cap * cap * std::sqrt(eps_budget) - 1e-9,
                             worst_bound);
    }
  }
  battery.assert_le("f* round trips to D exactly", worst_exact, 1e-12);
  battery.assert_le("d_TV(D_hat, D) <= (1+B)^2 sqrt(eps)", worst_bound, 0.0);
}

void battery_cipair_hellinger(Battery& battery, Rng rng) {
  (void)rng;
  double worst_report = 0.0, worst_pdiff = 0.0, worst_chain = 0.0;
  bool monotone = true, rho_in_range = true, ratio_bounded = true;
  for (int n : {3, 4}) {
    std::vector<double> h2s, ratios;
    for (double eps : {std::pow(2.0, -24.0), std::pow(2.0, -22.0),
                       std::pow(2.0, -20.0)}) {
      CiPair pair = ci_pair_build(n, eps);
      for (const CondIndepModel* model : {&pair.model1, &pair.model2}) {
        worst_report = std::max(
            worst_report, std::abs(expert_report(*model, 0, 0)[1] - 0.5));
        double rho_pow = std::pow(model->rho(), n - 1);
        if (!(rho_pow > 0.5 && rho_pow <= 1.0)) rho_in_range = false;
      }
      worst_pdiff = std::max(
          worst_pdiff,
          std::abs((pair.p1 - pair.p2) - 64.0 * std::sqrt(eps) / n));
      double h2 = hellinger_sq(ci_model_to_dist(pair.model1),
                               ci_model_to_dist(pair.model2));
      double bound = ci_hellinger_sq_chain_bound(pair.model1, pair.model2);
      worst_chain = std::max(worst_chain, h2 - bound);
      h2s.push_back(h2);
      ratios.push_back(h2 / eps);
    }
    for (std::size_t i = 1; i < h2s.size(); ++i)
      if (!(h2s[i] > h2s[i - 1])) monotone = false;
    double lo = *std::min_element(ratios.begin(), ratios.end());
    double hi = *std::max_element(ratios.begin(), ratios.end());
    if (hi > 1.5 * lo) ratio_bounded = false;
  }
  battery.assert_le("reports at signal a equal 0.5", worst_report, 1e-12);
  battery.assert_true("rho^(n-1) in (1/2, 1]", rho_in_range);
  battery.assert_le("|p1 - p2| = 64 sqrt(eps)/n", worst_pdiff, 1e-15);
  battery.assert_true("d_H^2 monotone increasing in eps", monotone);
  battery.assert_true("d_H^2 / eps bounded across eps", ratio_bounded);
  battery.assert_le("exact d_H^2 <= chain-rule bound", worst_chain, 1e-12);
}

void battery_likelihood_ratio_optimality(Battery& battery, Rng rng) {
  double worst = 0.0;
  // small supports where learn-then-classify is meaningful
  {
    CiPair pair = ci_pair_build(3, std::pow(2.0, -20.0));
    DiscreteDist d1 = ci_model_to_dist(pair.model1);
    DiscreteDist d2 = ci_model_to_dist(pair.model2);
    auto lr = distinguish_experiment(d1, d2, 40, 400,
                                     DistinguisherKind::likelihood_ratio,
                                     rng.substream("lr").next_u64());
    auto tv = distinguish_experiment(d1, d2, 40, 400,
                                     DistinguisherKind::tv_nearest,
                                     rng.substream("tv").next_u64());
    worst = std::max(worst,
                     lr.empirical_error - tv.empirical_error - 2.0 * tv.stderr_);
  }
  {
    Rng local = rng.substream("generic");
    DiscreteDist d1 = random_dist(local, 6, 0.02);
    DiscreteDist d2 = random_dist(local, 6, 0.02);
    auto lr = distinguish_experiment(d1, d2, 3, 600,
                                     DistinguisherKind::likelihood_ratio,
                                     local.substream("lr").next_u64());
    auto tv = distinguish_experiment(d1, d2, 3, 600,
                                     DistinguisherKind::tv_nearest,
                                     local.substream("tv").next_u64());
    worst = std::max(worst,
                     lr.empirical_error - tv.empirical_error - 2.0 * tv.stderr_);
  }
  battery.assert_le("LR error <= tv_nearest error + 2 stderr", worst, 0.0);
}

void battery_distinguish_floor(Battery& battery, Rng rng) {
  CiPair pair = ci_pair_build(4, 1e-6);
  DiscreteDist d1 = ci_model_to_dist(pair.model1);
  DiscreteDist d2 = ci_model_to_dist(pair.model2);
  for (std::size_t T : {std::size_t(100), std::size_t(1000)}) {
    auto report = distinguish_experiment(d1, d2, T, 2000,
                                         DistinguisherKind::likelihood_ratio,
                                         rng.substream(T).next_u64());
    double slack = report.empirical_error -
                   (report.floor_sqrt_t - 3.0 * report.stderr_);
    battery.assert_ge("empirical error >= 1/2 - sqrt(T/2) d_H - 3 stderr (T=" +
                          std::to_string(T) + ")",
                      slack, 0.0);
  }
}

// ---- learners: Monte-Carlo coverage ------------------------------------------------

void battery_rho_coverage(Battery& battery, Rng rng) {
  const int n = 5;
  const double accuracy_delta = 0.2;
  const double delta = 0.05;
  CondIndepModel model = random_cond_indep(rng, n, 3, 2);
  double rho = model.rho();
  double p = model.p();
  double pmu0 = (1.0 - p) * model.mu0();
  std::size_t T = estimate_rho_budget(pmu0, std::min(p, 1.0 - p), n,
                                      accuracy_delta, delta);
  int successes = 0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    SampleSet samples = sample(model, T, rng.substream(trial).next_u64());
    RhoEstimate estimate = estimate_rho(samples);
    if (std::abs(estimate.rho_hat - rho) / rho <= 4.0 * accuracy_delta) ++successes;
  }
  battery.assert_ge("|rho_hat - rho|/rho <= 4 Delta coverage (of 200)",
                    double(successes), 160.0);
}

void battery_mean_regime_calibration(Battery& battery, Rng rng) {
  const double eps = 0.05;
  const double delta = 0.05;
  // uninformative model with (1-p) p = eps, so E[X] = eps exactly
  const double p = (1.0 - std::sqrt(1.0 - 4.0 * eps)) / 2.0;
  CondIndepModel model = uninformative_model(p, 1, 2);
  std::size_t T = mean_regime_test_budget(eps, delta);
  int misclassified = 0;
  const int trials = 500;
  for (int trial = 0; trial < trials; ++trial) {
    SampleSet samples = sample(model, T, rng.substream(trial).next_u64());
    if (mean_regime_test(samples, eps, delta) == MeanRegime::below_eps)
      ++misclassified;
  }
  battery.assert_le("regime-test misclassification rate (mean = eps)",
                    double(misclassified) / trials, delta + 0.03);
}

// ---- curves -----------------------------------------------------------------------

ExperimentConfig curve_config(const ModelFile& model, const std::string& learner,
                              std::vector<std::size_t> schedule, int trials,
                              std::uint64_t seed) {
  ExperimentConfig config;
  config.model = model;
  config.model_description = "battery";
  config.learner = learner;
  config.schedule = std::move(schedule);
  config.trials = trials;
  config.seed = seed;
  config.exact_eval = true;
  return config;
}

void battery_consistency_curves(Battery& battery, Rng rng) {
  {
    DiscreteJoint joint = random_joint(rng, 2, 2, 2);
    ModelFile model{true, joint, uninformative_model(0.5, 1, 1)};
    CurveResult result = run_curve(curve_config(model, "erm_empirical",
                                                {100, 1000, 10000}, 30,
                                                rng.next_u64()));
    bool monotone = true;
    for (std::size_t i = 1; i < result.summaries.size(); ++i)
      if (result.summaries[i].median_gap > result.summaries[i - 1].median_gap)
        monotone = false;
    battery.assert_true("erm_empirical median gap non-increasing", monotone);
  }
  {
    CondIndepModel ci = random_cond_indep(rng, 3, 3, 2);
    ModelFile model{false, xor_model(), ci};
    CurveResult result = run_curve(curve_config(model, "erm_theta",
                                                {100, 1000, 10000}, 30,
                                                rng.next_u64()));
    bool monotone = true;
    for (std::size_t i = 1; i < result.summaries.size(); ++i)
      if (result.summaries[i].median_gap > result.summaries[i - 1].median_gap)
        monotone = false;
    battery.assert_true("erm_theta median gap non-increasing", monotone);
    battery.assert_le("erm_theta median gap at T=10^4",
                      result.summaries.back().median_gap, 0.01);
  }
}

void battery_curve_monotonicity(Battery& battery, Rng rng) {
  struct Case {
    std::string learner;
    bool joint;
  };
  const Case cases[] = {{"erm_empirical", true},
                        {"empirical_bayes", true},
                        {"erm_theta", false}};
  for (const auto& c : cases) {
    int monotone_count = 0;
    const int model_count = 20;
    for (int rep = 0; rep < model_count; ++rep) {
      Rng local = rng.substream(c.learner).substream(rep);
      ModelFile model =
          c.joint
              ? ModelFile{true, random_joint(local, 2, 2, 2),
                          uninformative_model(0.5, 1, 1)}
              : ModelFile{false, xor_model(),
                          random_cond_indep(local, 2 + int(local.below(2)),
                                            2 + int(local.below(2)), 2)};
      CurveResult result = run_curve(curve_config(model, c.learner,
                                                  {100, 1000, 10000}, 15,
                                                  local.next_u64()));
      bool monotone = true;
      for (std::size_t i = 1; i < result.summaries.size(); ++i)
        if (result.summaries[i].median_gap > result.summaries[i - 1].median_gap)
          monotone = false;
      if (monotone) ++monotone_count;
    }
    battery.assert_ge(c.learner + ": models with non-increasing median (of 20)",
                      double(monotone_count), 19.0);
  }
}

void battery_determinism(Battery& battery, Rng rng) {
  CondIndepModel ci = random_cond_indep(rng, 2, 2, 2);
  ModelFile model{false, xor_model(), ci};
  ExperimentConfig config =
      curve_config(model, "erm_empirical", {50, 100}, 3, 12345);
  std::string csv1 = curve_to_csv(run_curve(config));
  std::string csv2 = curve_to_csv(run_curve(config));
  battery.assert_true("run_curve output is byte-identical", csv1 == csv2);

  SampleSet s1 = sample(ci, 200, 99);
  SampleSet s2 = sample(ci, 200, 99);
  battery.assert_true("sampling is byte-identical",
                      samples_to_csv(s1) == samples_to_csv(s2));

  CiPair pair = ci_pair_build(3, 1e-6);
  DiscreteDist d1 = ci_model_to_dist(pair.model1);
  DiscreteDist d2 = ci_model_to_dist(pair.model2);
  auto r1 = distinguish_experiment(d1, d2, 50, 100,
                                   DistinguisherKind::likelihood_ratio, 7);
  auto r2 = distinguish_experiment(d1, d2, 50, 100,
                                   DistinguisherKind::likelihood_ratio, 7);
  battery.assert_true(
      "distinguish_experiment is byte-identical",
      distinguish_rows_to_csv(r1) == distinguish_rows_to_csv(r2) &&
          distinguish_report_to_json(r1).dump() ==
              distinguish_report_to_json(r2).dump());
}

using BatteryFn = std::function<void(Battery&, Rng)>;

const std::vector<std::pair<std::string, BatteryFn>>& battery_table() {
  static const std::vector<std::pair<std::string, BatteryFn>> table = {
      {"report_identities", battery_report_identities},
      {"p_mu", battery_p_mu},
      {"expectation_product_rho", battery_expectation_product_rho},
      {"difference_loss", battery_difference_loss},
      {"d_tv_d_h", battery_d_tv_d_h},
      {"multi_outcome_loss_bound", battery_multi_outcome_loss_bound},
      {"bordley_bruteforce", battery_bordley_bruteforce},
      {"multi_bordley_bruteforce", battery_multi_bordley_bruteforce},
      {"erm_dominance", battery_erm_dominance},
      {"projective_invariance", battery_projective_invariance},
      {"good_rho_good_aggregator", battery_good_rho_good_aggregator},
      {"strong_classification", battery_strong_classification},
      {"dz_properties", battery_dz_properties},
      {"reduction_soundness", battery_reduction_soundness},
      {"reduction_round_trip", battery_reduction_round_trip},
      {"cipair_hellinger", battery_cipair_hellinger},
      {"likelihood_ratio_optimality", battery_likelihood_ratio_optimality},
      {"distinguish_floor", battery_distinguish_floor},
      {"rho_coverage", battery_rho_coverage},
      {"mean_regime_calibration", battery_mean_regime_calibration},
      {"consistency_curves", battery_consistency_curves},
      {"curve_monotonicity", battery_curve_monotonicity},
      {"determinism", battery_determinism},
  };
  return table;
}

}  // namespace

std::vector<std::string> battery_names() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : battery_table()) names.push_back(name);
  return names;
}

BatteryReport run_battery(const std::string& selector, std::uint64_t seed) {
  for (const auto& [name, fn] : battery_table()) {
    if (name == selector) {
      Battery battery;
      battery.report.battery = name;
      battery.report.seed = seed;
      fn(battery, Rng(seed).substream("battery").substream(name));
      return battery.report;
    }
  }
  throw UnknownBattery("no battery named " + selector);
}

nlohmann::json battery_report_to_json(const BatteryReport& report) {
  nlohmann::json j;
  j["schema_version"] = "1";
  j["battery"] = report.battery;
  j["seed"] = report.seed;
  j["pass"] = report.pass();
  nlohmann::json assertions = nlohmann::json::array();
  for (const auto& a : report.assertions) {
    nlohmann::json row;
    row["assertion"] = a.name;
    row["tolerance"] = a.tolerance;
    row["measured"] = a.measured;
    row["pass"] = a.pass;
    assertions.push_back(std::move(row));
  }
  j["assertions"] = std::move(assertions);
  return j;
}

}  // namespace aggrlab
