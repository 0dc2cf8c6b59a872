#include "aggrlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace aggrlab {

ProfileKey profile_key(ProfileView profile) {
  const std::size_t len = std::size_t(profile.num_experts()) * profile.num_outcomes();
  ProfileKey key(len);
  const double* data = profile.data();
  for (std::size_t i = 0; i < len; ++i) key[i] = std::llround(data[i] * 1e12);
  return key;
}

// ---- DiscreteJoint ----------------------------------------------------------

std::size_t DiscreteJoint::encode_signals(std::span<const int> signals) const {
  if (signals.size() != std::size_t(n_))
    throw DimensionMismatch("encode_signals: wrong arity");
  std::size_t idx = 0;
  for (int i = 0; i < n_; ++i) {
    if (signals[i] < 0 || signals[i] >= signal_sizes_[i])
      throw DimensionMismatch("encode_signals: signal out of range");
    idx = idx * signal_sizes_[i] + signals[i];
  }
  return idx;
}

std::vector<int> DiscreteJoint::decode_signals(std::size_t sig_index) const {
  std::vector<int> signals(n_);
  for (int i = n_ - 1; i >= 0; --i) {
    signals[i] = int(sig_index % signal_sizes_[i]);
    sig_index /= signal_sizes_[i];
  }
  return signals;
}

double DiscreteJoint::outcome_prob(int outcome) const {
  double total = 0.0;
  for (std::size_t c = 0; c < cells_; ++c) total += prob_[c * k_ + outcome];
  return total;
}

double DiscreteJoint::signal_marginal(int expert, int signal) const {
  double total = 0.0;
  for (int j = 0; j < k_; ++j) total += signal_outcome_prob(expert, signal, j);
  return total;
}

double DiscreteJoint::signal_outcome_prob(int expert, int signal, int outcome) const {
  // Sum over all cells whose expert-th coordinate equals `signal`.
  // stride: cells per unit step of this expert's coordinate.
  std::size_t inner = 1;
  for (int i = expert + 1; i < n_; ++i) inner *= signal_sizes_[i];
  std::size_t outer = cells_ / (inner * signal_sizes_[expert]);
  double total = 0.0;
  for (std::size_t o = 0; o < outer; ++o) {
    std::size_t base = (o * signal_sizes_[expert] + signal) * inner;
    for (std::size_t in = 0; in < inner; ++in)
      total += prob_[(base + in) * k_ + outcome];
  }
  return total;
}

double DiscreteJoint::p() const {
  if (k_ != 2) throw DimensionMismatch("p(): binary accessor on k != 2");
  return outcome_prob(1);
}

double DiscreteJoint::rho() const { return rho_from_p(p()); }

DiscreteJoint build_joint(int n, const std::vector<int>& signal_sizes, int k,
                          const std::vector<double>& prob_table) {
  if (n < 1) throw DimensionMismatch("build_joint: n must be >= 1");
  if (k < 2) throw DimensionMismatch("build_joint: k must be >= 2");
  if (signal_sizes.size() != std::size_t(n))
    throw DimensionMismatch("build_joint: signal_sizes arity");
  std::size_t cells = 1;
  for (int m : signal_sizes) {
    if (m < 1) throw DimensionMismatch("build_joint: signal size must be >= 1");
    cells *= std::size_t(m);
  }
  if (prob_table.size() != cells * std::size_t(k))
    throw DimensionMismatch("build_joint: table size mismatch");

  double total = 0.0;
  for (double v : prob_table) {
    if (v < 0.0 || !std::isfinite(v))
      throw NotADistribution("build_joint: negative or non-finite entry");
    total += v;
  }
  if (std::abs(total - 1.0) > kRenormalizeTol)
    throw NotADistribution("build_joint: entries sum to " + std::to_string(total));

  DiscreteJoint joint;
  joint.n_ = n;
  joint.signal_sizes_ = signal_sizes;
  joint.k_ = k;
  joint.cells_ = cells;
  joint.prob_ = prob_table;
  for (double& v : joint.prob_) v /= total;
  return joint;
}

// ---- CondIndepModel ---------------------------------------------------------

namespace {

void check_prob_vector(const std::vector<double>& v, const char* what) {
  double total = 0.0;
  for (double x : v) {
    if (x < 0.0 || !std::isfinite(x))
      throw NotADistribution(std::string(what) + ": negative or non-finite entry");
    total += x;
  }
  if (std::abs(total - 1.0) > kValidationTol)
    throw NotADistribution(std::string(what) + ": sums to " + std::to_string(total));
}

}  // namespace

CondIndepModel build_cond_indep(
    const std::vector<double>& prior,
    const std::vector<std::vector<std::vector<double>>>& conditionals) {
  if (prior.size() < 2) throw DimensionMismatch("build_cond_indep: k must be >= 2");
  if (conditionals.empty()) throw DimensionMismatch("build_cond_indep: n must be >= 1");
  check_prob_vector(prior, "prior");
  for (const auto& expert : conditionals) {
    if (expert.size() != prior.size())
      throw DimensionMismatch("build_cond_indep: conditional outcome arity");
    std::size_t m = expert[0].size();
    if (m < 1) throw DimensionMismatch("build_cond_indep: empty signal space");
    for (const auto& row : expert) {
      if (row.size() != m)
        throw DimensionMismatch("build_cond_indep: ragged conditional table");
      check_prob_vector(row, "conditional");
    }
  }
  CondIndepModel model;
  model.prior_ = prior;
  model.cond_ = conditionals;
  return model;
}

double CondIndepModel::p() const {
  if (num_outcomes() != 2) throw DimensionMismatch("p(): binary accessor on k != 2");
  return prior_[1];
}

double CondIndepModel::rho() const { return rho_from_p(p()); }

double CondIndepModel::mu0() const {
  if (num_outcomes() != 2) throw DimensionMismatch("mu0(): binary accessor on k != 2");
  const int n = num_experts();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int s = 0; s < signal_size(i); ++s) {
      double mass = cond_[i][0][s];
      if (mass == 0.0) continue;
      acc += mass * expert_report(*this, i, s)[1];
    }
  }
  return acc / n;
}

double CondIndepModel::mu1() const {
  if (num_outcomes() != 2) throw DimensionMismatch("mu1(): binary accessor on k != 2");
  const int n = num_experts();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int s = 0; s < signal_size(i); ++s) {
      double mass = cond_[i][1][s];
      if (mass == 0.0) continue;
      acc += mass * expert_report(*this, i, s)[0];
    }
  }
  return acc / n;
}

DiscreteJoint to_joint(const CondIndepModel& model, std::size_t cell_cap) {
  const int n = model.num_experts();
  const int k = model.num_outcomes();
  std::size_t cells = 1;
  for (int i = 0; i < n; ++i) {
    std::size_t m = std::size_t(model.signal_size(i));
    if (cells > cell_cap / m + 1) throw SupportTooLarge("to_joint: cell cap exceeded");
    cells *= m;
  }
  if (cells * std::size_t(k) > cell_cap)
    throw SupportTooLarge("to_joint: cell cap exceeded");

  std::vector<int> sizes(n);
  for (int i = 0; i < n; ++i) sizes[i] = model.signal_size(i);

  std::vector<double> table(cells * k);
  std::vector<int> signals(n, 0);
  for (std::size_t c = 0; c < cells; ++c) {
    for (int j = 0; j < k; ++j) {
      double v = model.prior()[j];
      for (int i = 0; i < n; ++i) v *= model.cond(i, j, signals[i]);
      table[c * k + j] = v;
    }
    for (int i = n - 1; i >= 0; --i) {  // advance mixed-radix counter
      if (++signals[i] < sizes[i]) break;
      signals[i] = 0;
    }
  }
  return build_joint(n, sizes, k, table);
}

// ---- Reports ----------------------------------------------------------------

std::vector<double> expert_report(const DiscreteJoint& joint, int expert, int signal) {
  const int k = joint.num_outcomes();
  std::vector<double> row(k);
  double marginal = 0.0;
  for (int j = 0; j < k; ++j) {
    row[j] = joint.signal_outcome_prob(expert, signal, j);
    marginal += row[j];
  }
  if (marginal <= 0.0)
    throw ZeroProbabilitySignal("expert_report: P(s_i) = 0");
  for (double& v : row) v /= marginal;
  return row;
}

std::vector<double> expert_report(const CondIndepModel& model, int expert, int signal) {
  const int k = model.num_outcomes();
  std::vector<double> row(k);
  double marginal = 0.0;
  for (int j = 0; j < k; ++j) {
    row[j] = model.prior()[j] * model.cond(expert, j, signal);
    marginal += row[j];
  }
  if (marginal <= 0.0)
    throw ZeroProbabilitySignal("expert_report: P(s_i) = 0");
  for (double& v : row) v /= marginal;
  return row;
}

namespace {

// Per-expert report rows for every signal with positive marginal;
// empty row marks a zero-marginal signal.
std::vector<std::vector<std::vector<double>>> all_reports(const DiscreteJoint& joint) {
  const int n = joint.num_experts();
  std::vector<std::vector<std::vector<double>>> reports(n);
  for (int i = 0; i < n; ++i) {
    reports[i].resize(joint.signal_sizes()[i]);
    for (int s = 0; s < joint.signal_sizes()[i]; ++s) {
      if (joint.signal_marginal(i, s) > 0.0)
        reports[i][s] = expert_report(joint, i, s);
    }
  }
  return reports;
}

}  // namespace

std::vector<SupportEntry> report_support(const DiscreteJoint& joint,
                                         std::size_t cell_cap) {
  const int n = joint.num_experts();
  const int k = joint.num_outcomes();
  const std::size_t cells = joint.num_signal_cells();
  if (cells * std::size_t(k) > cell_cap)
    throw SupportTooLarge("report_support: cell cap exceeded");

  auto reports = all_reports(joint);

  std::map<std::pair<ProfileKey, int>, std::pair<ReportProfile, double>> acc;
  std::vector<int> signals(n, 0);
  std::vector<double> matrix(std::size_t(n) * k);
  for (std::size_t c = 0; c < cells; ++c) {
    double cell_total = 0.0;
    for (int j = 0; j < k; ++j) cell_total += joint.prob_by_cell(c, j);
    if (cell_total > 0.0) {
      for (int i = 0; i < n; ++i) {
        const auto& row = reports[i][signals[i]];
        std::copy(row.begin(), row.end(), matrix.begin() + std::size_t(i) * k);
      }
      ReportProfile profile(n, k, matrix);
      ProfileKey key = profile_key(profile);
      for (int j = 0; j < k; ++j) {
        double pr = joint.prob_by_cell(c, j);
        if (pr <= 0.0) continue;
        auto [it, inserted] =
            acc.try_emplace({key, j}, std::make_pair(profile, 0.0));
        it->second.second += pr;
      }
    }
    for (int i = n - 1; i >= 0; --i) {
      if (++signals[i] < joint.signal_sizes()[i]) break;
      signals[i] = 0;
    }
  }

  std::vector<SupportEntry> out;
  out.reserve(acc.size());
  for (auto& [key, value] : acc)
    out.push_back({std::move(value.first), key.second, value.second});
  return out;
}

// ---- Sampling ---------------------------------------------------------------

SampleSet sample(const DiscreteJoint& joint, std::size_t T, std::uint64_t seed) {
  const int n = joint.num_experts();
  const int k = joint.num_outcomes();
  auto reports = all_reports(joint);

  std::vector<double> cdf(joint.table().size());
  std::partial_sum(joint.table().begin(), joint.table().end(), cdf.begin());

  SampleSet samples(n, k, seed, "joint");
  Rng rng = Rng(seed).substream("sample");
  std::vector<double> matrix(std::size_t(n) * k);
  for (std::size_t t = 0; t < T; ++t) {
    std::size_t flat = rng.categorical_from_cdf(cdf);
    std::size_t cell = flat / k;
    int omega = int(flat % k);
    std::vector<int> signals = joint.decode_signals(cell);
    for (int i = 0; i < n; ++i) {
      const auto& row = reports[i][signals[i]];
      std::copy(row.begin(), row.end(), matrix.begin() + std::size_t(i) * k);
    }
    samples.push_record(matrix, omega);
  }
  return samples;
}

SampleSet sample(const CondIndepModel& model, std::size_t T, std::uint64_t seed) {
  const int n = model.num_experts();
  const int k = model.num_outcomes();

  // Per-expert report rows and per-(expert, outcome) signal CDFs.
  std::vector<std::vector<std::vector<double>>> reports(n);
  std::vector<std::vector<std::vector<double>>> cdfs(n);
  for (int i = 0; i < n; ++i) {
    const int m = model.signal_size(i);
    reports[i].resize(m);
    for (int s = 0; s < m; ++s) {
      double marginal = 0.0;
      for (int j = 0; j < k; ++j) marginal += model.prior()[j] * model.cond(i, j, s);
      if (marginal > 0.0) reports[i][s] = expert_report(model, i, s);
    }
    cdfs[i].resize(k);
    for (int j = 0; j < k; ++j) {
      cdfs[i][j].resize(m);
      std::partial_sum(model.cond_tables()[i][j].begin(),
                       model.cond_tables()[i][j].end(), cdfs[i][j].begin());
    }
  }
  std::vector<double> prior_cdf(k);
  std::partial_sum(model.prior().begin(), model.prior().end(), prior_cdf.begin());

  SampleSet samples(n, k, seed, "cond_indep");
  Rng rng = Rng(seed).substream("sample");
  std::vector<double> matrix(std::size_t(n) * k);
  for (std::size_t t = 0; t < T; ++t) {
    int omega = int(rng.categorical_from_cdf(prior_cdf));
    for (int i = 0; i < n; ++i) {
      int s = int(rng.categorical_from_cdf(cdfs[i][omega]));
      const auto& row = reports[i][s];
      std::copy(row.begin(), row.end(), matrix.begin() + std::size_t(i) * k);
    }
    samples.push_record(matrix, omega);
  }
  return samples;
}

SampleSet SampleSet::slice(std::size_t first, std::size_t count) const {
  if (first + count > size()) throw DimensionMismatch("SampleSet::slice: out of range");
  SampleSet out(n_, k_, seed_, source_);
  const std::size_t stride = std::size_t(n_) * k_;
  out.reports_.assign(reports_.begin() + first * stride,
                      reports_.begin() + (first + count) * stride);
  out.outcomes_.assign(outcomes_.begin() + first, outcomes_.begin() + first + count);
  return out;
}

}  // namespace aggrlab
