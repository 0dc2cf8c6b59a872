#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aggrlab/errors.hpp"
#include "aggrlab/rng.hpp"

namespace aggrlab {

inline constexpr double kValidationTol = 1e-9;   // distribution sums
inline constexpr double kRenormalizeTol = 1e-6;  // build_joint acceptance window
inline constexpr std::size_t kDefaultCellCap = 10'000'000;

// Number of outcomes of the predicted event; k = 2 is the binary case
// with omega in {0, 1}.
struct OutcomeSpace {
  int k;
  explicit OutcomeSpace(int k_) : k(k_) {
    if (k < 2) throw DimensionMismatch("OutcomeSpace: k must be >= 2");
  }
};

class ReportProfile;

// Lightweight non-owning view of one expert-report matrix (n rows, k columns;
// row i is expert i's posterior over outcomes).
class ProfileView {
 public:
  ProfileView(const double* data, int n, int k) : data_(data), n_(n), k_(k) {}

  int num_experts() const { return n_; }
  int num_outcomes() const { return k_; }
  std::span<const double> row(int i) const { return {data_ + std::size_t(i) * k_, std::size_t(k_)}; }
  double at(int i, int j) const { return data_[std::size_t(i) * k_ + j]; }
  // Binary shorthand: r_i = P(omega=1 | s_i).  Requires k == 2.
  double binary(int i) const { return data_[std::size_t(i) * 2 + 1]; }
  const double* data() const { return data_; }

  ReportProfile materialize() const;

 private:
  const double* data_;
  int n_;
  int k_;
};

// Owning report matrix.  Rows are probability vectors.
class ReportProfile {
 public:
  ReportProfile() : n_(0), k_(0) {}
  ReportProfile(int n, int k, std::vector<double> values)
      : n_(n), k_(k), values_(std::move(values)) {
    if (values_.size() != std::size_t(n) * k)
      throw DimensionMismatch("ReportProfile: values size mismatch");
  }

  int num_experts() const { return n_; }
  int num_outcomes() const { return k_; }
  double at(int i, int j) const { return values_[std::size_t(i) * k_ + j]; }
  std::span<const double> row(int i) const { return {values_.data() + std::size_t(i) * k_, std::size_t(k_)}; }
  double binary(int i) const { return values_[std::size_t(i) * 2 + 1]; }
  const std::vector<double>& values() const { return values_; }

  operator ProfileView() const { return ProfileView(values_.data(), n_, k_); }
  ProfileView view() const { return ProfileView(values_.data(), n_, k_); }

 private:
  int n_;
  int k_;
  std::vector<double> values_;
};

inline ReportProfile ProfileView::materialize() const {
  return ReportProfile(n_, k_, std::vector<double>(data_, data_ + std::size_t(n_) * k_));
}

// Canonical identity of a profile: every entry rounded to 12 decimal digits.
// Used to merge numerically coincident profiles and to key lookup tables.
using ProfileKey = std::vector<std::int64_t>;

ProfileKey profile_key(ProfileView profile);

// Full joint probability table over (joint signal, outcome).  Immutable after
// construction; the ground truth object for every exact computation.
class DiscreteJoint {
 public:
  int num_experts() const { return n_; }
  const std::vector<int>& signal_sizes() const { return signal_sizes_; }
  int num_outcomes() const { return k_; }
  std::size_t num_signal_cells() const { return cells_; }
  const std::vector<double>& table() const { return prob_; }

  // prob of (joint signal, outcome); signal encoded mixed-radix with the
  // last expert varying fastest (lexicographic order).
  double prob_by_cell(std::size_t sig_index, int outcome) const {
    return prob_[sig_index * k_ + outcome];
  }
  double prob(std::span<const int> signals, int outcome) const {
    return prob_by_cell(encode_signals(signals), outcome);
  }

  std::size_t encode_signals(std::span<const int> signals) const;
  std::vector<int> decode_signals(std::size_t sig_index) const;

  double outcome_prob(int outcome) const;                  // P(omega = j)
  double signal_marginal(int expert, int signal) const;    // P(s_i)
  double signal_outcome_prob(int expert, int signal, int outcome) const;  // P(s_i, omega)

  // Binary accessors (k == 2).
  double p() const;    // P(omega = 1)
  double rho() const;  // p / (1 - p); DegeneratePrior if p not in (0, 1)

  friend DiscreteJoint build_joint(int n, const std::vector<int>& signal_sizes,
                                   int k, const std::vector<double>& prob_table);

 private:
  DiscreteJoint() = default;

  int n_ = 0;
  std::vector<int> signal_sizes_;
  int k_ = 0;
  std::size_t cells_ = 0;
  std::vector<double> prob_;  // cells_ * k_, outcome fastest
};

// prior over k outcomes + per-expert signal tables conditional on the
// outcome; the factored special case where signals are independent given
// the event.
class CondIndepModel {
 public:
  int num_experts() const { return int(cond_.size()); }
  int num_outcomes() const { return int(prior_.size()); }
  int signal_size(int expert) const { return int(cond_[expert][0].size()); }
  const std::vector<double>& prior() const { return prior_; }
  // P(s_i = signal | omega = outcome)
  double cond(int expert, int outcome, int signal) const {
    return cond_[expert][outcome][signal];
  }
  const std::vector<std::vector<std::vector<double>>>& cond_tables() const { return cond_; }

  // Binary accessors (k == 2).
  double p() const;
  double rho() const;
  // mu0 = (1/n) sum_i E[r_i | omega=0], mu1 = (1/n) sum_i E[1-r_i | omega=1],
  // both by exact per-expert enumeration.
  double mu0() const;
  double mu1() const;

  friend CondIndepModel build_cond_indep(
      const std::vector<double>& prior,
      const std::vector<std::vector<std::vector<double>>>& conditionals);

 private:
  CondIndepModel() = default;

  std::vector<double> prior_;
  std::vector<std::vector<std::vector<double>>> cond_;  // [expert][outcome][signal]
};

// Ordered i.i.d. draws of (report profile, outcome) from a model.
// Stored flat: reports_[t*n*k ...] row-major per record.
class SampleSet {
 public:
  SampleSet(int n, int k, std::uint64_t seed, std::string source)
      : n_(n), k_(k), seed_(seed), source_(std::move(source)) {}

  std::size_t size() const { return outcomes_.size(); }
  int num_experts() const { return n_; }
  int num_outcomes() const { return k_; }
  std::uint64_t seed() const { return seed_; }
  const std::string& source() const { return source_; }

  int outcome(std::size_t t) const { return outcomes_[t]; }
  ProfileView profile(std::size_t t) const {
    return ProfileView(reports_.data() + t * std::size_t(n_) * k_, n_, k_);
  }
  double binary_report(std::size_t t, int i) const {
    return reports_[t * std::size_t(n_) * k_ + std::size_t(i) * k_ + 1];
  }

  void push_record(std::span<const double> report_matrix, int outcome) {
    if (report_matrix.size() != std::size_t(n_) * k_)
      throw DimensionMismatch("SampleSet: record size mismatch");
    if (outcome < 0 || outcome >= k_)
      throw DimensionMismatch("SampleSet: outcome out of range");
    reports_.insert(reports_.end(), report_matrix.begin(), report_matrix.end());
    outcomes_.push_back(outcome);
  }

  // Restriction to records [first, first+count), keeping metadata.
  SampleSet slice(std::size_t first, std::size_t count) const;

 private:
  int n_;
  int k_;
  std::vector<double> reports_;
  std::vector<int> outcomes_;
  std::uint64_t seed_;
  std::string source_;
};

// One atom of the exact pushforward of P onto (report profile, outcome).
struct SupportEntry {
  ReportProfile profile;
  int outcome;
  double prob;
};

// ---- Operations -----------------------------------------------------------

// Validates and normalizes a raw table.  The table must sum to 1 within
// kRenormalizeTol (it is then renormalized exactly) and be entrywise >= 0.
DiscreteJoint build_joint(int n, const std::vector<int>& signal_sizes, int k,
                          const std::vector<double>& prob_table);

CondIndepModel build_cond_indep(
    const std::vector<double>& prior,
    const std::vector<std::vector<std::vector<double>>>& conditionals);

// Product-measure expansion prior[w] * prod_i cond[i][w][s_i].
DiscreteJoint to_joint(const CondIndepModel& model,
                       std::size_t cell_cap = kDefaultCellCap);

// r_{ij} = P(omega=j, s_i) / P(s_i).  ZeroProbabilitySignal if P(s_i) = 0.
std::vector<double> expert_report(const DiscreteJoint& joint, int expert, int signal);
std::vector<double> expert_report(const CondIndepModel& model, int expert, int signal);

// Exact pushforward onto (report profile, outcome); profiles that coincide
// after 12-decimal rounding are merged.  Entries with zero probability are
// dropped.  Deterministic order (sorted by profile key, then outcome).
std::vector<SupportEntry> report_support(const DiscreteJoint& joint,
                                         std::size_t cell_cap = kDefaultCellCap);

// T i.i.d. draws of (report profile of s, omega); deterministic given seed.
SampleSet sample(const DiscreteJoint& joint, std::size_t T, std::uint64_t seed);
SampleSet sample(const CondIndepModel& model, std::size_t T, std::uint64_t seed);

// rho <-> p round trips.
inline double rho_from_p(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DegeneratePrior("rho_from_p: p must be in (0,1)");
  return p / (1.0 - p);
}
inline double p_from_rho(double rho) { return rho / (1.0 + rho); }

}  // namespace aggrlab
