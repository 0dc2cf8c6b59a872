#pragma once

// Test-side oracles, independent of the library paths they check.

#include <cmath>
#include <vector>

#include "aggrlab/model.hpp"

namespace oracles {

inline double log_binom_pmf(int n, int x, double q) {
  if (q <= 0.0) return x == 0 ? 0.0 : -INFINITY;
  if (q >= 1.0) return x == n ? 0.0 : -INFINITY;
  return std::lgamma(n + 1.0) - std::lgamma(x + 1.0) - std::lgamma(n - x + 1.0) +
         x * std::log(q) + (n - x) * std::log1p(-q);
}

// P(Binomial(n, q) > threshold)
inline double binom_tail_above(int n, double q, double threshold) {
  double total = 0.0;
  for (int x = 0; x <= n; ++x)
    if (double(x) > threshold) total += std::exp(log_binom_pmf(n, x, q));
  return total;
}

// Exact squared loss of a hard 0/1 classifier "predict u iff X > M" where
// X counts experts whose signal falls in the u-side class, on a binary model
// with i.i.d. experts.  q0/q1 = per-expert probability of landing in the
// u-side class given omega = 0/1.
inline double threshold_classifier_loss(int n, double p, double q0, double q1,
                                        int u, double M) {
  double correct_if_1, correct_if_0;
  if (u == 1) {
    correct_if_1 = binom_tail_above(n, q1, M);        // predict 1
    correct_if_0 = 1.0 - binom_tail_above(n, q0, M);  // predict 0
  } else {
    correct_if_1 = 1.0 - binom_tail_above(n, q1, M);
    correct_if_0 = binom_tail_above(n, q0, M);
  }
  return p * (1.0 - correct_if_1) + (1.0 - p) * (1.0 - correct_if_0);
}

// Exact squared loss of the averaging aggregator on a binary model with
// i.i.d. two-signal experts: E[(rbar - omega)^2 | omega] =
// (E[r|omega] - omega)^2 + Var(r|omega)/n.
struct TwoPointExpert {
  double r_s0, r_s1;        // report per signal
  double p_s1_given[2];     // P(s = 1 | omega)
};

inline double averaging_loss_iid(int n, double p, const TwoPointExpert& expert) {
  double loss = 0.0;
  for (int omega = 0; omega < 2; ++omega) {
    double q = expert.p_s1_given[omega];
    double mean = q * expert.r_s1 + (1.0 - q) * expert.r_s0;
    double second = q * expert.r_s1 * expert.r_s1 +
                    (1.0 - q) * expert.r_s0 * expert.r_s0;
    double var = second - mean * mean;
    double bias = mean - double(omega);
    loss += (omega == 1 ? p : 1.0 - p) * (bias * bias + var / n);
  }
  return loss;
}

// Brute-force posterior P(omega | joint signal) straight from the table.
inline std::vector<double> posterior_of_cell(const aggrlab::DiscreteJoint& joint,
                                             std::size_t cell) {
  const int k = joint.num_outcomes();
  std::vector<double> out(k);
  double mass = 0.0;
  for (int j = 0; j < k; ++j) {
    out[j] = joint.prob_by_cell(cell, j);
    mass += out[j];
  }
  for (double& v : out) v /= mass;
  return out;
}

}  // namespace oracles
