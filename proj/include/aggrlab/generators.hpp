#pragma once

#include <map>
#include <string>

#include "aggrlab/model.hpp"
#include "aggrlab/rng.hpp"

namespace aggrlab {

// Seeded model generators.  Random tables are drawn with entries bounded away
// from zero so every signal has positive marginal and every report is
// interior unless a generator says otherwise.

// All cells i.i.d. uniform on [min_cell, 1], normalized.
DiscreteJoint random_joint(Rng& rng, int n, int m, int k, double min_cell = 0.05);

// Interior prior and conditionals.
CondIndepModel random_cond_indep(Rng& rng, int n, int m, int k,
                                 double prior_lo = 0.15, double prior_hi = 0.85);

// prior (1-p, p); every expert's conditionals uniform, so every report
// equals the prior.
CondIndepModel uninformative_model(double p, int n, int m);

// omega = s1 XOR s2 with s_i i.i.d. uniform over {0,1}.
DiscreteJoint xor_model();

// Binary two-signal experts with P(s=1|omega=1) = P(s=0|omega=0) = accuracy.
CondIndepModel symmetric_binary(int n, double accuracy, double p);

// Binary two-signal experts, each gamma-weakly informative: per-expert
// likelihood-ratio amplitudes drawn in (0, gamma/(2+gamma)].
CondIndepModel weakly_informative_model(Rng& rng, int n, double gamma, double p);

// Either model by name, for the CLI / config layer.  params carries
// generator-specific numbers ("n", "m", "k", "p", "accuracy", "gamma", ...).
struct GeneratedModel {
  bool is_joint;
  DiscreteJoint joint;        // valid when is_joint
  CondIndepModel cond_indep;  // valid when !is_joint
};
GeneratedModel generate_model(const std::string& name,
                              const std::map<std::string, double>& params,
                              std::uint64_t seed);

}  // namespace aggrlab
