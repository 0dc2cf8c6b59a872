#pragma once

#include <iosfwd>
#include <string>

#include "aggrlab/aggregators.hpp"
#include "aggrlab/hard_instances.hpp"
#include "aggrlab/metrics.hpp"
#include "aggrlab/model.hpp"

#include "aggrlab/json.hpp"

namespace aggrlab {

// Shortest round-trip decimal form (std::to_chars); locale-free, '.' decimal
// separator, byte-stable across runs.
std::string format_double(double v);

// ---- model files ------------------------------------------------------------
// {"kind":"joint","n":..,"signal_sizes":[..],"k":..,"prob":[..]} with prob
// flat over (joint signal, outcome), outcome fastest, last expert fastest; or
// {"kind":"cond_indep","n":..,"signal_sizes":[..],"k":..,"prior":[..],
//  "cond":[[[..]..]..]} with cond[i][j] = P(s_i = . | omega = j).

nlohmann::json joint_to_json(const DiscreteJoint& joint);
nlohmann::json cond_indep_to_json(const CondIndepModel& model);

struct ModelFile {
  bool is_joint = false;
  DiscreteJoint joint = build_joint(1, {1}, 2, {0.5, 0.5});
  CondIndepModel cond_indep = build_cond_indep({0.5, 0.5}, {{{1.0}, {1.0}}});

  DiscreteJoint as_joint(std::size_t cell_cap = kDefaultCellCap) const {
    return is_joint ? joint : to_joint(cond_indep, cell_cap);
  }
};

ModelFile model_from_json(const nlohmann::json& j);
ModelFile load_model(const std::string& path);
void save_model_json(const nlohmann::json& j, const std::string& path);

// ---- sample files -------------------------------------------------------------
// CSV, header `trial,omega,r_1_1,...,r_n_k`; binary models emit the compact
// `trial,omega,r_1,...,r_n` with r_i = P(omega=1 | s_i).  LF line endings.

std::string samples_to_csv(const SampleSet& samples);
SampleSet samples_from_csv(const std::string& text);
void save_samples(const SampleSet& samples, const std::string& path);
SampleSet load_samples(const std::string& path);

// ---- aggregators ----------------------------------------------------------------
// {"kind":..,"k":..,"params":{..},"default_output":[..]}; lookup tables as
// arrays of {"profile":[..12-decimal strings..],"output":[..]}.

nlohmann::json aggregator_to_json(const Aggregator& f);
Aggregator aggregator_from_json(const nlohmann::json& j);
void save_aggregator(const Aggregator& f, const std::string& path);
Aggregator load_aggregator(const std::string& path);

// ---- reports ---------------------------------------------------------------------

nlohmann::json loss_report_to_json(const LossReport& report);
nlohmann::json distinguish_report_to_json(const DistinguishReport& report,
                                          const double* chain_bound = nullptr);
std::string distinguish_rows_to_csv(const DistinguishReport& report);

// ---- small file helpers -------------------------------------------------------------

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace aggrlab
