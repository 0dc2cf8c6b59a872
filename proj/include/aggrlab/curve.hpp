#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aggrlab/aggregators.hpp"
#include "aggrlab/io.hpp"
#include "aggrlab/model.hpp"

#include "aggrlab/json.hpp"

namespace aggrlab {

// A sample-complexity curve: for each (T, trial), train the configured
// learner on T fresh records and measure the gap E||f_hat - f*||^2.
struct ExperimentConfig {
  ModelFile model;
  std::string model_description;
  std::string learner;
  std::map<std::string, double> learner_params;
  std::vector<std::size_t> schedule;  // nonempty, strictly increasing
  int trials = 1;
  std::uint64_t seed = 0;
  bool exact_eval = true;
  std::size_t mc_budget = 100000;
  std::string out_csv;
  std::string out_json;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::string& path);
};

struct CurveCell {
  std::size_t T = 0;
  int t_index = 0;
  int trial = 0;
  bool ok = false;
  std::string error;
  double gap = 0.0;
  double loss = 0.0;
  std::map<std::string, double> diagnostics;
};

struct CurveSummary {
  std::size_t T;
  int failures;
  double median_gap;
  double mean_gap;
  double q10_gap;
  double q90_gap;
  double median_loss;
};

struct CurveResult {
  std::vector<CurveCell> cells;  // ordered by (t_index, trial)
  std::vector<CurveSummary> summaries;
};

// Fully deterministic given config.seed: the cell at (t_index, trial) uses
// the substream chain master -> "curve" -> t_index -> trial, so adding
// schedule points or trials never perturbs existing cells.  Learner errors
// are recorded per-cell; the run continues.
CurveResult run_curve(const ExperimentConfig& config);

// Train by registry name; context is the sample set plus parameters.
Aggregator train_learner(const std::string& name,
                         const std::map<std::string, double>& params,
                         const SampleSet& samples, const ModelFile& model);
std::vector<std::string> learner_names();

std::string curve_to_csv(const CurveResult& result);
nlohmann::json curve_to_json(const CurveResult& result, const ExperimentConfig& config);

}  // namespace aggrlab
