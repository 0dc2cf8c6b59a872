#include "aggrlab/curve.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aggrlab/json.hpp"

#include "aggrlab/generators.hpp"
#include "aggrlab/metrics.hpp"
#include "aggrlab/parallel.hpp"

namespace aggrlab {

using nlohmann::json;

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig config;
  const json& model = j.at("model");
  if (model.contains("file")) {
    config.model = load_model(model.at("file").get<std::string>());
    config.model_description = "file:" + model.at("file").get<std::string>();
  } else if (model.contains("generator")) {
    std::map<std::string, double> params;
    if (model.contains("params"))
      params = model.at("params").get<std::map<std::string, double>>();
    std::uint64_t seed = j.value("seed", std::uint64_t(0));
    GeneratedModel generated =
        generate_model(model.at("generator").get<std::string>(), params, seed);
    config.model =
        ModelFile{generated.is_joint, generated.joint, generated.cond_indep};
    config.model_description = "generator:" + model.at("generator").get<std::string>();
  } else if (model.contains("inline")) {
    config.model = model_from_json(model.at("inline"));
    config.model_description = "inline";
  } else {
    throw InvalidConfig("config.model needs file|generator|inline");
  }

  const json& learner = j.at("learner");
  config.learner = learner.at("name").get<std::string>();
  if (learner.contains("params"))
    config.learner_params = learner.at("params").get<std::map<std::string, double>>();

  const json& schedule = j.at("schedule");
  if (schedule.is_array()) {
    config.schedule = schedule.get<std::vector<std::size_t>>();
  } else {
    // geometric range {"start", "stop", "points"}
    double start = schedule.at("start").get<double>();
    double stop = schedule.at("stop").get<double>();
    int points = schedule.at("points").get<int>();
    if (!(start >= 1.0) || !(stop > start) || points < 2)
      throw InvalidConfig("geometric schedule needs 1 <= start < stop, points >= 2");
    for (int i = 0; i < points; ++i) {
      double t = start * std::pow(stop / start, double(i) / (points - 1));
      auto rounded = std::size_t(std::llround(t));
      if (config.schedule.empty() || rounded > config.schedule.back())
        config.schedule.push_back(rounded);
    }
  }
  if (config.schedule.empty())
    throw InvalidConfig("config.schedule must be nonempty");
  for (std::size_t i = 1; i < config.schedule.size(); ++i)
    if (config.schedule[i] <= config.schedule[i - 1])
      throw InvalidConfig("config.schedule must be strictly increasing");

  config.trials = j.value("trials", 1);
  if (config.trials < 1) throw InvalidConfig("config.trials must be >= 1");
  config.seed = j.value("seed", std::uint64_t(0));

  if (j.contains("evaluation")) {
    const json& eval = j.at("evaluation");
    std::string mode = eval.value("mode", "exact");
    if (mode == "exact") {
      config.exact_eval = true;
    } else if (mode == "monte_carlo") {
      config.exact_eval = false;
      config.mc_budget = eval.value("budget", std::size_t(100000));
    } else {
      throw InvalidConfig("evaluation.mode must be exact|monte_carlo");
    }
  }
  config.out_csv = j.value("out_csv", std::string());
  config.out_json = j.value("out_json", std::string());
  return config;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  return from_json(json::parse(read_text_file(path)));
}

std::vector<std::string> learner_names() {
  return {"erm_empirical",  "empirical_bayes", "erm_theta",
          "multi_erm_theta", "averaging",       "bordley_fixed",
          "bayes_optimal_oracle", "weakly_informative", "strongly_informative"};
}

Aggregator train_learner(const std::string& name,
                         const std::map<std::string, double>& params,
                         const SampleSet& samples, const ModelFile& model) {
  auto get = [&](const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  if (name == "erm_empirical") return erm_empirical(samples, samples.num_outcomes());
  if (name == "empirical_bayes") return empirical_bayes(samples);
  if (name == "erm_theta") {
    ThetaGridSpec grid;
    grid.theta_min = get("theta_min", grid.theta_min);
    grid.theta_max = get("theta_max", grid.theta_max);
    grid.points = int(get("points", grid.points));
    return erm_theta(samples, grid);
  }
  if (name == "multi_erm_theta")
    return multi_erm_theta(samples, samples.num_outcomes());
  if (name == "averaging") return averaging();
  if (name == "bordley_fixed")
    return bordley(get("theta", 1.0), samples.num_experts());
  if (name == "bayes_optimal_oracle") return bayes_optimal(model.as_joint());
  if (name == "weakly_informative")
    return weakly_informative_learn(samples, get("gamma", 0.5),
                                    samples.num_experts());
  if (name == "strongly_informative")
    return strongly_informative_learn(samples, get("gamma", 8.0),
                                      get("eps", 0.1), get("delta", 0.05),
                                      samples.num_experts());
  throw InvalidConfig("unknown learner: " + name);
}

namespace {

void fill_diagnostics(const Aggregator& f, std::map<std::string, double>& out) {
  if (const auto* b = f.bordley_params()) out["theta"] = b->theta;
  if (const auto* mt = f.multi_theta_params())
    for (std::size_t j = 0; j < mt->theta.size(); ++j)
      out["theta_" + std::to_string(j)] = mt->theta[j];
  if (const auto* st = f.strong_params()) {
    out["rho_hat"] = st->rho_hat;
    out["u"] = st->u;
    out["M"] = st->threshold_m;
  }
  if (const auto* lookup = f.lookup_params())
    out["table_size"] = double(lookup->table.size());
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  double position = q * double(values.size() - 1);
  std::size_t lo = std::size_t(position);
  std::size_t hi = std::min(lo + 1, values.size() - 1);
  double frac = position - double(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace

CurveResult run_curve(const ExperimentConfig& config) {
  const ModelFile& model = config.model;
  const int k = model.is_joint ? model.joint.num_outcomes()
                               : model.cond_indep.num_outcomes();

  // Shared evaluation state, computed once.
  std::vector<SupportEntry> support;
  std::optional<Aggregator> reference;  // f* for monte_carlo gap
  if (config.exact_eval) {
    support = report_support(model.as_joint());
  } else if (!model.is_joint && k == 2) {
    reference = bordley(model.cond_indep.rho(), model.cond_indep.num_experts());
  } else if (!model.is_joint) {
    std::vector<double> theta(k);
    for (int j = 0; j < k; ++j)
      theta[j] = std::pow(model.cond_indep.prior()[j],
                          -(model.cond_indep.num_experts() - 1));
    reference = multi_bordley(theta, model.cond_indep.num_experts());
  } else {
    reference = bayes_optimal(model.joint);
  }

  CurveResult result;
  const std::size_t cell_count = config.schedule.size() * std::size_t(config.trials);
  result.cells.resize(cell_count);

  Rng master = Rng(config.seed).substream("curve");
  parallel_for(cell_count, [&](std::size_t index) {
    const int t_index = int(index / config.trials);
    const int trial = int(index % config.trials);
    const std::size_t T = config.schedule[t_index];
    CurveCell& cell = result.cells[index];
    cell.T = T;
    cell.t_index = t_index;
    cell.trial = trial;
    try {
      // Per-cell substreams: master -> t_index -> trial -> purpose.
      Rng cell_rng = master.substream(std::uint64_t(t_index), std::uint64_t(trial));
      std::uint64_t train_seed = cell_rng.substream("train").next_u64();
      SampleSet samples = model.is_joint ? sample(model.joint, T, train_seed)
                                         : sample(model.cond_indep, T, train_seed);
      Aggregator learned =
          train_learner(config.learner, config.learner_params, samples, model);
      if (config.exact_eval) {
        LossReport report = expected_loss_on_support(support, learned);
        cell.gap = *report.gap_direct;
        cell.loss = report.loss;
      } else {
        std::uint64_t eval_seed = cell_rng.substream("eval").next_u64();
        SampleSet eval_samples = model.is_joint
                                     ? sample(model.joint, config.mc_budget, eval_seed)
                                     : sample(model.cond_indep, config.mc_budget,
                                              eval_seed);
        LossReport report = expected_loss_mc(eval_samples, learned);
        cell.loss = report.loss;
        double gap_acc = 0.0;
        for (std::size_t t = 0; t < eval_samples.size(); ++t) {
          ProfileView profile = eval_samples.profile(t);
          if (k == 2) {
            double d = learned.apply_binary(profile) -
                       reference->apply_binary(profile);
            gap_acc += d * d;
          } else {
            std::vector<double> a = learned.apply(profile);
            std::vector<double> b = reference->apply(profile);
            double acc = 0.0;
            for (int j = 0; j < k; ++j) {
              double d = a[j] - b[j];
              acc += d * d;
            }
            gap_acc += acc / k;
          }
        }
        cell.gap = gap_acc / double(eval_samples.size());
      }
      fill_diagnostics(learned, cell.diagnostics);
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.error = e.what();
    }
  });

  for (std::size_t t_index = 0; t_index < config.schedule.size(); ++t_index) {
    std::vector<double> gaps, losses;
    int failures = 0;
    for (int trial = 0; trial < config.trials; ++trial) {
      const CurveCell& cell = result.cells[t_index * config.trials + trial];
      if (cell.ok) {
        gaps.push_back(cell.gap);
        losses.push_back(cell.loss);
      } else {
        ++failures;
      }
    }
    CurveSummary summary;
    summary.T = config.schedule[t_index];
    summary.failures = failures;
    summary.median_gap = quantile(gaps, 0.5);
    summary.mean_gap =
        gaps.empty() ? std::nan("")
                     : std::accumulate(gaps.begin(), gaps.end(), 0.0) / gaps.size();
    summary.q10_gap = quantile(gaps, 0.1);
    summary.q90_gap = quantile(gaps, 0.9);
    summary.median_loss = quantile(losses, 0.5);
    result.summaries.push_back(summary);
  }
  return result;
}

std::string curve_to_csv(const CurveResult& result) {
  std::string out = "T,trial,gap,loss\n";
  for (const auto& cell : result.cells) {
    out += std::to_string(cell.T);
    out += ',';
    out += std::to_string(cell.trial);
    if (cell.ok) {
      out += ',';
      out += format_double(cell.gap);
      out += ',';
      out += format_double(cell.loss);
    } else {
      out += ",NA,NA";
    }
    out += '\n';
  }
  return out;
}

json curve_to_json(const CurveResult& result, const ExperimentConfig& config) {
  json j;
  j["schema_version"] = "1";
  j["model"] = config.model_description;
  j["learner"] = config.learner;
  j["seed"] = config.seed;
  j["evaluation"] = config.exact_eval ? "exact" : "monte_carlo";
  json summaries = json::array();
  for (const auto& summary : result.summaries) {
    json row;
    row["T"] = summary.T;
    row["failures"] = summary.failures;
    row["median_gap"] = summary.median_gap;
    row["mean_gap"] = summary.mean_gap;
    row["q10_gap"] = summary.q10_gap;
    row["q90_gap"] = summary.q90_gap;
    row["median_loss"] = summary.median_loss;
    summaries.push_back(std::move(row));
  }
  j["summaries"] = std::move(summaries);
  json failures = json::array();
  json diagnostics = json::array();
  for (const auto& cell : result.cells) {
    if (!cell.ok) {
      json row;
      row["T"] = cell.T;
      row["trial"] = cell.trial;
      row["error"] = cell.error;
      failures.push_back(std::move(row));
    } else if (!cell.diagnostics.empty()) {
      json row;
      row["T"] = cell.T;
      row["trial"] = cell.trial;
      for (const auto& [key, value] : cell.diagnostics) row[key] = value;
      diagnostics.push_back(std::move(row));
    }
  }
  j["failures"] = std::move(failures);
  j["diagnostics"] = std::move(diagnostics);
  return j;
}

}  // namespace aggrlab
