#include "cli.hpp"

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include "aggrlab/json.hpp"

#include "aggrlab/batteries.hpp"
#include "aggrlab/curve.hpp"
#include "aggrlab/generators.hpp"
#include "aggrlab/hard_instances.hpp"
#include "aggrlab/io.hpp"
#include "aggrlab/metrics.hpp"

namespace aggrlab {

namespace {

using nlohmann::json;

std::map<std::string, double> parse_kv_list(const std::string& text) {
  std::map<std::string, double> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    std::string item = text.substr(start, comma - start);
    std::size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw InvalidConfig("expected key=value in: " + item);
    out[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    start = comma + 1;
  }
  return out;
}

void emit(const std::string& content, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << content;
  } else {
    write_text_file(out_path, content);
  }
}

DiscreteDist dist_from_json_file(const std::string& path) {
  json j = json::parse(read_text_file(path));
  return DiscreteDist(j.at("labels").get<std::vector<std::string>>(),
                      j.at("probs").get<std::vector<double>>());
}

json dist_to_json(const DiscreteDist& dist) {
  json j;
  j["labels"] = dist.labels;
  j["probs"] = dist.probs;
  return j;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"forecast-aggregation laboratory"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string out_path;
  std::string format = "json";
  app.add_option("--seed", seed, "master seed")->capture_default_str();
  app.add_option("--out", out_path, "output path (default: stdout)");
  app.add_option("--format", format, "csv|json where both apply")
      ->check(CLI::IsMember({"csv", "json"}));
  app.fallthrough();

  // gen-model
  auto* gen = app.add_subcommand("gen-model", "generate a model file");
  std::string generator = "random_ci";
  std::string params_text;
  gen->add_option("--generator", generator,
                  "random_joint|random_ci|uninformative|xor|symmetric_ci|"
                  "weakly_informative|dz|cipair1|cipair2");
  gen->add_option("--params", params_text, "comma list, e.g. n=3,m=2,k=2");

  // sample
  auto* samp = app.add_subcommand("sample", "draw records from a model");
  std::string model_path;
  std::size_t T = 100;
  samp->add_option("--model", model_path, "model JSON file")->required();
  samp->add_option("--T", T, "number of records");

  // train
  auto* train = app.add_subcommand("train", "fit a learner on a sample file");
  std::string learner_name;
  std::string samples_path;
  std::string train_params_text;
  std::string train_model_path;
  train->add_option("--learner", learner_name, "learner name")->required();
  train->add_option("--samples", samples_path, "sample CSV file")->required();
  train->add_option("--params", train_params_text, "learner parameters");
  train->add_option("--model", train_model_path,
                    "true model (bayes_optimal_oracle only)");

  // eval
  auto* eval = app.add_subcommand("eval", "loss of an aggregator on a model");
  std::string eval_model_path;
  std::string aggregator_path;
  std::size_t mc_budget = 0;
  eval->add_option("--model", eval_model_path, "model JSON file")->required();
  eval->add_option("--aggregator", aggregator_path, "aggregator JSON file")
      ->required();
  eval->add_option("--mc", mc_budget,
                   "Monte-Carlo budget (omit for exact enumeration)");

  // curve
  auto* curve = app.add_subcommand("curve", "sample-complexity curve");
  std::string config_path;
  std::string curve_csv, curve_json;
  curve->add_option("--config", config_path, "experiment config JSON")->required();
  curve->add_option("--out-csv", curve_csv, "override config out_csv");
  curve->add_option("--out-json", curve_json, "override config out_json");

  // hard dz | cipair
  auto* hard = app.add_subcommand("hard", "lower-bound hard instances");
  hard->require_subcommand(1);
  auto* dz = hard->add_subcommand("dz", "bucket-perturbed distribution family");
  int dz_m = 2, dz_n = 3;
  double dz_eps = 0.01;
  std::string dz_signs;
  bool dz_as_joint = false;
  dz->add_option("--m", dz_m, "signal-space size (even)");
  dz->add_option("--n", dz_n, "number of experts");
  dz->add_option("--eps", dz_eps, "perturbation scale (< 1/40)");
  dz->add_option("--z", dz_signs, "sign vector, e.g. +-+- (default: from seed)");
  dz->add_flag("--as-joint", dz_as_joint, "emit the aggregation joint P_D");
  auto* cipair = hard->add_subcommand("cipair", "conditionally independent pair");
  int ci_n = 4;
  double ci_eps = 1e-6;
  std::string ci_prefix = "cipair";
  cipair->add_option("--n", ci_n, "number of experts");
  cipair->add_option("--eps", ci_eps, "hellinger budget (< 2^-18)");
  cipair->add_option("--out-prefix", ci_prefix, "writes <prefix>1.json, <prefix>2.json");

  // distinguish
  auto* distinguish = app.add_subcommand("distinguish",
                                         "distinguishing-distributions drill");
  std::string cipair_spec;
  std::string d1_path, d2_path;
  std::size_t dist_T = 1000, dist_trials = 2000;
  std::string distinguisher = "likelihood_ratio";
  std::string rows_csv;
  distinguish->add_option("--cipair", cipair_spec, "e.g. n=4,eps=1e-6");
  distinguish->add_option("--d1", d1_path, "distribution JSON {labels, probs}");
  distinguish->add_option("--d2", d2_path, "distribution JSON {labels, probs}");
  distinguish->add_option("--T", dist_T, "samples per trial");
  distinguish->add_option("--trials", dist_trials, "number of trials");
  distinguish->add_option("--distinguisher", distinguisher,
                          "likelihood_ratio|tv_nearest");
  distinguish->add_option("--rows-csv", rows_csv, "per-trial rows CSV path");

  // verify
  auto* verify = app.add_subcommand("verify", "run a verification battery");
  std::string battery;
  bool list_batteries = false;
  verify->add_option("battery", battery, "battery name");
  verify->add_flag("--list", list_batteries, "list batteries");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  }

  if (gen->parsed()) {
    auto params = params_text.empty() ? std::map<std::string, double>{}
                                      : parse_kv_list(params_text);
    GeneratedModel model = generate_model(generator, params, seed);
    json j = model.is_joint ? joint_to_json(model.joint)
                            : cond_indep_to_json(model.cond_indep);
    emit(j.dump(2) + "\n", out_path);
    return 0;
  }

  if (samp->parsed()) {
    ModelFile model = load_model(model_path);
    SampleSet samples = model.is_joint ? sample(model.joint, T, seed)
                                       : sample(model.cond_indep, T, seed);
    emit(samples_to_csv(samples), out_path);
    return 0;
  }

  if (train->parsed()) {
    SampleSet samples = load_samples(samples_path);
    auto params = train_params_text.empty() ? std::map<std::string, double>{}
                                            : parse_kv_list(train_params_text);
    ModelFile model;
    if (!train_model_path.empty()) model = load_model(train_model_path);
    else if (learner_name == "bayes_optimal_oracle")
      throw InvalidConfig("bayes_optimal_oracle needs --model");
    Aggregator f = train_learner(learner_name, params, samples, model);
    emit(aggregator_to_json(f).dump(2) + "\n", out_path);
    return 0;
  }

  if (eval->parsed()) {
    ModelFile model = load_model(eval_model_path);
    Aggregator f = load_aggregator(aggregator_path);
    LossReport report;
    if (mc_budget > 0) {
      SampleSet samples = model.is_joint
                              ? sample(model.joint, mc_budget, seed)
                              : sample(model.cond_indep, mc_budget, seed);
      report = expected_loss_mc(samples, f);
    } else {
      report = expected_loss_exact(model.as_joint(), f);
    }
    emit(loss_report_to_json(report).dump(2) + "\n", out_path);
    return 0;
  }

  if (curve->parsed()) {
    ExperimentConfig config = ExperimentConfig::from_file(config_path);
    if (!curve_csv.empty()) config.out_csv = curve_csv;
    if (!curve_json.empty()) config.out_json = curve_json;
    if (seed != 0) config.seed = seed;
    CurveResult result = run_curve(config);
    std::string csv = curve_to_csv(result);
    std::string summary = curve_to_json(result, config).dump(2) + "\n";
    if (!config.out_csv.empty()) write_text_file(config.out_csv, csv);
    if (!config.out_json.empty()) write_text_file(config.out_json, summary);
    if (config.out_csv.empty() && config.out_json.empty())
      emit(csv, out_path);
    return 0;
  }

  if (dz->parsed()) {
    DzFamily family(dz_m, dz_n, dz_eps);
    std::vector<int> z;
    if (dz_signs.empty()) {
      Rng rng = Rng(seed).substream("dz-signs");
      z = random_sign_vector(family, rng);
    } else {
      if (dz_signs.size() != family.num_buckets())
        throw SignVectorMismatch("--z needs one sign per bucket (" +
                                 std::to_string(family.num_buckets()) + ")");
      for (char c : dz_signs) {
        if (c != '+' && c != '-')
          throw SignVectorMismatch("--z characters must be + or -");
        z.push_back(c == '+' ? 1 : -1);
      }
    }
    if (dz_as_joint) {
      emit(joint_to_json(dz_to_aggregation_instance(family, z)).dump(2) + "\n",
           out_path);
    } else {
      json j = dist_to_json(dz_build(family, z));
      j["m"] = dz_m;
      j["n"] = dz_n;
      j["eps"] = dz_eps;
      emit(j.dump(2) + "\n", out_path);
    }
    return 0;
  }

  if (cipair->parsed()) {
    CiPair pair = ci_pair_build(ci_n, ci_eps);
    save_model_json(cond_indep_to_json(pair.model1), ci_prefix + "1.json");
    save_model_json(cond_indep_to_json(pair.model2), ci_prefix + "2.json");
    std::cerr << "wrote " << ci_prefix << "1.json and " << ci_prefix << "2.json\n";
    return 0;
  }

  if (distinguish->parsed()) {
    DiscreteDist d1, d2;
    const double* chain_bound_ptr = nullptr;
    double chain_bound = 0.0;
    if (!cipair_spec.empty()) {
      auto params = parse_kv_list(cipair_spec);
      CiPair pair = ci_pair_build(int(params.at("n")), params.at("eps"));
      d1 = ci_model_to_dist(pair.model1);
      d2 = ci_model_to_dist(pair.model2);
      chain_bound = ci_hellinger_sq_chain_bound(pair.model1, pair.model2);
      chain_bound_ptr = &chain_bound;
    } else if (!d1_path.empty() && !d2_path.empty()) {
      d1 = dist_from_json_file(d1_path);
      d2 = dist_from_json_file(d2_path);
    } else {
      throw InvalidConfig("distinguish needs --cipair or --d1/--d2");
    }
    DistinguishReport report = distinguish_experiment(
        d1, d2, dist_T, dist_trials, distinguisher_from_string(distinguisher),
        seed);
    if (!rows_csv.empty()) write_text_file(rows_csv, distinguish_rows_to_csv(report));
    if (format == "csv")
      emit(distinguish_rows_to_csv(report), out_path);
    else
      emit(distinguish_report_to_json(report, chain_bound_ptr).dump(2) + "\n",
           out_path);
    return 0;
  }

  if (verify->parsed()) {
    if (list_batteries) {
      std::string names;
      for (const auto& name : battery_names()) names += name + "\n";
      emit(names, out_path);
      return 0;
    }
    if (battery.empty()) throw InvalidConfig("verify needs a battery name");
    BatteryReport report = run_battery(battery, seed);
    emit(battery_report_to_json(report).dump(2) + "\n", out_path);
    return report.pass() ? 0 : 2;
  }

  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace aggrlab
