#include "aggrlab/io.hpp"

#include "aggrlab/generators.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "aggrlab/json.hpp"

namespace aggrlab {

using nlohmann::json;

std::string format_double(double v) {
  char buffer[32];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v);
  return std::string(buffer, ptr);
}

namespace {

std::string format_fixed12(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.12f", v);
  return buffer;
}

double parse_double(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw InvalidConfig("cannot parse number: " + std::string(text));
  return value;
}

}  // namespace

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidConfig("cannot open for writing: " + path);
  out << content;
  if (!out) throw InvalidConfig("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidConfig("cannot open: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// ---- models -----------------------------------------------------------------

json joint_to_json(const DiscreteJoint& joint) {
  json j;
  j["kind"] = "joint";
  j["n"] = joint.num_experts();
  j["signal_sizes"] = joint.signal_sizes();
  j["k"] = joint.num_outcomes();
  j["prob"] = joint.table();
  return j;
}

json cond_indep_to_json(const CondIndepModel& model) {
  json j;
  j["kind"] = "cond_indep";
  j["n"] = model.num_experts();
  std::vector<int> sizes(model.num_experts());
  for (int i = 0; i < model.num_experts(); ++i) sizes[i] = model.signal_size(i);
  j["signal_sizes"] = sizes;
  j["k"] = model.num_outcomes();
  j["prior"] = model.prior();
  j["cond"] = model.cond_tables();
  return j;
}

ModelFile model_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  int n = j.at("n").get<int>();
  int k = j.at("k").get<int>();
  auto sizes = j.at("signal_sizes").get<std::vector<int>>();
  if (kind == "joint") {
    DiscreteJoint joint =
        build_joint(n, sizes, k, j.at("prob").get<std::vector<double>>());
    return ModelFile{true, joint, uninformative_model(0.5, 1, 1)};
  }
  if (kind == "cond_indep") {
    auto prior = j.at("prior").get<std::vector<double>>();
    auto cond = j.at("cond").get<std::vector<std::vector<std::vector<double>>>>();
    CondIndepModel model = build_cond_indep(prior, cond);
    if (model.num_experts() != n || model.num_outcomes() != k)
      throw InvalidConfig("model file: declared shape disagrees with tables");
    return ModelFile{false, build_joint(1, {1}, 2, {0.5, 0.5}), model};
  }
  throw InvalidConfig("model file: unknown kind " + kind);
}

ModelFile load_model(const std::string& path) {
  return model_from_json(json::parse(read_text_file(path)));
}

void save_model_json(const json& j, const std::string& path) {
  write_text_file(path, j.dump(2) + "\n");
}

// ---- samples -----------------------------------------------------------------

std::string samples_to_csv(const SampleSet& samples) {
  const int n = samples.num_experts();
  const int k = samples.num_outcomes();
  std::string out = "trial,omega";
  if (k == 2) {
    for (int i = 1; i <= n; ++i) out += ",r_" + std::to_string(i);
  } else {
    for (int i = 1; i <= n; ++i)
      for (int j = 1; j <= k; ++j)
        out += ",r_" + std::to_string(i) + "_" + std::to_string(j);
  }
  out += '\n';
  for (std::size_t t = 0; t < samples.size(); ++t) {
    out += std::to_string(t);
    out += ',';
    out += std::to_string(samples.outcome(t));
    ProfileView profile = samples.profile(t);
    if (k == 2) {
      for (int i = 0; i < n; ++i) {
        out += ',';
        out += format_double(profile.binary(i));
      }
    } else {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) {
          out += ',';
          out += format_double(profile.at(i, j));
        }
    }
    out += '\n';
  }
  return out;
}

SampleSet samples_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InvalidConfig("samples csv: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  {
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) header.push_back(field);
  }
  if (header.size() < 3 || header[0] != "trial" || header[1] != "omega")
    throw InvalidConfig("samples csv: bad header");
  bool compact = header[2].find('_') != std::string::npos &&
                 header[2].find('_', header[2].find('_') + 1) == std::string::npos;
  int n, k;
  if (compact) {
    n = int(header.size()) - 2;
    k = 2;
  } else {
    // header fields r_i_j, last one tells the shape
    const std::string& last = header.back();
    std::size_t first = last.find('_');
    std::size_t second = last.find('_', first + 1);
    n = std::stoi(last.substr(first + 1, second - first - 1));
    k = std::stoi(last.substr(second + 1));
    if (std::size_t(n) * k + 2 != header.size())
      throw InvalidConfig("samples csv: header shape mismatch");
  }

  SampleSet samples(n, k, 0, "csv");
  std::vector<double> matrix(std::size_t(n) * k);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string field;
    std::getline(fields, field, ',');  // trial index, positional
    std::getline(fields, field, ',');
    int omega = std::stoi(field);
    if (compact) {
      for (int i = 0; i < n; ++i) {
        std::getline(fields, field, ',');
        double r = parse_double(field);
        matrix[std::size_t(i) * 2] = 1.0 - r;
        matrix[std::size_t(i) * 2 + 1] = r;
      }
    } else {
      for (std::size_t c = 0; c < std::size_t(n) * k; ++c) {
        std::getline(fields, field, ',');
        matrix[c] = parse_double(field);
      }
    }
    samples.push_record(matrix, omega);
  }
  return samples;
}

void save_samples(const SampleSet& samples, const std::string& path) {
  write_text_file(path, samples_to_csv(samples));
}

SampleSet load_samples(const std::string& path) {
  return samples_from_csv(read_text_file(path));
}

// ---- aggregators ----------------------------------------------------------------

json aggregator_to_json(const Aggregator& f) {
  json j;
  j["kind"] = to_string(f.kind());
  j["k"] = f.num_outcomes();
  j["default_output"] = f.default_output();
  json params = json::object();
  if (const auto* lookup = f.lookup_params()) {
    params["error_on_unseen"] = lookup->error_on_unseen;
    json table = json::array();
    for (const auto& [key, output] : lookup->table) {
      const ReportProfile& profile = lookup->representatives.at(key);
      json row;
      std::vector<std::string> cells;
      cells.reserve(profile.values().size());
      for (double v : profile.values()) cells.push_back(format_fixed12(v));
      row["profile"] = cells;
      row["n"] = profile.num_experts();
      row["output"] = output;
      table.push_back(std::move(row));
    }
    params["table"] = std::move(table);
  } else if (const auto* b = f.bordley_params()) {
    params["theta"] = b->theta;
    params["n"] = b->n;
  } else if (const auto* mt = f.multi_theta_params()) {
    params["theta"] = mt->theta;
    params["n"] = mt->n;
  } else if (const auto* st = f.strong_params()) {
    params["rho_hat"] = st->rho_hat;
    params["u"] = st->u;
    params["M"] = st->threshold_m;
    params["a"] = st->slack_a;
    params["n"] = st->n;
  }
  j["params"] = std::move(params);
  return j;
}

Aggregator aggregator_from_json(const json& j) {
  AggregatorKind kind = aggregator_kind_from_string(j.at("kind").get<std::string>());
  int k = j.at("k").get<int>();
  const json& params = j.at("params");
  Aggregator out = averaging();
  switch (kind) {
    case AggregatorKind::averaging:
      break;
    case AggregatorKind::bordley_theta:
    case AggregatorKind::weak_informative:
      out = Aggregator::make_bordley(kind, params.at("theta").get<double>(),
                                     params.at("n").get<int>());
      break;
    case AggregatorKind::multi_theta:
      out = multi_bordley(params.at("theta").get<std::vector<double>>(),
                          params.at("n").get<int>());
      break;
    case AggregatorKind::strong_informative: {
      Aggregator::StrongThreshold st;
      st.rho_hat = params.at("rho_hat").get<double>();
      st.u = params.at("u").get<int>();
      st.threshold_m = params.at("M").get<double>();
      st.slack_a = params.at("a").get<double>();
      st.n = params.at("n").get<int>();
      out = Aggregator::make_strong(st);
      break;
    }
    case AggregatorKind::bayes_optimal:
    case AggregatorKind::empirical_erm:
    case AggregatorKind::empirical_bayes: {
      Aggregator::Lookup lookup;
      lookup.error_on_unseen = params.at("error_on_unseen").get<bool>();
      for (const auto& row : params.at("table")) {
        auto cells = row.at("profile").get<std::vector<std::string>>();
        int n = row.at("n").get<int>();
        std::vector<double> values;
        values.reserve(cells.size());
        for (const auto& cell : cells) values.push_back(std::stod(cell));
        ReportProfile profile(n, k, std::move(values));
        ProfileKey key = profile_key(profile);
        lookup.table[key] = row.at("output").get<std::vector<double>>();
        lookup.representatives.emplace(key, std::move(profile));
      }
      out = Aggregator::make_lookup(kind, k, std::move(lookup));
      break;
    }
  }
  if (j.contains("default_output") && !j.at("default_output").empty())
    out.set_default_output(j.at("default_output").get<std::vector<double>>());
  return out;
}

void save_aggregator(const Aggregator& f, const std::string& path) {
  write_text_file(path, aggregator_to_json(f).dump(2) + "\n");
}

Aggregator load_aggregator(const std::string& path) {
  return aggregator_from_json(json::parse(read_text_file(path)));
}

// ---- reports ---------------------------------------------------------------------

json loss_report_to_json(const LossReport& report) {
  json j;
  j["schema_version"] = "1";
  j["loss"] = report.loss;
  j["method"] = report.method == LossMethod::exact ? "exact" : "monte_carlo";
  if (report.optimal_loss) j["optimal_loss"] = *report.optimal_loss;
  if (report.gap) j["gap"] = *report.gap;
  if (report.gap_direct) j["gap_direct"] = *report.gap_direct;
  if (report.stderr_) j["stderr"] = *report.stderr_;
  return j;
}

json distinguish_report_to_json(const DistinguishReport& report,
                                const double* chain_bound) {
  json j;
  j["schema_version"] = "1";
  j["trials"] = report.trials;
  j["T"] = report.T;
  j["mistakes"] = report.mistakes;
  j["empirical_error"] = report.empirical_error;
  j["stderr"] = report.stderr_;
  j["hellinger_sq"] = report.hellinger_sq;
  j["floor_sqrtT"] = report.floor_sqrt_t;
  j["floor_exp"] = report.floor_exp;
  if (chain_bound) j["hellinger_sq_chain_bound"] = *chain_bound;
  return j;
}

std::string distinguish_rows_to_csv(const DistinguishReport& report) {
  std::string out = "trial,truth,guess,T\n";
  for (const auto& row : report.rows) {
    out += std::to_string(row.trial);
    out += ',';
    out += std::to_string(row.truth);
    out += ',';
    out += std::to_string(row.guess);
    out += ',';
    out += std::to_string(row.T);
    out += '\n';
  }
  return out;
}

}  // namespace aggrlab
