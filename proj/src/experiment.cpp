// Copyright 2026 The migk Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "migk/cli.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "migk/bag_csv.hpp"
#include "migk/binary_io.hpp"
#include "migk/evaluation.hpp"
#include "migk/gram_io.hpp"
#include "migk/kernels.hpp"
#include "migk/learners.hpp"
#include "migk/model_io.hpp"
#include "migk/parallel.hpp"

namespace migk {

namespace {

namespace fs = std::filesystem;

// Flag values shared by the subcommands.
struct Settings {
  std::string config;
  std::string data;
  std::string train;
  std::string schema;
  std::string task = "classify";
  std::string kernel = "migraph";
  std::string kernel_a = "migraph";
  std::string kernel_b = "mikernel";
  std::string out;
  std::string csv;
  std::string model;
  std::string layout = "uci";
  std::vector<std::string> inputs;
  unsigned threads = 0;

  std::string gamma_scales;
  std::string edge_gamma_scales;
  std::string epsilon_factors;
  std::string c_values;
  std::string lambdas;
  std::size_t inner_folds = 3;

  std::string affinity_mode = "rbf-induced";
  std::optional<double> affinity_gamma;
  double edge_weight = 1.0;
  bool no_normalize = false;
  std::optional<double> gamma;
  std::optional<double> gamma_edge;
  double epsilon_factor = 1.0;

  std::size_t folds = 10;
  std::size_t repeats = 10;
  std::uint64_t seed = 1;
  bool no_stratify = false;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ValidationError(std::string(what) + ": '" + item +
                            "' is not a number");
    }
  }
  if (values.empty()) throw ValidationError(std::string(what) + ": empty list");
  return values;
}

// key=value lines become "--key=value" tokens placed before the user's own
// flags, so the command line wins under the take-last policy.
std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path + "'");
  std::vector<std::string> tokens;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "config") {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": nested config files are not supported");
    }
    tokens.push_back("--" + key + "=" + value);
  }
  return tokens;
}

std::optional<std::string> find_config(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

void add_data_options(CLI::App* cmd, Settings& s, bool with_task = true) {
  cmd->add_option("--data", s.data, "Bag CSV file")->required();
  cmd->add_option("--schema", s.schema,
                  "Attribute kinds file (categorical/continuous per column)");
  if (with_task) {
    cmd->add_option("--task", s.task, "classify | multiclass | regress")
        ->check(CLI::IsMember({"classify", "multiclass", "regress"}));
  }
}

void add_kernel_options(CLI::App* cmd, Settings& s) {
  cmd->add_option("--affinity-mode", s.affinity_mode,
                  "rbf-induced | squared-euclidean")
      ->check(CLI::IsMember({"rbf-induced", "squared-euclidean"}));
  cmd->add_option("--affinity-gamma", s.affinity_gamma,
                  "Fixed width for affinity graphs (default: kernel width)");
  cmd->add_option("--edge-weight", s.edge_weight,
                  "Multiplier on the edge term of the graph kernel");
  cmd->add_flag("--no-normalize", s.no_normalize,
                "Use unnormalized bag kernels");
}

void add_grid_options(CLI::App* cmd, Settings& s) {
  cmd->add_option("--gamma-scales", s.gamma_scales,
                  "Comma list of multiples of the base kernel width");
  cmd->add_option("--edge-gamma-scales", s.edge_gamma_scales,
                  "Comma list of multiples of the base edge width");
  cmd->add_option("--epsilon-factors", s.epsilon_factors,
                  "Comma list of epsilon-graph threshold factors");
  cmd->add_option("--C", s.c_values, "Comma list of SVM C values");
  cmd->add_option("--lambdas", s.lambdas, "Comma list of ridge lambdas");
  cmd->add_option("--inner-folds", s.inner_folds,
                  "Folds of the inner parameter search")
      ->check(CLI::PositiveNumber);
}

void add_plan_options(CLI::App* cmd, Settings& s) {
  cmd->add_option("--folds", s.folds, "Folds per repetition")
      ->check(CLI::Range(2, 1000000));
  cmd->add_option("--repeats", s.repeats, "Repetitions")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", s.seed, "Partition seed");
  cmd->add_flag("--no-stratify", s.no_stratify, "Plain (unstratified) folds");
}

void add_common(CLI::App* cmd, Settings& s) {
  cmd->add_option("--config", s.config, "key=value defaults file");
  cmd->add_option("--threads", s.threads,
                  "Worker threads (default: MIGK_THREADS or all cores)");
}

Task task_of(const Settings& s) { return parse_task(s.task); }

Dataset load(const std::string& path, Task task, const Settings& s) {
  if (!fs::exists(path)) throw ValidationError("no such file '" + path + "'");
  std::optional<AttributeSchema> schema;
  if (!s.schema.empty()) schema = load_schema(s.schema);
  return load_bag_csv(path, task, schema);
}

KernelConfig base_config(const Settings& s) {
  KernelConfig c;
  c.affinity_gamma = s.affinity_gamma;
  c.affinity_mode = s.affinity_mode == "squared-euclidean"
                        ? AffinityDistance::kSquaredEuclidean
                        : AffinityDistance::kRbfInduced;
  c.edge_weight = s.edge_weight;
  c.normalize = !s.no_normalize;
  c.epsilon_factor = s.epsilon_factor;
  return c;
}

ParamGrid grid_of(const Settings& s) {
  ParamGrid g = ParamGrid::Default();
  if (!s.gamma_scales.empty()) {
    g.gamma_scales = parse_list(s.gamma_scales, "--gamma-scales");
  }
  if (!s.edge_gamma_scales.empty()) {
    g.edge_gamma_scales = parse_list(s.edge_gamma_scales, "--edge-gamma-scales");
  }
  if (!s.epsilon_factors.empty()) {
    g.epsilon_factors = parse_list(s.epsilon_factors, "--epsilon-factors");
  }
  if (!s.c_values.empty()) g.C_values = parse_list(s.c_values, "--C");
  if (!s.lambdas.empty()) g.lambdas = parse_list(s.lambdas, "--lambdas");
  g.inner_folds = s.inner_folds;
  g.check();
  return g;
}

CvOptions options_of(const Settings& s) {
  CvOptions o;
  o.base = base_config(s);
  o.threads = resolve_threads(s.threads);
  return o;
}

CvPlan plan_of(const Settings& s) {
  CvPlan p;
  p.folds = s.folds;
  p.repetitions = s.repeats;
  p.seed = s.seed;
  p.stratified = !s.no_stratify;
  return p;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

// "run.json" -> "run"; used to name the CSV and timing sidecars.
std::string output_stem(const std::string& out) {
  const fs::path p(out);
  return p.extension() == ".json" ? (p.parent_path() / p.stem()).string() : out;
}

std::string summary_line(const RunResult& r) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(r.metric_name == "accuracy" ? 2 : 6)
    << kernel_display_name(r.kernel) << ' ' << r.metric_name << ": mean "
    << r.mean << " sd " << r.stddev << " 95% CI [" << r.ci_low << ", "
    << r.ci_high << "] over " << r.folds.size() << " folds; digest "
    << std::hex << std::setw(16) << std::setfill('0') << r.digest();
  return o.str();
}

void emit_run(const RunResult& r, const Settings& s, std::ostream& out) {
  if (s.out.empty()) {
    out << run_result_json(r);
    return;
  }
  const std::string stem = output_stem(s.out);
  write_text(s.out, run_result_json(r));
  write_text(stem + ".csv", run_result_csv(r));
  write_text(stem + ".timing.json", run_timing_json(r));
  out << summary_line(r) << '\n';
  for (const auto& w : r.warnings) out << "warning: " << w << '\n';
}

Eigen::MatrixXd instance_rows(const std::vector<Bag>& bags,
                              const InstanceMetric& metric) {
  std::vector<std::vector<double>> rows;
  for (const Bag& b : bags) {
    for (const Instance& x : b.instances) rows.push_back(metric.embed(x));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(metric.embedded_dimension()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

double width_for(const Eigen::MatrixXd& rows) {
  const double msd = mean_pairwise_squared_distance(rows);
  return msd > 0 ? 1.0 / msd : 1.0;
}

int run_gram(const Settings& s, std::ostream& out) {
  const KernelKind kind = parse_kernel(s.kernel);
  const Dataset raw = load(s.data, task_of(s), s);
  const Dataset ds = normalize_continuous(raw);
  const InstanceMetric metric = fit_metric(ds);
  KernelConfig config = base_config(s);
  config.gamma_node = s.gamma ? *s.gamma : width_for(instance_rows(ds.bags, metric));
  if (s.gamma_edge) {
    config.gamma_edge = *s.gamma_edge;
  } else if (kind == KernelKind::kMIGraph) {
    std::vector<EdgeFeature> all;
    for (const Bag& b : ds.bags) {
      const auto f = edge_features(build_epsilon_graph(b, config.epsilon_factor, metric));
      all.insert(all.end(), f.begin(), f.end());
    }
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(all.size()), 4);
    for (std::size_t i = 0; i < all.size(); ++i) {
      for (int c = 0; c < 4; ++c) rows(static_cast<Eigen::Index>(i), c) = all[i][c];
    }
    config.gamma_edge = width_for(rows);
  }
  config.check();
  const BagKernel kernel(kind, config, metric);
  const GramMatrix g = gram(ds.bags, kernel, resolve_threads(s.threads));
  write_gram_file(g, s.out);
  if (!s.csv.empty()) {
    std::ofstream f(s.csv);
    if (!f) throw std::runtime_error("cannot open '" + s.csv + "' for writing");
    write_gram_csv(g, f);
  }
  const PsdReport psd = check_psd(g.values);
  out << kernel_display_name(kind) << " Gram " << g.rows() << 'x' << g.cols()
      << " written to " << s.out << "; gamma_node=" << config.gamma_node;
  if (kind == KernelKind::kMIGraph) out << " gamma_edge=" << config.gamma_edge;
  out << "; min eigenvalue " << psd.min_eigenvalue << '\n';
  return kExitOk;
}

int run_train(const Settings& s, std::ostream& out) {
  const Task task = task_of(s);
  const Dataset ds = load(s.data, task, s);
  const TrainedModel m = train_model(ds, parse_kernel(s.kernel), task,
                                     grid_of(s), options_of(s), s.seed);
  write_model_file(m.bundle, s.model);
  out << "model written to " << s.model << "; gamma=" << m.params.gamma;
  if (parse_kernel(s.kernel) == KernelKind::kMIGraph) {
    out << " gamma_edge=" << m.params.gamma_edge;
  }
  if (task == Task::kRegress) {
    out << " lambda=" << m.params.lambda;
  } else {
    out << " C=" << m.params.C;
  }
  out << " inner_score=" << m.params.inner_score << "; digest " << std::hex
      << std::setw(16) << std::setfill('0') << model_digest(m.bundle) << '\n';
  return kExitOk;
}

int run_predict(const Settings& s, std::ostream& out) {
  const ModelBundle bundle = read_model_file(s.model);
  const Task task = std::visit(
      [](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, SvmModel>) return Task::kClassify;
        if constexpr (std::is_same_v<M, OvoModel>) return Task::kMulticlass;
        return Task::kRegress;
      },
      bundle.model);
  const Dataset train = load(s.train, task, s);
  std::optional<AttributeSchema> schema;
  if (train.schema.has_categorical()) schema = train.schema;
  if (!fs::exists(s.data)) throw ValidationError("no such file '" + s.data + "'");
  const Dataset test = load_bag_csv(s.data, task, schema);
  const std::vector<double> pred =
      predict_model(bundle, train, test, resolve_threads(s.threads));

  std::ostringstream csv;
  csv << "bag_id,prediction\n";
  double metric = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    csv << test.bags[i].id << ',' << std::setprecision(17) << pred[i] << '\n';
    const double truth = task == Task::kRegress
                             ? test.bags[i].label.value()
                             : test.bags[i].label.class_index();
    metric += task == Task::kRegress ? (pred[i] - truth) * (pred[i] - truth)
                                     : (pred[i] == truth ? 100.0 : 0.0);
  }
  metric /= static_cast<double>(pred.size());
  if (s.out.empty()) {
    out << csv.str();
  } else {
    write_text(s.out, csv.str());
    out << pred.size() << " predictions written to " << s.out << "; "
        << (task == Task::kRegress ? "squared_loss " : "accuracy ") << metric
        << '\n';
  }
  return kExitOk;
}

int run_cv(const Settings& s, std::ostream& out) {
  const Task task = task_of(s);
  const Dataset ds = load(s.data, task, s);
  const RunResult r = cross_validate(ds, parse_kernel(s.kernel), task,
                                     plan_of(s), grid_of(s), options_of(s));
  emit_run(r, s, out);
  return kExitOk;
}

int run_loo(const Settings& s, std::ostream& out) {
  const Dataset ds = load(s.data, Task::kRegress, s);
  const RunResult r = leave_one_out(ds, parse_kernel(s.kernel), plan_of(s),
                                    grid_of(s), options_of(s));
  emit_run(r, s, out);
  return kExitOk;
}

int run_compare(const Settings& s, std::ostream& out) {
  const Task task = task_of(s);
  const Dataset ds = load(s.data, task, s);
  const CompareResult c =
      compare(ds, parse_kernel(s.kernel_a), parse_kernel(s.kernel_b), task,
              plan_of(s), grid_of(s), options_of(s));
  nlohmann::ordered_json j;
  j["a"] = nlohmann::ordered_json::parse(run_result_json(c.a));
  j["b"] = nlohmann::ordered_json::parse(run_result_json(c.b));
  j["mean_difference"] = c.mean_difference;
  j["t"] = std::isfinite(c.test.t) ? nlohmann::ordered_json(c.test.t)
                                   : nlohmann::ordered_json(c.test.t > 0 ? "inf" : "-inf");
  j["p_value"] = c.test.p_value;
  j["significant"] = c.test.significant;
  j["direction"] = c.test.direction;
  if (!s.out.empty()) write_text(s.out, j.dump(2) + "\n");

  out << summary_line(c.a) << '\n' << summary_line(c.b) << '\n';
  out << "mean difference (" << kernel_display_name(c.a.kernel) << " - "
      << kernel_display_name(c.b.kernel) << "): " << c.mean_difference << '\n'
      << "paired t = " << c.test.t << ", p = " << c.test.p_value
      << ", significant at 95%: " << (c.test.significant ? "yes" : "no")
      << '\n';
  return kExitOk;
}

int run_convert(const Settings& s, std::ostream& out) {
  for (const auto& in : s.inputs) {
    if (!fs::exists(in)) throw ValidationError("no such file '" + in + "'");
  }
  std::ostringstream csv;
  const ConversionReport r = convert_musk(
      s.inputs, s.layout == "label-bag" ? MuskLayout::kLabelBag : MuskLayout::kUci,
      csv);
  write_text(s.out, csv.str());
  out << "bags " << r.bags << " (" << r.positive_bags << " positive, "
      << r.negative_bags << " negative), instances " << r.instances
      << ", features " << r.features << '\n';
  return kExitOk;
}

int run_validate(const Settings& s, std::ostream& out) {
  const Dataset ds = load(s.data, task_of(s), s);
  out << "ok: " << ds.size() << " bags, " << ds.instance_count()
      << " instances, " << ds.schema.size() << " attributes\n";
  return kExitOk;
}

}  // namespace

int cli_run(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  Settings s;
  CLI::App app{"Multi-instance graph kernels", "migk"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto* gram_cmd = app.add_subcommand("gram", "Write a Gram matrix");
  add_common(gram_cmd, s);
  add_data_options(gram_cmd, s);
  add_kernel_options(gram_cmd, s);
  gram_cmd->add_option("--kernel", s.kernel, "migraph | migraph-explicit | mikernel");
  gram_cmd->add_option("--gamma", s.gamma, "Node kernel width (default: 1 / mean squared distance)");
  gram_cmd->add_option("--gamma-edge", s.gamma_edge, "Edge kernel width");
  gram_cmd->add_option("--epsilon-factor", s.epsilon_factor, "Epsilon-graph threshold factor");
  gram_cmd->add_option("--out", s.out, "Binary Gram file")->required();
  gram_cmd->add_option("--csv", s.csv, "Also write the matrix as CSV");

  auto* train_cmd = app.add_subcommand("train", "Train a model on all bags");
  add_common(train_cmd, s);
  add_data_options(train_cmd, s);
  add_kernel_options(train_cmd, s);
  add_grid_options(train_cmd, s);
  train_cmd->add_option("--kernel", s.kernel, "migraph | migraph-explicit | mikernel");
  train_cmd->add_option("--seed", s.seed, "Inner CV seed");
  train_cmd->add_option("--model", s.model, "Model file to write")->required();

  auto* predict_cmd = app.add_subcommand("predict", "Predict with a trained model");
  add_common(predict_cmd, s);
  predict_cmd->add_option("--model", s.model, "Model file")->required();
  predict_cmd->add_option("--train", s.train, "Training bag CSV used for the model")->required();
  predict_cmd->add_option("--data", s.data, "Bag CSV to predict")->required();
  predict_cmd->add_option("--schema", s.schema, "Attribute kinds file");
  predict_cmd->add_option("--out", s.out, "Prediction CSV (default: stdout)");

  auto* cv_cmd = app.add_subcommand("cv", "Repeated k-fold cross validation");
  add_common(cv_cmd, s);
  add_data_options(cv_cmd, s);
  add_kernel_options(cv_cmd, s);
  add_grid_options(cv_cmd, s);
  add_plan_options(cv_cmd, s);
  cv_cmd->add_option("--kernel", s.kernel, "migraph | migraph-explicit | mikernel");
  cv_cmd->add_option("--out", s.out, "RunResult JSON (CSV and timing sidecars next to it)");

  auto* loo_cmd = app.add_subcommand("loo", "Leave-one-out regression");
  add_common(loo_cmd, s);
  add_data_options(loo_cmd, s, false);
  add_kernel_options(loo_cmd, s);
  add_grid_options(loo_cmd, s);
  add_plan_options(loo_cmd, s);
  loo_cmd->add_option("--kernel", s.kernel, "migraph | migraph-explicit | mikernel");
  loo_cmd->add_option("--out", s.out, "RunResult JSON (CSV and timing sidecars next to it)");

  auto* compare_cmd = app.add_subcommand("compare", "Compare two kernels on shared folds");
  add_common(compare_cmd, s);
  add_data_options(compare_cmd, s);
  add_kernel_options(compare_cmd, s);
  add_grid_options(compare_cmd, s);
  add_plan_options(compare_cmd, s);
  compare_cmd->add_option("--a", s.kernel_a, "First kernel");
  compare_cmd->add_option("--b", s.kernel_b, "Second kernel");
  compare_cmd->add_option("--out", s.out, "Comparison JSON");

  auto* convert_cmd = app.add_subcommand("convert", "Convert Musk files to bag CSV");
  add_common(convert_cmd, s);
  convert_cmd->add_option("inputs", s.inputs, "Input files")->required();
  convert_cmd->add_option("--layout", s.layout, "uci | label-bag")
      ->check(CLI::IsMember({"uci", "label-bag"}));
  convert_cmd->add_option("--out", s.out, "Bag CSV to write")->required();

  auto* validate_cmd = app.add_subcommand("validate", "Check a bag CSV");
  add_common(validate_cmd, s);
  validate_cmd->add_option("data", s.data, "Bag CSV file")->required();
  validate_cmd->add_option("--schema", s.schema, "Attribute kinds file");
  validate_cmd->add_option("--task", s.task, "classify | multiclass | regress")
      ->check(CLI::IsMember({"classify", "multiclass", "regress"}));

  try {
    std::vector<std::string> tokens = args;
    if (const auto path = find_config(args); path && !args.empty()) {
      const auto extra = config_tokens(*path);
      tokens.insert(tokens.begin() + 1, extra.begin(), extra.end());
    }
    std::vector<std::string> reversed(tokens.rbegin(), tokens.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  try {
    if (*gram_cmd) return run_gram(s, out);
    if (*train_cmd) return run_train(s, out);
    if (*predict_cmd) return run_predict(s, out);
    if (*cv_cmd) return run_cv(s, out);
    if (*loo_cmd) return run_loo(s, out);
    if (*compare_cmd) return run_compare(s, out);
    if (*convert_cmd) return run_convert(s, out);
    return run_validate(s, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "failed: " << e.what() << '\n';
    return kExitFailed;
  }
}

}  // namespace migk
