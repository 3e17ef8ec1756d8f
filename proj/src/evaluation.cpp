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

#include "migk/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "migk/digest.hpp"
#include "migk/kernel_sweep.hpp"
#include "migk/model_io.hpp"
#include "migk/parallel.hpp"

namespace migk {

namespace {

using Indices = std::vector<std::size_t>;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6d69676b;  // "migk"
  for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

// Fisher-Yates with raw engine output so results do not depend on the
// standard library's distribution implementations.
void shuffle(Indices& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = rng() % i;
    std::swap(items[i - 1], items[j]);
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<int> strata_of(const Dataset& dataset, Task task) {
  std::vector<int> strata(dataset.size(), 0);
  if (task == Task::kRegress) return strata;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    strata[i] = dataset.bags[i].label.class_index();
  }
  return strata;
}

void check_labels(const Dataset& dataset, Task task) {
  for (const Bag& bag : dataset.bags) {
    const LabelKind k = bag.label.kind();
    const bool ok = (task == Task::kClassify && k == LabelKind::kBinary) ||
                    (task == Task::kMulticlass && k != LabelKind::kReal) ||
                    (task == Task::kRegress && k == LabelKind::kReal);
    if (!ok) {
      throw ValidationError("bag '" + bag.id + "' label does not fit task " +
                            task_token(task));
    }
  }
}

// One candidate kernel matrix over [train..., test...] bags.
struct Candidate {
  SelectedParams params;
  Eigen::MatrixXd gram;
  double jitter = 0;
};

// Per-fold kernel matrices for every grid point; everything fitted on the
// training bags only.
struct PreparedFold {
  std::size_t n_train = 0;
  std::vector<Bag> bags;
  std::string schema_text;
  std::vector<Candidate> candidates;
};

Eigen::MatrixXd embed_rows(const std::vector<Bag>& bags, std::size_t count,
                           const InstanceMetric& metric) {
  std::size_t total = 0;
  for (std::size_t i = 0; i < count; ++i) total += bags[i].size();
  const auto dim = static_cast<Eigen::Index>(metric.embedded_dimension());
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(total), dim);
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < count; ++i) {
    for (const Instance& x : bags[i].instances) {
      const auto e = metric.embed(x);
      rows.row(r++) = Eigen::Map<const Eigen::RowVectorXd>(e.data(), dim);
    }
  }
  return rows;
}

double base_width(double msd) { return msd > 0 ? 1.0 / msd : 1.0; }

Eigen::MatrixXd finish(const Eigen::MatrixXd& raw, bool normalize) {
  if (!normalize) return raw;
  const Eigen::VectorXd self = raw.diagonal();
  return normalize_gram(raw, self, self);
}

PreparedFold prepare_fold(const Dataset& dataset, const Indices& train,
                          const Indices& test, KernelKind kernel,
                          const ParamGrid& grid, const KernelConfig& base) {
  PreparedFold pf;
  pf.n_train = train.size();
  const Dataset train_n = normalize_continuous(dataset.subset(train));
  const AttributeSchema& schema = train_n.schema;
  pf.bags = train_n.bags;
  for (std::size_t i : test) {
    pf.bags.push_back(apply_normalization(schema, dataset.bags.at(i)));
  }
  std::ostringstream st;
  for (std::size_t l = 0; l < schema.size(); ++l) {
    st << (schema.is_categorical(l) ? 'c' : 'n') << ':'
       << fmt(schema.range_min[l]) << ':' << fmt(schema.range_max[l]) << ';';
  }
  pf.schema_text = st.str();

  const InstanceMetric metric = fit_metric(train_n);
  const KernelSweep sweep(pf.bags, metric, 1);
  const double gamma_base = base_width(
      mean_pairwise_squared_distance(embed_rows(pf.bags, pf.n_train, metric)));
  std::vector<double> gammas;
  for (double s : grid.gamma_scales) gammas.push_back(s * gamma_base);

  auto add = [&](SelectedParams p, Eigen::MatrixXd k) {
    Candidate c;
    c.params = p;
    c.gram = std::move(k);
    const auto nt = static_cast<Eigen::Index>(pf.n_train);
    Eigen::MatrixXd block = c.gram.topLeftCorner(nt, nt);
    c.jitter = repair_psd(block);
    if (c.jitter > 0) c.gram.topLeftCorner(nt, nt) = block;
    pf.candidates.push_back(std::move(c));
  };

  if (kernel == KernelKind::kMIGraph) {
    const auto node = sweep.set_sums(gammas);
    for (double eps : grid.epsilon_factors) {
      const auto features = sweep.edge_features_for(eps);
      Eigen::MatrixXd train_edges(0, 4);
      {
        std::size_t m = 0;
        for (std::size_t i = 0; i < pf.n_train; ++i) m += features[i].size();
        train_edges.resize(static_cast<Eigen::Index>(m), 4);
        Eigen::Index r = 0;
        for (std::size_t i = 0; i < pf.n_train; ++i) {
          for (const auto& f : features[i]) {
            train_edges.row(r++) << f[0], f[1], f[2], f[3];
          }
        }
      }
      const double edge_base =
          base_width(mean_pairwise_squared_distance(train_edges));
      std::vector<double> edge_gammas;
      for (double s : grid.edge_gamma_scales) edge_gammas.push_back(s * edge_base);
      const auto edges = sweep.edge_sums(edge_gammas, features);
      for (std::size_t g = 0; g < gammas.size(); ++g) {
        for (std::size_t e = 0; e < edge_gammas.size(); ++e) {
          SelectedParams p;
          p.gamma_scale = grid.gamma_scales[g];
          p.gamma = gammas[g];
          p.edge_gamma_scale = grid.edge_gamma_scales[e];
          p.gamma_edge = edge_gammas[e];
          p.epsilon_factor = eps;
          add(p, finish(node[g] + base.edge_weight * edges[e], base.normalize));
        }
      }
    }
  } else {
    const auto sums =
        kernel == KernelKind::kMiGraph
            ? sweep.clique_sums(gammas, base.affinity_mode, base.affinity_gamma)
            : sweep.set_sums(gammas);
    for (std::size_t g = 0; g < gammas.size(); ++g) {
      SelectedParams p;
      p.gamma_scale = grid.gamma_scales[g];
      p.gamma = gammas[g];
      add(p, finish(sums[g], base.normalize));
    }
  }
  return pf;
}

struct Targets {
  std::vector<int> classes;   // classification
  std::vector<double> reals;  // regression
};

Targets targets_of(const std::vector<Bag>& bags, Task task) {
  Targets t;
  for (const Bag& b : bags) {
    if (task == Task::kRegress) {
      t.reals.push_back(b.label.value());
    } else {
      t.classes.push_back(b.label.class_index());
    }
  }
  return t;
}

bool unit_targets(const std::vector<double>& y) {
  return std::all_of(y.begin(), y.end(),
                     [](double v) { return v >= 0.0 && v <= 1.0; });
}

// Fits on rows/cols `fit` of `gram` and scores rows `eval`. Returns accuracy
// in percent or mean squared loss. Also hands back the trained model.
double fit_and_score(const Eigen::MatrixXd& gram, const Indices& fit,
                     const Indices& eval, const Targets& targets, Task task,
                     double c_or_lambda, const SvmOptions& svm,
                     std::optional<LearnedModel>* trained,
                     std::vector<std::string> ids = {}) {
  const Eigen::MatrixXd k = gram(fit, fit);
  const Eigen::MatrixXd cross = gram(eval, fit);
  std::vector<double> row(fit.size());
  auto load_row = [&](Eigen::Index r) {
    for (std::size_t c = 0; c < fit.size(); ++c) {
      row[c] = cross(r, static_cast<Eigen::Index>(c));
    }
  };

  if (task == Task::kRegress) {
    std::vector<double> y;
    for (std::size_t i : fit) y.push_back(targets.reals[i]);
    KrrModel model = krr_train(k, y, c_or_lambda, unit_targets(y), std::move(ids));
    double loss = 0;
    for (std::size_t r = 0; r < eval.size(); ++r) {
      load_row(static_cast<Eigen::Index>(r));
      const double e = krr_predict(model, row) - targets.reals[eval[r]];
      loss += e * e;
    }
    if (trained) *trained = std::move(model);
    return loss / static_cast<double>(eval.size());
  }

  std::vector<int> y;
  for (std::size_t i : fit) y.push_back(targets.classes[i]);
  const std::set<int> present(y.begin(), y.end());
  std::size_t correct = 0;
  if (present.size() < 2) {
    // Degenerate inner split: predict the only class seen.
    for (std::size_t i : eval) correct += targets.classes[i] == y.front();
  } else if (task == Task::kClassify) {
    SvmModel model = svm_train(k, y, c_or_lambda, svm, std::move(ids));
    for (std::size_t r = 0; r < eval.size(); ++r) {
      load_row(static_cast<Eigen::Index>(r));
      correct += svm_predict(model, row).label == targets.classes[eval[r]];
    }
    if (trained) *trained = std::move(model);
  } else {
    OvoModel model = ovo_train(k, y, c_or_lambda, svm, std::move(ids));
    for (std::size_t r = 0; r < eval.size(); ++r) {
      load_row(static_cast<Eigen::Index>(r));
      correct += ovo_predict(model, row) == targets.classes[eval[r]];
    }
    if (trained) *trained = std::move(model);
  }
  return 100.0 * static_cast<double>(correct) /
         static_cast<double>(eval.size());
}

// Inner cross validation over every (candidate, C or lambda) pair on the
// training block. The first best grid point wins ties.
SelectedParams select_parameters(const PreparedFold& pf, const Targets& targets,
                                 Task task, const ParamGrid& grid,
                                 const SvmOptions& svm, std::uint64_t seed,
                                 std::size_t* best_candidate) {
  std::vector<int> strata(pf.n_train, 0);
  if (task != Task::kRegress) {
    for (std::size_t i = 0; i < pf.n_train; ++i) strata[i] = targets.classes[i];
  }
  const std::size_t k = std::min(grid.inner_folds, pf.n_train);
  const Partition inner =
      make_partition(strata, k, seed, task != Task::kRegress);
  std::vector<Indices> fits(inner.size());
  for (std::size_t f = 0; f < inner.size(); ++f) {
    for (std::size_t g = 0; g < inner.size(); ++g) {
      if (g != f) fits[f].insert(fits[f].end(), inner[g].begin(), inner[g].end());
    }
    std::sort(fits[f].begin(), fits[f].end());
  }

  const auto& values = task == Task::kRegress ? grid.lambdas : grid.C_values;
  const bool minimize = task == Task::kRegress;
  SvmOptions inner_svm = svm;
  inner_svm.verify_psd = false;  // the training block was checked/repaired

  SelectedParams best;
  double best_score = minimize ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < pf.candidates.size(); ++c) {
    for (double v : values) {
      double score = 0;
      for (std::size_t f = 0; f < inner.size(); ++f) {
        score += fit_and_score(pf.candidates[c].gram, fits[f], inner[f],
                               targets, task, v, inner_svm, nullptr);
      }
      score /= static_cast<double>(inner.size());
      if (minimize ? score < best_score : score > best_score) {
        best_score = score;
        best = pf.candidates[c].params;
        if (task == Task::kRegress) {
          best.lambda = v;
        } else {
          best.C = v;
        }
        best.inner_score = score;
        *best_candidate = c;
      }
    }
  }
  return best;
}

std::string model_config_text(KernelKind kernel, const KernelConfig& base,
                              const SelectedParams& p,
                              const std::string& schema_text) {
  KernelConfig cfg = base;
  cfg.gamma_node = p.gamma;
  cfg.gamma_edge = p.gamma_edge;
  cfg.epsilon_factor = p.epsilon_factor;
  std::ostringstream out;
  out << "kernel=" << kernel_token(kernel) << '\n'
      << cfg.to_text() << "C=" << fmt(p.C) << '\n'
      << "lambda=" << fmt(p.lambda) << '\n'
      << "schema=" << schema_text << '\n';
  return out.str();
}

nlohmann::ordered_json params_json(const SelectedParams& p, Task task,
                                   KernelKind kernel) {
  nlohmann::ordered_json j;
  j["gamma_scale"] = p.gamma_scale;
  j["gamma"] = p.gamma;
  if (kernel == KernelKind::kMIGraph) {
    j["edge_gamma_scale"] = p.edge_gamma_scale;
    j["gamma_edge"] = p.gamma_edge;
    j["epsilon_factor"] = p.epsilon_factor;
  }
  if (task == Task::kRegress) {
    j["lambda"] = p.lambda;
  } else {
    j["C"] = p.C;
  }
  j["inner_score"] = p.inner_score;
  return j;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

std::string task_token(Task task) {
  switch (task) {
    case Task::kClassify: return "classify";
    case Task::kMulticlass: return "multiclass";
    case Task::kRegress: return "regress";
  }
  return {};
}

Task parse_task(std::string_view token) {
  if (token == "classify") return Task::kClassify;
  if (token == "multiclass") return Task::kMulticlass;
  if (token == "regress") return Task::kRegress;
  throw ValidationError("unknown task '" + std::string(token) +
                        "' (expected classify, multiclass or regress)");
}

ParamGrid ParamGrid::Default() {
  ParamGrid grid;
  for (int k = -4; k <= 4; ++k) {
    grid.gamma_scales.push_back(std::ldexp(1.0, k));
    grid.edge_gamma_scales.push_back(std::ldexp(1.0, k));
  }
  return grid;
}

void ParamGrid::check() const {
  auto positive = [](const std::vector<double>& v, const char* what,
                     bool allow_zero) {
    if (v.empty()) throw ValidationError(std::string(what) + " grid is empty");
    for (double x : v) {
      if (!std::isfinite(x) || x < 0 || (!allow_zero && x == 0)) {
        throw ValidationError(std::string(what) + " grid has invalid value");
      }
    }
  };
  positive(gamma_scales, "gamma", false);
  positive(edge_gamma_scales, "gamma_edge", false);
  positive(epsilon_factors, "epsilon", false);
  positive(C_values, "C", false);
  positive(lambdas, "lambda", true);
  if (inner_folds < 2) throw ValidationError("inner folds must be >= 2");
}

Partition make_partition(const std::vector<int>& strata, std::size_t k,
                         std::uint64_t seed, bool stratified,
                         std::vector<std::string>* warnings) {
  if (k < 2) throw ValidationError("fold count must be >= 2");
  if (strata.size() < k) {
    throw ValidationError("cannot split " + std::to_string(strata.size()) +
                          " bags into " + std::to_string(k) + " folds");
  }
  std::map<int, Indices> groups;
  for (std::size_t i = 0; i < strata.size(); ++i) {
    groups[stratified ? strata[i] : 0].push_back(i);
  }
  std::mt19937_64 rng(seed);
  Partition folds(k);
  std::size_t position = 0;
  for (auto& [stratum, members] : groups) {
    if (stratified && warnings && members.size() < k) {
      warnings->push_back("class " + std::to_string(stratum) + " has " +
                          std::to_string(members.size()) +
                          " bags, fewer than " + std::to_string(k) +
                          " folds; stratification is approximate");
    }
    shuffle(members, rng);
    for (std::size_t i : members) folds[position++ % k].push_back(i);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

std::vector<Partition> make_folds(const Dataset& dataset, const CvPlan& plan,
                                  Task task, std::vector<std::string>* warnings) {
  const auto strata = strata_of(dataset, task);
  std::vector<Partition> out;
  for (std::size_t r = 0; r < plan.repetitions; ++r) {
    out.push_back(make_partition(strata, plan.folds,
                                 derive_seed({plan.seed, r}),
                                 plan.stratified && task != Task::kRegress,
                                 r == 0 ? warnings : nullptr));
  }
  return out;
}

double mean_pairwise_squared_distance(const Eigen::MatrixXd& rows) {
  const auto n = static_cast<double>(rows.rows());
  if (rows.rows() < 2) return 0;
  // sum_{i != j} |x_i - x_j|^2 = 2 n sum |x_i|^2 - 2 |sum x_i|^2
  const double total = 2 * n * rows.rowwise().squaredNorm().sum() -
                       2 * rows.colwise().sum().squaredNorm();
  return std::max(0.0, total / (n * (n - 1)));
}

FoldRecord run_outer_fold(const Dataset& dataset, const Indices& train,
                          const Indices& test, KernelKind kernel, Task task,
                          const ParamGrid& grid, const CvOptions& options,
                          std::uint64_t inner_seed) {
  const auto start = std::chrono::steady_clock::now();
  const PreparedFold pf =
      prepare_fold(dataset, train, test, kernel, grid, options.base);
  const Targets targets = targets_of(pf.bags, task);

  std::size_t chosen = 0;
  const SelectedParams params = select_parameters(
      pf, targets, task, grid, options.svm, inner_seed, &chosen);

  Indices fit(pf.n_train), eval(test.size());
  for (std::size_t i = 0; i < fit.size(); ++i) fit[i] = i;
  for (std::size_t i = 0; i < eval.size(); ++i) eval[i] = pf.n_train + i;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < pf.n_train; ++i) ids.push_back(pf.bags[i].id);

  std::optional<LearnedModel> model;
  SvmOptions svm = options.svm;
  svm.verify_psd = false;
  FoldRecord record;
  record.metric = fit_and_score(
      pf.candidates[chosen].gram, fit, eval, targets, task,
      task == Task::kRegress ? params.lambda : params.C, svm, &model,
      std::move(ids));
  record.n_train = train.size();
  record.n_test = test.size();
  record.params = params;
  record.psd_jitter = pf.candidates[chosen].jitter;
  if (model) {
    record.model_digest = model_digest(ModelBundle{
        *model, model_config_text(kernel, options.base, params, pf.schema_text)});
  }
  record.seconds = seconds_since(start);
  return record;
}

RunResult cross_validate(const Dataset& dataset, KernelKind kernel, Task task,
                         const CvPlan& plan, const ParamGrid& grid,
                         const CvOptions& options) {
  grid.check();
  options.base.check();
  check_labels(dataset, task);
  RunResult result;
  result.kernel = kernel;
  result.task = task;
  result.base = options.base;
  result.plan = plan;
  result.grid = grid;
  result.metric_name = task == Task::kRegress ? "squared_loss" : "accuracy";
  const auto partitions = make_folds(dataset, plan, task, &result.warnings);

  const std::size_t jobs = plan.repetitions * plan.folds;
  result.folds.resize(jobs);
  std::vector<std::string> errors(jobs);
  parallel_for(jobs, resolve_threads(options.threads), [&](std::size_t job) {
    const std::size_t r = job / plan.folds;
    const std::size_t f = job % plan.folds;
    const Indices& test = partitions[r][f];
    Indices train;
    for (std::size_t g = 0; g < plan.folds; ++g) {
      if (g != f) {
        train.insert(train.end(), partitions[r][g].begin(),
                     partitions[r][g].end());
      }
    }
    std::sort(train.begin(), train.end());
    try {
      FoldRecord rec = run_outer_fold(dataset, train, test, kernel, task, grid,
                                      options, derive_seed({plan.seed, r, f, 1}));
      rec.repetition = r;
      rec.fold = f;
      result.folds[job] = rec;
    } catch (const std::exception& e) {
      errors[job] = "repetition " + std::to_string(r) + " fold " +
                    std::to_string(f) + ": " + e.what();
    }
  });
  std::string failed;
  for (const auto& e : errors) {
    if (!e.empty()) failed += e + "\n";
  }
  if (!failed.empty()) throw RunFailedError("cross validation failed:\n" + failed);
  result.aggregate();
  return result;
}

RunResult leave_one_out(const Dataset& dataset, KernelKind kernel,
                        const CvPlan& plan, const ParamGrid& grid,
                        const CvOptions& options) {
  grid.check();
  options.base.check();
  check_labels(dataset, Task::kRegress);
  const std::size_t n = dataset.size();
  if (n < 3) throw ValidationError("leave-one-out needs at least 3 bags");

  RunResult result;
  result.kernel = kernel;
  result.task = Task::kRegress;
  result.base = options.base;
  result.plan = plan;
  result.plan.repetitions = 1;
  result.grid = grid;
  result.metric_name = "squared_loss";

  const std::size_t k = std::min(std::max<std::size_t>(plan.folds, 2), n);
  const Partition blocks = make_partition(std::vector<int>(n, 0), k,
                                          derive_seed({plan.seed, 0}), false);
  std::vector<std::size_t> block_of(n);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (std::size_t i : blocks[b]) block_of[i] = b;
  }
  const unsigned threads = resolve_threads(options.threads);

  // Cached parameter search, one per block.
  std::vector<SelectedParams> chosen(blocks.size());
  std::vector<std::string> errors(n + blocks.size());
  parallel_for(blocks.size(), threads, [&](std::size_t b) {
    try {
      Indices train;
      for (std::size_t i = 0; i < n; ++i) {
        if (block_of[i] != b) train.push_back(i);
      }
      const PreparedFold pf =
          prepare_fold(dataset, train, {}, kernel, grid, options.base);
      std::size_t unused = 0;
      chosen[b] = select_parameters(pf, targets_of(pf.bags, Task::kRegress),
                                    Task::kRegress, grid, options.svm,
                                    derive_seed({plan.seed, 0, b, 1}), &unused);
    } catch (const std::exception& e) {
      errors[n + b] = "parameter search for block " + std::to_string(b) + ": " +
                      e.what();
    }
  });

  result.folds.resize(n);
  parallel_for(n, threads, [&](std::size_t held) {
    if (!errors[n + block_of[held]].empty()) return;
    const auto start = std::chrono::steady_clock::now();
    try {
      const SelectedParams& p = chosen[block_of[held]];
      ParamGrid single = grid;
      single.gamma_scales = {p.gamma_scale};
      single.edge_gamma_scales = {p.edge_gamma_scale};
      single.epsilon_factors = {p.epsilon_factor};
      Indices train;
      for (std::size_t i = 0; i < n; ++i) {
        if (i != held) train.push_back(i);
      }
      const PreparedFold pf =
          prepare_fold(dataset, train, {held}, kernel, single, options.base);
      const Targets targets = targets_of(pf.bags, Task::kRegress);
      Indices fit(pf.n_train);
      for (std::size_t i = 0; i < fit.size(); ++i) fit[i] = i;
      std::optional<LearnedModel> model;
      FoldRecord rec;
      rec.repetition = 0;
      rec.fold = held;
      rec.metric = fit_and_score(pf.candidates[0].gram, fit, {pf.n_train},
                                 targets, Task::kRegress, p.lambda, options.svm,
                                 &model);
      rec.n_train = train.size();
      rec.n_test = 1;
      rec.params = p;
      rec.params.gamma = pf.candidates[0].params.gamma;
      rec.params.gamma_edge = pf.candidates[0].params.gamma_edge;
      rec.psd_jitter = pf.candidates[0].jitter;
      rec.model_digest = model_digest(ModelBundle{
          *model, model_config_text(kernel, options.base, rec.params,
                                    pf.schema_text)});
      rec.seconds = seconds_since(start);
      result.folds[held] = rec;
    } catch (const std::exception& e) {
      errors[held] = "held-out bag " + dataset.bags[held].id + ": " + e.what();
    }
  });
  std::string failed;
  for (const auto& e : errors) {
    if (!e.empty()) failed += e + "\n";
  }
  if (!failed.empty()) throw RunFailedError("leave-one-out failed:\n" + failed);
  result.plan.folds = n;
  result.aggregate();
  return result;
}

CompareResult compare(const Dataset& dataset, KernelKind a, KernelKind b,
                      Task task, const CvPlan& plan, const ParamGrid& grid,
                      const CvOptions& options) {
  CompareResult out;
  out.a = cross_validate(dataset, a, task, plan, grid, options);
  out.b = cross_validate(dataset, b, task, plan, grid, options);
  const auto ma = out.a.metrics();
  const auto mb = out.b.metrics();
  out.test = paired_t_test(ma, mb, 0.05);
  out.mean_difference = out.a.mean - out.b.mean;
  return out;
}

std::vector<double> RunResult::metrics() const {
  std::vector<double> m;
  m.reserve(folds.size());
  for (const auto& f : folds) m.push_back(f.metric);
  return m;
}

void RunResult::aggregate() {
  std::sort(folds.begin(), folds.end(), [](const auto& x, const auto& y) {
    return std::pair(x.repetition, x.fold) < std::pair(y.repetition, y.fold);
  });
  const auto m = metrics();
  mean = migk::mean(m);
  stddev = sample_stddev(m);
  if (m.size() >= 2) {
    std::tie(ci_low, ci_high) = confidence_interval_95(m);
  } else {
    ci_low = ci_high = mean;
  }
}

namespace {

nlohmann::ordered_json run_body(const RunResult& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["method"] = kernel_display_name(r.kernel);
  j["kernel"] = kernel_token(r.kernel);
  j["task"] = task_token(r.task);
  j["kernel_config"] = {
      {"affinity_mode", r.base.affinity_mode == AffinityDistance::kRbfInduced
                            ? "rbf-induced"
                            : "squared-euclidean"},
      {"affinity_gamma", r.base.affinity_gamma
                             ? ordered_json(*r.base.affinity_gamma)
                             : ordered_json("coupled")},
      {"edge_weight", r.base.edge_weight},
      {"normalize", r.base.normalize}};
  j["plan"] = {{"folds", r.plan.folds},
               {"repetitions", r.plan.repetitions},
               {"seed", r.plan.seed},
               {"stratified", r.plan.stratified}};
  j["param_grid"] = {{"gamma_scales", r.grid.gamma_scales},
                     {"edge_gamma_scales", r.grid.edge_gamma_scales},
                     {"epsilon_factors", r.grid.epsilon_factors},
                     {"C", r.grid.C_values},
                     {"lambda", r.grid.lambdas},
                     {"inner_folds", r.grid.inner_folds}};
  ordered_json folds = ordered_json::array();
  for (const auto& f : r.folds) {
    ordered_json rec;
    rec["repetition"] = f.repetition;
    rec["fold"] = f.fold;
    rec["metric"] = f.metric;
    rec["n_train"] = f.n_train;
    rec["n_test"] = f.n_test;
    rec["params"] = params_json(f.params, r.task, r.kernel);
    rec["psd_jitter"] = f.psd_jitter;
    rec["model_digest"] = digest_hex(f.model_digest);
    folds.push_back(std::move(rec));
  }
  j["folds"] = std::move(folds);
  j["warnings"] = r.warnings;
  j["aggregate"] = {{"metric", r.metric_name},
                    {"mean", r.mean},
                    {"std", r.stddev},
                    {"ci95", {r.ci_low, r.ci_high}}};
  return j;
}

}  // namespace

std::string run_result_json(const RunResult& r) {
  auto j = run_body(r);
  j["digest"] = digest_hex(r.digest());
  return j.dump(2) + "\n";
}

std::uint64_t RunResult::digest() const { return fnv1a64(run_body(*this).dump()); }

std::string run_timing_json(const RunResult& r) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json folds = nlohmann::ordered_json::array();
  double total = 0;
  for (const auto& f : r.folds) {
    folds.push_back(
        {{"repetition", f.repetition}, {"fold", f.fold}, {"seconds", f.seconds}});
    total += f.seconds;
  }
  j["folds"] = std::move(folds);
  j["total_seconds"] = total;
  return j.dump(2) + "\n";
}

std::string run_result_csv(const RunResult& r) {
  std::ostringstream out;
  out << "method,task,metric,folds,repetitions,seed,mean,std,ci_low,ci_high,"
         "digest\n";
  out << kernel_display_name(r.kernel) << ',' << task_token(r.task) << ','
      << r.metric_name << ',' << r.plan.folds << ',' << r.plan.repetitions
      << ',' << r.plan.seed << ',' << fmt(r.mean) << ',' << fmt(r.stddev) << ','
      << fmt(r.ci_low) << ',' << fmt(r.ci_high) << ',' << digest_hex(r.digest())
      << '\n';
  return out.str();
}

}  // namespace migk

namespace migk {

TrainedModel train_model(const Dataset& dataset, KernelKind kernel, Task task,
                         const ParamGrid& grid, const CvOptions& options,
                         std::uint64_t seed) {
  grid.check();
  options.base.check();
  check_labels(dataset, task);
  Indices all(dataset.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const PreparedFold pf =
      prepare_fold(dataset, all, {}, kernel, grid, options.base);
  const Targets targets = targets_of(pf.bags, task);
  if (task != Task::kRegress &&
      std::set<int>(targets.classes.begin(), targets.classes.end()).size() < 2) {
    throw ValidationError("training data holds a single class");
  }

  std::size_t chosen = 0;
  const SelectedParams params = select_parameters(
      pf, targets, task, grid, options.svm, derive_seed({seed, 0x7472}),
      &chosen);
  std::vector<std::string> ids;
  for (const Bag& b : pf.bags) ids.push_back(b.id);
  std::optional<LearnedModel> model;
  SvmOptions svm = options.svm;
  svm.verify_psd = false;
  fit_and_score(pf.candidates[chosen].gram, all, all, targets, task,
                task == Task::kRegress ? params.lambda : params.C, svm, &model,
                std::move(ids));
  TrainedModel out{
      ModelBundle{*model, model_config_text(kernel, options.base, params,
                                            pf.schema_text)},
      params, pf.candidates[chosen].jitter};
  return out;
}

std::vector<double> predict_model(const ModelBundle& bundle,
                                  const Dataset& train, const Dataset& test,
                                  unsigned threads) {
  std::optional<KernelKind> kernel;
  std::string schema_text;
  std::string kernel_text;
  {
    std::istringstream in(bundle.config_text);
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("kernel=", 0) == 0) {
        kernel = parse_kernel(line.substr(7));
      } else if (line.rfind("schema=", 0) == 0) {
        schema_text = line.substr(7);
      } else if (line.rfind("C=", 0) != 0 && line.rfind("lambda=", 0) != 0) {
        kernel_text += line + '\n';
      }
    }
  }
  if (!kernel) throw ValidationError("model config names no kernel");
  const KernelConfig config = KernelConfig::from_text(kernel_text);

  AttributeSchema fitted = train.schema;
  {
    std::istringstream in(schema_text);
    std::string item;
    std::size_t l = 0;
    fitted.range_min.assign(fitted.size(), 0);
    fitted.range_max.assign(fitted.size(), 0);
    while (std::getline(in, item, ';')) {
      if (item.empty()) continue;
      const auto a = item.find(':');
      const auto b = item.find(':', a + 1);
      if (l >= fitted.size() || a == std::string::npos ||
          b == std::string::npos ||
          (item[0] == 'c') != fitted.is_categorical(l)) {
        throw ValidationError("model schema does not match the training data");
      }
      fitted.range_min[l] = std::stod(item.substr(a + 1, b - a - 1));
      fitted.range_max[l] = std::stod(item.substr(b + 1));
      ++l;
    }
    if (l != fitted.size()) {
      throw ValidationError("model schema does not match the training data");
    }
    fitted.normalized = true;
  }

  const std::vector<std::string>& ids = std::visit(
      [](const auto& m) -> const std::vector<std::string>& { return m.bag_ids; },
      bundle.model);
  if (ids.size() != train.size()) {
    throw ValidationError("model was trained on " + std::to_string(ids.size()) +
                          " bags, training data has " +
                          std::to_string(train.size()));
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] != train.bags[i].id) {
      throw ValidationError("training bag " + std::to_string(i) + " is '" +
                            train.bags[i].id + "', model expects '" + ids[i] +
                            "'");
    }
  }

  const Dataset train_n = apply_normalization(fitted, train);
  const Dataset test_n = apply_normalization(fitted, test);
  const BagKernel bag_kernel(*kernel, config, fit_metric(train_n));
  const GramMatrix cross =
      gram_cross(train_n.bags, test_n.bags, bag_kernel, resolve_threads(threads));

  std::vector<double> out(test.size());
  std::vector<double> row(train.size());
  for (std::size_t r = 0; r < test.size(); ++r) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      row[c] = cross.values(static_cast<Eigen::Index>(r),
                            static_cast<Eigen::Index>(c));
    }
    out[r] = std::visit(
        [&](const auto& m) -> double {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, SvmModel>) {
            return svm_predict(m, row).label;
          } else if constexpr (std::is_same_v<M, OvoModel>) {
            return ovo_predict(m, row);
          } else {
            return krr_predict(m, row);
          }
        },
        bundle.model);
  }
  return out;
}

}  // namespace migk
