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

#ifndef MIGK_EVALUATION_HPP_
#define MIGK_EVALUATION_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "migk/core_model.hpp"
#include "migk/kernels.hpp"
#include "migk/learners.hpp"
#include "migk/model_io.hpp"
#include "migk/stats.hpp"

namespace migk {

enum class Task { kClassify, kMulticlass, kRegress };

std::string task_token(Task task);  // "classify", "multiclass", "regress"
Task parse_task(std::string_view token);

struct CvPlan {
  std::size_t folds = 10;
  std::size_t repetitions = 10;
  std::uint64_t seed = 1;
  bool stratified = true;
};

// Indices of the bags in each fold.
using Partition = std::vector<std::vector<std::size_t>>;

// Deterministic k-fold partition of `strata` (one stratum id per item).
// Items of each stratum are shuffled and dealt round-robin, so every fold
// holds each stratum's count within +/-1. Throws ValidationError if
// items < k.
Partition make_partition(const std::vector<int>& strata, std::size_t k,
                         std::uint64_t seed, bool stratified,
                         std::vector<std::string>* warnings = nullptr);

// One partition per repetition, each with its own derived seed.
std::vector<Partition> make_folds(const Dataset& dataset, const CvPlan& plan,
                                  Task task,
                                  std::vector<std::string>* warnings = nullptr);

// Hyperparameter grid. Kernel widths are multiples of a base width fitted on
// each training split (1 / mean squared pairwise distance of its instances,
// or of its edge features for gamma_edge).
struct ParamGrid {
  std::vector<double> gamma_scales;
  std::vector<double> edge_gamma_scales;
  std::vector<double> epsilon_factors{1.0};
  std::vector<double> C_values{0.1, 1, 10, 100};
  std::vector<double> lambdas{1e-3, 1e-2, 1e-1, 1};
  std::size_t inner_folds = 3;

  // 2^k for k in -4..4 for both width grids.
  static ParamGrid Default();
  void check() const;
};

struct SelectedParams {
  double gamma_scale = 1;
  double gamma = 1;
  double edge_gamma_scale = 1;
  double gamma_edge = 1;
  double epsilon_factor = 1;
  double C = 1;       // classification
  double lambda = 0;  // regression
  double inner_score = 0;
};

struct FoldRecord {
  std::size_t repetition = 0;
  std::size_t fold = 0;
  double metric = 0;  // accuracy in percent, or mean squared loss
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  SelectedParams params;
  std::uint64_t model_digest = 0;
  double psd_jitter = 0;
  double seconds = 0;  // wall clock, excluded from digests
};

struct CvOptions {
  KernelConfig base;  // affinity mode, normalization and edge weight
  SvmOptions svm;
  unsigned threads = 1;
};

struct RunResult {
  KernelKind kernel = KernelKind::kMiGraph;
  Task task = Task::kClassify;
  KernelConfig base;
  CvPlan plan;
  ParamGrid grid;
  std::string metric_name;  // "accuracy" or "squared_loss"
  std::vector<FoldRecord> folds;
  std::vector<std::string> warnings;
  double mean = 0;
  double stddev = 0;
  double ci_low = 0;
  double ci_high = 0;

  std::vector<double> metrics() const;
  // Recomputes mean, stddev and the 95% interval from the fold metrics.
  void aggregate();
  // Digest of the JSON document (timings excluded).
  std::uint64_t digest() const;
};

class RunFailedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Trains on `train` and evaluates on `test` with inner-CV parameter
// selection. Normalization, VDM tables and width scaling are fitted on the
// training bags only.
FoldRecord run_outer_fold(const Dataset& dataset,
                          const std::vector<std::size_t>& train,
                          const std::vector<std::size_t>& test,
                          KernelKind kernel, Task task, const ParamGrid& grid,
                          const CvOptions& options, std::uint64_t inner_seed);

// Repeated k-fold cross validation with nested parameter selection. Any
// failed fold fails the run with RunFailedError.
RunResult cross_validate(const Dataset& dataset, KernelKind kernel, Task task,
                         const CvPlan& plan, const ParamGrid& grid,
                         const CvOptions& options = {});

// Leave-one-out squared loss for regression. Parameters are chosen once per
// block of a plan.folds partition by inner CV on the bags outside the block
// and reused for every held-out bag of that block.
RunResult leave_one_out(const Dataset& dataset, KernelKind kernel,
                        const CvPlan& plan, const ParamGrid& grid,
                        const CvOptions& options = {});

struct CompareResult {
  RunResult a;
  RunResult b;
  TTestResult test;
  double mean_difference = 0;  // mean(a) - mean(b)
};

// Runs both kernels on identical fold assignments and pairs the per-fold
// metrics in a t-test at 95%.
CompareResult compare(const Dataset& dataset, KernelKind a, KernelKind b,
                      Task task, const CvPlan& plan, const ParamGrid& grid,
                      const CvOptions& options = {});

struct TrainedModel {
  ModelBundle bundle;
  SelectedParams params;
  double psd_jitter = 0;
};

// Fits a final model on every bag of `dataset`, choosing parameters by inner
// cross validation over `grid`. The bundle's config text records the kernel,
// the chosen parameters and the fitted normalization ranges.
TrainedModel train_model(const Dataset& dataset, KernelKind kernel, Task task,
                         const ParamGrid& grid, const CvOptions& options,
                         std::uint64_t seed);

// Predictions for `test` from a bundle written by train_model(); `train`
// must be the dataset it was trained on. Binary models yield -1/+1,
// one-vs-one models class indices, regression models real values.
std::vector<double> predict_model(const ModelBundle& bundle,
                                  const Dataset& train, const Dataset& test,
                                  unsigned threads = 1);

// JSON document of a run (no timings) and the per-fold timing sidecar.
std::string run_result_json(const RunResult& result);
std::string run_timing_json(const RunResult& result);
// Header plus one summary row.
std::string run_result_csv(const RunResult& result);

// Mean squared pairwise distance over all pairs of rows (closed form).
double mean_pairwise_squared_distance(const Eigen::MatrixXd& rows);

}  // namespace migk

#endif  // MIGK_EVALUATION_HPP_
