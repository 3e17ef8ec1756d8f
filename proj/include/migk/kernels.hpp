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

#ifndef MIGK_KERNELS_HPP_
#define MIGK_KERNELS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "migk/core_model.hpp"
#include "migk/distances.hpp"
#include "migk/graphs.hpp"

namespace migk {

enum class KernelKind {
  kMIGraph,   // explicit epsilon-graph, node + edge kernel
  kMiGraph,   // affinity-weighted clique kernel
  kMIKernel,  // set kernel baseline
};

// Canonical CLI token: "migraph-explicit", "migraph", "mikernel".
std::string kernel_token(KernelKind kind);
// Display name: "MIGraph", "miGraph", "MI-Kernel".
std::string kernel_display_name(KernelKind kind);
// Accepts the tokens and the display names. Throws ValidationError.
KernelKind parse_kernel(std::string_view name);

struct KernelConfig {
  double gamma_node = 1.0;
  double gamma_edge = 1.0;
  double epsilon_factor = 1.0;
  // Multiplier on the edge term of the graph kernel; 0 reduces it to the
  // set kernel.
  double edge_weight = 1.0;
  // Width used to build affinity matrices; defaults to gamma_node.
  std::optional<double> affinity_gamma;
  AffinityDistance affinity_mode = AffinityDistance::kRbfInduced;
  bool normalize = true;

  double effective_affinity_gamma() const {
    return affinity_gamma.value_or(gamma_node);
  }
  // Throws ValidationError unless every width is strictly positive.
  void check() const;

  // Canonical "key=value" lines; round-trips through from_text().
  std::string to_text() const;
  static KernelConfig from_text(std::string_view text);
  std::uint64_t digest() const;
};

// Counts base-kernel evaluations (node/instance pairs and edge pairs).
struct EvalCounter {
  std::uint64_t node = 0;
  std::uint64_t edge = 0;
};

double k_node(const Instance& x, const Instance& y, double gamma,
              const InstanceMetric& metric);
// Plain Euclidean variant for all-continuous values.
double k_node(const Instance& x, const Instance& y, double gamma);

double k_edge(const EdgeFeature& e1, const EdgeFeature& e2, double gamma_edge);

// Unnormalized graph kernel: node sum over instance pairs plus
// edge_weight * edge sum over edge pairs.
double k_G_raw(const Bag& xi, const std::vector<EdgeFeature>& ei,
               const Bag& xj, const std::vector<EdgeFeature>& ej,
               const KernelConfig& config, const InstanceMetric& metric,
               EvalCounter* counter = nullptr);
// Normalized by the geometric mean of the two self-kernels.
double k_G(const Bag& xi, const BagGraph& gi, const Bag& xj,
           const BagGraph& gj, const KernelConfig& config,
           const InstanceMetric& metric);

double k_mi_raw(const Bag& xi, const Bag& xj, double gamma,
                const InstanceMetric& metric, EvalCounter* counter = nullptr);
double k_mi(const Bag& xi, const Bag& xj, double gamma, bool normalize,
            const InstanceMetric& metric);

// Affinity-weighted average of instance kernel values.
double k_g_raw(const Bag& xi, const AffinityStructure& ai, const Bag& xj,
               const AffinityStructure& aj, double gamma,
               const InstanceMetric& metric, EvalCounter* counter = nullptr);
double k_g(const Bag& xi, const AffinityStructure& ai, const Bag& xj,
           const AffinityStructure& aj, double gamma, bool normalize,
           const InstanceMetric& metric);

// Per-bag structures needed by a kernel, computed once per bag.
struct BagStructure {
  std::vector<EdgeFeature> edge_features;  // MIGraph
  AffinityStructure affinity;              // miGraph
  double self_raw = 1.0;                   // raw k(X, X)
};

// Evaluates one kernel family over prepared bags.
class BagKernel {
 public:
  BagKernel(KernelKind kind, KernelConfig config, InstanceMetric metric);

  KernelKind kind() const { return kind_; }
  const KernelConfig& config() const { return config_; }
  const InstanceMetric& metric() const { return metric_; }

  BagStructure prepare(const Bag& bag) const;
  double raw(const Bag& xi, const BagStructure& si, const Bag& xj,
             const BagStructure& sj, EvalCounter* counter = nullptr) const;
  // Raw or normalized according to config().normalize.
  double operator()(const Bag& xi, const BagStructure& si, const Bag& xj,
                    const BagStructure& sj) const;

 private:
  KernelKind kind_;
  KernelConfig config_;
  InstanceMetric metric_;
};

struct GramMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
  std::string kernel;  // display name
  std::uint64_t config_digest = 0;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

// Symmetric Gram matrix; per-bag structures are built once and entries
// (i, j), (j, i) come from a single evaluation.
GramMatrix gram(const std::vector<Bag>& bags, const BagKernel& kernel,
                unsigned threads = 1);
// Rows are test bags, columns are train bags.
GramMatrix gram_cross(const std::vector<Bag>& train,
                      const std::vector<Bag>& test, const BagKernel& kernel,
                      unsigned threads = 1);

struct PsdReport {
  double min_eigenvalue = 0;
  double max_eigenvalue = 0;
  bool is_psd = true;  // min >= -1e-8 * max
};

PsdReport check_psd(const Eigen::MatrixXd& symmetric);

// Adds |min eigenvalue| + 1e-10 to the diagonal when the PSD check fails.
// Returns the jitter added (0 if none).
double repair_psd(Eigen::MatrixXd& symmetric);

// Divides entry (i, j) by sqrt(row_self[i] * col_self[j]).
Eigen::MatrixXd normalize_gram(const Eigen::MatrixXd& raw,
                               const Eigen::VectorXd& row_self,
                               const Eigen::VectorXd& col_self);

}  // namespace migk

#endif  // MIGK_KERNELS_HPP_
