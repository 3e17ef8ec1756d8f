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

#ifndef MIGK_KERNEL_SWEEP_HPP_
#define MIGK_KERNEL_SWEEP_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "migk/core_model.hpp"
#include "migk/distances.hpp"
#include "migk/graphs.hpp"
#include "migk/kernels.hpp"

namespace migk {

// Batch evaluation of the bag kernels over a whole bag list for several
// kernel widths at once. Instance distances are computed once per bag pair
// (as dense blocks) and shared by every width, which is what makes nested
// parameter search affordable. Results are raw (unnormalized) N x N sums;
// the diagonal holds the self-kernels, so normalize_gram() with the
// diagonal gives the normalized matrices.
class KernelSweep {
 public:
  KernelSweep(const std::vector<Bag>& bags, const InstanceMetric& metric,
              unsigned threads = 1);

  std::size_t size() const { return embedded_.size(); }

  // Set-kernel sums per gamma (MI-Kernel, and the node part of MIGraph).
  std::vector<Eigen::MatrixXd> set_sums(std::span<const double> gammas) const;

  // Affinity-weighted sums per gamma. Affinity matrices are rebuilt for
  // every gamma unless `affinity_gamma` pins their width.
  std::vector<Eigen::MatrixXd> clique_sums(
      std::span<const double> gammas, AffinityDistance mode,
      std::optional<double> affinity_gamma = std::nullopt) const;

  // Edge-kernel sums per gamma_edge over epsilon-graphs.
  std::vector<Eigen::MatrixXd> edge_sums(std::span<const double> gamma_edges,
                                         double epsilon_factor) const;
  // Same, over edge features already computed (one list per bag).
  std::vector<Eigen::MatrixXd> edge_sums(
      std::span<const double> gamma_edges,
      const std::vector<std::vector<EdgeFeature>>& features) const;

  // Edge features of every bag's epsilon-graph.
  std::vector<std::vector<EdgeFeature>> edge_features_for(
      double epsilon_factor) const;

 private:
  template <typename BlockFn>
  void for_each_block(BlockFn&& fn) const;

  std::vector<Eigen::MatrixXd> embedded_;  // n_i x D per bag
  std::vector<Eigen::VectorXd> norms_;     // squared row norms
  unsigned threads_;
};

// Squared distances between the rows of a and b via the norm expansion,
// clamped at zero.
Eigen::MatrixXd block_squared_distances(const Eigen::MatrixXd& a,
                                        const Eigen::VectorXd& a_norms,
                                        const Eigen::MatrixXd& b,
                                        const Eigen::VectorXd& b_norms);

}  // namespace migk

#endif  // MIGK_KERNEL_SWEEP_HPP_
