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

#ifndef MIGK_GRAPHS_HPP_
#define MIGK_GRAPHS_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "migk/core_model.hpp"
#include "migk/distances.hpp"

namespace migk {

using DistanceFn = std::function<double(const Instance&, const Instance&)>;

struct Edge {
  std::size_t u = 0;  // u < v
  std::size_t v = 0;
  double weight = 0;  // in (0, 1]
};

// epsilon-graph of one bag: instances are nodes, close pairs are edges.
struct BagGraph {
  std::string bag_id;
  std::size_t node_count = 0;
  std::vector<Edge> edges;
  double epsilon = 0;

  std::size_t edge_count() const { return edges.size(); }
  std::vector<std::size_t> degrees() const;
};

// [d_u, p_u, d_v, p_v]: endpoint degrees over the total edge count and the
// edge's share of each endpoint's incident weight.
using EdgeFeature = std::array<double, 4>;

// Connects u, v iff distance(u, v) < epsilon_factor * (mean distance over
// distinct pairs). Weights are reciprocal distances divided by the bag's
// largest reciprocal; duplicate instances (distance 0) get weight 1.
BagGraph build_epsilon_graph(const Bag& bag, double epsilon_factor,
                             const DistanceFn& distance);
BagGraph build_epsilon_graph(const Bag& bag, double epsilon_factor,
                             const InstanceMetric& metric);

// One feature per edge, aligned with graph.edges. Empty for edgeless graphs.
std::vector<EdgeFeature> edge_features(const BagGraph& graph);

// Debug dump, one "u v weight" line per edge.
void write_edge_list(const BagGraph& graph, std::ostream& out);

enum class AffinityDistance {
  kRbfInduced,        // sqrt(2 - 2 exp(-gamma ||a - b||^2))
  kSquaredEuclidean,  // ||a - b||^2
};

// Binary affinity matrix of a bag and the per-instance weights
// W_a = 1 / (row sum of the matrix).
class AffinityStructure {
 public:
  AffinityStructure() = default;
  // Takes an explicit symmetric 0/1 matrix (row-major, n x n). The diagonal
  // is forced to 1. Throws ValidationError on asymmetric or non-binary input.
  static AffinityStructure FromMatrix(std::size_t n,
                                      std::vector<std::uint8_t> matrix,
                                      double threshold = 0,
                                      std::string bag_id = {});

  const std::string& bag_id() const { return bag_id_; }
  std::size_t size() const { return n_; }
  double threshold() const { return threshold_; }
  std::uint8_t at(std::size_t a, std::size_t u) const {
    return matrix_[a * n_ + u];
  }
  const std::vector<std::uint8_t>& matrix() const { return matrix_; }
  const std::vector<double>& weights() const { return weights_; }
  double weight_sum() const;

 private:
  std::string bag_id_;
  std::size_t n_ = 0;
  double threshold_ = 0;
  std::vector<std::uint8_t> matrix_;
  std::vector<double> weights_;
};

// Threshold delta = mean distance over distinct pairs; w_au = 1 iff
// distance < delta (strict), plus the unit diagonal.
AffinityStructure build_affinity(const Bag& bag, double gamma,
                                 AffinityDistance mode,
                                 const InstanceMetric& metric);

// Same construction from a precomputed symmetric matrix of squared
// distances (row-major n x n).
AffinityStructure build_affinity_from_squared(
    std::size_t n, const std::vector<double>& squared, double gamma,
    AffinityDistance mode, std::string bag_id = {});

}  // namespace migk

#endif  // MIGK_GRAPHS_HPP_
