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

#include "migk/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace migk {

std::vector<std::size_t> BagGraph::degrees() const {
  std::vector<std::size_t> deg(node_count, 0);
  for (const Edge& e : edges) {
    ++deg[e.u];
    ++deg[e.v];
  }
  return deg;
}

BagGraph build_epsilon_graph(const Bag& bag, double epsilon_factor,
                             const DistanceFn& distance) {
  if (!(epsilon_factor > 0)) {
    throw ValidationError("epsilon factor must be positive");
  }
  if (bag.instances.empty()) throw ValidationError("empty bag '" + bag.id + "'");
  BagGraph graph;
  graph.bag_id = bag.id;
  const std::size_t n = bag.size();
  graph.node_count = n;
  if (n < 2) return graph;

  struct Pair {
    std::size_t u, v;
    double dist;
  };
  std::vector<Pair> pairs;
  pairs.reserve(n * (n - 1) / 2);
  double total = 0;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const double dist = distance(bag.instances[u], bag.instances[v]);
      pairs.push_back({u, v, dist});
      total += dist;
    }
  }
  graph.epsilon = epsilon_factor * total / static_cast<double>(pairs.size());

  double max_raw = 0;
  for (const Pair& p : pairs) {
    if (p.dist < graph.epsilon && p.dist > 0) {
      max_raw = std::max(max_raw, 1.0 / p.dist);
    }
  }
  for (const Pair& p : pairs) {
    if (!(p.dist < graph.epsilon)) continue;
    const double w = (p.dist > 0 && max_raw > 0) ? (1.0 / p.dist) / max_raw
                                                 : 1.0;
    graph.edges.push_back({p.u, p.v, w});
  }
  return graph;
}

BagGraph build_epsilon_graph(const Bag& bag, double epsilon_factor,
                             const InstanceMetric& metric) {
  return build_epsilon_graph(
      bag, epsilon_factor,
      [&metric](const Instance& a, const Instance& b) {
        return metric.distance(a, b);
      });
}

std::vector<EdgeFeature> edge_features(const BagGraph& graph) {
  std::vector<EdgeFeature> features;
  if (graph.edges.empty()) return features;
  const auto deg = graph.degrees();
  std::vector<double> incident(graph.node_count, 0.0);
  for (const Edge& e : graph.edges) {
    incident[e.u] += e.weight;
    incident[e.v] += e.weight;
  }
  const double m = static_cast<double>(graph.edge_count());
  features.reserve(graph.edge_count());
  for (const Edge& e : graph.edges) {
    features.push_back({static_cast<double>(deg[e.u]) / m,
                        e.weight / incident[e.u],
                        static_cast<double>(deg[e.v]) / m,
                        e.weight / incident[e.v]});
  }
  return features;
}

void write_edge_list(const BagGraph& graph, std::ostream& out) {
  const auto old = out.precision(17);
  for (const Edge& e : graph.edges) {
    out << e.u << ' ' << e.v << ' ' << e.weight << '\n';
  }
  out.precision(old);
}

AffinityStructure AffinityStructure::FromMatrix(std::size_t n,
                                                std::vector<std::uint8_t> matrix,
                                                double threshold,
                                                std::string bag_id) {
  if (n == 0) throw ValidationError("affinity matrix of an empty bag");
  if (matrix.size() != n * n) {
    throw ValidationError("affinity matrix size does not match n*n");
  }
  AffinityStructure s;
  s.bag_id_ = std::move(bag_id);
  s.n_ = n;
  s.threshold_ = threshold;
  for (std::size_t a = 0; a < n; ++a) {
    matrix[a * n + a] = 1;
    for (std::size_t u = 0; u < n; ++u) {
      const std::uint8_t w = matrix[a * n + u];
      if (w > 1) throw ValidationError("affinity entries must be 0 or 1");
      if (w != matrix[u * n + a]) {
        throw ValidationError("affinity matrix must be symmetric");
      }
    }
  }
  s.matrix_ = std::move(matrix);
  s.weights_.resize(n);
  for (std::size_t a = 0; a < n; ++a) {
    std::size_t row = 0;
    for (std::size_t u = 0; u < n; ++u) row += s.matrix_[a * n + u];
    s.weights_[a] = 1.0 / static_cast<double>(row);
  }
  return s;
}

double AffinityStructure::weight_sum() const {
  double sum = 0;
  for (double w : weights_) sum += w;
  return sum;
}

AffinityStructure build_affinity_from_squared(std::size_t n,
                                              const std::vector<double>& squared,
                                              double gamma,
                                              AffinityDistance mode,
                                              std::string bag_id) {
  if (!(gamma > 0)) throw ValidationError("affinity gamma must be positive");
  if (n == 0) throw ValidationError("affinity of an empty bag");
  std::vector<std::uint8_t> matrix(n * n, 0);
  if (n == 1) {
    return AffinityStructure::FromMatrix(1, std::move(matrix), 0.0,
                                         std::move(bag_id));
  }
  std::vector<double> dist(n * n, 0.0);
  double total = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t u = a + 1; u < n; ++u) {
      const double sq = squared[a * n + u];
      const double d =
          mode == AffinityDistance::kRbfInduced
              ? std::sqrt(std::max(0.0, 2.0 - 2.0 * std::exp(-gamma * sq)))
              : sq;
      dist[a * n + u] = dist[u * n + a] = d;
      total += d;
    }
  }
  const double delta = total / static_cast<double>(n * (n - 1) / 2);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t u = 0; u < n; ++u) {
      if (a != u && dist[a * n + u] < delta) matrix[a * n + u] = 1;
    }
  }
  return AffinityStructure::FromMatrix(n, std::move(matrix), delta,
                                       std::move(bag_id));
}

AffinityStructure build_affinity(const Bag& bag, double gamma,
                                 AffinityDistance mode,
                                 const InstanceMetric& metric) {
  const std::size_t n = bag.size();
  std::vector<double> squared(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t u = a + 1; u < n; ++u) {
      squared[a * n + u] = squared[u * n + a] =
          metric.squared(bag.instances[a], bag.instances[u]);
    }
  }
  return build_affinity_from_squared(n, squared, gamma, mode, bag.id);
}

}  // namespace migk
