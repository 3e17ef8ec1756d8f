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

#include "migk/kernel_sweep.hpp"

#include <cmath>

#include "migk/parallel.hpp"

namespace migk {

Eigen::MatrixXd block_squared_distances(const Eigen::MatrixXd& a,
                                        const Eigen::VectorXd& a_norms,
                                        const Eigen::MatrixXd& b,
                                        const Eigen::VectorXd& b_norms) {
  Eigen::MatrixXd d = -2.0 * (a * b.transpose());
  d.colwise() += a_norms;
  d.rowwise() += b_norms.transpose();
  return d.cwiseMax(0.0);
}

namespace {

// Exact pairwise squared distances inside one bag; graph and affinity
// thresholds are sensitive to the rounding of the norm expansion.
Eigen::MatrixXd within_squared_distances(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) {
      d(a, b) = d(b, a) = (x.row(a) - x.row(b)).squaredNorm();
    }
  }
  return d;
}

}  // namespace

KernelSweep::KernelSweep(const std::vector<Bag>& bags,
                         const InstanceMetric& metric, unsigned threads)
    : threads_(threads) {
  const auto dim = static_cast<Eigen::Index>(metric.embedded_dimension());
  embedded_.reserve(bags.size());
  norms_.reserve(bags.size());
  for (const Bag& bag : bags) {
    if (bag.instances.empty()) {
      throw ValidationError("empty bag '" + bag.id + "'");
    }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(bag.size()), dim);
    for (std::size_t a = 0; a < bag.size(); ++a) {
      const auto row = metric.embed(bag.instances[a]);
      x.row(static_cast<Eigen::Index>(a)) =
          Eigen::Map<const Eigen::RowVectorXd>(row.data(), dim);
    }
    norms_.push_back(x.rowwise().squaredNorm());
    embedded_.push_back(std::move(x));
  }
}

template <typename BlockFn>
void KernelSweep::for_each_block(BlockFn&& fn) const {
  const std::size_t n = embedded_.size();
  parallel_for(n, threads_, [&](std::size_t i) {
    for (std::size_t j = i; j < n; ++j) {
      Eigen::MatrixXd d = block_squared_distances(embedded_[i], norms_[i],
                                                  embedded_[j], norms_[j]);
      if (i == j) d.diagonal().setZero();
      fn(i, j, d);
    }
  });
}

std::vector<Eigen::MatrixXd> KernelSweep::set_sums(
    std::span<const double> gammas) const {
  const auto n = static_cast<Eigen::Index>(size());
  std::vector<Eigen::MatrixXd> out(gammas.size(), Eigen::MatrixXd(n, n));
  for_each_block([&](std::size_t i, std::size_t j, const Eigen::MatrixXd& d) {
    const auto r = static_cast<Eigen::Index>(i);
    const auto c = static_cast<Eigen::Index>(j);
    for (std::size_t g = 0; g < gammas.size(); ++g) {
      const double v = (-gammas[g] * d.array()).exp().sum();
      out[g](r, c) = out[g](c, r) = v;
    }
  });
  return out;
}

std::vector<Eigen::MatrixXd> KernelSweep::clique_sums(
    std::span<const double> gammas, AffinityDistance mode,
    std::optional<double> affinity_gamma) const {
  const std::size_t n = size();
  // weights[g][i]: instance weights of bag i under gamma g.
  const std::size_t width_count = affinity_gamma ? 1 : gammas.size();
  std::vector<std::vector<Eigen::VectorXd>> weights(
      width_count, std::vector<Eigen::VectorXd>(n));
  parallel_for(n, threads_, [&](std::size_t i) {
    const Eigen::MatrixXd d = within_squared_distances(embedded_[i]);
    const auto ni = static_cast<std::size_t>(d.rows());
    std::vector<double> sq(d.data(), d.data() + d.size());
    for (std::size_t g = 0; g < width_count; ++g) {
      const double width = affinity_gamma ? *affinity_gamma : gammas[g];
      const auto aff = build_affinity_from_squared(ni, sq, width, mode);
      weights[g][i] = Eigen::Map<const Eigen::VectorXd>(
          aff.weights().data(), static_cast<Eigen::Index>(ni));
    }
  });

  const auto nn = static_cast<Eigen::Index>(n);
  std::vector<Eigen::MatrixXd> out(gammas.size(), Eigen::MatrixXd(nn, nn));
  for_each_block([&](std::size_t i, std::size_t j, const Eigen::MatrixXd& d) {
    const auto r = static_cast<Eigen::Index>(i);
    const auto c = static_cast<Eigen::Index>(j);
    for (std::size_t g = 0; g < gammas.size(); ++g) {
      const auto& wi = weights[affinity_gamma ? 0 : g][i];
      const auto& wj = weights[affinity_gamma ? 0 : g][j];
      const Eigen::MatrixXd k = (-gammas[g] * d.array()).exp().matrix();
      const double v = wi.dot(k * wj) / (wi.sum() * wj.sum());
      out[g](r, c) = out[g](c, r) = v;
    }
  });
  return out;
}

std::vector<std::vector<EdgeFeature>> KernelSweep::edge_features_for(
    double epsilon_factor) const {
  const std::size_t n = size();
  std::vector<std::vector<EdgeFeature>> features(n);
  parallel_for(n, threads_, [&](std::size_t i) {
    const Eigen::MatrixXd d = within_squared_distances(embedded_[i]);
    // Nodes are indices into the embedded rows; distances come from d.
    Bag index_bag;
    index_bag.instances.resize(static_cast<std::size_t>(d.rows()));
    for (std::size_t a = 0; a < index_bag.instances.size(); ++a) {
      index_bag.instances[a].values = {static_cast<double>(a)};
    }
    const auto graph = build_epsilon_graph(
        index_bag, epsilon_factor, [&d](const Instance& a, const Instance& b) {
          return std::sqrt(d(static_cast<Eigen::Index>(a[0]),
                             static_cast<Eigen::Index>(b[0])));
        });
    features[i] = edge_features(graph);
  });
  return features;
}

std::vector<Eigen::MatrixXd> KernelSweep::edge_sums(
    std::span<const double> gamma_edges, double epsilon_factor) const {
  return edge_sums(gamma_edges, edge_features_for(epsilon_factor));
}

std::vector<Eigen::MatrixXd> KernelSweep::edge_sums(
    std::span<const double> gamma_edges,
    const std::vector<std::vector<EdgeFeature>>& features) const {
  const std::size_t n = size();
  if (features.size() != n) {
    throw ValidationError("edge_sums: one feature list per bag expected");
  }
  std::vector<Eigen::MatrixXd> e(n);
  std::vector<Eigen::VectorXd> en(n);
  for (std::size_t i = 0; i < n; ++i) {
    e[i].resize(static_cast<Eigen::Index>(features[i].size()), 4);
    for (std::size_t k = 0; k < features[i].size(); ++k) {
      for (Eigen::Index c = 0; c < 4; ++c) {
        e[i](static_cast<Eigen::Index>(k), c) =
            features[i][k][static_cast<std::size_t>(c)];
      }
    }
    en[i] = e[i].rowwise().squaredNorm();
  }

  const auto nn = static_cast<Eigen::Index>(n);
  std::vector<Eigen::MatrixXd> out(gamma_edges.size(),
                                   Eigen::MatrixXd::Zero(nn, nn));
  parallel_for(n, threads_, [&](std::size_t i) {
    for (std::size_t j = i; j < n; ++j) {
      if (e[i].rows() == 0 || e[j].rows() == 0) continue;
      Eigen::MatrixXd d = block_squared_distances(e[i], en[i], e[j], en[j]);
      if (i == j) d.diagonal().setZero();
      const auto r = static_cast<Eigen::Index>(i);
      const auto c = static_cast<Eigen::Index>(j);
      for (std::size_t g = 0; g < gamma_edges.size(); ++g) {
        const double v = (-gamma_edges[g] * d.array()).exp().sum();
        out[g](r, c) = out[g](c, r) = v;
      }
    }
  });
  return out;
}

}  // namespace migk
