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

// Shared fixtures and independent reference implementations for the tests.
// The references are written straight from the kernel definitions with
// plain loops and share no code with the library.
#ifndef MIGK_TESTS_SUPPORT_HPP_
#define MIGK_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "migk/core_model.hpp"

namespace migk::testing {

using Matrix = std::vector<std::vector<double>>;

inline Bag make_bag(const std::string& id, const Matrix& rows, int label = 1) {
  Bag b;
  b.id = id;
  b.label = Label::Binary(label);
  for (const auto& r : rows) b.instances.push_back(Instance{r});
  return b;
}

inline Bag random_bag(std::mt19937_64& rng, const std::string& id,
                      std::size_t n, std::size_t d, int label = 1) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix rows(n, std::vector<double>(d));
  for (auto& r : rows) {
    for (double& v : r) v = u(rng);
  }
  return make_bag(id, rows, label);
}

inline double sq(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

inline double rbf(const std::vector<double>& a, const std::vector<double>& b,
                  double gamma) {
  return std::exp(-gamma * sq(a, b));
}

// Set kernel: sum of RBF values over all instance pairs.
inline double ref_kmi_raw(const Bag& x, const Bag& y, double gamma) {
  double s = 0;
  for (const auto& a : x.instances) {
    for (const auto& b : y.instances) s += rbf(a.values, b.values, gamma);
  }
  return s;
}

struct RefEdge {
  std::size_t u, v;
  double w;
};

// epsilon-graph: edge iff distance < factor * mean distinct-pair distance;
// weight 1/distance over the largest such value (duplicates take the max).
inline std::vector<RefEdge> ref_graph(const Bag& x, double factor) {
  const std::size_t n = x.instances.size();
  std::vector<RefEdge> edges;
  if (n < 2) return edges;
  double total = 0;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      total += std::sqrt(sq(x.instances[u].values, x.instances[v].values));
    }
  }
  const double eps = factor * total / (0.5 * static_cast<double>(n * (n - 1)));
  std::vector<double> dist;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const double d = std::sqrt(sq(x.instances[u].values, x.instances[v].values));
      if (d < eps) {
        edges.push_back({u, v, 0});
        dist.push_back(d);
      }
    }
  }
  double max_inv = 0;
  for (double d : dist) {
    if (d > 0) max_inv = std::max(max_inv, 1.0 / d);
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    edges[e].w = (dist[e] > 0 && max_inv > 0) ? (1.0 / dist[e]) / max_inv : 1.0;
  }
  return edges;
}

inline Matrix ref_edge_features(const Bag& x, const std::vector<RefEdge>& edges) {
  const std::size_t n = x.instances.size();
  std::vector<double> degree(n, 0), weight(n, 0);
  for (const auto& e : edges) {
    degree[e.u] += 1;
    degree[e.v] += 1;
    weight[e.u] += e.w;
    weight[e.v] += e.w;
  }
  const double m = static_cast<double>(edges.size());
  Matrix out;
  for (const auto& e : edges) {
    out.push_back({degree[e.u] / m, e.w / weight[e.u], degree[e.v] / m,
                   e.w / weight[e.v]});
  }
  return out;
}

// Graph kernel: node sum plus edge sum over the epsilon-graphs.
inline double ref_kG_raw(const Bag& x, const Bag& y, double gamma,
                         double gamma_edge, double factor) {
  const Matrix ex = ref_edge_features(x, ref_graph(x, factor));
  const Matrix ey = ref_edge_features(y, ref_graph(y, factor));
  double s = ref_kmi_raw(x, y, gamma);
  for (const auto& a : ex) {
    for (const auto& b : ey) s += rbf(a, b, gamma_edge);
  }
  return s;
}

// Instance weights 1 / row sum of the thresholded kernel-induced distances.
inline std::vector<double> ref_affinity_weights(const Bag& x, double gamma) {
  const std::size_t n = x.instances.size();
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  Matrix dist(n, std::vector<double>(n, 0));
  double total = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      dist[a][b] = std::sqrt(
          2.0 - 2.0 * rbf(x.instances[a].values, x.instances[b].values, gamma));
      if (a < b) total += dist[a][b];
    }
  }
  const double delta = total / (0.5 * static_cast<double>(n * (n - 1)));
  for (std::size_t a = 0; a < n; ++a) {
    double row = 1;  // diagonal
    for (std::size_t b = 0; b < n; ++b) {
      if (a != b && dist[a][b] < delta) row += 1;
    }
    w[a] = 1.0 / row;
  }
  return w;
}

// Affinity-weighted average kernel.
inline double ref_kg_raw(const Bag& x, const std::vector<double>& wx,
                         const Bag& y, const std::vector<double>& wy,
                         double gamma) {
  double num = 0, sx = 0, sy = 0;
  for (std::size_t a = 0; a < x.instances.size(); ++a) {
    for (std::size_t b = 0; b < y.instances.size(); ++b) {
      num += wx[a] * wy[b] *
             rbf(x.instances[a].values, y.instances[b].values, gamma);
    }
  }
  for (double v : wx) sx += v;
  for (double v : wy) sy += v;
  return num / (sx * sy);
}

inline double ref_kg_raw(const Bag& x, const Bag& y, double gamma) {
  return ref_kg_raw(x, ref_affinity_weights(x, gamma), y,
                    ref_affinity_weights(y, gamma), gamma);
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

// Dual C-SVM objective sum(alpha) - 1/2 alpha' Q alpha.
inline double dual_objective(const Matrix& k, const std::vector<int>& y,
                             const std::vector<double>& alpha) {
  const std::size_t n = alpha.size();
  double quad = 0, lin = 0;
  for (std::size_t i = 0; i < n; ++i) {
    lin += alpha[i];
    for (std::size_t j = 0; j < n; ++j) {
      quad += alpha[i] * alpha[j] * y[i] * y[j] * k[i][j];
    }
  }
  return lin - 0.5 * quad;
}

// Euclidean projection onto {0 <= a <= C, y'a = 0} by bisection on the
// multiplier of the equality constraint.
inline std::vector<double> project(const std::vector<double>& v,
                                   const std::vector<int>& y, double C) {
  auto at = [&](double tau) {
    std::vector<double> a(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      a[i] = std::clamp(v[i] - tau * y[i], 0.0, C);
    }
    return a;
  };
  auto balance = [&](double tau) {
    const auto a = at(tau);
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += y[i] * a[i];
    return s;  // non-increasing in tau
  };
  double lo = -1.0, hi = 1.0;
  while (balance(lo) < 0) lo *= 2;
  while (balance(hi) > 0) hi *= 2;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (balance(mid) > 0 ? lo : hi) = mid;
  }
  return at(0.5 * (lo + hi));
}

// Reference dual solve: accelerated projected gradient ascent with adaptive
// restart, run to a tight fixed point.
inline std::vector<double> reference_qp(const Matrix& k, const std::vector<int>& y,
                                        double C) {
  const std::size_t n = y.size();
  Matrix q(n, std::vector<double>(n));
  double lipschitz = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0;
    for (std::size_t j = 0; j < n; ++j) {
      q[i][j] = y[i] * y[j] * k[i][j];
      row += std::abs(q[i][j]);
    }
    lipschitz = std::max(lipschitz, row);  // bounds the largest eigenvalue
  }
  const double step = 1.0 / std::max(lipschitz, 1e-12);
  auto grad = [&](const std::vector<double>& a) {
    std::vector<double> g(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) g[i] -= q[i][j] * a[j];
    }
    return g;
  };
  std::vector<double> x(n, 0.0), z = x;
  double t = 1;
  double prev = dual_objective(k, y, x);
  for (int it = 0; it < 400000; ++it) {
    const auto g = grad(z);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = z[i] + step * g[i];
    const auto next = project(v, y, C);
    const double obj = dual_objective(k, y, next);
    double change = 0;
    for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(next[i] - x[i]));
    if (obj < prev) {  // restart momentum
      t = 1;
      z = x;
      continue;
    }
    const double t_next = 0.5 * (1 + std::sqrt(1 + 4 * t * t));
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = next[i] + ((t - 1) / t_next) * (next[i] - x[i]);
    }
    x = next;
    t = t_next;
    prev = obj;
    if (change < 1e-15) break;
  }
  return x;
}

// Random positive semidefinite Gram matrix of RBF values over points.
inline Matrix random_gram(std::mt19937_64& rng, std::size_t n, double gamma) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix pts(n, std::vector<double>(3));
  for (auto& p : pts) {
    for (double& v : p) v = u(rng);
  }
  Matrix k(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) k[i][j] = rbf(pts[i], pts[j], gamma);
  }
  return k;
}

}  // namespace migk::testing

#endif  // MIGK_TESTS_SUPPORT_HPP_
