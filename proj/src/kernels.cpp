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

#include "migk/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "migk/digest.hpp"
#include "migk/parallel.hpp"

namespace migk {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(std::string_view key, const std::string& value) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || value.empty()) {
    throw ValidationError("kernel config: bad number for " + std::string(key) +
                          ": '" + value + "'");
  }
  return v;
}

double sq_euclidean(const Instance& x, const Instance& y) {
  if (x.size() != y.size()) {
    throw ValidationError("instances have different lengths");
  }
  double sum = 0;
  for (std::size_t l = 0; l < x.size(); ++l) {
    const double d = x[l] - y[l];
    sum += d * d;
  }
  return sum;
}

// Orders a bag pair canonically so every double sum runs in the same order
// regardless of argument order, which makes k(X, Y) == k(Y, X) bit-exact.
bool evaluate_swapped(const Bag& xi, const Bag& xj) {
  if (&xi == &xj) return false;
  if (xi.size() != xj.size()) return xj.size() < xi.size();
  for (std::size_t a = 0; a < xi.size(); ++a) {
    const auto& u = xi.instances[a].values;
    const auto& v = xj.instances[a].values;
    if (u != v) {
      return std::lexicographical_compare(v.begin(), v.end(), u.begin(),
                                          u.end());
    }
  }
  return false;
}

}  // namespace

std::string kernel_token(KernelKind kind) {
  switch (kind) {
    case KernelKind::kMIGraph: return "migraph-explicit";
    case KernelKind::kMiGraph: return "migraph";
    case KernelKind::kMIKernel: return "mikernel";
  }
  return {};
}

std::string kernel_display_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::kMIGraph: return "MIGraph";
    case KernelKind::kMiGraph: return "miGraph";
    case KernelKind::kMIKernel: return "MI-Kernel";
  }
  return {};
}

KernelKind parse_kernel(std::string_view name) {
  if (name == "migraph-explicit" || name == "MIGraph") {
    return KernelKind::kMIGraph;
  }
  if (name == "migraph" || name == "miGraph") return KernelKind::kMiGraph;
  if (name == "mikernel" || name == "MI-Kernel" || name == "mi-kernel") {
    return KernelKind::kMIKernel;
  }
  throw ValidationError("unknown kernel '" + std::string(name) +
                        "' (expected migraph-explicit, migraph or mikernel)");
}

void KernelConfig::check() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0) || !std::isfinite(v)) {
      throw ValidationError(std::string(what) + " must be positive");
    }
  };
  positive(gamma_node, "gamma_node");
  positive(gamma_edge, "gamma_edge");
  positive(epsilon_factor, "epsilon_factor");
  if (affinity_gamma) positive(*affinity_gamma, "affinity_gamma");
  if (!(edge_weight >= 0)) throw ValidationError("edge_weight must be >= 0");
}

std::string KernelConfig::to_text() const {
  std::ostringstream out;
  out << "gamma_node=" << format_double(gamma_node) << '\n'
      << "gamma_edge=" << format_double(gamma_edge) << '\n'
      << "epsilon_factor=" << format_double(epsilon_factor) << '\n'
      << "edge_weight=" << format_double(edge_weight) << '\n'
      << "affinity_gamma="
      << (affinity_gamma ? format_double(*affinity_gamma) : "coupled") << '\n'
      << "affinity_mode="
      << (affinity_mode == AffinityDistance::kRbfInduced ? "rbf-induced"
                                                         : "squared-euclidean")
      << '\n'
      << "normalize=" << (normalize ? 1 : 0) << '\n';
  return out.str();
}

KernelConfig KernelConfig::from_text(std::string_view text) {
  KernelConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("kernel config: expected key=value, got '" + line +
                            "'");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "gamma_node") {
      config.gamma_node = parse_double(key, value);
    } else if (key == "gamma_edge") {
      config.gamma_edge = parse_double(key, value);
    } else if (key == "epsilon_factor") {
      config.epsilon_factor = parse_double(key, value);
    } else if (key == "edge_weight") {
      config.edge_weight = parse_double(key, value);
    } else if (key == "affinity_gamma") {
      if (value == "coupled") {
        config.affinity_gamma.reset();
      } else {
        config.affinity_gamma = parse_double(key, value);
      }
    } else if (key == "affinity_mode") {
      if (value == "rbf-induced") {
        config.affinity_mode = AffinityDistance::kRbfInduced;
      } else if (value == "squared-euclidean") {
        config.affinity_mode = AffinityDistance::kSquaredEuclidean;
      } else {
        throw ValidationError("kernel config: unknown affinity_mode '" +
                              value + "'");
      }
    } else if (key == "normalize") {
      config.normalize = value == "1" || value == "true";
    } else {
      throw ValidationError("kernel config: unknown key '" + key + "'");
    }
  }
  return config;
}

std::uint64_t KernelConfig::digest() const { return fnv1a64(to_text()); }

double k_node(const Instance& x, const Instance& y, double gamma,
              const InstanceMetric& metric) {
  return std::exp(-gamma * metric.squared(x, y));
}

double k_node(const Instance& x, const Instance& y, double gamma) {
  return std::exp(-gamma * sq_euclidean(x, y));
}

double k_edge(const EdgeFeature& e1, const EdgeFeature& e2,
              double gamma_edge) {
  double sq = 0;
  for (std::size_t k = 0; k < e1.size(); ++k) {
    const double d = e1[k] - e2[k];
    sq += d * d;
  }
  return std::exp(-gamma_edge * sq);
}

double k_mi_raw(const Bag& xi, const Bag& xj, double gamma,
                const InstanceMetric& metric, EvalCounter* counter) {
  if (evaluate_swapped(xi, xj)) return k_mi_raw(xj, xi, gamma, metric, counter);
  double sum = 0;
  for (const Instance& a : xi.instances) {
    for (const Instance& b : xj.instances) sum += k_node(a, b, gamma, metric);
  }
  if (counter) counter->node += xi.size() * xj.size();
  return sum;
}

double k_mi(const Bag& xi, const Bag& xj, double gamma, bool normalize,
            const InstanceMetric& metric) {
  const double raw = k_mi_raw(xi, xj, gamma, metric);
  if (!normalize) return raw;
  return raw / std::sqrt(k_mi_raw(xi, xi, gamma, metric) *
                         k_mi_raw(xj, xj, gamma, metric));
}

double k_G_raw(const Bag& xi, const std::vector<EdgeFeature>& ei,
               const Bag& xj, const std::vector<EdgeFeature>& ej,
               const KernelConfig& config, const InstanceMetric& metric,
               EvalCounter* counter) {
  if (evaluate_swapped(xi, xj)) {
    return k_G_raw(xj, ej, xi, ei, config, metric, counter);
  }
  double sum = k_mi_raw(xi, xj, config.gamma_node, metric, counter);
  if (config.edge_weight == 0) return sum;
  double edges = 0;
  for (const EdgeFeature& a : ei) {
    for (const EdgeFeature& b : ej) edges += k_edge(a, b, config.gamma_edge);
  }
  if (counter) counter->edge += ei.size() * ej.size();
  return sum + config.edge_weight * edges;
}

double k_G(const Bag& xi, const BagGraph& gi, const Bag& xj,
           const BagGraph& gj, const KernelConfig& config,
           const InstanceMetric& metric) {
  const auto ei = edge_features(gi);
  const auto ej = edge_features(gj);
  const double raw = k_G_raw(xi, ei, xj, ej, config, metric);
  if (!config.normalize) return raw;
  return raw / std::sqrt(k_G_raw(xi, ei, xi, ei, config, metric) *
                         k_G_raw(xj, ej, xj, ej, config, metric));
}

double k_g_raw(const Bag& xi, const AffinityStructure& ai, const Bag& xj,
               const AffinityStructure& aj, double gamma,
               const InstanceMetric& metric, EvalCounter* counter) {
  if (ai.size() != xi.size() || aj.size() != xj.size()) {
    throw ValidationError("affinity structure does not match its bag");
  }
  if (evaluate_swapped(xi, xj)) {
    return k_g_raw(xj, aj, xi, ai, gamma, metric, counter);
  }
  const auto& wi = ai.weights();
  const auto& wj = aj.weights();
  double sum = 0;
  for (std::size_t a = 0; a < xi.size(); ++a) {
    double row = 0;
    for (std::size_t b = 0; b < xj.size(); ++b) {
      row += wj[b] * k_node(xi.instances[a], xj.instances[b], gamma, metric);
    }
    sum += wi[a] * row;
  }
  if (counter) counter->node += xi.size() * xj.size();
  return sum / (ai.weight_sum() * aj.weight_sum());
}

double k_g(const Bag& xi, const AffinityStructure& ai, const Bag& xj,
           const AffinityStructure& aj, double gamma, bool normalize,
           const InstanceMetric& metric) {
  const double raw = k_g_raw(xi, ai, xj, aj, gamma, metric);
  if (!normalize) return raw;
  return raw / std::sqrt(k_g_raw(xi, ai, xi, ai, gamma, metric) *
                         k_g_raw(xj, aj, xj, aj, gamma, metric));
}

BagKernel::BagKernel(KernelKind kind, KernelConfig config,
                     InstanceMetric metric)
    : kind_(kind), config_(std::move(config)), metric_(std::move(metric)) {
  config_.check();
}

BagStructure BagKernel::prepare(const Bag& bag) const {
  if (bag.instances.empty()) throw ValidationError("empty bag '" + bag.id + "'");
  BagStructure s;
  switch (kind_) {
    case KernelKind::kMIGraph:
      s.edge_features = edge_features(
          build_epsilon_graph(bag, config_.epsilon_factor, metric_));
      break;
    case KernelKind::kMiGraph:
      s.affinity = build_affinity(bag, config_.effective_affinity_gamma(),
                                  config_.affinity_mode, metric_);
      break;
    case KernelKind::kMIKernel:
      break;
  }
  s.self_raw = raw(bag, s, bag, s);
  return s;
}

double BagKernel::raw(const Bag& xi, const BagStructure& si, const Bag& xj,
                      const BagStructure& sj, EvalCounter* counter) const {
  switch (kind_) {
    case KernelKind::kMIGraph:
      return k_G_raw(xi, si.edge_features, xj, sj.edge_features, config_,
                     metric_, counter);
    case KernelKind::kMiGraph:
      return k_g_raw(xi, si.affinity, xj, sj.affinity, config_.gamma_node,
                     metric_, counter);
    case KernelKind::kMIKernel:
      return k_mi_raw(xi, xj, config_.gamma_node, metric_, counter);
  }
  return 0;
}

double BagKernel::operator()(const Bag& xi, const BagStructure& si,
                             const Bag& xj, const BagStructure& sj) const {
  const double value = raw(xi, si, xj, sj);
  if (!config_.normalize) return value;
  return value / std::sqrt(si.self_raw * sj.self_raw);
}

namespace {

std::vector<BagStructure> prepare_all(const std::vector<Bag>& bags,
                                      const BagKernel& kernel,
                                      unsigned threads) {
  std::vector<BagStructure> out(bags.size());
  parallel_for(bags.size(), threads,
               [&](std::size_t i) { out[i] = kernel.prepare(bags[i]); });
  return out;
}

std::vector<std::string> ids_of(const std::vector<Bag>& bags) {
  std::vector<std::string> ids;
  ids.reserve(bags.size());
  for (const Bag& b : bags) ids.push_back(b.id);
  return ids;
}

}  // namespace

GramMatrix gram(const std::vector<Bag>& bags, const BagKernel& kernel,
                unsigned threads) {
  const auto structures = prepare_all(bags, kernel, threads);
  const auto n = static_cast<Eigen::Index>(bags.size());
  GramMatrix g;
  g.values.resize(n, n);
  g.row_ids = g.col_ids = ids_of(bags);
  g.kernel = kernel_display_name(kernel.kind());
  g.config_digest = kernel.config().digest();
  // Row i owns the upper-triangle entries (i, j >= i) and their mirrors.
  parallel_for(bags.size(), threads, [&](std::size_t i) {
    for (std::size_t j = i; j < bags.size(); ++j) {
      const double v =
          kernel(bags[i], structures[i], bags[j], structures[j]);
      g.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      g.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  });
  return g;
}

GramMatrix gram_cross(const std::vector<Bag>& train,
                      const std::vector<Bag>& test, const BagKernel& kernel,
                      unsigned threads) {
  const auto s_train = prepare_all(train, kernel, threads);
  const auto s_test = prepare_all(test, kernel, threads);
  GramMatrix g;
  g.values.resize(static_cast<Eigen::Index>(test.size()),
                  static_cast<Eigen::Index>(train.size()));
  g.row_ids = ids_of(test);
  g.col_ids = ids_of(train);
  g.kernel = kernel_display_name(kernel.kind());
  g.config_digest = kernel.config().digest();
  parallel_for(test.size(), threads, [&](std::size_t r) {
    for (std::size_t c = 0; c < train.size(); ++c) {
      // Evaluate in (train, test) order so entries match gram() on the union.
      g.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          kernel(train[c], s_train[c], test[r], s_test[r]);
    }
  });
  return g;
}

PsdReport check_psd(const Eigen::MatrixXd& symmetric) {
  PsdReport report;
  if (symmetric.rows() == 0) return report;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      symmetric, Eigen::EigenvaluesOnly);
  report.min_eigenvalue = solver.eigenvalues().minCoeff();
  report.max_eigenvalue = solver.eigenvalues().maxCoeff();
  report.is_psd = report.min_eigenvalue >=
                  -1e-8 * std::max(report.max_eigenvalue, 0.0);
  return report;
}

double repair_psd(Eigen::MatrixXd& symmetric) {
  const PsdReport report = check_psd(symmetric);
  if (report.is_psd) return 0;
  const double jitter = std::abs(report.min_eigenvalue) + 1e-10;
  symmetric.diagonal().array() += jitter;
  return jitter;
}

Eigen::MatrixXd normalize_gram(const Eigen::MatrixXd& raw,
                               const Eigen::VectorXd& row_self,
                               const Eigen::VectorXd& col_self) {
  const Eigen::ArrayXd r = row_self.array().sqrt().inverse();
  const Eigen::ArrayXd c = col_self.array().sqrt().inverse();
  return (r.matrix().asDiagonal() * raw * c.matrix().asDiagonal()).eval();
}

}  // namespace migk
