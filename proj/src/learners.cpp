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

#include "migk/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "migk/core_model.hpp"
#include "migk/kernels.hpp"

namespace migk {

std::vector<double> SvmModel::coefficients() const {
  std::vector<double> out(alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) out[i] = alpha[i] * labels[i];
  return out;
}

double SvmModel::dual_objective(const Eigen::MatrixXd& gram) const {
  const auto n = static_cast<Eigen::Index>(alpha.size());
  Eigen::VectorXd ay(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ay(i) = alpha[static_cast<std::size_t>(i)] *
            labels[static_cast<std::size_t>(i)];
  }
  double sum = 0;
  for (double a : alpha) sum += a;
  return sum - 0.5 * ay.dot(gram * ay);
}

SvmModel svm_train(const Eigen::MatrixXd& gram, std::span<const int> labels,
                   double C, const SvmOptions& options,
                   std::vector<std::string> bag_ids) {
  const std::size_t n = labels.size();
  if (gram.rows() != gram.cols() ||
      static_cast<std::size_t>(gram.rows()) != n) {
    throw ValidationError("svm_train: gram size does not match label count");
  }
  if (!(C > 0)) throw ValidationError("svm_train: C must be positive");
  bool has_pos = false, has_neg = false;
  for (int y : labels) {
    if (y == 1) {
      has_pos = true;
    } else if (y == -1) {
      has_neg = true;
    } else {
      throw ValidationError("svm_train: labels must be -1 or +1");
    }
  }
  if (!has_pos || !has_neg) {
    throw ValidationError("svm_train: both classes must be present");
  }
  if (options.verify_psd) {
    const PsdReport psd = check_psd(gram);
    if (!psd.is_psd) {
      throw NotPsdError("svm_train: gram matrix is not PSD (min eigenvalue " +
                        std::to_string(psd.min_eigenvalue) + ")");
    }
  }

  constexpr double kTau = 1e-12;
  auto y = [&](std::size_t i) { return static_cast<double>(labels[i]); };
  auto q = [&](std::size_t i, std::size_t j) {
    return y(i) * y(j) *
           gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  };

  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // Q alpha - e
  auto in_up = [&](std::size_t t) {
    return (labels[t] == 1 && alpha[t] < C) || (labels[t] == -1 && alpha[t] > 0);
  };
  auto in_low = [&](std::size_t t) {
    return (labels[t] == 1 && alpha[t] > 0) || (labels[t] == -1 && alpha[t] < C);
  };

  std::size_t iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    double m_up = -std::numeric_limits<double>::infinity();
    double m_low = std::numeric_limits<double>::infinity();
    std::size_t i = n, j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y(t) * grad[t];
      if (in_up(t) && v > m_up) {
        m_up = v;
        i = t;
      }
      if (in_low(t) && v < m_low) {
        m_low = v;
        j = t;
      }
    }
    if (i == n || j == n || m_up - m_low < options.tol) break;

    const double old_i = alpha[i];
    const double old_j = alpha[j];
    if (labels[i] != labels[j]) {
      double quad = q(i, i) + q(j, j) + 2 * q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) {
          alpha[j] = 0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = -diff;
      }
      if (diff > 0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = q(i, i) + q(j, j) - 2 * q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0) {
        alpha[j] = 0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = sum;
      }
    }

    const double di = alpha[i] - old_i;
    const double dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q(t, i) * di + q(t, j) * dj;
  }

  // Bias from free vectors, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y(t) * grad[t];
    if (alpha[t] >= C) {
      if (labels[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0) {
      if (labels[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count)
                                    : (ub + lb) / 2;

  SvmModel model;
  model.alpha = std::move(alpha);
  model.labels.assign(labels.begin(), labels.end());
  model.bias = -rho;
  model.C = C;
  model.bag_ids = std::move(bag_ids);
  model.iterations = iter;
  return model;
}

SvmPrediction svm_predict(const SvmModel& model,
                          std::span<const double> cross) {
  if (cross.size() != model.size()) {
    throw ValidationError("svm_predict: kernel row has " +
                          std::to_string(cross.size()) + " entries, model has " +
                          std::to_string(model.size()) + " training bags");
  }
  double score = model.bias;
  for (std::size_t i = 0; i < cross.size(); ++i) {
    if (model.alpha[i] != 0) score += model.alpha[i] * model.labels[i] * cross[i];
  }
  return {score, score >= 0 ? 1 : -1};
}

OvoModel ovo_train(const Eigen::MatrixXd& gram, std::span<const int> classes,
                   double C, const SvmOptions& options,
                   std::vector<std::string> bag_ids) {
  if (static_cast<std::size_t>(gram.rows()) != classes.size() ||
      gram.rows() != gram.cols()) {
    throw ValidationError("ovo_train: gram size does not match label count");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    by_class[classes[i]].push_back(i);
  }
  if (by_class.size() < 2) {
    throw ValidationError("ovo_train: at least two classes are required");
  }
  if (options.verify_psd && !check_psd(gram).is_psd) {
    throw NotPsdError("ovo_train: gram matrix is not PSD");
  }
  SvmOptions pair_options = options;
  pair_options.verify_psd = false;  // principal submatrices of a PSD matrix

  OvoModel model;
  model.training_size = classes.size();
  model.bag_ids = std::move(bag_ids);
  for (const auto& [c, members] : by_class) model.classes.push_back(c);
  for (auto a = by_class.begin(); a != by_class.end(); ++a) {
    for (auto b = std::next(a); b != by_class.end(); ++b) {
      OvoModel::Pair pair;
      pair.negative_class = a->first;
      pair.positive_class = b->first;
      std::vector<int> y;
      pair.members = a->second;
      pair.members.insert(pair.members.end(), b->second.begin(),
                          b->second.end());
      std::sort(pair.members.begin(), pair.members.end());
      for (std::size_t idx : pair.members) {
        y.push_back(classes[idx] == pair.positive_class ? 1 : -1);
      }
      const auto m = static_cast<Eigen::Index>(pair.members.size());
      Eigen::MatrixXd sub(m, m);
      for (Eigen::Index r = 0; r < m; ++r) {
        for (Eigen::Index c = 0; c < m; ++c) {
          sub(r, c) = gram(static_cast<Eigen::Index>(pair.members[r]),
                           static_cast<Eigen::Index>(pair.members[c]));
        }
      }
      pair.model = svm_train(sub, y, C, pair_options);
      model.pairs.push_back(std::move(pair));
    }
  }
  return model;
}

int ovo_predict(const OvoModel& model, std::span<const double> cross) {
  if (cross.size() != model.training_size) {
    throw ValidationError("ovo_predict: kernel row length mismatch");
  }
  std::map<int, std::pair<int, double>> tally;  // votes, summed |score|
  for (int c : model.classes) tally[c] = {0, 0.0};
  std::vector<double> sub;
  for (const auto& pair : model.pairs) {
    sub.clear();
    for (std::size_t idx : pair.members) sub.push_back(cross[idx]);
    const SvmPrediction p = svm_predict(pair.model, sub);
    auto& entry =
        tally[p.label == 1 ? pair.positive_class : pair.negative_class];
    entry.first += 1;
    entry.second += std::abs(p.score);
  }
  int best = model.classes.front();
  for (int c : model.classes) {  // ascending, so strict ">" keeps the lowest
    const auto& [votes, strength] = tally[c];
    const auto& [best_votes, best_strength] = tally[best];
    if (votes > best_votes || (votes == best_votes && strength > best_strength)) {
      best = c;
    }
  }
  return best;
}

KrrModel krr_train(const Eigen::MatrixXd& gram, std::span<const double> targets,
                   double lambda, bool clip_unit,
                   std::vector<std::string> bag_ids) {
  const auto n = static_cast<Eigen::Index>(targets.size());
  if (gram.rows() != n || gram.cols() != n) {
    throw ValidationError("krr_train: gram size does not match target count");
  }
  if (!(lambda >= 0)) throw ValidationError("krr_train: lambda must be >= 0");
  const Eigen::Map<const Eigen::VectorXd> y(targets.data(), n);
  Eigen::MatrixXd a = gram;
  a.diagonal().array() += lambda;
  Eigen::VectorXd beta = a.ldlt().solve(y);
  const double residual = (a * beta - y).norm();
  if (!beta.allFinite() || residual > 1e-8 * std::max(y.norm(), 1e-300)) {
    throw ValidationError(
        "krr_train: singular system (K + lambda I); use lambda > 0");
  }
  KrrModel model;
  model.beta.assign(beta.data(), beta.data() + n);
  model.lambda = lambda;
  model.clip_unit = clip_unit;
  model.bag_ids = std::move(bag_ids);
  return model;
}

double krr_predict(const KrrModel& model, std::span<const double> cross) {
  if (cross.size() != model.beta.size()) {
    throw ValidationError("krr_predict: kernel row length mismatch");
  }
  double v = 0;
  for (std::size_t i = 0; i < cross.size(); ++i) v += model.beta[i] * cross[i];
  return model.clip_unit ? std::clamp(v, 0.0, 1.0) : v;
}

}  // namespace migk
