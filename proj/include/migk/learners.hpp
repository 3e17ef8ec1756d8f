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

#ifndef MIGK_LEARNERS_HPP_
#define MIGK_LEARNERS_HPP_

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace migk {

class NotPsdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SvmOptions {
  double tol = 1e-3;  // stop when the maximal KKT violation drops below tol
  std::size_t max_iterations = 10'000'000;
  bool verify_psd = true;
};

// C-SVM in dual form over a precomputed kernel. The decision value is
// sum_i alpha_i y_i k(X_i, X) + bias.
struct SvmModel {
  std::vector<double> alpha;
  std::vector<int> labels;  // +1 / -1
  double bias = 0;
  double C = 1;
  std::vector<std::string> bag_ids;
  std::size_t iterations = 0;

  std::size_t size() const { return alpha.size(); }
  std::vector<double> coefficients() const;  // alpha_i * y_i
  // sum(alpha) - 1/2 alpha' Q alpha with Q_ij = y_i y_j K_ij.
  double dual_objective(const Eigen::MatrixXd& gram) const;
};

// Sequential minimal optimization with maximal-violating-pair selection.
// Throws ValidationError for mismatched sizes, labels outside {-1, +1} or a
// single class; NotPsdError when verify_psd is set and the matrix fails the
// PSD check.
SvmModel svm_train(const Eigen::MatrixXd& gram, std::span<const int> labels,
                   double C, const SvmOptions& options = {},
                   std::vector<std::string> bag_ids = {});

struct SvmPrediction {
  double score = 0;
  int label = 1;  // sign(score), ties -> +1
};

// `cross` holds k(X_i, X) for every training bag, in training order.
SvmPrediction svm_predict(const SvmModel& model, std::span<const double> cross);

// One binary machine per class pair (a < b); class b is the positive side.
struct OvoModel {
  struct Pair {
    int negative_class;
    int positive_class;
    std::vector<std::size_t> members;  // indices into the training set
    SvmModel model;
  };
  std::vector<int> classes;
  std::vector<Pair> pairs;
  std::size_t training_size = 0;
  std::vector<std::string> bag_ids;
};

OvoModel ovo_train(const Eigen::MatrixXd& gram, std::span<const int> classes,
                   double C, const SvmOptions& options = {},
                   std::vector<std::string> bag_ids = {});
// Majority vote; ties go to the larger summed |score| of won pairs, then to
// the lowest class index.
int ovo_predict(const OvoModel& model, std::span<const double> cross);

// Kernel ridge regression: (K + lambda I) beta = y.
struct KrrModel {
  std::vector<double> beta;
  double lambda = 0;
  bool clip_unit = false;  // clip predictions to [0, 1]
  std::vector<std::string> bag_ids;
};

// Throws ValidationError when the system is singular (lambda = 0 on a
// rank-deficient gram).
KrrModel krr_train(const Eigen::MatrixXd& gram, std::span<const double> targets,
                   double lambda, bool clip_unit = false,
                   std::vector<std::string> bag_ids = {});
double krr_predict(const KrrModel& model, std::span<const double> cross);

}  // namespace migk

#endif  // MIGK_LEARNERS_HPP_
