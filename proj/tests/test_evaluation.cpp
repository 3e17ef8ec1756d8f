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

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "migk/evaluation.hpp"
#include "migk/stats.hpp"
#include "support.hpp"

using namespace migk;
using migk::testing::make_bag;

namespace {

// Positive bags hold one instance near the corner (1, 1, 1); every other
// instance is background noise in [0, 0.5].
Dataset separable(std::size_t per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(0.0, 0.5);
  Dataset ds;
  ds.schema = AttributeSchema::AllContinuous(3);
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const bool positive = i % 2 == 0;
    Bag b;
    b.id = "bag" + std::to_string(i);
    b.label = Label::Binary(positive ? 1 : -1);
    const std::size_t n = 2 + rng() % 4;
    for (std::size_t k = 0; k < n; ++k) {
      b.instances.push_back(Instance{{noise(rng), noise(rng), noise(rng)}});
    }
    if (positive) b.instances[0] = Instance{{0.95, 0.97, 0.99}};
    ds.bags.push_back(b);
  }
  return ds;
}

ParamGrid small_grid() {
  ParamGrid g = ParamGrid::Default();
  g.gamma_scales = {0.5, 2};
  g.edge_gamma_scales = {1};
  g.C_values = {1, 10};
  g.lambdas = {0.01, 0.1};
  return g;
}

}  // namespace

TEST_CASE("paired t-test") {
  const std::vector<double> a{3, 1, 2, 2}, b{1, 1, 1, 1};
  const TTestResult r = paired_t_test(a, b);
  // Differences [2, 0, 1, 1]: mean 1, sd sqrt(2/3).
  CHECK(r.t == doctest::Approx(1.0 / (std::sqrt(2.0 / 3.0) / 2.0)).epsilon(1e-12));
  CHECK(r.t == doctest::Approx(2.449).epsilon(1e-3));
  CHECK(r.direction == 1);
  const TTestResult s = paired_t_test(b, a);
  CHECK(s.t == doctest::Approx(-r.t));
  CHECK(s.direction == -1);
  CHECK(s.p_value == doctest::Approx(r.p_value));
  CHECK_FALSE(r.significant);  // p ~ 0.09 with 3 degrees of freedom

  const TTestResult same = paired_t_test(a, a);
  CHECK(same.t == 0.0);
  CHECK_FALSE(same.significant);
  const std::vector<double> shifted{4, 2, 3, 3};
  const TTestResult constant = paired_t_test(shifted, a);
  CHECK(std::isinf(constant.t));
  CHECK(constant.significant);
  CHECK_THROWS_AS(paired_t_test(a, std::vector<double>{1, 2}), ValidationError);
}

TEST_CASE("confidence intervals") {
  const auto [lo, hi] = confidence_interval_95(std::vector<double>{80, 84});
  CHECK(t_critical(0.05, 1) == doctest::Approx(12.706).epsilon(1e-4));
  // Sample standard deviation of [80, 84] is sqrt(8).
  const double half = 12.7062047 * std::sqrt(8.0) / std::sqrt(2.0);
  CHECK(lo == doctest::Approx(82 - half).epsilon(1e-6));
  CHECK(hi == doctest::Approx(82 + half).epsilon(1e-6));
  const auto [l2, h2] = confidence_interval_95(std::vector<double>{5, 5, 5});
  CHECK(l2 == 5.0);
  CHECK(h2 == 5.0);
  CHECK(mean(std::vector<double>{1, 2, 3}) == 2.0);
  CHECK(sample_stddev(std::vector<double>{1, 2, 3}) == 1.0);
}

TEST_CASE("fold partitions") {
  std::vector<int> strata(10);
  for (int i = 0; i < 10; ++i) strata[static_cast<std::size_t>(i)] = i < 5 ? 1 : -1;
  const Partition p = make_partition(strata, 2, 7, true);
  REQUIRE(p.size() == 2);
  for (const auto& fold : p) {
    CHECK(fold.size() == 5);
    const auto pos = std::count_if(fold.begin(), fold.end(), [](std::size_t i) { return i < 5; });
    CHECK(pos >= 2);
    CHECK(pos <= 3);
  }
  CHECK(make_partition(strata, 2, 7, true) == p);
  CHECK_THROWS_AS(make_partition(strata, 11, 7, true), ValidationError);

  SUBCASE("partitions are exact and stratified within one") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 10 + rng() % 60;
      const std::size_t k = 2 + rng() % 9;
      std::vector<int> s(n);
      for (auto& v : s) v = 1 + static_cast<int>(rng() % 3);
      const Partition q = make_partition(s, k, rng(), true);
      std::multiset<std::size_t> all;
      for (const auto& f : q) all.insert(f.begin(), f.end());
      CHECK(all.size() == n);
      CHECK(std::set<std::size_t>(all.begin(), all.end()).size() == n);
      for (int c = 1; c <= 3; ++c) {
        std::vector<long> counts;
        for (const auto& f : q) {
          counts.push_back(std::count_if(f.begin(), f.end(), [&](std::size_t i) { return s[i] == c; }));
        }
        CHECK(*std::max_element(counts.begin(), counts.end()) -
                  *std::min_element(counts.begin(), counts.end()) <= 1);
      }
    }
  }
  SUBCASE("small strata produce a warning") {
    std::vector<std::string> warnings;
    std::vector<int> s{1, 1, 1, 1, 1, 1, -1};
    make_partition(s, 3, 1, true, &warnings);
    CHECK_FALSE(warnings.empty());
  }
  SUBCASE("repetitions use different partitions") {
    const Dataset ds = separable(10, 1);
    CvPlan plan;
    plan.folds = 5;
    plan.repetitions = 2;
    const auto folds = make_folds(ds, plan, Task::kClassify);
    REQUIRE(folds.size() == 2);
    CHECK(folds[0] != folds[1]);
    CHECK(make_folds(ds, plan, Task::kClassify) == folds);
  }
}

TEST_CASE("parameter grid defaults") {
  const ParamGrid g = ParamGrid::Default();
  REQUIRE(g.gamma_scales.size() == 9);
  CHECK(g.gamma_scales.front() == 1.0 / 16);
  CHECK(g.gamma_scales.back() == 16.0);
  CHECK(g.C_values == std::vector<double>{0.1, 1, 10, 100});
  CHECK(g.lambdas == std::vector<double>{1e-3, 1e-2, 1e-1, 1});
  CHECK(g.inner_folds == 3);
  ParamGrid bad = g;
  bad.C_values.clear();
  CHECK_THROWS_AS(bad.check(), ValidationError);
}

TEST_CASE("mean pairwise squared distance closed form") {
  std::mt19937_64 rng(13);
  Eigen::MatrixXd rows = Eigen::MatrixXd::Random(17, 4);
  double total = 0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < rows.rows(); ++j) total += (rows.row(i) - rows.row(j)).squaredNorm();
  }
  CHECK(mean_pairwise_squared_distance(rows) ==
        doctest::Approx(total / (17.0 * 16.0 / 2.0)).epsilon(1e-12));
}

TEST_CASE("cross validation on a separable problem") {
  const Dataset ds = separable(10, 5);
  CvPlan plan;
  plan.folds = 5;
  plan.repetitions = 2;
  for (auto kind : {KernelKind::kMIGraph, KernelKind::kMiGraph, KernelKind::kMIKernel}) {
    CAPTURE(kernel_display_name(kind));
    const RunResult r = cross_validate(ds, kind, Task::kClassify, plan, small_grid());
    CHECK(r.folds.size() == 10);
    CHECK(r.mean == 100.0);
    CHECK(r.metric_name == "accuracy");
    for (const auto& f : r.folds) {
      CHECK(f.n_train + f.n_test == ds.size());
      CHECK(f.model_digest != 0);
    }
  }
}

TEST_CASE("permuted labels give chance accuracy") {
  Dataset ds = separable(20, 9);
  std::mt19937_64 rng(99);
  std::vector<int> labels;
  for (const Bag& b : ds.bags) labels.push_back(b.label.class_index());
  std::shuffle(labels.begin(), labels.end(), rng);
  for (std::size_t i = 0; i < ds.size(); ++i) ds.bags[i].label = Label::Binary(labels[i]);
  CvPlan plan;
  plan.seed = 4;
  const RunResult r = cross_validate(ds, KernelKind::kMIKernel, Task::kClassify, plan, small_grid());
  CHECK(r.folds.size() == 100);
  CHECK(r.mean >= 40.0);
  CHECK(r.mean <= 60.0);
}

TEST_CASE("aggregate statistics are recomputable from folds") {
  const Dataset ds = separable(8, 21);
  CvPlan plan;
  plan.folds = 4;
  plan.repetitions = 3;
  const RunResult r = cross_validate(ds, KernelKind::kMiGraph, Task::kClassify, plan, small_grid());
  const auto m = r.metrics();
  CHECK(r.mean == doctest::Approx(mean(m)));
  CHECK(r.stddev == doctest::Approx(sample_stddev(m)));
  CHECK(r.ci_low <= r.mean);
  CHECK(r.ci_high >= r.mean);
  for (std::size_t i = 1; i < r.folds.size(); ++i) {
    CHECK(std::pair(r.folds[i - 1].repetition, r.folds[i - 1].fold) <
          std::pair(r.folds[i].repetition, r.folds[i].fold));
  }
}

TEST_CASE("cross validation is reproducible and schedule independent") {
  const Dataset ds = separable(10, 33);
  CvPlan plan;
  plan.folds = 5;
  plan.repetitions = 2;
  CvOptions one, many;
  one.threads = 1;
  many.threads = 3;
  const RunResult a = cross_validate(ds, KernelKind::kMIGraph, Task::kClassify, plan, small_grid(), one);
  const RunResult b = cross_validate(ds, KernelKind::kMIGraph, Task::kClassify, plan, small_grid(), many);
  CHECK(a.digest() == b.digest());
  CHECK(run_result_json(a) == run_result_json(b));
  plan.seed = 2;
  const RunResult c = cross_validate(ds, KernelKind::kMIGraph, Task::kClassify, plan, small_grid(), one);
  CHECK(c.digest() != a.digest());
}

TEST_CASE("test-fold features never reach the trained model") {
  // Mixed schema so the VDM table and the normalization ranges are covered.
  std::mt19937_64 rng(71);
  Dataset ds;
  ds.schema.kinds = {AttributeKind::kCategorical, AttributeKind::kContinuous,
                     AttributeKind::kContinuous};
  for (int i = 0; i < 16; ++i) {
    Bag b;
    b.id = "m" + std::to_string(i);
    b.label = Label::Binary(i % 2 ? 1 : -1);
    for (std::size_t k = 0; k < 2 + rng() % 3; ++k) {
      b.instances.push_back(Instance{{static_cast<double>(rng() % 3),
                                      (rng() % 100) / 10.0, (rng() % 100) / 10.0}});
    }
    ds.bags.push_back(b);
  }
  CvPlan plan;
  plan.folds = 4;
  plan.repetitions = 2;
  const auto partitions = make_folds(ds, plan, Task::kClassify);
  for (auto kind : {KernelKind::kMIGraph, KernelKind::kMiGraph, KernelKind::kMIKernel}) {
    for (const auto& partition : partitions) {
      for (std::size_t f = 0; f < partition.size(); ++f) {
        std::vector<std::size_t> train;
        for (std::size_t g = 0; g < partition.size(); ++g) {
          if (g != f) train.insert(train.end(), partition[g].begin(), partition[g].end());
        }
        std::sort(train.begin(), train.end());
        Dataset mutated = ds;
        for (std::size_t i : partition[f]) {
          for (auto& x : mutated.bags[i].instances) {
            x.values[0] = 2 - x.values[0];
            x.values[1] = x.values[1] * 50 - 7;
            x.values[2] = -x.values[2];
          }
        }
        const auto a = run_outer_fold(ds, train, partition[f], kind, Task::kClassify,
                                      small_grid(), {}, 5);
        const auto b = run_outer_fold(mutated, train, partition[f], kind,
                                      Task::kClassify, small_grid(), {}, 5);
        CHECK(a.model_digest == b.model_digest);
      }
    }
  }
}

TEST_CASE("multiclass cross validation") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> noise(0.0, 0.05);
  Dataset ds;
  ds.schema = AttributeSchema::AllContinuous(2);
  const double centers[3][2] = {{0, 0}, {1, 0}, {0, 1}};
  for (int i = 0; i < 24; ++i) {
    const int c = i % 3;
    Bag b;
    b.id = "c" + std::to_string(i);
    b.label = Label::Class(c + 1);
    for (int k = 0; k < 3; ++k) {
      b.instances.push_back(Instance{{centers[c][0] + noise(rng), centers[c][1] + noise(rng)}});
    }
    ds.bags.push_back(b);
  }
  CvPlan plan;
  plan.folds = 4;
  plan.repetitions = 1;
  const RunResult r = cross_validate(ds, KernelKind::kMiGraph, Task::kMulticlass, plan, small_grid());
  CHECK(r.mean == 100.0);
}

TEST_CASE("leave-one-out regression") {
  SUBCASE("constant targets") {
    Dataset ds = separable(4, 3);
    for (Bag& b : ds.bags) b.label = Label::Real(0.5);
    CvPlan plan;
    plan.folds = 4;
    ParamGrid g = small_grid();
    g.lambdas = {1e-3};
    const RunResult r = leave_one_out(ds, KernelKind::kMIKernel, plan, g);
    CHECK(r.folds.size() == ds.size());
    CHECK(r.metric_name == "squared_loss");
    CHECK(r.mean < 0.01);
  }
  SUBCASE("orthogonal bags predict zero") {
    // Distinct single-instance bags under a very narrow kernel: the Gram
    // matrix is the identity. Points stay distinct under every training
    // split's normalization.
    Dataset ds;
    ds.schema = AttributeSchema::AllContinuous(2);
    ds.bags.push_back(make_bag("a", {{0, 0.5}}));
    ds.bags.push_back(make_bag("b", {{0.5, 0}}));
    ds.bags.push_back(make_bag("c", {{1, 1}}));
    ds.bags[0].label = Label::Real(0.2);
    ds.bags[1].label = Label::Real(0.4);
    ds.bags[2].label = Label::Real(0.6);
    ParamGrid g = small_grid();
    g.gamma_scales = {1e4};
    g.lambdas = {0.1};
    CvPlan plan;
    plan.folds = 3;
    const RunResult r = leave_one_out(ds, KernelKind::kMIKernel, plan, g);
    CHECK(r.mean == doctest::Approx((0.04 + 0.16 + 0.36) / 3).epsilon(1e-9));
  }
  SUBCASE("needs three bags") {
    Dataset ds;
    ds.schema = AttributeSchema::AllContinuous(1);
    ds.bags.push_back(make_bag("a", {{0}}));
    ds.bags.push_back(make_bag("b", {{1}}));
    for (Bag& b : ds.bags) b.label = Label::Real(0.5);
    CHECK_THROWS_AS(leave_one_out(ds, KernelKind::kMIKernel, {}, small_grid()), ValidationError);
  }
}

TEST_CASE("compare pairs the two runs on shared folds") {
  const Dataset ds = separable(10, 41);
  CvPlan plan;
  plan.folds = 5;
  plan.repetitions = 2;
  const CompareResult c = compare(ds, KernelKind::kMiGraph, KernelKind::kMIKernel,
                                  Task::kClassify, plan, small_grid());
  CHECK(c.a.folds.size() == c.b.folds.size());
  for (std::size_t i = 0; i < c.a.folds.size(); ++i) {
    CHECK(c.a.folds[i].n_test == c.b.folds[i].n_test);
  }
  CHECK(c.mean_difference == doctest::Approx(c.a.mean - c.b.mean));
}

TEST_CASE("final models predict held-out bags") {
  const Dataset train = separable(10, 51);
  const Dataset test = separable(5, 52);
  for (auto kind : {KernelKind::kMIGraph, KernelKind::kMiGraph, KernelKind::kMIKernel}) {
    const TrainedModel m = train_model(train, kind, Task::kClassify, small_grid(), {}, 1);
    const auto pred = predict_model(m.bundle, train, test);
    REQUIRE(pred.size() == test.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
      CHECK(pred[i] == test.bags[i].label.value());
    }
    // Training bags predicted through the cross path reproduce the fit.
    const auto self = predict_model(m.bundle, train, train);
    for (std::size_t i = 0; i < self.size(); ++i) CHECK(self[i] == train.bags[i].label.value());
    CHECK_THROWS_AS(predict_model(m.bundle, test, test), ValidationError);
  }
}
