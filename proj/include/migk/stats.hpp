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

#ifndef MIGK_STATS_HPP_
#define MIGK_STATS_HPP_

#include <span>
#include <utility>

namespace migk {

double mean(std::span<const double> values);
// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double sample_stddev(std::span<const double> values);

struct TTestResult {
  double t = 0;        // +/-inf when the differences are constant and non-zero
  double p_value = 1;  // two-sided
  bool significant = false;
  int direction = 0;   // sign of mean(a - b)
};

// Two-sided paired t-test with n - 1 degrees of freedom. Throws
// ValidationError on a length mismatch or fewer than 2 pairs.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b,
                          double alpha = 0.05);

// Two-sided Student t quantile t_{1 - alpha/2, dof}.
double t_critical(double alpha, double dof);

// mean +/- t_{0.975, n-1} * sd / sqrt(n). Needs at least 2 values.
std::pair<double, double> confidence_interval_95(std::span<const double> values);

}  // namespace migk

#endif  // MIGK_STATS_HPP_
