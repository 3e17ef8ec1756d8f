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

#include "migk/stats.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "migk/core_model.hpp"

namespace migk {

double mean(std::span<const double> values) {
  if (values.empty()) return 0;
  double sum = 0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double sample_stddev(std::span<const double> values) {
  if (values.size() < 2) return 0;
  const double m = mean(values);
  double ss = 0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double t_critical(double alpha, double dof) {
  boost::math::students_t dist(dof);
  return boost::math::quantile(boost::math::complement(dist, alpha / 2));
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b,
                          double alpha) {
  if (a.size() != b.size()) {
    throw ValidationError("paired_t_test: vectors differ in length");
  }
  if (a.size() < 2) throw ValidationError("paired_t_test: need >= 2 pairs");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  const double m = mean(diff);
  const double sd = sample_stddev(diff);
  const auto n = static_cast<double>(diff.size());

  TTestResult r;
  r.direction = m > 0 ? 1 : (m < 0 ? -1 : 0);
  if (sd == 0) {
    if (m == 0) return r;
    r.t = m > 0 ? std::numeric_limits<double>::infinity()
                : -std::numeric_limits<double>::infinity();
    r.p_value = 0;
    r.significant = true;
    return r;
  }
  r.t = m / (sd / std::sqrt(n));
  boost::math::students_t dist(n - 1);
  r.p_value = 2 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  r.significant = r.p_value < alpha;
  return r;
}

std::pair<double, double> confidence_interval_95(
    std::span<const double> values) {
  if (values.size() < 2) {
    throw ValidationError("confidence_interval_95: need >= 2 values");
  }
  const double m = mean(values);
  const auto n = static_cast<double>(values.size());
  const double half = t_critical(0.05, n - 1) * sample_stddev(values) /
                      std::sqrt(n);
  return {m - half, m + half};
}

}  // namespace migk
