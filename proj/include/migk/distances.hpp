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

#ifndef MIGK_DISTANCES_HPP_
#define MIGK_DISTANCES_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "migk/core_model.hpp"

namespace migk {

// Class-conditional value counts for every categorical attribute, counted
// over training instances that inherit their bag's label.
class VdmTable {
 public:
  struct ValueCounts {
    std::uint64_t total = 0;
    std::vector<std::uint64_t> per_class;  // aligned with classes()
  };

  VdmTable() = default;

  const std::vector<int>& classes() const { return classes_; }
  std::size_t class_count() const { return classes_.size(); }

  // Counts for `value` on attribute `attr`; nullptr if the value was never
  // seen in training (or the attribute is not categorical).
  const ValueCounts* counts(std::size_t attr, std::int64_t value) const;

  // N_{Z,z,c} / N_{Z,z} for every class; the uniform vector for unseen values.
  std::vector<double> frequencies(std::size_t attr, std::int64_t value) const;

  bool covers(std::size_t attr) const {
    return attr < per_attribute_.size() && per_attribute_[attr].has_value();
  }

 private:
  friend VdmTable build_vdm_table(const Dataset& dataset);
  std::vector<int> classes_;
  std::vector<std::optional<std::map<std::int64_t, ValueCounts>>>
      per_attribute_;
};

// Throws UnsupportedError for regression datasets and ValidationError if the
// schema has no categorical attribute.
VdmTable build_vdm_table(const Dataset& dataset);

// Value Difference Metric between two symbols of one categorical attribute.
double vdm(std::int64_t z1, std::int64_t z2, std::size_t attr,
           const VdmTable& table);

// Square root of (sum of VDM over categorical attributes + sum of squared
// differences over continuous ones). Plain Euclidean distance when the
// schema is all-continuous; `table` must be given iff categorical attributes
// exist. Throws ValidationError on a schema mismatch.
double mixed_distance(const Instance& x1, const Instance& x2,
                      const AttributeSchema& schema, const VdmTable* table);
double mixed_squared_distance(const Instance& x1, const Instance& x2,
                              const AttributeSchema& schema,
                              const VdmTable* table);

// Schema plus optional VDM table, the metric every kernel and graph uses.
class InstanceMetric {
 public:
  InstanceMetric() = default;
  explicit InstanceMetric(AttributeSchema schema,
                          std::optional<VdmTable> table = std::nullopt);

  const AttributeSchema& schema() const { return schema_; }
  const VdmTable* table() const { return table_ ? &*table_ : nullptr; }

  double squared(const Instance& x, const Instance& y) const {
    return mixed_squared_distance(x, y, schema_, table());
  }
  double distance(const Instance& x, const Instance& y) const {
    return mixed_distance(x, y, schema_, table());
  }

  // Euclidean embedding: each categorical symbol becomes its class-frequency
  // vector, continuous values are copied. ||embed(x) - embed(y)||^2 equals
  // squared(x, y).
  std::vector<double> embed(const Instance& x) const;
  std::size_t embedded_dimension() const;

 private:
  AttributeSchema schema_;
  std::optional<VdmTable> table_;
};

// Builds the metric for a (normalized) training split: the VDM table is
// fitted on `train` when the schema has categorical attributes.
InstanceMetric fit_metric(const Dataset& train);

}  // namespace migk

#endif  // MIGK_DISTANCES_HPP_
