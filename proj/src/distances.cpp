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

#include "migk/distances.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace migk {

const VdmTable::ValueCounts* VdmTable::counts(std::size_t attr,
                                              std::int64_t value) const {
  if (!covers(attr)) return nullptr;
  const auto& values = *per_attribute_[attr];
  auto it = values.find(value);
  return it == values.end() ? nullptr : &it->second;
}

std::vector<double> VdmTable::frequencies(std::size_t attr,
                                          std::int64_t value) const {
  const std::size_t c = class_count();
  const ValueCounts* vc = counts(attr, value);
  if (vc == nullptr || vc->total == 0) {
    return std::vector<double>(c, 1.0 / static_cast<double>(c));
  }
  std::vector<double> f(c);
  for (std::size_t k = 0; k < c; ++k) {
    f[k] = static_cast<double>(vc->per_class[k]) /
           static_cast<double>(vc->total);
  }
  return f;
}

VdmTable build_vdm_table(const Dataset& dataset) {
  const AttributeSchema& schema = dataset.schema;
  if (!schema.has_categorical()) {
    throw ValidationError("VDM table needs at least one categorical attribute");
  }
  std::set<int> class_set;
  for (const Bag& bag : dataset.bags) {
    if (bag.label.kind() == LabelKind::kReal) {
      throw UnsupportedError(
          "VDM needs class labels; regression datasets are unsupported");
    }
    class_set.insert(bag.label.class_index());
  }

  VdmTable table;
  table.classes_.assign(class_set.begin(), class_set.end());
  table.per_attribute_.resize(schema.size());
  for (std::size_t l = 0; l < schema.size(); ++l) {
    if (schema.is_categorical(l)) table.per_attribute_[l].emplace();
  }

  for (const Bag& bag : dataset.bags) {
    const auto cls = static_cast<std::size_t>(
        std::lower_bound(table.classes_.begin(), table.classes_.end(),
                         bag.label.class_index()) -
        table.classes_.begin());
    for (const Instance& x : bag.instances) {
      for (std::size_t l = 0; l < schema.size(); ++l) {
        if (!schema.is_categorical(l)) continue;
        auto& vc = (*table.per_attribute_[l])[static_cast<std::int64_t>(x[l])];
        if (vc.per_class.empty()) vc.per_class.assign(table.class_count(), 0);
        ++vc.total;
        ++vc.per_class[cls];
      }
    }
  }
  return table;
}

double vdm(std::int64_t z1, std::int64_t z2, std::size_t attr,
           const VdmTable& table) {
  if (z1 == z2) return 0.0;
  const std::vector<double> f1 = table.frequencies(attr, z1);
  const std::vector<double> f2 = table.frequencies(attr, z2);
  double sum = 0.0;
  for (std::size_t c = 0; c < f1.size(); ++c) {
    const double diff = f1[c] - f2[c];
    sum += diff * diff;
  }
  return sum;
}

double mixed_squared_distance(const Instance& x1, const Instance& x2,
                              const AttributeSchema& schema,
                              const VdmTable* table) {
  const std::size_t d = schema.size();
  if (x1.size() != d || x2.size() != d) {
    throw ValidationError("instance length does not match the schema");
  }
  double sum = 0.0;
  for (std::size_t l = 0; l < d; ++l) {
    if (schema.is_categorical(l)) {
      if (table == nullptr) {
        throw ValidationError("categorical attribute without a VDM table");
      }
      sum += vdm(static_cast<std::int64_t>(x1[l]),
                 static_cast<std::int64_t>(x2[l]), l, *table);
    } else {
      const double diff = x1[l] - x2[l];
      sum += diff * diff;
    }
  }
  return sum;
}

double mixed_distance(const Instance& x1, const Instance& x2,
                      const AttributeSchema& schema, const VdmTable* table) {
  return std::sqrt(mixed_squared_distance(x1, x2, schema, table));
}

InstanceMetric::InstanceMetric(AttributeSchema schema,
                               std::optional<VdmTable> table)
    : schema_(std::move(schema)), table_(std::move(table)) {
  if (schema_.has_categorical() && !table_) {
    throw ValidationError("categorical schema requires a VDM table");
  }
}

std::size_t InstanceMetric::embedded_dimension() const {
  std::size_t dim = 0;
  for (std::size_t l = 0; l < schema_.size(); ++l) {
    dim += schema_.is_categorical(l) ? table_->class_count() : 1;
  }
  return dim;
}

std::vector<double> InstanceMetric::embed(const Instance& x) const {
  std::vector<double> out;
  out.reserve(embedded_dimension());
  for (std::size_t l = 0; l < schema_.size(); ++l) {
    if (schema_.is_categorical(l)) {
      const auto f = table_->frequencies(l, static_cast<std::int64_t>(x[l]));
      out.insert(out.end(), f.begin(), f.end());
    } else {
      out.push_back(x[l]);
    }
  }
  return out;
}

InstanceMetric fit_metric(const Dataset& train) {
  if (!train.schema.has_categorical()) return InstanceMetric(train.schema);
  return InstanceMetric(train.schema, build_vdm_table(train));
}

}  // namespace migk
