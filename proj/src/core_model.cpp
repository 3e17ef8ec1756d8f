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

#include "migk/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_set>

namespace migk {

AttributeSchema AttributeSchema::AllContinuous(std::size_t d) {
  AttributeSchema schema;
  schema.kinds.assign(d, AttributeKind::kContinuous);
  return schema;
}

std::size_t AttributeSchema::categorical_count() const {
  return static_cast<std::size_t>(
      std::count(kinds.begin(), kinds.end(), AttributeKind::kCategorical));
}

double AttributeSchema::transform(std::size_t attr, double value) const {
  if (!normalized || is_categorical(attr)) return value;
  const double lo = range_min[attr];
  const double hi = range_max[attr];
  if (!(hi > lo)) return 0.0;
  return std::clamp((value - lo) / (hi - lo), 0.0, 1.0);
}

Label Label::Binary(int sign) {
  if (sign != 1 && sign != -1) {
    throw ValidationError("binary label must be -1 or +1, got " +
                          std::to_string(sign));
  }
  return Label(LabelKind::kBinary, sign);
}

Label Label::Class(int index) {
  if (index < 1) {
    throw ValidationError("class index must be >= 1, got " +
                          std::to_string(index));
  }
  return Label(LabelKind::kMulticlass, index);
}

Label Label::Real(double target) {
  if (!std::isfinite(target)) {
    throw ValidationError("regression target must be finite");
  }
  return Label(LabelKind::kReal, target);
}

int Label::class_index() const {
  if (kind_ == LabelKind::kReal) {
    throw UnsupportedError("regression labels have no class index");
  }
  return static_cast<int>(value_);
}

std::size_t Dataset::instance_count() const {
  std::size_t n = 0;
  for (const Bag& bag : bags) n += bag.size();
  return n;
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.schema = schema;
  out.bags.reserve(indices.size());
  for (std::size_t i : indices) out.bags.push_back(bags.at(i));
  return out;
}

std::vector<Finding> validate(const Dataset& dataset) {
  std::vector<Finding> findings;
  const AttributeSchema& schema = dataset.schema;
  const std::size_t d = schema.size();
  auto add = [&](std::string code, const std::string& detail) {
    findings.push_back({code, code + ": " + detail});
  };

  if (d == 0) add("empty schema", "dataset declares no attributes");
  if (schema.normalized &&
      (schema.range_min.size() != d || schema.range_max.size() != d)) {
    add("schema ranges", "fitted ranges do not cover every attribute");
  }

  std::unordered_set<std::string> ids;
  bool first = true;
  LabelKind kind = LabelKind::kBinary;
  for (const Bag& bag : dataset.bags) {
    if (!ids.insert(bag.id).second) add("duplicate id", "bag '" + bag.id + "'");
    if (bag.instances.empty()) add("empty bag", "bag '" + bag.id + "'");

    if (first) {
      kind = bag.label.kind();
      first = false;
    } else if (bag.label.kind() != kind) {
      add("mixed labels", "bag '" + bag.id + "' label kind differs");
    }
    const double y = bag.label.value();
    if (bag.label.kind() == LabelKind::kBinary && y != 1.0 && y != -1.0) {
      add("binary label", "bag '" + bag.id + "' has label outside {-1,+1}");
    }
    if (!std::isfinite(y)) add("label", "bag '" + bag.id + "' non-finite");

    for (std::size_t i = 0; i < bag.instances.size(); ++i) {
      const Instance& x = bag.instances[i];
      std::ostringstream where;
      where << "bag '" << bag.id << "' instance " << i;
      if (x.size() != d) {
        add("schema mismatch", where.str() + " has " +
                                   std::to_string(x.size()) +
                                   " values, expected " + std::to_string(d));
        continue;
      }
      for (std::size_t l = 0; l < d; ++l) {
        const double v = x[l];
        if (!std::isfinite(v)) {
          add("non-finite value", where.str() + " attribute " +
                                      std::to_string(l));
        } else if (schema.is_categorical(l)) {
          if (v != std::floor(v) || v < 0) {
            add("categorical code",
                where.str() + " attribute " + std::to_string(l));
          }
        } else if (schema.normalized && (v < 0.0 || v > 1.0)) {
          add("not normalized", where.str() + " attribute " +
                                    std::to_string(l) + " outside [0,1]");
        }
      }
    }
  }
  return findings;
}

Dataset normalize_continuous(const Dataset& dataset) {
  if (dataset.bags.empty()) {
    throw ValidationError("cannot normalize an empty dataset");
  }
  const std::size_t d = dataset.schema.size();
  AttributeSchema fitted = dataset.schema;
  fitted.range_min.assign(d, std::numeric_limits<double>::infinity());
  fitted.range_max.assign(d, -std::numeric_limits<double>::infinity());

  for (const Bag& bag : dataset.bags) {
    for (std::size_t i = 0; i < bag.instances.size(); ++i) {
      const Instance& x = bag.instances[i];
      if (x.size() != d) {
        throw ValidationError("bag '" + bag.id + "' instance " +
                              std::to_string(i) + " does not match schema");
      }
      for (std::size_t l = 0; l < d; ++l) {
        if (fitted.is_categorical(l)) continue;
        if (!std::isfinite(x[l])) {
          throw ValidationError("non-finite value in bag '" + bag.id +
                                "' instance " + std::to_string(i) +
                                " attribute " + std::to_string(l));
        }
        fitted.range_min[l] = std::min(fitted.range_min[l], x[l]);
        fitted.range_max[l] = std::max(fitted.range_max[l], x[l]);
      }
    }
  }
  for (std::size_t l = 0; l < d; ++l) {
    if (fitted.is_categorical(l)) fitted.range_min[l] = fitted.range_max[l] = 0;
  }
  fitted.normalized = true;
  return apply_normalization(fitted, dataset);
}

Bag apply_normalization(const AttributeSchema& fitted, const Bag& bag) {
  Bag out = bag;
  for (Instance& x : out.instances) {
    if (x.size() != fitted.size()) {
      throw ValidationError("bag '" + bag.id + "' does not match schema");
    }
    for (std::size_t l = 0; l < x.size(); ++l) {
      x.values[l] = fitted.transform(l, x.values[l]);
    }
  }
  return out;
}

Dataset apply_normalization(const AttributeSchema& fitted,
                            const Dataset& dataset) {
  Dataset out;
  out.schema = fitted;
  out.bags.reserve(dataset.size());
  for (const Bag& bag : dataset.bags) {
    out.bags.push_back(apply_normalization(fitted, bag));
  }
  return out;
}

}  // namespace migk
