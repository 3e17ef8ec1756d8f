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

#ifndef MIGK_CORE_MODEL_HPP_
#define MIGK_CORE_MODEL_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace migk {

// Raised when a dataset or argument breaks a documented invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for inputs the operation does not support (e.g. VDM on regression).
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AttributeKind { kCategorical, kContinuous };

// Per-attribute kinds plus the continuous ranges fitted by
// normalize_continuous(). Categorical values are stored as integer symbol
// codes inside Instance::values.
struct AttributeSchema {
  std::vector<AttributeKind> kinds;
  // Observed training min/max, indexed by attribute; only meaningful for
  // continuous attributes and only once `normalized` is set.
  std::vector<double> range_min;
  std::vector<double> range_max;
  bool normalized = false;
  // Symbol names of categorical attributes, indexed by code (empty for
  // continuous attributes). Only used for reading and writing files.
  std::vector<std::vector<std::string>> symbols;

  static AttributeSchema AllContinuous(std::size_t d);

  std::size_t size() const { return kinds.size(); }
  bool is_categorical(std::size_t attr) const {
    return kinds[attr] == AttributeKind::kCategorical;
  }
  std::size_t categorical_count() const;
  bool has_categorical() const { return categorical_count() > 0; }

  // Maps a raw continuous value through the fitted range, clipped to [0, 1].
  double transform(std::size_t attr, double value) const;

  bool operator==(const AttributeSchema&) const = default;
};

struct Instance {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  bool operator==(const Instance&) const = default;
};

enum class LabelKind { kBinary, kMulticlass, kReal };

// A bag label: binary {-1, +1}, a class index in 1..C, or a real target.
class Label {
 public:
  Label() = default;
  static Label Binary(int sign);
  static Label Class(int index);
  static Label Real(double target);

  LabelKind kind() const { return kind_; }
  double value() const { return value_; }
  // Class identity used for stratification, VDM counts and one-vs-one.
  int class_index() const;

  bool operator==(const Label&) const = default;

 private:
  Label(LabelKind kind, double value) : kind_(kind), value_(value) {}
  LabelKind kind_ = LabelKind::kBinary;
  double value_ = 1.0;
};

struct Bag {
  std::string id;
  std::vector<Instance> instances;
  Label label;

  std::size_t size() const { return instances.size(); }
};

struct Dataset {
  AttributeSchema schema;
  std::vector<Bag> bags;

  std::size_t size() const { return bags.size(); }
  std::size_t instance_count() const;
  // Returns the subset of bags at `indices`, sharing the schema.
  Dataset subset(const std::vector<std::size_t>& indices) const;
};

struct Finding {
  std::string code;     // stable tag, e.g. "empty bag", "duplicate id"
  std::string message;  // human readable detail
};

// Returns one finding per violated invariant; empty iff the dataset is valid.
std::vector<Finding> validate(const Dataset& dataset);

// Fits continuous min/max on `dataset` and maps every continuous value to
// (v - min) / (max - min); constant attributes map to 0. The fitted ranges
// are stored in the returned schema for use on held-out bags.
// Throws ValidationError on non-finite values.
Dataset normalize_continuous(const Dataset& dataset);

// Applies an already fitted schema (training statistics) to held-out bags.
Bag apply_normalization(const AttributeSchema& fitted, const Bag& bag);
Dataset apply_normalization(const AttributeSchema& fitted,
                            const Dataset& dataset);

}  // namespace migk

#endif  // MIGK_CORE_MODEL_HPP_
