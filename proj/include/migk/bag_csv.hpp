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

#ifndef MIGK_BAG_CSV_HPP_
#define MIGK_BAG_CSV_HPP_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "migk/core_model.hpp"
#include "migk/evaluation.hpp"

namespace migk {

// Parse failure with the 1-based line number it refers to.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& source, std::size_t line,
             const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Bag CSV: header "bag_id,label,f0,...,f{d-1}", one row per instance, the
// bag label repeated on every row. Labels are read according to `task`:
// binary {-1,+1} (also "+1"), class indices >= 1, or real targets in [0,1].
// Rows are grouped into bags by bag_id in first-appearance order. Attribute
// kinds come from `schema` (all continuous when absent); categorical fields
// are arbitrary symbols. Throws ParseError, or ValidationError when the
// parsed dataset has findings.
Dataset parse_bag_csv(std::istream& in, Task task,
                      const std::optional<AttributeSchema>& schema = {},
                      const std::string& source = "<input>");
Dataset load_bag_csv(const std::string& path, Task task,
                     const std::optional<AttributeSchema>& schema = {});

// Canonical writer: shortest round-trip number formatting, binary labels as
// "+1"/"-1".
void save_bag_csv(const Dataset& dataset, std::ostream& out);
void save_bag_csv(const Dataset& dataset, const std::string& path);

// Schema file: comma- or newline-separated "categorical"/"continuous"
// tokens, one per feature column; '#' starts a comment.
AttributeSchema load_schema(const std::string& path);
AttributeSchema parse_schema(std::istream& in, const std::string& source);

enum class MuskLayout {
  kUci,       // molecule,conformation,f1..f166,class(0/1)
  kLabelBag,  // label(0/1),bag,f1..fd
};

struct ConversionReport {
  std::size_t bags = 0;
  std::size_t positive_bags = 0;
  std::size_t negative_bags = 0;
  std::size_t instances = 0;
  std::size_t features = 0;
};

// Converts Musk-style files (concatenated in order) to a canonical bag CSV.
// The bag is the molecule (or bag column); class 1 maps to +1, else -1.
// Throws ParseError on conflicting labels within a bag or a conformation
// listed twice with different values.
ConversionReport convert_musk(const std::vector<std::string>& inputs,
                              MuskLayout layout, std::ostream& out);

}  // namespace migk

#endif  // MIGK_BAG_CSV_HPP_
