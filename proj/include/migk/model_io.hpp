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

#ifndef MIGK_MODEL_IO_HPP_
#define MIGK_MODEL_IO_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include "migk/binary_io.hpp"
#include "migk/learners.hpp"

namespace migk {

using LearnedModel = std::variant<SvmModel, OvoModel, KrrModel>;

// A trained model plus the free-form configuration text it was trained
// with (kernel settings, normalization ranges, ...).
struct ModelBundle {
  LearnedModel model;
  std::string config_text;

  std::uint64_t config_digest() const;
};

// Versioned little-endian blob:
//   "MIGKMODL" | u32 version | u32 kind (1 svm, 2 ovo, 3 krr) |
//   u64 config digest | str config text | payload
std::string encode_model(const ModelBundle& bundle);
// Throws FormatError on malformed input or a config digest mismatch.
ModelBundle decode_model(std::string_view bytes);

// FNV-1a over encode_model(); identical models give identical digests.
std::uint64_t model_digest(const ModelBundle& bundle);
std::uint64_t model_digest(const LearnedModel& model);

void write_model_file(const ModelBundle& bundle, const std::string& path);
ModelBundle read_model_file(const std::string& path);

}  // namespace migk

#endif  // MIGK_MODEL_IO_HPP_
