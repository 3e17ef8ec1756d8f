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

#ifndef MIGK_GRAM_IO_HPP_
#define MIGK_GRAM_IO_HPP_

#include <iosfwd>
#include <string>

#include "migk/binary_io.hpp"
#include "migk/kernels.hpp"

namespace migk {

// Binary layout (little-endian):
//   "MIGKGRAM" | u32 version | u64 rows | u64 cols | str kernel |
//   u64 config digest | rows x str row id | cols x str col id |
//   rows*cols f64, row-major
// where str is a u32 byte length followed by the bytes.
std::string encode_gram(const GramMatrix& gram);
GramMatrix decode_gram(std::string_view bytes);

void write_gram_file(const GramMatrix& gram, const std::string& path);
GramMatrix read_gram_file(const std::string& path);

// Header "id,<col ids...>", then one row per row id with %.17g values.
void write_gram_csv(const GramMatrix& gram, std::ostream& out);

}  // namespace migk

#endif  // MIGK_GRAM_IO_HPP_
