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

#include "migk/gram_io.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <ostream>

namespace migk {

namespace {
constexpr std::string_view kGramMagic = "MIGKGRAM";
constexpr std::uint32_t kGramVersion = 1;
}  // namespace

std::string encode_gram(const GramMatrix& gram) {
  ByteWriter w;
  w.raw(kGramMagic);
  w.u32(kGramVersion);
  w.u64(static_cast<std::uint64_t>(gram.rows()));
  w.u64(static_cast<std::uint64_t>(gram.cols()));
  w.str(gram.kernel);
  w.u64(gram.config_digest);
  for (const auto& id : gram.row_ids) w.str(id);
  for (const auto& id : gram.col_ids) w.str(id);
  for (Eigen::Index r = 0; r < gram.rows(); ++r) {
    for (Eigen::Index c = 0; c < gram.cols(); ++c) w.f64(gram.values(r, c));
  }
  return w.bytes();
}

GramMatrix decode_gram(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.raw(kGramMagic.size()) != kGramMagic) {
    throw FormatError("not a gram file (bad magic)");
  }
  if (const auto v = r.u32(); v != kGramVersion) {
    throw FormatError("unsupported gram file version " + std::to_string(v));
  }
  const auto rows = r.u64();
  const auto cols = r.u64();
  GramMatrix g;
  g.kernel = r.str();
  g.config_digest = r.u64();
  for (std::uint64_t i = 0; i < rows; ++i) g.row_ids.push_back(r.str());
  for (std::uint64_t i = 0; i < cols; ++i) g.col_ids.push_back(r.str());
  g.values.resize(static_cast<Eigen::Index>(rows),
                  static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < g.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.values.cols(); ++j) g.values(i, j) = r.f64();
  }
  if (!r.done()) throw FormatError("trailing bytes in gram file");
  return g;
}

void write_gram_file(const GramMatrix& gram, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  const std::string bytes = encode_gram(gram);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

GramMatrix read_gram_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  return decode_gram(bytes);
}

void write_gram_csv(const GramMatrix& gram, std::ostream& out) {
  out << "id";
  for (const auto& id : gram.col_ids) out << ',' << id;
  out << '\n';
  char buf[32];
  for (Eigen::Index r = 0; r < gram.rows(); ++r) {
    out << gram.row_ids[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < gram.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", gram.values(r, c));
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace migk
