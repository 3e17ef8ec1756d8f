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

#include "migk/model_io.hpp"

#include <fstream>
#include <iterator>

#include "migk/digest.hpp"

namespace migk {

namespace {

constexpr std::string_view kModelMagic = "MIGKMODL";
constexpr std::uint32_t kModelVersion = 1;

void put_ids(ByteWriter& w, const std::vector<std::string>& ids) {
  w.u64(ids.size());
  for (const auto& id : ids) w.str(id);
}

std::vector<std::string> get_ids(ByteReader& r) {
  std::vector<std::string> ids(r.u64());
  for (auto& id : ids) id = r.str();
  return ids;
}

void put_svm(ByteWriter& w, const SvmModel& m) {
  w.f64(m.C);
  w.f64(m.bias);
  w.u64(m.alpha.size());
  for (std::size_t i = 0; i < m.alpha.size(); ++i) {
    w.f64(m.alpha[i]);
    w.i32(m.labels[i]);
  }
  put_ids(w, m.bag_ids);
}

SvmModel get_svm(ByteReader& r) {
  SvmModel m;
  m.C = r.f64();
  m.bias = r.f64();
  const auto n = r.u64();
  for (std::uint64_t i = 0; i < n; ++i) {
    m.alpha.push_back(r.f64());
    m.labels.push_back(r.i32());
  }
  m.bag_ids = get_ids(r);
  return m;
}

void put_payload(ByteWriter& w, const LearnedModel& model) {
  if (const auto* svm = std::get_if<SvmModel>(&model)) {
    put_svm(w, *svm);
  } else if (const auto* ovo = std::get_if<OvoModel>(&model)) {
    w.u64(ovo->training_size);
    w.u32(static_cast<std::uint32_t>(ovo->classes.size()));
    for (int c : ovo->classes) w.i32(c);
    w.u32(static_cast<std::uint32_t>(ovo->pairs.size()));
    for (const auto& p : ovo->pairs) {
      w.i32(p.negative_class);
      w.i32(p.positive_class);
      w.u64(p.members.size());
      for (auto idx : p.members) w.u64(idx);
      put_svm(w, p.model);
    }
    put_ids(w, ovo->bag_ids);
  } else {
    const auto& krr = std::get<KrrModel>(model);
    w.f64(krr.lambda);
    w.u8(krr.clip_unit ? 1 : 0);
    w.u64(krr.beta.size());
    for (double b : krr.beta) w.f64(b);
    put_ids(w, krr.bag_ids);
  }
}

}  // namespace

std::uint64_t ModelBundle::config_digest() const {
  return fnv1a64(config_text);
}

std::string encode_model(const ModelBundle& bundle) {
  ByteWriter w;
  w.raw(kModelMagic);
  w.u32(kModelVersion);
  w.u32(static_cast<std::uint32_t>(bundle.model.index() + 1));
  w.u64(bundle.config_digest());
  w.str(bundle.config_text);
  put_payload(w, bundle.model);
  return w.bytes();
}

ModelBundle decode_model(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.raw(kModelMagic.size()) != kModelMagic) {
    throw FormatError("not a model file (bad magic)");
  }
  if (const auto v = r.u32(); v != kModelVersion) {
    throw FormatError("unsupported model version " + std::to_string(v));
  }
  const auto kind = r.u32();
  const auto digest = r.u64();
  ModelBundle bundle;
  bundle.config_text = r.str();
  if (bundle.config_digest() != digest) {
    throw FormatError("model config digest mismatch");
  }
  switch (kind) {
    case 1:
      bundle.model = get_svm(r);
      break;
    case 2: {
      OvoModel ovo;
      ovo.training_size = r.u64();
      const auto nc = r.u32();
      for (std::uint32_t i = 0; i < nc; ++i) ovo.classes.push_back(r.i32());
      const auto np = r.u32();
      for (std::uint32_t i = 0; i < np; ++i) {
        OvoModel::Pair p;
        p.negative_class = r.i32();
        p.positive_class = r.i32();
        const auto nm = r.u64();
        for (std::uint64_t k = 0; k < nm; ++k) p.members.push_back(r.u64());
        p.model = get_svm(r);
        ovo.pairs.push_back(std::move(p));
      }
      ovo.bag_ids = get_ids(r);
      bundle.model = std::move(ovo);
      break;
    }
    case 3: {
      KrrModel krr;
      krr.lambda = r.f64();
      krr.clip_unit = r.u8() != 0;
      const auto n = r.u64();
      for (std::uint64_t i = 0; i < n; ++i) krr.beta.push_back(r.f64());
      krr.bag_ids = get_ids(r);
      bundle.model = std::move(krr);
      break;
    }
    default:
      throw FormatError("unknown model kind " + std::to_string(kind));
  }
  if (!r.done()) throw FormatError("trailing bytes in model file");
  return bundle;
}

std::uint64_t model_digest(const ModelBundle& bundle) {
  return fnv1a64(encode_model(bundle));
}

std::uint64_t model_digest(const LearnedModel& model) {
  return model_digest(ModelBundle{model, {}});
}

void write_model_file(const ModelBundle& bundle, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  const std::string bytes = encode_model(bundle);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

ModelBundle read_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  return decode_model(bytes);
}

}  // namespace migk
