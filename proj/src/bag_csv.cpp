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

#include "migk/bag_csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string_view>
#include <unordered_map>

namespace migk {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return v;
}

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string label_text(const Label& label) {
  switch (label.kind()) {
    case LabelKind::kBinary: return label.value() > 0 ? "+1" : "-1";
    case LabelKind::kMulticlass: return std::to_string(label.class_index());
    case LabelKind::kReal: return shortest(label.value());
  }
  return {};
}

Label parse_label(std::string_view text, Task task, const std::string& source,
                  std::size_t line) {
  const auto v = to_double(text);
  if (!v) {
    throw ParseError(source, line, "label '" + std::string(text) +
                                       "' is not numeric");
  }
  try {
    switch (task) {
      case Task::kClassify:
        if (*v != 1.0 && *v != -1.0) {
          throw ValidationError("binary label must be -1 or +1");
        }
        return Label::Binary(static_cast<int>(*v));
      case Task::kMulticlass:
        if (*v != static_cast<double>(static_cast<int>(*v))) {
          throw ValidationError("class label must be an integer");
        }
        return Label::Class(static_cast<int>(*v));
      case Task::kRegress:
        if (*v < 0.0 || *v > 1.0) {
          throw ValidationError("regression label must lie in [0, 1]");
        }
        return Label::Real(*v);
    }
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ParseError(source, line, e.what());
  }
  return {};
}

std::string findings_text(const std::vector<Finding>& findings) {
  std::string out;
  for (const auto& f : findings) out += "\n  " + f.message;
  return out;
}

}  // namespace

ParseError::ParseError(const std::string& source, std::size_t line,
                       const std::string& what)
    : ValidationError(source + ":" + std::to_string(line) + ": " + what),
      line_(line) {}

Dataset parse_bag_csv(std::istream& in, Task task,
                      const std::optional<AttributeSchema>& schema,
                      const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t d = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto header = split(line);
    if (header.size() < 3 || trim(header[0]) != "bag_id" ||
        trim(header[1]) != "label") {
      throw ParseError(source, line_no,
                       "header must be 'bag_id,label,f0,...' with d >= 1");
    }
    d = header.size() - 2;
    break;
  }
  if (d == 0) throw ParseError(source, line_no, "missing header");

  Dataset ds;
  ds.schema = schema ? *schema : AttributeSchema::AllContinuous(d);
  if (ds.schema.size() != d) {
    throw ParseError(source, line_no,
                     "schema lists " + std::to_string(ds.schema.size()) +
                         " attributes, file has " + std::to_string(d));
  }
  // Known symbols keep their codes so files share one encoding.
  ds.schema.symbols.resize(d);
  std::vector<std::unordered_map<std::string, std::size_t>> codes(d);
  for (std::size_t l = 0; l < d; ++l) {
    if (!ds.schema.is_categorical(l)) ds.schema.symbols[l].clear();
    for (std::size_t c = 0; c < ds.schema.symbols[l].size(); ++c) {
      codes[l].emplace(ds.schema.symbols[l][c], c);
    }
  }

  std::unordered_map<std::string, std::size_t> bag_index;
  std::vector<std::string> bag_label_text;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != d + 2) {
      throw ParseError(source, line_no,
                       "expected " + std::to_string(d + 2) + " columns, got " +
                           std::to_string(fields.size()));
    }
    const std::string id(trim(fields[0]));
    if (id.empty()) throw ParseError(source, line_no, "empty bag_id");
    const std::string label(trim(fields[1]));

    Instance x;
    x.values.resize(d);
    for (std::size_t l = 0; l < d; ++l) {
      const std::string_view field = trim(fields[l + 2]);
      if (ds.schema.is_categorical(l)) {
        auto [it, inserted] =
            codes[l].try_emplace(std::string(field), codes[l].size());
        if (inserted) ds.schema.symbols[l].emplace_back(field);
        x.values[l] = static_cast<double>(it->second);
      } else {
        const auto v = to_double(field);
        if (!v) {
          throw ParseError(source, line_no,
                           "attribute f" + std::to_string(l) + " value '" +
                               std::string(field) + "' is not numeric");
        }
        x.values[l] = *v;
      }
    }

    auto it = bag_index.find(id);
    if (it == bag_index.end()) {
      Bag bag;
      bag.id = id;
      bag.label = parse_label(label, task, source, line_no);
      bag_index.emplace(id, ds.bags.size());
      bag_label_text.push_back(label);
      ds.bags.push_back(std::move(bag));
      it = bag_index.find(id);
    } else if (!(parse_label(label, task, source, line_no) ==
                 ds.bags[it->second].label)) {
      throw ParseError(source, line_no,
                       "bag '" + id + "' has inconsistent labels ('" +
                           bag_label_text[it->second] + "' vs '" + label + "')");
    }
    ds.bags[it->second].instances.push_back(std::move(x));
  }

  if (const auto findings = validate(ds); !findings.empty()) {
    throw ValidationError(source + ": invalid dataset:" + findings_text(findings));
  }
  return ds;
}

Dataset load_bag_csv(const std::string& path, Task task,
                     const std::optional<AttributeSchema>& schema) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  return parse_bag_csv(in, task, schema, path);
}

void save_bag_csv(const Dataset& dataset, std::ostream& out) {
  const std::size_t d = dataset.schema.size();
  out << "bag_id,label";
  for (std::size_t l = 0; l < d; ++l) out << ",f" << l;
  out << '\n';
  for (const Bag& bag : dataset.bags) {
    const std::string label = label_text(bag.label);
    for (const Instance& x : bag.instances) {
      out << bag.id << ',' << label;
      for (std::size_t l = 0; l < d; ++l) {
        out << ',';
        const bool named = dataset.schema.is_categorical(l) &&
                           l < dataset.schema.symbols.size() &&
                           static_cast<std::size_t>(x[l]) <
                               dataset.schema.symbols[l].size();
        if (named) {
          out << dataset.schema.symbols[l][static_cast<std::size_t>(x[l])];
        } else {
          out << shortest(x[l]);
        }
      }
      out << '\n';
    }
  }
}

void save_bag_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  save_bag_csv(dataset, out);
}

AttributeSchema parse_schema(std::istream& in, const std::string& source) {
  AttributeSchema schema;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    for (std::string_view tok : split(line)) {
      tok = trim(tok);
      if (tok.empty()) continue;
      if (tok == "categorical" || tok == "c") {
        schema.kinds.push_back(AttributeKind::kCategorical);
      } else if (tok == "continuous" || tok == "n") {
        schema.kinds.push_back(AttributeKind::kContinuous);
      } else {
        throw ParseError(source, line_no,
                         "unknown attribute kind '" + std::string(tok) + "'");
      }
    }
  }
  if (schema.kinds.empty()) throw ParseError(source, line_no, "empty schema");
  return schema;
}

AttributeSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open schema '" + path + "'");
  return parse_schema(in, path);
}

ConversionReport convert_musk(const std::vector<std::string>& inputs,
                              MuskLayout layout, std::ostream& out) {
  struct PendingBag {
    std::string id;
    int label = 0;
    std::vector<std::vector<double>> rows;
  };
  std::vector<PendingBag> bags;
  std::unordered_map<std::string, std::size_t> bag_index;
  std::unordered_map<std::string, std::vector<double>> conformations;
  std::size_t features = 0;

  for (const std::string& path : inputs) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      const auto fields = split(line);
      const std::size_t lead = 2;
      const std::size_t tail = layout == MuskLayout::kUci ? 1 : 0;
      if (fields.size() < lead + tail + 1) {
        throw ParseError(path, line_no, "too few columns");
      }
      const std::size_t d = fields.size() - lead - tail;
      if (features == 0) features = d;
      if (d != features) {
        throw ParseError(path, line_no,
                         "expected " + std::to_string(features) +
                             " features, got " + std::to_string(d));
      }
      std::string bag_id, conformation;
      std::optional<double> cls;
      if (layout == MuskLayout::kUci) {
        bag_id = trim(fields[0]);
        conformation = trim(fields[1]);
        cls = to_double(fields.back());
      } else {
        cls = to_double(fields[0]);
        bag_id = trim(fields[1]);
      }
      if (!cls) throw ParseError(path, line_no, "class field is not numeric");
      const int label = *cls == 1.0 ? 1 : -1;
      std::vector<double> row(d);
      for (std::size_t l = 0; l < d; ++l) {
        const auto v = to_double(fields[lead + l]);
        if (!v) {
          throw ParseError(path, line_no,
                           "feature " + std::to_string(l + 1) +
                               " is not numeric");
        }
        row[l] = *v;
      }
      if (!conformation.empty()) {
        auto [it, inserted] = conformations.try_emplace(conformation, row);
        if (!inserted) {
          if (it->second != row) {
            throw ParseError(path, line_no,
                             "conformation '" + conformation +
                                 "' repeated with different values");
          }
          continue;  // exact duplicate row
        }
      }
      auto bit = bag_index.find(bag_id);
      if (bit == bag_index.end()) {
        bit = bag_index.emplace(bag_id, bags.size()).first;
        bags.push_back({bag_id, label, {}});
      } else if (bags[bit->second].label != label) {
        throw ParseError(path, line_no,
                         "bag '" + bag_id + "' has conflicting class labels");
      }
      bags[bit->second].rows.push_back(std::move(row));
    }
  }

  ConversionReport report;
  report.features = features;
  out << "bag_id,label";
  for (std::size_t l = 0; l < features; ++l) out << ",f" << l;
  out << '\n';
  for (const auto& bag : bags) {
    ++report.bags;
    (bag.label > 0 ? report.positive_bags : report.negative_bags) += 1;
    for (const auto& row : bag.rows) {
      ++report.instances;
      out << bag.id << ',' << (bag.label > 0 ? "+1" : "-1");
      for (double v : row) out << ',' << shortest(v);
      out << '\n';
    }
  }
  return report;
}

}  // namespace migk
