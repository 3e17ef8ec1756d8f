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

#include <cmath>
#include <limits>

#include "doctest.h"
#include "migk/core_model.hpp"
#include "support.hpp"

using namespace migk;
using migk::testing::make_bag;

namespace {

bool has_code(const std::vector<Finding>& findings, const std::string& code) {
  for (const auto& f : findings) {
    if (f.code == code) return true;
  }
  return false;
}

Dataset one_attribute(std::initializer_list<double> values) {
  Dataset ds;
  ds.schema = AttributeSchema::AllContinuous(1);
  std::size_t i = 0;
  for (double v : values) ds.bags.push_back(make_bag("b" + std::to_string(i++), {{v}}));
  return ds;
}

}  // namespace

TEST_CASE("labels enforce their domains") {
  CHECK(Label::Binary(1).value() == 1);
  CHECK(Label::Binary(-1).class_index() == -1);
  CHECK_THROWS_AS(Label::Binary(0), ValidationError);
  CHECK(Label::Class(3).class_index() == 3);
  CHECK_THROWS_AS(Label::Class(0), ValidationError);
  CHECK(Label::Real(0.25).value() == 0.25);
  CHECK_THROWS_AS(Label::Real(std::nan("")), ValidationError);
  CHECK_THROWS_AS(Label::Real(0.5).class_index(), UnsupportedError);
}

TEST_CASE("normalization maps the training range onto [0, 1]") {
  const Dataset n = normalize_continuous(one_attribute({2, 4, 6}));
  CHECK(n.bags[0].instances[0][0] == 0.0);
  CHECK(n.bags[1].instances[0][0] == 0.5);
  CHECK(n.bags[2].instances[0][0] == 1.0);
  CHECK(n.schema.normalized);
  CHECK(validate(n).empty());

  SUBCASE("constant attribute maps to zero") {
    const Dataset c = normalize_continuous(one_attribute({5, 5}));
    CHECK(c.bags[0].instances[0][0] == 0.0);
    CHECK(c.bags[1].instances[0][0] == 0.0);
  }
  SUBCASE("held-out values are clipped with the training range") {
    const Bag held = make_bag("h", {{8}, {1}, {3}});
    const Bag out = apply_normalization(n.schema, held);
    CHECK(out.instances[0][0] == 1.0);
    CHECK(out.instances[1][0] == 0.0);
    CHECK(out.instances[2][0] == doctest::Approx(0.25));
  }
  SUBCASE("non-finite input is rejected") {
    CHECK_THROWS_AS(
        normalize_continuous(one_attribute({1, std::numeric_limits<double>::infinity()})),
        ValidationError);
  }
}

TEST_CASE("normalization leaves categorical codes untouched") {
  Dataset ds;
  ds.schema.kinds = {AttributeKind::kCategorical, AttributeKind::kContinuous};
  ds.bags.push_back(make_bag("a", {{2, 10}, {0, 20}}));
  ds.bags.push_back(make_bag("b", {{1, 30}}, -1));
  const Dataset n = normalize_continuous(ds);
  CHECK(n.bags[0].instances[0][0] == 2);
  CHECK(n.bags[0].instances[1][0] == 0);
  CHECK(n.bags[1].instances[0][1] == 1.0);
}

TEST_CASE("validate reports each violated invariant") {
  Dataset ds;
  ds.schema = AttributeSchema::AllContinuous(2);
  ds.bags.push_back(make_bag("a", {{0.1, 0.2}}));
  ds.bags.push_back(make_bag("b", {{0.3, 0.4}, {0.5, 0.6}}, -1));
  CHECK(validate(ds).empty());

  SUBCASE("empty bag") {
    ds.bags[1].instances.clear();
    CHECK(has_code(validate(ds), "empty bag"));
  }
  SUBCASE("duplicate id") {
    ds.bags[1].id = "a";
    CHECK(has_code(validate(ds), "duplicate id"));
  }
  SUBCASE("schema mismatch") {
    ds.bags[1].instances[0].values.push_back(1.0);
    CHECK(has_code(validate(ds), "schema mismatch"));
  }
  SUBCASE("non-finite value") {
    ds.bags[0].instances[0].values[1] = std::nan("");
    CHECK(has_code(validate(ds), "non-finite value"));
  }
  SUBCASE("mixed label kinds") {
    ds.bags[1].label = Label::Real(0.5);
    CHECK(has_code(validate(ds), "mixed labels"));
  }
  SUBCASE("empty schema") {
    Dataset empty;
    empty.bags.push_back(make_bag("a", {{}}));
    CHECK(has_code(validate(empty), "empty schema"));
  }
}

TEST_CASE("subset keeps order and schema") {
  Dataset ds = one_attribute({1, 2, 3, 4});
  const Dataset s = ds.subset({3, 1});
  REQUIRE(s.size() == 2);
  CHECK(s.bags[0].id == "b3");
  CHECK(s.bags[1].id == "b1");
  CHECK(s.schema == ds.schema);
  CHECK(ds.instance_count() == 4);
}
