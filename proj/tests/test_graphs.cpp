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

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "migk/graphs.hpp"
#include "support.hpp"

using namespace migk;
using migk::testing::make_bag;

namespace {

// Bag whose instances are indices into an explicit distance table.
struct TableBag {
  Bag bag;
  DistanceFn distance;
};

TableBag table_bag(std::vector<std::vector<double>> d) {
  TableBag t;
  for (std::size_t i = 0; i < d.size(); ++i) {
    t.bag.instances.push_back(Instance{{static_cast<double>(i)}});
  }
  t.bag.id = "t";
  t.distance = [d](const Instance& a, const Instance& b) {
    return d[static_cast<std::size_t>(a[0])][static_cast<std::size_t>(b[0])];
  };
  return t;
}

AffinityStructure from_rows(const std::vector<std::vector<int>>& rows) {
  std::vector<std::uint8_t> m;
  for (const auto& r : rows) {
    for (int v : r) m.push_back(static_cast<std::uint8_t>(v));
  }
  return AffinityStructure::FromMatrix(rows.size(), m);
}

}  // namespace

TEST_CASE("epsilon graph edges and weights") {
  SUBCASE("three instances") {
    const TableBag t = table_bag({{0, 0.1, 0.2}, {0.1, 0, 0.9}, {0.2, 0.9, 0}});
    const BagGraph g = build_epsilon_graph(t.bag, 1.0, t.distance);
    CHECK(g.epsilon == doctest::Approx(0.4));
    REQUIRE(g.edge_count() == 2);
    CHECK(g.edges[0].u == 0);
    CHECK(g.edges[0].v == 1);
    CHECK(g.edges[0].weight == doctest::Approx(1.0));
    CHECK(g.edges[1].u == 0);
    CHECK(g.edges[1].v == 2);
    CHECK(g.edges[1].weight == doctest::Approx(0.5));
  }
  SUBCASE("pair within a widened threshold") {
    const TableBag t = table_bag({{0, 0.3}, {0.3, 0}});
    const BagGraph g = build_epsilon_graph(t.bag, 1.5, t.distance);
    REQUIRE(g.edge_count() == 1);
    CHECK(g.edges[0].weight == 1.0);
  }
  SUBCASE("strict threshold drops every edge of a pair") {
    const TableBag t = table_bag({{0, 0.3}, {0.3, 0}});
    CHECK(build_epsilon_graph(t.bag, 1.0, t.distance).edge_count() == 0);
  }
  SUBCASE("single instance") {
    const TableBag t = table_bag({{0}});
    CHECK(build_epsilon_graph(t.bag, 1.0, t.distance).edge_count() == 0);
  }
  SUBCASE("duplicates take the largest weight") {
    const TableBag t = table_bag({{0, 0, 0.5, 2}, {0, 0, 0.25, 2}, {0.5, 0.25, 0, 2},
                                  {2, 2, 2, 0}});
    const BagGraph g = build_epsilon_graph(t.bag, 1.0, t.distance);
    std::map<std::pair<std::size_t, std::size_t>, double> w;
    for (const auto& e : g.edges) w[{e.u, e.v}] = e.weight;
    REQUIRE(w.size() == 3);
    CHECK(w[{0, 1}] == 1.0);
    CHECK(w[{1, 2}] == 1.0);
    CHECK(w[{0, 2}] == doctest::Approx(0.5));
  }
  SUBCASE("non-positive factor is rejected") {
    const TableBag t = table_bag({{0}});
    CHECK_THROWS_AS(build_epsilon_graph(t.bag, 0.0, t.distance), ValidationError);
  }
}

TEST_CASE("edge features") {
  SUBCASE("single edge") {
    BagGraph g{"g", 2, {{0, 1, 0.7}}, 1};
    const auto f = edge_features(g);
    REQUIRE(f.size() == 1);
    CHECK(f[0] == EdgeFeature{1, 1, 1, 1});
  }
  SUBCASE("path a-b-c") {
    BagGraph g{"g", 3, {{0, 1, 1}, {1, 2, 1}}, 1};
    const auto f = edge_features(g);
    CHECK(f[0][0] == 0.5);
    CHECK(f[0][1] == 1.0);
    CHECK(f[0][2] == 1.0);
    CHECK(f[0][3] == 0.5);
  }
  SUBCASE("triangle") {
    BagGraph g{"g", 3, {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}}, 1};
    for (const auto& f : edge_features(g)) {
      CHECK(f[0] == doctest::Approx(2.0 / 3));
      CHECK(f[1] == 0.5);
      CHECK(f[2] == doctest::Approx(2.0 / 3));
      CHECK(f[3] == 0.5);
    }
  }
  SUBCASE("edgeless graph") {
    CHECK(edge_features(BagGraph{"g", 3, {}, 0}).empty());
  }
}

TEST_CASE("graph properties on random bags") {
  std::mt19937_64 rng(5);
  const InstanceMetric metric(AttributeSchema::AllContinuous(3));
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 9;
    const Bag bag = migk::testing::random_bag(rng, "r", n, 3);
    const BagGraph g = build_epsilon_graph(bag, 0.5 + (rng() % 4) * 0.5, metric);
    CHECK(g.edge_count() <= n * (n - 1) / 2);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& e : g.edges) {
      CHECK(e.u < e.v);
      CHECK(e.weight > 0.0);
      CHECK(e.weight <= 1.0);
      CHECK(seen.insert({e.u, e.v}).second);
    }
    // Incident p-values sum to one at every node with an edge.
    const auto f = edge_features(g);
    std::vector<double> psum(n, 0);
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
      CHECK(f[k][0] > 0.0);
      CHECK(f[k][0] <= 1.0);
      CHECK(f[k][2] > 0.0);
      CHECK(f[k][2] <= 1.0);
      psum[g.edges[k].u] += f[k][1];
      psum[g.edges[k].v] += f[k][3];
    }
    const auto deg = g.degrees();
    for (std::size_t u = 0; u < n; ++u) {
      if (deg[u] > 0) CHECK(std::abs(psum[u] - 1.0) <= 1e-12);
    }
    // Reordering instances only relabels edges.
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Bag shuffled = bag;
    for (std::size_t i = 0; i < n; ++i) shuffled.instances[i] = bag.instances[perm[i]];
    const BagGraph h = build_epsilon_graph(shuffled, 1.0, metric);
    const BagGraph g1 = build_epsilon_graph(bag, 1.0, metric);
    std::map<std::pair<std::size_t, std::size_t>, double> a, b;
    for (const auto& e : g1.edges) a[{e.u, e.v}] = e.weight;
    for (const auto& e : h.edges) {
      const auto u = std::min(perm[e.u], perm[e.v]);
      const auto v = std::max(perm[e.u], perm[e.v]);
      b[{u, v}] = e.weight;
    }
    REQUIRE(a.size() == b.size());
    for (const auto& [k, w] : a) CHECK(b[k] == doctest::Approx(w).epsilon(1e-12));
  }
}

TEST_CASE("edge list dump") {
  BagGraph g{"g", 3, {{0, 1, 1}, {1, 2, 0.5}}, 1};
  std::ostringstream out;
  write_edge_list(g, out);
  CHECK(out.str() == "0 1 1\n1 2 0.5\n");
}

TEST_CASE("affinity structures") {
  const InstanceMetric metric(AttributeSchema::AllContinuous(1));
  SUBCASE("single instance") {
    const auto a = build_affinity(make_bag("s", {{0.3}}), 1.0,
                                  AffinityDistance::kRbfInduced, metric);
    CHECK(a.size() == 1);
    CHECK(a.at(0, 0) == 1);
    CHECK(a.weights() == std::vector<double>{1.0});
    CHECK(a.threshold() == 0.0);
  }
  SUBCASE("two instances give the identity") {
    const auto a = build_affinity(make_bag("s", {{0.0}, {0.4}}), 1.0,
                                  AffinityDistance::kRbfInduced, metric);
    CHECK(a.at(0, 1) == 0);
    CHECK(a.weights() == std::vector<double>{1.0, 1.0});
  }
  SUBCASE("distances 1, 1, 4 in squared-Euclidean mode") {
    // Points 0, 1, -1: squared distances (0,1)=1, (0,2)=1, (1,2)=4.
    const auto a = build_affinity(make_bag("s", {{0.0}, {1.0}, {-1.0}}), 1.0,
                                  AffinityDistance::kSquaredEuclidean, metric);
    CHECK(a.threshold() == doctest::Approx(2.0));
    CHECK(a.weights()[0] == doctest::Approx(1.0 / 3));
    CHECK(a.weights()[1] == doctest::Approx(0.5));
    CHECK(a.weights()[2] == doctest::Approx(0.5));
    CHECK(a.weight_sum() == doctest::Approx(4.0 / 3));
  }
  SUBCASE("matches the reference construction") {
    std::mt19937_64 rng(9);
    const InstanceMetric m4(AttributeSchema::AllContinuous(4));
    for (int trial = 0; trial < 50; ++trial) {
      const Bag b = migk::testing::random_bag(rng, "r", 1 + rng() % 8, 4);
      const double gamma = 0.1 + (rng() % 50) * 0.1;
      const auto a = build_affinity(b, gamma, AffinityDistance::kRbfInduced, m4);
      const auto ref = migk::testing::ref_affinity_weights(b, gamma);
      REQUIRE(a.weights().size() == ref.size());
      for (std::size_t i = 0; i < ref.size(); ++i) {
        CHECK(a.weights()[i] == doctest::Approx(ref[i]).epsilon(1e-15));
      }
    }
  }
}

TEST_CASE("explicit affinity matrices") {
  const auto a = from_rows({{0, 1, 0}, {1, 0, 0}, {0, 0, 0}});
  CHECK(a.at(0, 0) == 1);  // diagonal forced
  CHECK(a.weights()[0] == 0.5);
  CHECK(a.weights()[2] == 1.0);
  CHECK_THROWS_AS(from_rows({{1, 1}, {0, 1}}), ValidationError);
  CHECK_THROWS_AS(from_rows({{1, 2}, {2, 1}}), ValidationError);
}
