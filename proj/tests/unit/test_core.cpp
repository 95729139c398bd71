// Copyright (c) The Streamcap Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not
// use this file except in compliance with the License. You may obtain a copy
// of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

#include <doctest.h>

#include "streamcap/core.hpp"
#include "test_helpers.hpp"

using namespace streamcap;
using streamcap::testing::chain_graph;

TEST_CASE("validate_graph accepts a linear three-operator pipeline") {
  JobGraph g = chain_graph({"a", "b", "c"});
  CHECK_NOTHROW(validate_graph(g));
}

TEST_CASE("validate_graph rejects a back edge as a cycle") {
  JobGraph g = chain_graph({"a", "b", "c"});
  g.edges.emplace_back("c", "a");
  CHECK_THROWS_AS(validate_graph(g), CyclicGraph);
}

TEST_CASE("operator with no incoming edge is disconnected") {
  JobGraph g = chain_graph({"a", "b", "c"});
  g.operators.push_back("d");
  g.edges.emplace_back("d", "sink");
  CHECK_THROWS_AS(validate_graph(g), DisconnectedOperator);
}

TEST_CASE("operator that cannot reach the sink is disconnected") {
  JobGraph g = chain_graph({"a", "b"});
  g.operators.push_back("dead_end");
  g.edges.emplace_back("a", "dead_end");
  CHECK_THROWS_AS(validate_graph(g), DisconnectedOperator);
}

TEST_CASE("an edge into the source means a second injection point") {
  JobGraph g = chain_graph({"a"});
  g.edges.emplace_back("a", "src");
  CHECK_THROWS_AS(validate_graph(g), MultipleSources);
}

TEST_CASE("an edge from an undeclared node means a second source") {
  JobGraph g = chain_graph({"a"});
  g.edges.emplace_back("ghost", "a");
  CHECK_THROWS_AS(validate_graph(g), MultipleSources);
}

TEST_CASE("duplicate operator ids are rejected") {
  JobGraph g = chain_graph({"a", "a"});
  CHECK_THROWS_AS(validate_graph(g), std::invalid_argument);
}

TEST_CASE("edges to unknown nodes and self-loops are invalid") {
  JobGraph g = chain_graph({"a"});
  g.edges.emplace_back("a", "nowhere");
  CHECK_THROWS_AS(validate_graph(g), std::invalid_argument);

  JobGraph h = chain_graph({"a"});
  h.edges.emplace_back("a", "a");
  CHECK_THROWS_AS(validate_graph(h), std::invalid_argument);
}

TEST_CASE("a diamond with a join is a valid graph") {
  JobGraph g;
  g.source = "src";
  g.sink = "sink";
  g.operators = {"split", "left", "right", "join"};
  g.edges = {{"src", "split"},   {"split", "left"}, {"split", "right"},
             {"left", "join"},   {"right", "join"}, {"join", "sink"}};
  CHECK_NOTHROW(validate_graph(g));
}

TEST_CASE("profile validity follows the memory granularity") {
  CHECK(valid_profile(ResourceProfile{512}));
  CHECK(valid_profile(ResourceProfile{4096}));
  CHECK_FALSE(valid_profile(ResourceProfile{500}));
  CHECK_FALSE(valid_profile(ResourceProfile{0}));
  CHECK_FALSE(valid_profile(ResourceProfile{-512}));
  CHECK(valid_profile(ResourceProfile{768}, 256));
}

TEST_CASE("total_slots sums the per-operator parallelism") {
  Configuration c{{"a", 3}, {"b", 6}};
  CHECK(total_slots(c) == 9);
  CHECK(total_slots(Configuration{}) == 0);
}

TEST_CASE("max_task_busyness picks the busiest task") {
  OperatorMetrics om;
  om.actual_input_rate = 100.0;
  om.busyness = 0.5;
  om.per_task_busyness = {0.4, 0.6, 0.5};
  CHECK(max_task_busyness(om) == doctest::Approx(0.6));
  OperatorMetrics scalar_only;
  scalar_only.busyness = 0.7;
  CHECK(max_task_busyness(scalar_only) == doctest::Approx(0.7));
}
