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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include <doctest.h>

#include "streamcap/scenario.hpp"

using namespace streamcap;

namespace {

const char* kMinimal = R"({
  "schema_version": 1,
  "seed": 7,
  "graph": {"source": "src", "sink": "sink", "operators": ["work"],
            "edges": [["src", "work"], ["work", "sink"]]},
  "ground_truth": {"work": {"base_rate": 1000.0}},
  "testbed": {"max_injectable_rate": 20000.0}
})";

std::string message_of(const std::string& text) {
  try {
    parse_scenario(text, "test");
  } catch (const ScenarioError& e) {
    return e.what();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("a minimal scenario fills every default") {
  Scenario sc = parse_scenario(kMinimal, "test");
  CHECK(sc.seed == 7);
  CHECK(sc.name.empty());
  CHECK(sc.spec.graph.operators == std::vector<OperatorId>{"work"});
  CHECK(sc.spec.max_injectable_rate == 20000.0);
  CHECK(sc.spec.tick_seconds == 5.0);
  CHECK(sc.spec.warmup_time_constant_s == 0.0);

  const OperatorGroundTruth& op = sc.spec.per_operator.at("work");
  CHECK(op.base_rate == 1000.0);
  CHECK(op.memory_knee_mb == 512.0);
  CHECK(op.memory_exponent == 0.0);
  CHECK(op.scaling_exponent == 0.0);
  CHECK(op.skew_factor == 0.0);
  CHECK(op.noise_level == 0.0);
  CHECK(op.selectivity == 1.0);

  CHECK(sc.ce_params.warmup_s == 120.0);
  CHECK(sc.ce_params.cooldown_s == 15.0);
  CHECK(sc.ce_params.cooldown_rate == 6400.0);
  CHECK(sc.ce_params.rampup_s == 60.0);
  CHECK(sc.ce_params.observe_s == 15.0);
  CHECK(sc.ce_params.success_threshold == 0.99);
  CHECK(sc.ce_params.sensibility == 0.01);
  CHECK(sc.ce_params.max_iterations == 8);

  CHECK(sc.search_space.pi_min == 1);
  CHECK(sc.search_space.pi_max == 48);
  CHECK(sc.memory_granularity_mb == 512);
  REQUIRE(sc.search_space.memory_mb.size() == 8);
  CHECK(sc.search_space.memory_mb.front() == 512);
  CHECK(sc.search_space.memory_mb.back() == 4096);

  CHECK(sc.explorer_params.min_extra_measurements == 3);
  CHECK(sc.explorer_params.rmse_worsen_stop == 0.10);
  CHECK(sc.explorer_params.max_measurements == 20);
  CHECK(sc.explorer_params.overprovision == 1.10);
}

TEST_CASE("explicit sections override the defaults") {
  Scenario sc = parse_scenario(R"({
    "schema_version": 1, "name": "tuned", "seed": 3,
    "graph": {"source": "s", "sink": "k", "operators": ["a", "b"],
              "edges": [["s", "a"], ["a", "b"], ["b", "k"]]},
    "ground_truth": {
      "a": {"base_rate": 2e6, "memory_knee_mb": 1024, "memory_exponent": 1,
            "scaling_exponent": 0.05, "skew_factor": 0.1,
            "noise_level": 0.01, "selectivity": 0.8},
      "b": {"base_rate": 4e4}
    },
    "testbed": {"max_injectable_rate": 1.1e5, "tick_seconds": 2,
                "warmup_time_constant_s": 20},
    "ce_params": {"success_threshold": 0.995, "max_iterations": 12},
    "search_space": {"pi_min": 4, "pi_max": 24, "memory_mb": [1024, 2048],
                     "memory_granularity_mb": 1024},
    "explorer_params": {"max_measurements": 18}
  })",
                               "test");
  CHECK(sc.name == "tuned");
  CHECK(sc.spec.tick_seconds == 2.0);
  CHECK(sc.spec.warmup_time_constant_s == 20.0);
  CHECK(sc.spec.per_operator.at("a").scaling_exponent == 0.05);
  CHECK(sc.spec.per_operator.at("a").selectivity == 0.8);
  CHECK(sc.ce_params.success_threshold == 0.995);
  CHECK(sc.ce_params.max_iterations == 12);
  CHECK(sc.ce_params.sensibility == 0.01);  // untouched default
  CHECK(sc.search_space.pi_min == 4);
  CHECK(sc.search_space.pi_max == 24);
  CHECK(sc.search_space.memory_mb == std::vector<int>{1024, 2048});
  CHECK(sc.memory_granularity_mb == 1024);
  CHECK(sc.explorer_params.max_measurements == 18);
}

TEST_CASE("diagnostics name the offending key and its section") {
  std::string msg = message_of(R"({
    "schema_version": 1, "seed": 1, "surprise": true,
    "graph": {"source": "s", "sink": "k", "operators": ["w"],
              "edges": [["s", "w"], ["w", "k"]]},
    "ground_truth": {"w": {"base_rate": 10}},
    "testbed": {"max_injectable_rate": 100}
  })");
  CHECK(msg == doctest::Contains("'surprise'"));
  CHECK(msg == doctest::Contains("top level"));

  msg = message_of(R"({
    "schema_version": 1, "seed": 1,
    "graph": {"source": "s", "sink": "k", "operators": ["w"],
              "edges": [["s", "w"], ["w", "k"]]},
    "ground_truth": {"w": {"base_rate": 10}},
    "testbed": {"max_injectable_rate": 100, "cores": 48}
  })");
  CHECK(msg == doctest::Contains("'cores'"));
  CHECK(msg == doctest::Contains("testbed"));

  msg = message_of(R"({
    "schema_version": 1, "seed": 1,
    "graph": {"source": "s", "sink": "k", "operators": ["w"],
              "edges": [["s", "w"], ["w", "k"]]},
    "ground_truth": {"w": {"base_rate": 10}, "ghost": {"base_rate": 5}},
    "testbed": {"max_injectable_rate": 100}
  })");
  CHECK(msg == doctest::Contains("'ghost'"));
  CHECK(msg == doctest::Contains("ground_truth"));
}

TEST_CASE("structural mistakes are rejected") {
  // Wrong schema version.
  CHECK_THROWS_AS(parse_scenario(R"({"schema_version": 2, "seed": 1,
    "graph": {"source": "s", "sink": "k", "operators": ["w"],
              "edges": [["s", "w"], ["w", "k"]]},
    "ground_truth": {"w": {"base_rate": 10}},
    "testbed": {"max_injectable_rate": 100}})",
                                 "test"),
                  ScenarioError);
  // Missing seed.
  CHECK_THROWS_AS(parse_scenario(R"({"schema_version": 1,
    "graph": {"source": "s", "sink": "k", "operators": ["w"],
              "edges": [["s", "w"], ["w", "k"]]},
    "ground_truth": {"w": {"base_rate": 10}},
    "testbed": {"max_injectable_rate": 100}})",
                                 "test"),
                  ScenarioError);
  // Operator without ground truth.
  CHECK(message_of(R"({"schema_version": 1, "seed": 1,
    "graph": {"source": "s", "sink": "k", "operators": ["w", "x"],
              "edges": [["s", "w"], ["w", "x"], ["x", "k"]]},
    "ground_truth": {"w": {"base_rate": 10}},
    "testbed": {"max_injectable_rate": 100}})") ==
        doctest::Contains("'x'"));
  // Non-positive base rate.
  CHECK(message_of(R"({"schema_version": 1, "seed": 1,
    "graph": {"source": "s", "sink": "k", "operators": ["w"],
              "edges": [["s", "w"], ["w", "k"]]},
    "ground_truth": {"w": {"base_rate": 0}},
    "testbed": {"max_injectable_rate": 100}})") ==
        doctest::Contains("base_rate"));
  // A cycle in the graph is caught during validation.
  CHECK_THROWS(parse_scenario(R"({"schema_version": 1, "seed": 1,
    "graph": {"source": "s", "sink": "k", "operators": ["a", "b"],
              "edges": [["s", "a"], ["a", "b"], ["b", "a"], ["b", "k"]]},
    "ground_truth": {"a": {"base_rate": 10}, "b": {"base_rate": 10}},
    "testbed": {"max_injectable_rate": 100}})",
                              "test"));
  // Not JSON at all.
  CHECK_THROWS_AS(parse_scenario("not json", "test"), ScenarioError);
}

TEST_CASE("search space constraints hold after parsing") {
  CHECK(message_of(R"({"schema_version": 1, "seed": 1,
    "graph": {"source": "s", "sink": "k", "operators": ["w"],
              "edges": [["s", "w"], ["w", "k"]]},
    "ground_truth": {"w": {"base_rate": 10}},
    "testbed": {"max_injectable_rate": 100},
    "search_space": {"memory_mb": [512, 700]}})") ==
        doctest::Contains("multiple"));
  CHECK(message_of(R"({"schema_version": 1, "seed": 1,
    "graph": {"source": "s", "sink": "k", "operators": ["w"],
              "edges": [["s", "w"], ["w", "k"]]},
    "ground_truth": {"w": {"base_rate": 10}},
    "testbed": {"max_injectable_rate": 100},
    "search_space": {"memory_mb": [1024, 512]}})") ==
        doctest::Contains("ascending"));
  CHECK_THROWS_AS(parse_scenario(R"({"schema_version": 1, "seed": 1,
    "graph": {"source": "s", "sink": "k", "operators": ["a", "b"],
              "edges": [["s", "a"], ["a", "b"], ["b", "k"]]},
    "ground_truth": {"a": {"base_rate": 10}, "b": {"base_rate": 10}},
    "testbed": {"max_injectable_rate": 100},
    "search_space": {"pi_min": 1}})",
                                 "test"),
                  ScenarioError);
  CHECK(message_of(R"({"schema_version": 1, "seed": 1,
    "graph": {"source": "s", "sink": "k", "operators": ["w"],
              "edges": [["s", "w"], ["w", "k"]]},
    "ground_truth": {"w": {"base_rate": 10}},
    "testbed": {"max_injectable_rate": 100},
    "ce_params": {"success_threshold": 1.5}})") ==
        doctest::Contains("success_threshold"));
}

TEST_CASE("loading a missing scenario file fails cleanly") {
  CHECK_THROWS_AS(load_scenario(temp_path("does_not_exist_scenario.json")),
                  ScenarioError);
}

TEST_CASE("model files round trip bit for bit") {
  const std::string path = temp_path("streamcap_model_roundtrip.json");
  const CapacityModel models[] = {
      {ModelFamily::kLinear, 1.0, 9.9e5, -7.6e5},
      {ModelFamily::kLog, -7.6e3, 5.7e5, -1.2e6},
      {ModelFamily::kSqrt, 0.1, 1.0 / 3.0, std::nextafter(2.0, 3.0)},
  };
  for (const CapacityModel& m : models) {
    save_model(m, path);
    CapacityModel back = load_model(path);
    CHECK(back.family == m.family);
    CHECK(back.a == m.a);
    CHECK(back.b == m.b);
    CHECK(back.c == m.c);
  }
  std::filesystem::remove(path);
}

TEST_CASE("model files with stray content are rejected") {
  const std::string path = temp_path("streamcap_model_bad.json");
  auto write = [&](const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
  };
  write(R"({"schema_version": 1,
            "model": {"family": "cubic", "a": 1, "b": 2, "c": 3}})");
  CHECK_THROWS_AS(load_model(path), ScenarioError);
  write(R"({"schema_version": 1, "extra": true,
            "model": {"family": "linear", "a": 1, "b": 2, "c": 3}})");
  CHECK_THROWS_AS(load_model(path), ScenarioError);
  write(R"({"schema_version": 1,
            "model": {"family": "linear", "a": 1, "b": 2}})");
  CHECK_THROWS_AS(load_model(path), ScenarioError);
  std::filesystem::remove(path);
}

TEST_CASE("measurement export is stable text") {
  ExplorationReport report;
  ExplorationStep s0;
  s0.memory_mb = 512;
  s0.task_slots = 4;
  s0.co.mst.mst = 1234.5;
  s0.cost = std::numeric_limits<double>::quiet_NaN();
  report.log.push_back(s0);
  ExplorationStep s1;
  s1.memory_mb = 1024;
  s1.task_slots = 9;
  s1.co.mst.mst = 50000.0;
  s1.cost = 12.25;
  s1.family = ModelFamily::kLinear;
  report.log.push_back(s1);

  CHECK(measurements_csv(report) ==
        "step,memory_mb,task_slots,mst,cost_rmse,family\n"
        "0,512,4,1234.5,nan,none\n"
        "1,1024,9,50000,12.25,linear\n");
}
