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

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "streamcap/capacity_estimator.hpp"
#include "streamcap/capacity_model.hpp"
#include "streamcap/core.hpp"
#include "streamcap/resource_explorer.hpp"
#include "streamcap/simulator.hpp"

namespace streamcap {

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Everything one scenario file describes: the job, its hidden ground truth,
// the testbed limits, and the knobs for estimation and exploration.
struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  GroundTruthSpec spec;
  CeParams ce_params;
  SearchSpace search_space;
  ExplorerParams explorer_params;
  int memory_granularity_mb = kDefaultMemoryGranularityMb;
};

// Parses and validates a scenario JSON document. Unknown keys are rejected
// with a diagnostic naming the key and its section; the graph and ground
// truth are cross-checked (validate_graph, full operator coverage).
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text, const std::string& origin);

// Model files round-trip coefficients bit-exactly.
void save_model(const CapacityModel& model, const std::string& path);
CapacityModel load_model(const std::string& path);

// Measurement export: header step,memory_mb,task_slots,mst,cost_rmse,family
// then one row per exploration step; '.' decimals, no grouping, trailing
// newline. cost is "nan" and family "none" before 4 observations exist.
std::string measurements_csv(const ExplorationReport& report);

}  // namespace streamcap
