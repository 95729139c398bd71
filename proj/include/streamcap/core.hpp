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

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace streamcap {

using OperatorId = std::string;

// Logical dataflow of a streaming job. `operators` excludes the source and
// sink pseudo-nodes and fixes the canonical operator order used for
// deterministic tie-breaking everywhere else.
struct JobGraph {
  OperatorId source;
  OperatorId sink;
  std::vector<OperatorId> operators;
  std::vector<std::pair<OperatorId, OperatorId>> edges;
};

struct CyclicGraph : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DisconnectedOperator : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MultipleSources : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Checks that the graph is a DAG over {source} + operators + {sink}
// (CyclicGraph otherwise), that every operator lies on some source-to-sink
// path (DisconnectedOperator; this covers operators with no inbound edge) and
// that nothing besides `source` injects events: an edge from an undeclared
// node or into the source raises MultipleSources. Other malformed edges
// (unknown target, self-loops, edges out of the sink) raise
// std::invalid_argument.
void validate_graph(const JobGraph& graph);

constexpr int kDefaultMemoryGranularityMb = 512;

// Per-task-slot memory assignment. Valid sizes are positive multiples of the
// configured granularity.
struct ResourceProfile {
  int memory_mb = 0;
};

bool valid_profile(const ResourceProfile& profile,
                   int granularity_mb = kDefaultMemoryGranularityMb);

struct ResourceBudget {
  int task_slots = 0;
  ResourceProfile profile;
};

// Parallelism per operator; every value is >= 1.
using Configuration = std::map<OperatorId, int>;

int total_slots(const Configuration& config);

struct OperatorMetrics {
  double actual_input_rate = 0.0;  // events/s entering the operator
  double busyness = 0.0;           // mean of per_task_busyness, in [0, 1]
  std::vector<double> per_task_busyness;
};

// One sampled observation window.
struct UsageMetrics {
  std::map<OperatorId, OperatorMetrics> per_operator;
  double source_rate = 0.0;  // events/s emitted by the source
  // Input ratio r_i per operator, computed from the measured rates, so
  // ratios[i] * source_rate == per_operator[i].actual_input_rate holds even
  // in noisy runs.
  std::map<OperatorId, double> ratios;
};

double max_task_busyness(const OperatorMetrics& metrics);

struct MstResult {
  double mst = 0.0;             // highest sustained input rate found
  double achieved_ratio = 0.0;  // processed/offered at that rate, in [0, 1]
  double ratio_stddev = 0.0;
  UsageMetrics metrics;         // from the final successful measurement
  int iterations_used = 0;
  bool source_saturated = false;  // load generator maxed out before the job
};

}  // namespace streamcap
