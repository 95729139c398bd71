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
#include <optional>
#include <stdexcept>
#include <vector>

#include "streamcap/capacity_estimator.hpp"
#include "streamcap/capacity_model.hpp"
#include "streamcap/config_optimizer.hpp"
#include "streamcap/core.hpp"
#include "streamcap/simulator.hpp"

namespace streamcap {

// Discrete (slots, memory) space the explorer may probe.
struct SearchSpace {
  int pi_min = 0;  // at least the operator count
  int pi_max = 48;
  std::vector<int> memory_mb;  // sorted ascending, non-empty
};

struct ExplorerParams {
  int min_extra_measurements = 3;
  double rmse_worsen_stop = 0.10;  // relative cost growth that ends the search
  int max_measurements = 20;
  double overprovision = 1.10;
};

struct InsufficientObservations : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingProfileMetrics : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One explored candidate with everything measured for it. cost is the
// best-family LOOCV RMSE over the observations collected up to and
// including this step; NaN while fewer than 4 observations exist.
struct ExplorationStep {
  int memory_mb = 0;
  int task_slots = 0;
  CoResult co;
  double cost = 0.0;
  std::optional<ModelFamily> family;
};

struct ExplorationReport {
  JobGraph graph;
  ObservationSet observations;        // D; log entry k produced observation k
  std::vector<ExplorationStep> log;   // same length as observations
  CapacityModel model;
  double simulated_seconds = 0.0;
  int co_calls = 0;
  int ce_calls = 0;
};

struct PlanEntry {
  ResourceProfile profile;
  int task_slots = 0;
  Configuration configuration;
  double predicted_rate = 0.0;  // model prediction at (profile, task_slots)
};

struct PlanResult {
  std::vector<PlanEntry> entries;
};

// The four extreme budgets in the order low-slots/low-mem, low-slots/high-mem,
// high-slots/low-mem, high-slots/high-mem; degenerate spaces collapse
// duplicates (order preserved).
std::vector<ResourceBudget> bootstrap_corners(const SearchSpace& space);

// Full workflow: corner bootstrap (fresh single-task measurements forced at
// the low-slot corners), then GP-guided candidate search over the grid with
// the best-family LOOCV RMSE as cost, stopping after min_extra extra points
// once the cost worsens by more than rmse_worsen_stop between consecutive
// measurements (the worsening point is kept) or at max_measurements; the
// returned model comes from select_model on the full observation set.
ExplorationReport explore(const GroundTruthSpec& spec, const JobGraph& graph,
                          const SearchSpace& space,
                          const ExplorerParams& explorer_params,
                          const CeParams& ce_params, std::uint64_t seed);

// For each profile: slots from inverting the report's model at the
// requested rate, configuration from a final slot assignment using the true
// rates of the highest-slot observation at that profile (most recent on
// ties). MissingProfileMetrics when the profile was never measured.
PlanResult plan(const ExplorationReport& report, double requested_rate,
                const std::vector<ResourceProfile>& profiles,
                int slots_cap = kDefaultSlotsCap,
                double overprovision = kDefaultOverprovision);

}  // namespace streamcap
