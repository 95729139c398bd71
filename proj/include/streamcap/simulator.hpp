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
#include <map>
#include <stdexcept>
#include <vector>

#include "streamcap/core.hpp"

namespace streamcap {

// Per-operator capacity law of the simulated testbed. Planning code never
// sees this; it only observes UsageMetrics.
struct OperatorGroundTruth {
  double base_rate = 0.0;       // events/s per task at reference memory
  double memory_knee_mb = 512;  // capacity degrades below this per-slot size
  double memory_exponent = 0.0;   // gamma: degradation curve power
  double scaling_exponent = 0.0;  // alpha in [0,1): per-task factor pi^(-alpha)
  double skew_factor = 0.0;       // sigma: imbalance growth with parallelism
  double noise_level = 0.0;       // eps: relative measurement noise
  double selectivity = 1.0;       // events out per event in, per outgoing edge
};

struct GroundTruthSpec {
  JobGraph graph;
  std::map<OperatorId, OperatorGroundTruth> per_operator;
  double max_injectable_rate = 0.0;  // source-side generation cap, events/s
  double warmup_time_constant_s = 0.0;  // tau; 0 disables the cold transient
  double tick_seconds = 5.0;
};

struct ConfigurationMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InsufficientHistory : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sustained per-task rate: base_rate * min(1, (M/knee)^gamma) * pi^(-alpha)
// / (1 + sigma * (1 - 1/pi)).
double effective_task_capacity(const OperatorGroundTruth& gt,
                               const ResourceProfile& profile, int parallelism);

// Input ratio r_i per operator: sum over inbound source-to-i paths of the
// product of selectivities along the path (the source has selectivity 1).
std::map<OperatorId, double> input_ratios(
    const JobGraph& graph,
    const std::map<OperatorId, OperatorGroundTruth>& per_operator);

// min(max_injectable_rate, min_i pi_i * effective_task_capacity_i / r_i).
double true_mst(const GroundTruthSpec& spec, const Configuration& config,
                const ResourceProfile& profile);

// The pipeline bottleneck with the source cap lifted; oracle for plans that
// target rates beyond what this testbed's generator can produce.
double true_mst_uncapped(const GroundTruthSpec& spec,
                         const Configuration& config,
                         const ResourceProfile& profile);

struct SampleResult {
  UsageMetrics metrics;
  double achieved_ratio = 0.0;  // mean processed/target over the window
  double ratio_stddev = 0.0;
  double pending_records = 0.0;
};

// Redeployment bookkeeping cost in simulated seconds.
constexpr double kRedeploySeconds = 60.0;

// Single-owner discrete-time state machine for one deployed configuration.
// All randomness is derived from (seed, clock, operator, field) counters, so
// identical call sequences reproduce identical outputs bit-for-bit.
class Deployment {
 public:
  Deployment(const GroundTruthSpec& spec, Configuration config,
             ResourceProfile profile, std::uint64_t seed);

  void set_target_rate(double rate);
  void tick(int n_ticks);
  // Averages the trailing `window_ticks` ticks; InsufficientHistory if the
  // deployment has not run that long.
  SampleResult sample_metrics(int window_ticks) const;

  double sim_clock_s() const { return static_cast<double>(ticks_done_) * dt_; }
  double tick_seconds() const { return dt_; }
  double target_rate() const { return target_; }
  double pending_records() const { return pending_; }
  double cumulative_injected() const { return cum_injected_; }
  double cumulative_processed() const { return cum_processed_; }

 private:
  struct TickRecord {
    double target = 0.0;     // events/s asked of the source
    double injected = 0.0;   // events/s the source admitted
    double processed = 0.0;  // events/s the pipeline consumed
  };

  const GroundTruthSpec* spec_;
  Configuration config_;
  ResourceProfile profile_;
  std::uint64_t seed_;
  double dt_;

  std::vector<OperatorId> ops_;  // graph order
  std::vector<int> pi_;
  std::vector<double> ratio_;           // r_i
  std::vector<double> task_cap_;        // steady per-task capacity
  double bottleneck_steady_ = 0.0;      // min_i pi_i * task_cap_i / r_i

  double target_ = 0.0;
  std::uint64_t ticks_done_ = 0;
  double pending_ = 0.0;
  double cum_injected_ = 0.0;
  double cum_processed_ = 0.0;
  std::vector<TickRecord> history_;
};

// Fresh cold-start deployment at sim_clock 0.
Deployment deploy(const GroundTruthSpec& spec, const Configuration& config,
                  const ResourceProfile& profile, std::uint64_t seed);

}  // namespace streamcap
