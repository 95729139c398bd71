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
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "streamcap/capacity_estimator.hpp"
#include "streamcap/core.hpp"
#include "streamcap/simulator.hpp"

namespace streamcap {

// Per-operator true processing rate of one task (o) and input ratio over the
// source rate (r), both derived from observed metrics.
struct TrueRates {
  std::map<OperatorId, double> o;
  std::map<OperatorId, double> r;
};

struct ZeroBusyness : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InsufficientSlots : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// o_i = actual_input_rate_i / busyness_i; an idle operator has no usable
// rate information and raises ZeroBusyness. The metrics must come from a
// single-task run, where the operator rate is the per-task rate.
TrueRates true_rates_from_metrics(const UsageMetrics& metrics);

// Same extrapolation from a run at arbitrary parallelism: the operator rate
// is spread over config's tasks before dividing by busyness, so o_i is again
// the true rate of one task (at that run's scale).
TrueRates true_rates_from_metrics(const UsageMetrics& metrics,
                                  const Configuration& config);

// Exact max-min slot assignment: maximizes min_i(pi_i * o_i / r_i) subject
// to sum(pi) == budget_slots and pi_i >= 1, by granting one slot at a time
// to the operator with the lowest current level (ties: first in op_order).
// Greedy is exact here because the objective is a max-min of separable
// increasing step functions. Returns the configuration and the predicted
// source rate lambda = min_i(pi_i * o_i / r_i).
std::pair<Configuration, double> bids2(const TrueRates& rates, int budget_slots,
                                       const std::vector<OperatorId>& op_order);

struct CoResult {
  Configuration configuration;
  double predicted_rate = 0.0;  // theoretical lambda from the optimizer
  MstResult mst;                // in-situ measurement of the configuration
};

struct CachedSingleTask {
  UsageMetrics metrics;  // from the final successful single-task measurement
  double mst = 0.0;
  int iterations_used = 0;
};

// Single-task metrics per (graph, profile, CE params). Concurrent readers,
// exclusive writers.
class MetricsCache {
 public:
  bool get(const std::string& key, CachedSingleTask* out) const;
  void put(const std::string& key, CachedSingleTask value);
  // Number of put() calls; equals the single-task estimations performed.
  int stores() const;

 private:
  mutable std::shared_mutex mu_;
  std::map<std::string, CachedSingleTask> entries_;
  int stores_ = 0;
};

std::string cache_key(const JobGraph& graph, const ResourceProfile& profile,
                      const CeParams& ce_params);

// Accounting for the estimator runs one optimize() performed (cache hits run
// fewer).
struct CoStats {
  int ce_runs = 0;
  double simulated_seconds = 0.0;
};

// Measures (or reuses) single-task metrics for budget.profile, derives true
// rates, solves the slot assignment, then measures the chosen configuration.
// force_single_task re-measures the single-task run even on a cache hit.
CoResult optimize(const GroundTruthSpec& spec, const JobGraph& graph,
                  const ResourceBudget& budget, const CeParams& ce_params,
                  MetricsCache& cache, bool force_single_task,
                  std::uint64_t seed, CoStats* stats = nullptr);

}  // namespace streamcap
