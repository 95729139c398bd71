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
#include <functional>
#include <stdexcept>

#include "streamcap/core.hpp"
#include "streamcap/simulator.hpp"

namespace streamcap {

// Phase lengths and stop thresholds for one MST estimation. The injection
// phase of one measurement is rampup_s + observe_s = 75 s by default.
struct CeParams {
  double warmup_s = 120.0;
  double cooldown_s = 15.0;
  double cooldown_rate = 6400.0;  // low but non-zero drain rate, events/s
  double rampup_s = 60.0;
  double observe_s = 15.0;
  double success_threshold = 0.99;
  double sensibility = 0.01;  // relative bracket width that ends the search
  int max_iterations = 8;
};

struct NeverSucceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Measurement {
  double achieved_ratio = 0.0;
  double ratio_stddev = 0.0;
  UsageMetrics metrics;
};

// One cooldown -> ramp-up -> observe cycle at `rate`. Samples only the
// observation window; cooldown and ramp-up ticks are never part of the
// returned statistics.
Measurement run_measurement(Deployment& d, double rate, const CeParams& params);

// Called once per probe; lets tests and verbose output trace the search.
using ProbeObserver =
    std::function<void(double target_rate, double achieved_ratio, bool success)>;

// Dichotomous MST search. Deploys fresh, warms up at the maximal injectable
// rate, then bisects on (min_r, max_r) with the first probe at the source
// cap. A probe succeeds when achieved_ratio >= success_threshold. Stops when
// the bracket is within sensibility of its lower end (which bounds the
// relative error by sensibility) or after max_iterations probes. Returns
// min_r with the metrics of the last successful measurement;
// source_saturated is set when the very first probe succeeds, in which case
// the source cap itself is returned. NeverSucceeded if no probe ever passed.
MstResult estimate_mst(const GroundTruthSpec& spec, const Configuration& config,
                       const ResourceProfile& profile, const CeParams& params,
                       std::uint64_t seed,
                       const ProbeObserver& observer = {});

// Simulated wall time one estimation accounts for: redeploy, warmup, and the
// three phases of every iteration actually run.
double ce_simulated_seconds(const CeParams& params, int iterations_used);

// Ticks needed to cover `seconds` at the given tick length.
int ticks_for(double seconds, double tick_seconds);

}  // namespace streamcap
