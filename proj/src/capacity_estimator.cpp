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

#include "streamcap/capacity_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace streamcap {

int ticks_for(double seconds, double tick_seconds) {
  if (seconds <= 0) return 0;
  return static_cast<int>(std::ceil(seconds / tick_seconds - 1e-9));
}

Measurement run_measurement(Deployment& d, double rate,
                            const CeParams& params) {
  const double dt = d.tick_seconds();
  const int cooldown_ticks = ticks_for(params.cooldown_s, dt);
  const int rampup_ticks = ticks_for(params.rampup_s, dt);
  const int observe_ticks = std::max(1, ticks_for(params.observe_s, dt));

  if (cooldown_ticks > 0) {
    d.set_target_rate(params.cooldown_rate);
    d.tick(cooldown_ticks);
  }
  d.set_target_rate(rate);
  if (rampup_ticks > 0) d.tick(rampup_ticks);
  d.tick(observe_ticks);

  SampleResult s = d.sample_metrics(observe_ticks);
  return Measurement{s.achieved_ratio, s.ratio_stddev, std::move(s.metrics)};
}

MstResult estimate_mst(const GroundTruthSpec& spec, const Configuration& config,
                       const ResourceProfile& profile, const CeParams& params,
                       std::uint64_t seed, const ProbeObserver& observer) {
  Deployment d = deploy(spec, config, profile, seed);

  d.set_target_rate(spec.max_injectable_rate);
  const int warmup_ticks = ticks_for(params.warmup_s, spec.tick_seconds);
  if (warmup_ticks > 0) d.tick(warmup_ticks);

  double min_r = 0.0;
  double max_r = std::numeric_limits<double>::infinity();
  double target = spec.max_injectable_rate;  // resolves the infinite bound
  Measurement last_ok;
  bool have_ok = false;
  bool saturated = false;
  int iterations = 0;

  while (true) {
    Measurement m = run_measurement(d, target, params);
    ++iterations;
    const bool ok = m.achieved_ratio >= params.success_threshold;
    if (observer) observer(target, m.achieved_ratio, ok);
    if (ok) {
      min_r = target;
      last_ok = std::move(m);
      have_ok = true;
      if (iterations == 1) {
        // The load generator maxed out before the job did.
        saturated = true;
        break;
      }
    } else {
      max_r = target;
    }
    if (iterations >= params.max_iterations) break;
    // Next bisection target would sit within sensibility of the bracket ends
    // once the bracket itself is that narrow; min_r then carries a relative
    // error of at most sensibility.
    if (min_r > 0 && max_r - min_r <= params.sensibility * min_r) break;
    target = 0.5 * (min_r + max_r);
  }

  if (!have_ok) {
    throw NeverSucceeded(
        "no probed rate reached the success threshold after " +
        std::to_string(iterations) + " iterations");
  }

  MstResult result;
  result.mst = min_r;
  result.achieved_ratio = last_ok.achieved_ratio;
  result.ratio_stddev = last_ok.ratio_stddev;
  result.metrics = std::move(last_ok.metrics);
  result.iterations_used = iterations;
  result.source_saturated = saturated;
  return result;
}

double ce_simulated_seconds(const CeParams& params, int iterations_used) {
  return kRedeploySeconds + params.warmup_s +
         static_cast<double>(iterations_used) *
             (params.cooldown_s + params.rampup_s + params.observe_s);
}

}  // namespace streamcap
