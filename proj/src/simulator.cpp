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

#include "streamcap/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "streamcap/rng.hpp"

namespace streamcap {

namespace {

void require_covering_config(const JobGraph& graph, const Configuration& config) {
  for (const auto& op : graph.operators) {
    auto it = config.find(op);
    if (it == config.end()) {
      throw ConfigurationMismatch("configuration misses operator '" + op + "'");
    }
    if (it->second < 1) {
      throw ConfigurationMismatch("operator '" + op + "' has parallelism < 1");
    }
  }
  if (config.size() != graph.operators.size()) {
    for (const auto& [op, pi] : config) {
      if (std::find(graph.operators.begin(), graph.operators.end(), op) ==
          graph.operators.end()) {
        throw ConfigurationMismatch("configuration names unknown operator '" +
                                    op + "'");
      }
    }
  }
}

const OperatorGroundTruth& truth_for(
    const std::map<OperatorId, OperatorGroundTruth>& per_operator,
    const OperatorId& op) {
  auto it = per_operator.find(op);
  if (it == per_operator.end()) {
    throw std::invalid_argument("ground truth misses operator '" + op + "'");
  }
  return it->second;
}

double bottleneck_rate(const GroundTruthSpec& spec, const Configuration& config,
                       const ResourceProfile& profile) {
  require_covering_config(spec.graph, config);
  auto ratios = input_ratios(spec.graph, spec.per_operator);
  double mst = std::numeric_limits<double>::infinity();
  for (const auto& op : spec.graph.operators) {
    const auto& gt = truth_for(spec.per_operator, op);
    int pi = config.at(op);
    double cap = static_cast<double>(pi) *
                 effective_task_capacity(gt, profile, pi) / ratios.at(op);
    mst = std::min(mst, cap);
  }
  return mst;
}

}  // namespace

double effective_task_capacity(const OperatorGroundTruth& gt,
                               const ResourceProfile& profile,
                               int parallelism) {
  if (parallelism < 1) {
    throw std::invalid_argument("parallelism must be >= 1");
  }
  const double pi = static_cast<double>(parallelism);
  const double mem =
      std::min(1.0, std::pow(static_cast<double>(profile.memory_mb) /
                                 gt.memory_knee_mb,
                             gt.memory_exponent));
  const double scale = std::pow(pi, -gt.scaling_exponent);
  const double skew = 1.0 + gt.skew_factor * (1.0 - 1.0 / pi);
  return gt.base_rate * mem * scale / skew;
}

std::map<OperatorId, double> input_ratios(
    const JobGraph& graph,
    const std::map<OperatorId, OperatorGroundTruth>& per_operator) {
  // Accumulate path products in topological order; validate_graph guarantees
  // acyclicity so a simple relaxation over repeatedly-ready nodes suffices.
  std::map<OperatorId, double> flow;  // events per source event entering node
  flow[graph.source] = 1.0;
  for (const auto& op : graph.operators) flow[op] = 0.0;
  flow[graph.sink] = 0.0;

  // Topological order via Kahn over the known-acyclic graph.
  std::map<OperatorId, int> indeg;
  for (const auto& [from, to] : graph.edges) indeg[to] += 1;
  std::vector<OperatorId> order{graph.source};
  std::vector<OperatorId> ready;
  std::map<OperatorId, int> remaining = indeg;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const OperatorId& node = order[i];
    double sel = 1.0;
    if (node != graph.source && node != graph.sink) {
      sel = truth_for(per_operator, node).selectivity;
    }
    for (const auto& [from, to] : graph.edges) {
      if (from != node) continue;
      flow[to] += flow[node] * sel;
      if (--remaining[to] == 0) order.push_back(to);
    }
  }

  std::map<OperatorId, double> ratios;
  for (const auto& op : graph.operators) ratios[op] = flow[op];
  return ratios;
}

double true_mst(const GroundTruthSpec& spec, const Configuration& config,
                const ResourceProfile& profile) {
  return std::min(spec.max_injectable_rate,
                  bottleneck_rate(spec, config, profile));
}

double true_mst_uncapped(const GroundTruthSpec& spec,
                         const Configuration& config,
                         const ResourceProfile& profile) {
  return bottleneck_rate(spec, config, profile);
}

Deployment::Deployment(const GroundTruthSpec& spec, Configuration config,
                       ResourceProfile profile, std::uint64_t seed)
    : spec_(&spec),
      config_(std::move(config)),
      profile_(profile),
      seed_(seed),
      dt_(spec.tick_seconds) {
  if (spec.tick_seconds <= 0) {
    throw std::invalid_argument("tick_seconds must be > 0");
  }
  require_covering_config(spec.graph, config_);
  auto ratios = input_ratios(spec.graph, spec.per_operator);
  bottleneck_steady_ = std::numeric_limits<double>::infinity();
  for (const auto& op : spec.graph.operators) {
    const auto& gt = truth_for(spec.per_operator, op);
    int pi = config_.at(op);
    ops_.push_back(op);
    pi_.push_back(pi);
    ratio_.push_back(ratios.at(op));
    task_cap_.push_back(effective_task_capacity(gt, profile_, pi));
    bottleneck_steady_ = std::min(
        bottleneck_steady_, static_cast<double>(pi) * task_cap_.back() /
                                ratios.at(op));
  }
}

void Deployment::set_target_rate(double rate) {
  if (rate < 0) throw std::invalid_argument("target rate must be >= 0");
  target_ = rate;
}

void Deployment::tick(int n_ticks) {
  if (n_ticks < 1) throw std::invalid_argument("n_ticks must be >= 1");
  const double tau = spec_->warmup_time_constant_s;
  for (int k = 0; k < n_ticks; ++k) {
    // Cold start processes faster than steady state: capacity multiplier
    // decays from 2 at clock 0 toward 1 with time constant tau.
    const double t = static_cast<double>(ticks_done_) * dt_;
    const double warm = tau > 0 ? 1.0 + std::exp(-t / tau) : 1.0;
    const double injected = std::min(target_, spec_->max_injectable_rate) * dt_;
    const double available = injected + pending_;
    const double capacity = warm * bottleneck_steady_ * dt_;
    const double processed = std::min(available, capacity);
    pending_ = available - processed;  // >= 0 by construction
    cum_injected_ += injected;
    cum_processed_ += processed;
    history_.push_back({target_, injected / dt_, processed / dt_});
    ++ticks_done_;
  }
}

SampleResult Deployment::sample_metrics(int window_ticks) const {
  if (window_ticks < 1) {
    throw std::invalid_argument("window_ticks must be >= 1");
  }
  if (static_cast<std::uint64_t>(window_ticks) > ticks_done_) {
    throw InsufficientHistory("deployment ran " + std::to_string(ticks_done_) +
                              " ticks, window needs " +
                              std::to_string(window_ticks));
  }

  const std::size_t begin = history_.size() - window_ticks;
  double processed_mean = 0.0;
  double ratio_mean = 0.0;
  double ratio_sq = 0.0;
  for (std::size_t i = begin; i < history_.size(); ++i) {
    const TickRecord& rec = history_[i];
    processed_mean += rec.processed;
    // Achieved fraction from the source's point of view; backlog drain can
    // push processed above target, clip at 1.
    double a = rec.target > 0 ? std::min(1.0, rec.processed / rec.target) : 1.0;
    ratio_mean += a;
    ratio_sq += a * a;
  }
  const double n = static_cast<double>(window_ticks);
  processed_mean /= n;
  ratio_mean /= n;
  const double var = std::max(0.0, ratio_sq / n - ratio_mean * ratio_mean);

  SampleResult out;
  out.achieved_ratio = ratio_mean;
  out.ratio_stddev = std::sqrt(var);
  out.pending_records = pending_;
  // The source's own counters are exact; measurement noise applies to the
  // per-operator probes below, never to ground truth.
  out.metrics.source_rate = processed_mean;
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    const auto& gt = spec_->per_operator.at(ops_[i]);
    const double true_rate = ratio_[i] * processed_mean;
    const double rate = true_rate * noise_factor(seed_, ticks_done_, i + 1,
                                                 /*field=*/0, gt.noise_level);
    double busy = 0.0;
    if (task_cap_[i] > 0) {
      busy = (true_rate / static_cast<double>(pi_[i])) / task_cap_[i];
    }
    busy = std::clamp(busy, 0.0, 1.0);
    busy = std::clamp(busy * noise_factor(seed_, ticks_done_, i + 1,
                                          /*field=*/1, gt.noise_level),
                      0.0, 1.0);

    OperatorMetrics om;
    om.actual_input_rate = rate;
    om.busyness = busy;
    // Deterministic per-task imbalance: a zero-mean ramp around the scalar,
    // bounded so every task stays in [0, 1] and the mean is preserved.
    const int pi = pi_[i];
    double spread = 0.0;
    if (pi > 1) {
      spread = busy * gt.skew_factor * (1.0 - 1.0 / static_cast<double>(pi));
      spread = std::min({spread, 1.0 - busy, busy});
    }
    for (int j = 0; j < pi; ++j) {
      double ramp =
          pi > 1 ? 2.0 * static_cast<double>(j) / static_cast<double>(pi - 1) -
                       1.0
                 : 0.0;
      om.per_task_busyness.push_back(busy + spread * ramp);
    }
    out.metrics.per_operator[ops_[i]] = std::move(om);
    out.metrics.ratios[ops_[i]] =
        processed_mean > 0 ? rate / processed_mean : ratio_[i];
  }
  return out;
}

Deployment deploy(const GroundTruthSpec& spec, const Configuration& config,
                  const ResourceProfile& profile, std::uint64_t seed) {
  return Deployment(spec, config, profile, seed);
}

}  // namespace streamcap
