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

#include "streamcap/config_optimizer.hpp"

#include <algorithm>
#include <limits>
#include <mutex>
#include <sstream>

#include "streamcap/rng.hpp"

namespace streamcap {

namespace {

constexpr std::uint64_t kSingleTaskTag = 0x53494e474c45ULL;
constexpr std::uint64_t kConfigRunTag = 0x434f4e464947ULL;

}  // namespace

TrueRates true_rates_from_metrics(const UsageMetrics& metrics) {
  return true_rates_from_metrics(metrics, Configuration{});
}

TrueRates true_rates_from_metrics(const UsageMetrics& metrics,
                                  const Configuration& config) {
  TrueRates rates;
  for (const auto& [op, om] : metrics.per_operator) {
    if (om.busyness <= 0.0) {
      throw ZeroBusyness("operator '" + op +
                         "' was observed idle; metrics unusable");
    }
    int tasks = 1;
    if (auto cit = config.find(op); cit != config.end()) tasks = cit->second;
    if (tasks < 1) {
      throw std::invalid_argument("parallelism below 1 for operator '" + op +
                                  "'");
    }
    rates.o[op] = om.actual_input_rate / static_cast<double>(tasks) /
                  om.busyness;
    auto rit = metrics.ratios.find(op);
    if (rit == metrics.ratios.end()) {
      throw std::invalid_argument("metrics miss ratio for operator '" + op +
                                  "'");
    }
    rates.r[op] = rit->second;
  }
  return rates;
}

std::pair<Configuration, double> bids2(const TrueRates& rates, int budget_slots,
                                       const std::vector<OperatorId>& op_order) {
  const int n = static_cast<int>(op_order.size());
  if (n == 0) throw std::invalid_argument("no operators to assign slots to");
  if (budget_slots < n) {
    throw InsufficientSlots("budget of " + std::to_string(budget_slots) +
                            " slots cannot cover " + std::to_string(n) +
                            " operators");
  }

  std::vector<double> unit(n);  // o_i / r_i: level gained per slot
  std::vector<int> pi(n, 1);
  for (int i = 0; i < n; ++i) {
    const auto& op = op_order[i];
    auto oit = rates.o.find(op);
    auto rit = rates.r.find(op);
    if (oit == rates.o.end() || rit == rates.r.end()) {
      throw std::invalid_argument("rates miss operator '" + op + "'");
    }
    if (rit->second <= 0) {
      throw std::invalid_argument("ratio must be > 0 for operator '" + op + "'");
    }
    unit[i] = oit->second / rit->second;
  }

  for (int granted = n; granted < budget_slots; ++granted) {
    int argmin = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      const double level = static_cast<double>(pi[i]) * unit[i];
      if (level < best) {  // strict: ties keep the earliest operator
        best = level;
        argmin = i;
      }
    }
    pi[argmin] += 1;
  }

  Configuration config;
  double lambda = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    config[op_order[i]] = pi[i];
    lambda = std::min(lambda, static_cast<double>(pi[i]) * unit[i]);
  }
  return {std::move(config), lambda};
}

bool MetricsCache::get(const std::string& key, CachedSingleTask* out) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return false;
  if (out) *out = it->second;
  return true;
}

void MetricsCache::put(const std::string& key, CachedSingleTask value) {
  std::unique_lock lock(mu_);
  entries_[key] = std::move(value);
  ++stores_;
}

int MetricsCache::stores() const {
  std::shared_lock lock(mu_);
  return stores_;
}

std::string cache_key(const JobGraph& graph, const ResourceProfile& profile,
                      const CeParams& ce) {
  std::ostringstream key;
  key << graph.source << ">" << graph.sink;
  for (const auto& op : graph.operators) key << "|" << op;
  for (const auto& [from, to] : graph.edges) key << "|" << from << ">" << to;
  key << "#mem=" << profile.memory_mb;
  key << "#ce=" << ce.warmup_s << "," << ce.cooldown_s << "," << ce.cooldown_rate
      << "," << ce.rampup_s << "," << ce.observe_s << ","
      << ce.success_threshold << "," << ce.sensibility << ","
      << ce.max_iterations;
  return key.str();
}

CoResult optimize(const GroundTruthSpec& spec, const JobGraph& graph,
                  const ResourceBudget& budget, const CeParams& ce_params,
                  MetricsCache& cache, bool force_single_task,
                  std::uint64_t seed, CoStats* stats) {
  if (graph.source != spec.graph.source || graph.sink != spec.graph.sink ||
      graph.operators != spec.graph.operators ||
      graph.edges != spec.graph.edges) {
    throw std::invalid_argument("graph does not match the deployed spec");
  }
  const int n = static_cast<int>(graph.operators.size());
  if (budget.task_slots < n) {
    throw InsufficientSlots("budget of " + std::to_string(budget.task_slots) +
                            " slots cannot cover " + std::to_string(n) +
                            " operators");
  }

  const std::string key = cache_key(graph, budget.profile, ce_params);
  CachedSingleTask single;
  if (force_single_task || !cache.get(key, &single)) {
    Configuration ones;
    for (const auto& op : graph.operators) ones[op] = 1;
    MstResult r = estimate_mst(spec, ones, budget.profile, ce_params,
                               mix_seed(seed, kSingleTaskTag));
    single = CachedSingleTask{r.metrics, r.mst, r.iterations_used};
    cache.put(key, single);
    if (stats) {
      stats->ce_runs += 1;
      stats->simulated_seconds +=
          ce_simulated_seconds(ce_params, r.iterations_used);
    }
  }

  TrueRates rates = true_rates_from_metrics(single.metrics);
  auto [config, lambda] = bids2(rates, budget.task_slots, graph.operators);

  MstResult measured = estimate_mst(spec, config, budget.profile, ce_params,
                                    mix_seed(seed, kConfigRunTag));
  if (stats) {
    stats->ce_runs += 1;
    stats->simulated_seconds +=
        ce_simulated_seconds(ce_params, measured.iterations_used);
  }

  CoResult result;
  result.configuration = std::move(config);
  result.predicted_rate = lambda;
  result.mst = std::move(measured);
  return result;
}

}  // namespace streamcap
