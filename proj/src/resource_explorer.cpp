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

#include "streamcap/resource_explorer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "streamcap/gp_numerics.hpp"
#include "streamcap/rng.hpp"

namespace streamcap {

namespace {

constexpr std::uint64_t kCornerTagBase = 100;
constexpr std::uint64_t kSearchTagBase = 200;

void validate_space(const SearchSpace& space, const JobGraph& graph) {
  const int n_ops = static_cast<int>(graph.operators.size());
  if (space.pi_min < n_ops || space.pi_min < 1) {
    throw std::invalid_argument("pi_min must cover the operator count");
  }
  if (space.pi_min > space.pi_max) {
    throw std::invalid_argument("pi_min must not exceed pi_max");
  }
  if (space.memory_mb.empty()) {
    throw std::invalid_argument("memory list must not be empty");
  }
  if (!std::is_sorted(space.memory_mb.begin(), space.memory_mb.end())) {
    throw std::invalid_argument("memory list must be sorted ascending");
  }
  if (space.memory_mb.front() <= 0) {
    throw std::invalid_argument("memory values must be positive");
  }
}

double normalize(double v, double lo, double hi) {
  return hi > lo ? (v - lo) / (hi - lo) : 0.0;
}

}  // namespace

std::vector<ResourceBudget> bootstrap_corners(const SearchSpace& space) {
  const int m_min = space.memory_mb.front();
  const int m_max = space.memory_mb.back();
  const std::pair<int, int> raw[] = {{space.pi_min, m_min},
                                     {space.pi_min, m_max},
                                     {space.pi_max, m_min},
                                     {space.pi_max, m_max}};
  std::vector<ResourceBudget> corners;
  std::set<std::pair<int, int>> seen;
  for (const auto& [pi, mem] : raw) {
    if (!seen.insert({pi, mem}).second) continue;
    corners.push_back(ResourceBudget{pi, ResourceProfile{mem}});
  }
  return corners;
}

ExplorationReport explore(const GroundTruthSpec& spec, const JobGraph& graph,
                          const SearchSpace& space,
                          const ExplorerParams& explorer_params,
                          const CeParams& ce_params, std::uint64_t seed) {
  validate_graph(graph);
  validate_space(space, graph);
  const std::vector<ResourceBudget> corners = bootstrap_corners(space);
  const int n_corners = static_cast<int>(corners.size());
  if (explorer_params.max_measurements <
      n_corners + explorer_params.min_extra_measurements) {
    throw InsufficientObservations(
        "measurement cap below corners + minimum extra points");
  }

  ExplorationReport report;
  report.graph = graph;
  MetricsCache cache;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  auto evaluate = [&](int task_slots, int memory_mb, bool force,
                      std::uint64_t tag) {
    CoStats stats;
    ResourceBudget budget{task_slots, ResourceProfile{memory_mb}};
    CoResult co = optimize(spec, graph, budget, ce_params, cache, force,
                           mix_seed(seed, tag), &stats);
    report.co_calls += 1;
    report.simulated_seconds += stats.simulated_seconds;
    report.observations.push_back(
        Observation{memory_mb, task_slots, co.mst.mst});

    ExplorationStep step;
    step.memory_mb = memory_mb;
    step.task_slots = task_slots;
    step.co = std::move(co);
    step.cost = nan;
    if (report.observations.size() >= 4) {
      step.family = best_model(report.observations);
      step.cost = loocv_rmse(report.observations, *step.family);
    }
    report.log.push_back(std::move(step));
  };

  for (int k = 0; k < n_corners; ++k) {
    // Low-slot corners re-measure the single-task run even on a cache hit.
    const bool force = corners[k].task_slots == space.pi_min;
    evaluate(corners[k].task_slots, corners[k].profile.memory_mb, force,
             kCornerTagBase + static_cast<std::uint64_t>(k));
  }

  // Candidate grid over the full discrete space, normalized for the GP.
  const double m_lo = space.memory_mb.front();
  const double m_hi = space.memory_mb.back();
  std::vector<GridCandidate> grid;
  for (int pi = space.pi_min; pi <= space.pi_max; ++pi) {
    for (int mem : space.memory_mb) {
      GridCandidate c;
      c.memory_mb = mem;
      c.task_slots = pi;
      c.x = {normalize(mem, m_lo, m_hi),
             normalize(pi, space.pi_min, space.pi_max)};
      grid.push_back(c);
    }
  }

  std::uint64_t search_step = 0;
  while (static_cast<int>(report.observations.size()) <
         explorer_params.max_measurements) {
    const int extras =
        static_cast<int>(report.observations.size()) - n_corners;
    // Worsening costs between the two most recent measurements end the
    // search once enough extra points exist and a model can be selected.
    if (extras >= explorer_params.min_extra_measurements &&
        report.observations.size() >= 6 && report.log.size() >= 2) {
      const double last = report.log[report.log.size() - 1].cost;
      const double prev = report.log[report.log.size() - 2].cost;
      if (!std::isnan(last) && !std::isnan(prev) &&
          last > (1.0 + explorer_params.rmse_worsen_stop) * prev) {
        break;
      }
    }

    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<GpPoint> points;
    double first_cost = nan;
    for (const auto& step : report.log) {
      if (!std::isnan(step.cost)) {
        first_cost = step.cost;
        break;
      }
    }
    if (!std::isnan(first_cost)) {
      for (const auto& step : report.log) {
        // Steps preceding the first computable cost share its value; the
        // GP only needs relative shape, and constants do not skew EI.
        const double target = std::isnan(step.cost) ? first_cost : step.cost;
        best_cost = std::min(best_cost, target);
        points.push_back(GpPoint{
            {normalize(step.memory_mb, m_lo, m_hi),
             normalize(step.task_slots, space.pi_min, space.pi_max)},
            target});
      }
    }

    int next_pi = 0;
    int next_mem = 0;
    if (points.size() >= 2) {
      GpPosterior gp = fit(points);
      GridCandidate cand = suggest(gp, grid, best_cost);
      next_pi = cand.task_slots;
      next_mem = cand.memory_mb;
    } else {
      // Degenerate corner sets: walk the grid in tie-break order until the
      // cost becomes computable.
      std::set<std::pair<int, int>> tried;
      for (const auto& step : report.log) {
        tried.insert({step.task_slots, step.memory_mb});
      }
      next_pi = grid.front().task_slots;
      next_mem = grid.front().memory_mb;
      for (const auto& c : grid) {
        if (!tried.count({c.task_slots, c.memory_mb})) {
          next_pi = c.task_slots;
          next_mem = c.memory_mb;
          break;
        }
      }
    }
    evaluate(next_pi, next_mem, false, kSearchTagBase + search_step);
    ++search_step;
  }

  if (report.observations.size() < 6) {
    throw InsufficientObservations(
        "exploration ended with fewer than 6 observations");
  }
  report.model = select_model(report.observations);
  report.ce_calls = report.co_calls + cache.stores();
  return report;
}

PlanResult plan(const ExplorationReport& report, double requested_rate,
                const std::vector<ResourceProfile>& profiles, int slots_cap,
                double overprovision) {
  PlanResult result;
  for (const auto& profile : profiles) {
    const int pi = invert(report.model, profile.memory_mb, requested_rate,
                          overprovision, slots_cap);

    // True rates come from the highest-slot observation at this profile;
    // the most recent one wins ties.
    const ExplorationStep* source = nullptr;
    for (const auto& step : report.log) {
      if (step.memory_mb != profile.memory_mb) continue;
      if (source == nullptr || step.task_slots >= source->task_slots) {
        source = &step;
      }
    }
    if (source == nullptr) {
      throw MissingProfileMetrics("no observation at " +
                                  std::to_string(profile.memory_mb) + " MB");
    }

    TrueRates rates = true_rates_from_metrics(source->co.mst.metrics,
                                              source->co.configuration);
    auto [config, lambda] =
        bids2(rates, pi, report.graph.operators);
    (void)lambda;

    PlanEntry entry;
    entry.profile = profile;
    entry.task_slots = pi;
    entry.configuration = std::move(config);
    entry.predicted_rate = predict(report.model, profile.memory_mb, pi);
    result.entries.push_back(std::move(entry));
  }
  return result;
}

}  // namespace streamcap
