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

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <doctest.h>

#include "streamcap/config_optimizer.hpp"
#include "streamcap/rng.hpp"
#include "test_helpers.hpp"

using namespace streamcap;
using streamcap::testing::all_ones;
using streamcap::testing::chain_graph;
using streamcap::testing::flat_op;

namespace {

const ResourceProfile kBig{4096};

UsageMetrics metrics_for(const std::vector<OperatorId>& ops,
                         const std::vector<double>& rates,
                         const std::vector<double>& busy,
                         const std::vector<double>& ratios,
                         double source_rate = 1000.0) {
  UsageMetrics m;
  m.source_rate = source_rate;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    OperatorMetrics om;
    om.actual_input_rate = rates[i];
    om.busyness = busy[i];
    om.per_task_busyness = {busy[i]};
    m.per_operator[ops[i]] = om;
    m.ratios[ops[i]] = ratios[i];
  }
  return m;
}

// Exhaustive max-min oracle over every integer composition of the budget.
double brute_force_lambda(const std::vector<double>& o,
                          const std::vector<double>& r, int budget) {
  const int n = static_cast<int>(o.size());
  double best = -1.0;
  std::vector<int> pi(n, 1);
  std::function<void(int, int)> rec = [&](int index, int left) {
    if (index == n - 1) {
      pi[index] = left;
      double lambda = 1e300;
      for (int i = 0; i < n; ++i) {
        lambda = std::min(lambda, pi[i] * o[i] / r[i]);
      }
      best = std::max(best, lambda);
      return;
    }
    for (int take = 1; take <= left - (n - index - 1); ++take) {
      pi[index] = take;
      rec(index + 1, left - take);
    }
  };
  rec(0, budget);
  return best;
}

TrueRates rates_of(const std::vector<OperatorId>& ops,
                   const std::vector<double>& o,
                   const std::vector<double>& r) {
  TrueRates tr;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    tr.o[ops[i]] = o[i];
    tr.r[ops[i]] = r[i];
  }
  return tr;
}

}  // namespace

TEST_CASE("true rates divide observed rate by busyness") {
  auto m = metrics_for({"a", "b"}, {450.0, 1000.0}, {0.9, 1.0}, {0.45, 1.0});
  TrueRates tr = true_rates_from_metrics(m);
  CHECK(tr.o.at("a") == doctest::Approx(500.0));
  CHECK(tr.o.at("b") == doctest::Approx(1000.0));
  CHECK(tr.r.at("a") == doctest::Approx(0.45));
}

TEST_CASE("an idle operator makes metrics unusable") {
  auto m = metrics_for({"a"}, {0.0}, {0.0}, {1.0});
  CHECK_THROWS_AS(true_rates_from_metrics(m), ZeroBusyness);
}

TEST_CASE("true rates from a parallel run are per task") {
  auto m = metrics_for({"a"}, {4000.0}, {0.8}, {1.0});
  TrueRates tr = true_rates_from_metrics(m, Configuration{{"a", 4}});
  CHECK(tr.o.at("a") == doctest::Approx(1250.0));
  // Without the configuration the rate is taken as a single task's.
  CHECK(true_rates_from_metrics(m).o.at("a") == doctest::Approx(5000.0));
}

TEST_CASE("one operator takes the whole budget") {
  auto [config, lambda] = bids2(rates_of({"a"}, {100.0}, {1.0}), 4, {"a"});
  CHECK(config.at("a") == 4);
  CHECK(lambda == doctest::Approx(400.0));
}

TEST_CASE("slots flow to the slower operator until rates balance") {
  auto [config, lambda] =
      bids2(rates_of({"a", "b"}, {100.0, 50.0}, {1.0, 1.0}), 9, {"a", "b"});
  CHECK(config.at("a") == 3);
  CHECK(config.at("b") == 6);
  CHECK(lambda == doctest::Approx(300.0));
}

TEST_CASE("ratios weigh the slot value of each operator") {
  auto [config, lambda] =
      bids2(rates_of({"a", "b"}, {200.0, 80.0}, {0.5, 1.0}), 6, {"a", "b"});
  CHECK(config.at("a") == 1);
  CHECK(config.at("b") == 5);
  CHECK(lambda == doctest::Approx(400.0));
}

TEST_CASE("budgets below the operator count are rejected") {
  CHECK_THROWS_AS(
      bids2(rates_of({"a", "b"}, {1.0, 1.0}, {1.0, 1.0}), 1, {"a", "b"}),
      InsufficientSlots);
}

TEST_CASE("greedy water-filling matches the exhaustive optimum") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const int n = 2 + static_cast<int>(splitmix64(mix_seed(1, seed)) % 4);
    const int budget =
        n + static_cast<int>(splitmix64(mix_seed(2, seed)) % (21 - n));
    std::vector<OperatorId> ops;
    std::vector<double> o, r;
    for (int i = 0; i < n; ++i) {
      ops.push_back("op" + std::to_string(i));
      o.push_back(hash_to_range(mix_seed(seed * 31 + i, 3), 10.0, 1000.0));
      r.push_back(hash_to_range(mix_seed(seed * 31 + i, 4), 0.1, 2.0));
    }
    auto [config, lambda] = bids2(rates_of(ops, o, r), budget, ops);
    CHECK(total_slots(config) == budget);
    CHECK(lambda == doctest::Approx(brute_force_lambda(o, r, budget))
                        .epsilon(1e-12));
  }
}

TEST_CASE("moving one slot never raises the bottleneck") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::vector<OperatorId> ops{"x", "y", "z"};
    std::vector<double> o, r;
    for (int i = 0; i < 3; ++i) {
      o.push_back(hash_to_range(mix_seed(seed * 7 + i, 5), 10.0, 500.0));
      r.push_back(hash_to_range(mix_seed(seed * 7 + i, 6), 0.2, 1.5));
    }
    TrueRates tr = rates_of(ops, o, r);
    auto [config, lambda] = bids2(tr, 11, ops);
    auto level = [&](const Configuration& c) {
      double lam = 1e300;
      for (std::size_t i = 0; i < ops.size(); ++i) {
        lam = std::min(lam, c.at(ops[i]) * o[i] / r[i]);
      }
      return lam;
    };
    CHECK(level(config) == doctest::Approx(lambda));
    for (const auto& from : ops) {
      for (const auto& to : ops) {
        if (from == to || config.at(from) <= 1) continue;
        Configuration moved = config;
        moved[from] -= 1;
        moved[to] += 1;
        CHECK(level(moved) <= lambda * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("scaling all true rates scales the bottleneck, not the split") {
  std::vector<OperatorId> ops{"a", "b", "c"};
  std::vector<double> o{120.0, 45.0, 310.0};
  std::vector<double> r{1.0, 0.6, 0.9};
  auto [base_config, base_lambda] = bids2(rates_of(ops, o, r), 14, ops);
  for (double k : {0.5, 3.0, 1000.0}) {
    std::vector<double> scaled{o[0] * k, o[1] * k, o[2] * k};
    auto [config, lambda] = bids2(rates_of(ops, scaled, r), 14, ops);
    CHECK(config == base_config);
    CHECK(lambda == doctest::Approx(base_lambda * k));
  }
}

TEST_CASE("optimize with the minimal budget echoes the all-ones run") {
  GroundTruthSpec spec;
  spec.graph = chain_graph({"a", "b"});
  spec.per_operator["a"] = flat_op(1000.0);
  spec.per_operator["b"] = flat_op(400.0);
  spec.max_injectable_rate = 5000.0;
  MetricsCache cache;
  CoStats stats;
  CoResult r = optimize(spec, spec.graph, ResourceBudget{2, kBig}, CeParams{},
                        cache, false, 5, &stats);
  CHECK(r.configuration == Configuration{{"a", 1}, {"b", 1}});
  CHECK(total_slots(r.configuration) == 2);
  // One run for the single-task metrics, one for the chosen configuration.
  CHECK(stats.ce_runs == 2);
  CHECK(cache.stores() == 1);
  CHECK(r.mst.mst == doctest::Approx(400.0).epsilon(0.02));
}

TEST_CASE("the single-task measurement is cached per profile") {
  GroundTruthSpec spec;
  spec.graph = chain_graph({"a", "b"});
  spec.per_operator["a"] = flat_op(1000.0);
  spec.per_operator["b"] = flat_op(400.0);
  spec.max_injectable_rate = 5000.0;
  MetricsCache cache;
  CoStats first, second, third, fourth;
  optimize(spec, spec.graph, ResourceBudget{4, kBig}, CeParams{}, cache, false,
           5, &first);
  optimize(spec, spec.graph, ResourceBudget{6, kBig}, CeParams{}, cache, false,
           6, &second);
  CHECK(first.ce_runs == 2);
  CHECK(second.ce_runs == 1);  // cache hit
  CHECK(cache.stores() == 1);
  // A different profile misses.
  optimize(spec, spec.graph, ResourceBudget{6, ResourceProfile{512}},
           CeParams{}, cache, false, 7, &third);
  CHECK(third.ce_runs == 2);
  CHECK(cache.stores() == 2);
  // Forcing re-measures even on a hit.
  optimize(spec, spec.graph, ResourceBudget{6, kBig}, CeParams{}, cache, true,
           8, &fourth);
  CHECK(fourth.ce_runs == 2);
  CHECK(cache.stores() == 3);
}

TEST_CASE("doubling identical operators doubles the measured rate") {
  GroundTruthSpec spec;
  spec.graph = chain_graph({"a", "b"});
  spec.per_operator["a"] = flat_op(900.0);
  spec.per_operator["b"] = flat_op(900.0);
  spec.max_injectable_rate = 8000.0;
  MetricsCache cache;
  CeParams p;
  p.sensibility = 0.001;
  p.max_iterations = 16;
  p.success_threshold = 0.999;
  CoResult r = optimize(spec, spec.graph, ResourceBudget{4, kBig}, p, cache,
                        false, 11);
  const double single = true_mst(spec, all_ones(spec.graph), kBig);
  CHECK(r.configuration == Configuration{{"a", 2}, {"b", 2}});
  CHECK(r.mst.mst == doctest::Approx(2.0 * single).epsilon(0.01));
}

TEST_CASE("optimize checks the graph and the budget") {
  GroundTruthSpec spec;
  spec.graph = chain_graph({"a", "b"});
  spec.per_operator["a"] = flat_op(1000.0);
  spec.per_operator["b"] = flat_op(400.0);
  spec.max_injectable_rate = 5000.0;
  MetricsCache cache;
  CHECK_THROWS_AS(optimize(spec, chain_graph({"other"}),
                           ResourceBudget{4, kBig}, CeParams{}, cache, false,
                           5),
                  std::invalid_argument);
  CHECK_THROWS_AS(optimize(spec, spec.graph, ResourceBudget{1, kBig},
                           CeParams{}, cache, false, 5),
                  InsufficientSlots);
}

TEST_CASE("cache keys separate graphs, profiles, and estimator settings") {
  JobGraph g1 = chain_graph({"a"});
  JobGraph g2 = chain_graph({"b"});
  CeParams p1;
  CeParams p2;
  p2.sensibility = 0.5;
  const std::string base = cache_key(g1, kBig, p1);
  CHECK(base == cache_key(g1, kBig, p1));
  CHECK(base != cache_key(g2, kBig, p1));
  CHECK(base != cache_key(g1, ResourceProfile{512}, p1));
  CHECK(base != cache_key(g1, kBig, p2));
}
