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

#include "streamcap/capacity_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace streamcap {

namespace {

double apply_phi(ModelFamily family, double v) {
  switch (family) {
    case ModelFamily::kLinear:
      return v;
    case ModelFamily::kLog:
      return std::log(v);
    case ModelFamily::kSqrt:
      return std::sqrt(v);
  }
  return v;
}

constexpr ModelFamily kFamilies[] = {ModelFamily::kLinear, ModelFamily::kLog,
                                     ModelFamily::kSqrt};

}  // namespace

std::string_view family_name(ModelFamily family) {
  switch (family) {
    case ModelFamily::kLinear:
      return "linear";
    case ModelFamily::kLog:
      return "log";
    case ModelFamily::kSqrt:
      return "sqrt";
  }
  return "linear";
}

std::optional<ModelFamily> family_from_name(std::string_view name) {
  for (ModelFamily f : kFamilies) {
    if (family_name(f) == name) return f;
  }
  return std::nullopt;
}

CapacityModel fit_family(const ObservationSet& d, ModelFamily family) {
  if (d.size() < 3) {
    throw RankDeficient("need at least 3 observations, got " +
                        std::to_string(d.size()));
  }
  std::set<int> mems, slots;
  for (const auto& o : d) {
    if (o.memory_mb <= 0 || o.task_slots <= 0) {
      throw std::invalid_argument("observations must have positive M and Pi");
    }
    mems.insert(o.memory_mb);
    slots.insert(o.task_slots);
  }
  if (mems.size() < 2 || slots.size() < 2) {
    throw RankDeficient("observations span fewer than 2 distinct M or Pi");
  }

  // Centered normal equations: numerically stable at these magnitudes and
  // exact for exact-family data.
  const double n = static_cast<double>(d.size());
  double um = 0, vm = 0, ym = 0;
  for (const auto& o : d) {
    um += apply_phi(family, o.memory_mb);
    vm += apply_phi(family, o.task_slots);
    ym += o.mst;
  }
  um /= n;
  vm /= n;
  ym /= n;

  double suu = 0, svv = 0, suv = 0, suy = 0, svy = 0;
  for (const auto& o : d) {
    const double du = apply_phi(family, o.memory_mb) - um;
    const double dv = apply_phi(family, o.task_slots) - vm;
    const double dy = o.mst - ym;
    suu += du * du;
    svv += dv * dv;
    suv += du * dv;
    suy += du * dy;
    svy += dv * dy;
  }

  const double det = suu * svv - suv * suv;
  if (suu <= 0 || svv <= 0 || det <= 1e-12 * suu * svv) {
    throw RankDeficient("design matrix is numerically rank-deficient");
  }

  CapacityModel m;
  m.family = family;
  m.a = (svv * suy - suv * svy) / det;
  m.b = (suu * svy - suv * suy) / det;
  m.c = ym - m.a * um - m.b * vm;
  return m;
}

double loocv_rmse(const ObservationSet& d, ModelFamily family) {
  if (d.size() < 4) {
    throw std::invalid_argument("loocv_rmse needs at least 4 observations");
  }
  double sq = 0.0;
  ObservationSet fold;
  fold.reserve(d.size() - 1);
  for (std::size_t i = 0; i < d.size(); ++i) {
    fold.clear();
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (j != i) fold.push_back(d[j]);
    }
    double residual;
    try {
      CapacityModel m = fit_family(fold, family);
      residual = d[i].mst - predict(m, d[i].memory_mb, d[i].task_slots);
    } catch (const RankDeficient&) {
      double mean = 0.0;
      for (const auto& o : fold) mean += o.mst;
      mean /= static_cast<double>(fold.size());
      residual = d[i].mst - mean;
    }
    sq += residual * residual;
  }
  return std::sqrt(sq / static_cast<double>(d.size()));
}

ModelFamily best_model(const ObservationSet& d) {
  ModelFamily best = ModelFamily::kLinear;
  double best_score = 0.0;
  bool first = true;
  for (ModelFamily f : kFamilies) {
    const double score = loocv_rmse(d, f);
    if (first || score < best_score) {  // strict: ties keep earlier family
      first = false;
      best = f;
      best_score = score;
    }
  }
  return best;
}

CapacityModel select_model(const ObservationSet& d) {
  if (d.size() < 6) {
    throw std::invalid_argument("select_model needs at least 6 observations");
  }
  ObservationSet sorted = d;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Observation& a, const Observation& b) {
                     return a.task_slots < b.task_slots;
                   });
  const std::size_t train_n = (sorted.size() + 1) / 2;  // lower half rounds up
  ObservationSet train(sorted.begin(), sorted.begin() + train_n);
  ObservationSet test(sorted.begin() + train_n, sorted.end());

  ModelFamily winner = ModelFamily::kLinear;
  double best_rmse = 0.0;
  bool first = true;
  for (ModelFamily f : kFamilies) {
    CapacityModel m = fit_family(train, f);  // RankDeficient propagates
    double sq = 0.0;
    for (const auto& o : test) {
      const double r = o.mst - predict(m, o.memory_mb, o.task_slots);
      sq += r * r;
    }
    const double rmse = std::sqrt(sq / static_cast<double>(test.size()));
    if (first || rmse < best_rmse) {
      first = false;
      winner = f;
      best_rmse = rmse;
    }
  }
  return fit_family(d, winner);
}

double predict(const CapacityModel& m, int memory_mb, int task_slots) {
  return m.a * apply_phi(m.family, memory_mb) +
         m.b * apply_phi(m.family, task_slots) + m.c;
}

int invert(const CapacityModel& m, int memory_mb, double requested_rate,
           double overprovision, int slots_cap) {
  if (requested_rate <= 0) {
    throw std::invalid_argument("requested_rate must be > 0");
  }
  const double target = overprovision * requested_rate;
  for (int pi = 1; pi <= slots_cap; ++pi) {
    if (predict(m, memory_mb, pi) >= target) return pi;
  }
  throw Unreachable("model never reaches " + std::to_string(target) +
                    " events/s within " + std::to_string(slots_cap) +
                    " slots");
}

}  // namespace streamcap
