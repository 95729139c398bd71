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

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace streamcap {

// Capacity surface families: lambda = a*phi(M) + b*phi(Pi) + c with phi =
// identity, natural log, or square root applied to both inputs.
enum class ModelFamily { kLinear, kLog, kSqrt };

std::string_view family_name(ModelFamily family);
std::optional<ModelFamily> family_from_name(std::string_view name);

struct Observation {
  int memory_mb = 0;
  int task_slots = 0;
  double mst = 0.0;  // measured sustainable source rate, events/s
};

// Ordered; duplicate (M, Pi) rows are allowed and meaningful (re-measured
// candidates).
using ObservationSet = std::vector<Observation>;

struct CapacityModel {
  ModelFamily family = ModelFamily::kLinear;
  double a = 0.0;  // memory slope
  double b = 0.0;  // slots slope
  double c = 0.0;  // intercept
};

struct RankDeficient : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Unreachable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// OLS on features (phi(M), phi(Pi), 1). RankDeficient unless there are >= 3
// observations spanning >= 2 distinct M and >= 2 distinct Pi with a
// numerically full-rank design.
CapacityModel fit_family(const ObservationSet& d, ModelFamily family);

// Leave-one-out RMSE; needs >= 4 observations. A fold whose remaining
// points are rank-deficient contributes the raw deviation from their mean
// (penalizing the family rather than aborting).
double loocv_rmse(const ObservationSet& d, ModelFamily family);

// Family with the lowest LOOCV RMSE; ties go linear, then log, then sqrt.
ModelFamily best_model(const ObservationSet& d);

// Extrapolation-aware choice on >= 6 observations: sorted by Pi, the lower
// ceil(n/2) observations train each family and the rest score it; the winner
// is refit on all of d.
CapacityModel select_model(const ObservationSet& d);

double predict(const CapacityModel& m, int memory_mb, int task_slots);

constexpr double kDefaultOverprovision = 1.10;
constexpr int kDefaultSlotsCap = 10000;

// Smallest Pi >= 1 whose prediction reaches overprovision * requested_rate,
// by incremental scan; Unreachable past slots_cap.
int invert(const CapacityModel& m, int memory_mb, double requested_rate,
           double overprovision = kDefaultOverprovision,
           int slots_cap = kDefaultSlotsCap);

}  // namespace streamcap
