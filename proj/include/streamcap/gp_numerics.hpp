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

#include <array>
#include <stdexcept>
#include <utility>
#include <vector>

namespace streamcap {

// Training point: input normalized to [0,1]^2 as (m_norm, p_norm), raw cost.
struct GpPoint {
  std::array<double, 2> x{0.0, 0.0};
  double y = 0.0;
};

// Hyperparameter grid searched by maximum log marginal likelihood. Values
// are in standardized target units.
struct GpHyperGrid {
  std::vector<double> length_scales{0.1, 0.2, 0.3, 0.5, 1.0};
  std::vector<double> noise_variances{1e-6, 1e-4, 1e-2, 1e-1};
};

struct SingularKernel : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Immutable after fit. Kernel: unit-signal squared exponential with
// per-dimension length-scales over the normalized inputs; targets are
// standardized by (y_mean, y_scale).
struct GpPosterior {
  std::vector<GpPoint> points;
  double y_mean = 0.0;
  double y_scale = 1.0;
  double length_m = 0.0;
  double length_p = 0.0;
  double noise_var = 0.0;
  double jitter = 0.0;  // diagonal boost that made the factorization succeed
  std::vector<double> chol;   // lower-triangular factor of K + (noise+jitter)I
  std::vector<double> alpha;  // (K + (noise+jitter)I)^{-1} y_standardized
  double log_marginal = 0.0;
};

// Grid-search MLL fit with Cholesky jitter escalation 1e-10 to 1e-6;
// SingularKernel when no hyperparameter combination factorizes.
GpPosterior fit(const std::vector<GpPoint>& points,
                const GpHyperGrid& hyper_grid = {});

// De-standardized predictive mean and latent variance (>= 0; tiny negative
// numerics above -1e-12 are clamped, anything lower is an error).
std::pair<double, double> posterior_at(const GpPosterior& gp,
                                       const std::array<double, 2>& x);

// Expected improvement for minimization: (best-mu)*Phi(z) + s*phi(z) with
// z = (best-mu)/s; exactly 0 when s = 0.
double expected_improvement(const GpPosterior& gp,
                            const std::array<double, 2>& x, double best_cost);

// One grid cell of the discrete (memory, slots) search space, carrying its
// normalized coordinates.
struct GridCandidate {
  int memory_mb = 0;
  int task_slots = 0;
  std::array<double, 2> x{0.0, 0.0};
};

// Exact argmax of EI over the grid (already-evaluated cells included); ties
// go to smaller task_slots, then smaller memory_mb.
GridCandidate suggest(const GpPosterior& gp,
                      const std::vector<GridCandidate>& grid,
                      double best_cost);

}  // namespace streamcap
