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

#include "streamcap/gp_numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace streamcap {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kJitterLadder[] = {1e-10, 1e-9, 1e-8, 1e-7, 1e-6};

double kernel(const std::array<double, 2>& a, const std::array<double, 2>& b,
              double l0, double l1) {
  const double d0 = (a[0] - b[0]) / l0;
  const double d1 = (a[1] - b[1]) / l1;
  return std::exp(-0.5 * (d0 * d0 + d1 * d1));
}

// In-place lower Cholesky; false when the matrix is not positive definite.
bool cholesky(std::vector<double>& m, int n) {
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = m[i * n + j];
      for (int k = 0; k < j; ++k) s -= m[i * n + k] * m[j * n + k];
      if (i == j) {
        if (s <= 0.0) return false;
        m[i * n + j] = std::sqrt(s);
      } else {
        m[i * n + j] = s / m[j * n + j];
      }
    }
    for (int j = i + 1; j < n; ++j) m[i * n + j] = 0.0;
  }
  return true;
}

void forward_solve(const std::vector<double>& l, int n, std::vector<double>& b) {
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= l[i * n + k] * b[k];
    b[i] = s / l[i * n + i];
  }
}

void backward_solve(const std::vector<double>& l, int n,
                    std::vector<double>& b) {
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int k = i + 1; k < n; ++k) s -= l[k * n + i] * b[k];
    b[i] = s / l[i * n + i];
  }
}

double std_normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(kTwoPi);
}

double std_normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

}  // namespace

GpPosterior fit(const std::vector<GpPoint>& points,
                const GpHyperGrid& hyper_grid) {
  const int n = static_cast<int>(points.size());
  if (n < 2) throw std::invalid_argument("fit needs at least 2 points");
  for (const auto& p : points) {
    if (p.x[0] < -1e-9 || p.x[0] > 1.0 + 1e-9 || p.x[1] < -1e-9 ||
        p.x[1] > 1.0 + 1e-9) {
      throw std::invalid_argument("inputs must be normalized to [0,1]^2");
    }
  }
  if (hyper_grid.length_scales.empty() || hyper_grid.noise_variances.empty()) {
    throw std::invalid_argument("empty hyperparameter grid");
  }

  double mean = 0.0;
  for (const auto& p : points) mean += p.y;
  mean /= n;
  double var = 0.0;
  for (const auto& p : points) var += (p.y - mean) * (p.y - mean);
  var /= n;
  double scale = std::sqrt(var);
  if (scale < 1e-12) scale = 1.0;

  std::vector<double> ys(n);
  for (int i = 0; i < n; ++i) ys[i] = (points[i].y - mean) / scale;

  double best_mll = -std::numeric_limits<double>::infinity();
  double best_l0 = 0, best_l1 = 0, best_nv = 0, best_jit = 0;
  bool found = false;

  std::vector<double> k(n * n);
  for (double l0 : hyper_grid.length_scales) {
    for (double l1 : hyper_grid.length_scales) {
      for (double nv : hyper_grid.noise_variances) {
        for (double jit : kJitterLadder) {
          for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
              k[i * n + j] = kernel(points[i].x, points[j].x, l0, l1);
            }
            k[i * n + i] += nv + jit;
          }
          if (!cholesky(k, n)) continue;
          std::vector<double> a = ys;
          forward_solve(k, n, a);
          backward_solve(k, n, a);
          double mll = 0.0;
          for (int i = 0; i < n; ++i) {
            mll += -0.5 * ys[i] * a[i];
            mll -= std::log(k[i * n + i]);
          }
          mll -= 0.5 * n * std::log(kTwoPi);
          if (!found || mll > best_mll) {
            found = true;
            best_mll = mll;
            best_l0 = l0;
            best_l1 = l1;
            best_nv = nv;
            best_jit = jit;
          }
          break;  // first jitter that factorizes scores this combo
        }
      }
    }
  }
  if (!found) {
    throw SingularKernel("no hyperparameter combination factorized");
  }

  GpPosterior gp;
  gp.points = points;
  gp.y_mean = mean;
  gp.y_scale = scale;
  gp.length_m = best_l0;
  gp.length_p = best_l1;
  gp.noise_var = best_nv;
  gp.jitter = best_jit;
  gp.log_marginal = best_mll;
  gp.chol.assign(n * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      gp.chol[i * n + j] = kernel(points[i].x, points[j].x, best_l0, best_l1);
    }
    gp.chol[i * n + i] += best_nv + best_jit;
  }
  if (!cholesky(gp.chol, n)) {
    throw SingularKernel("winning combination no longer factorizes");
  }
  gp.alpha = ys;
  forward_solve(gp.chol, n, gp.alpha);
  backward_solve(gp.chol, n, gp.alpha);
  return gp;
}

std::pair<double, double> posterior_at(const GpPosterior& gp,
                                       const std::array<double, 2>& x) {
  const int n = static_cast<int>(gp.points.size());
  std::vector<double> ks(n);
  for (int i = 0; i < n; ++i) {
    ks[i] = kernel(x, gp.points[i].x, gp.length_m, gp.length_p);
  }
  double mean_std = 0.0;
  for (int i = 0; i < n; ++i) mean_std += ks[i] * gp.alpha[i];

  std::vector<double> v = ks;
  forward_solve(gp.chol, n, v);
  double vv = 0.0;
  for (int i = 0; i < n; ++i) vv += v[i] * v[i];
  double var_std = 1.0 - vv;  // unit signal variance
  if (var_std < -1e-12) {
    throw std::runtime_error("predictive variance fell below -1e-12");
  }
  if (var_std < 0.0) var_std = 0.0;

  return {gp.y_mean + gp.y_scale * mean_std,
          gp.y_scale * gp.y_scale * var_std};
}

double expected_improvement(const GpPosterior& gp,
                            const std::array<double, 2>& x, double best_cost) {
  auto [mu, var] = posterior_at(gp, x);
  const double s = std::sqrt(std::max(0.0, var));
  if (s <= 0.0) return 0.0;
  const double z = (best_cost - mu) / s;
  const double ei = (best_cost - mu) * std_normal_cdf(z) + s * std_normal_pdf(z);
  return std::max(0.0, ei);
}

GridCandidate suggest(const GpPosterior& gp,
                      const std::vector<GridCandidate>& grid,
                      double best_cost) {
  if (grid.empty()) throw std::invalid_argument("empty candidate grid");
  const GridCandidate* best = nullptr;
  double best_ei = -1.0;
  for (const auto& c : grid) {
    const double ei = expected_improvement(gp, c.x, best_cost);
    bool better = false;
    if (best == nullptr || ei > best_ei) {
      better = true;
    } else if (ei == best_ei) {
      if (c.task_slots < best->task_slots ||
          (c.task_slots == best->task_slots &&
           c.memory_mb < best->memory_mb)) {
        better = true;
      }
    }
    if (better) {
      best = &c;
      best_ei = ei;
    }
  }
  return *best;
}

}  // namespace streamcap
