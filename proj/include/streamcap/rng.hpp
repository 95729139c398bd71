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

#include <cmath>
#include <cstdint>

// Counter-based deterministic randomness. Golden files must be byte-identical
// across platforms, so no std::<distribution> (implementation-defined
// algorithms); everything below is pure IEEE-754 arithmetic on hashed
// counters.

namespace streamcap {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b));
}

// Uniform in (0, 1]; never returns 0 so log() below is safe.
inline double hash_to_unit(std::uint64_t h) {
  return (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;
}

// Standard normal via Box-Muller on two hashed counters.
inline double hash_to_gaussian(std::uint64_t key) {
  const double u1 = hash_to_unit(splitmix64(key));
  const double u2 = hash_to_unit(splitmix64(key ^ 0xd1b54a32d192ed03ULL));
  const double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

// Multiplicative noise factor 1 + eps * z with z truncated to [-3, 3].
// Keyed so that every (seed, clock, entity, field) tuple draws independently
// and reproducibly.
inline double noise_factor(std::uint64_t seed, std::uint64_t clock,
                           std::uint64_t entity, std::uint64_t field,
                           double eps) {
  if (eps <= 0.0) return 1.0;
  std::uint64_t key = mix_seed(mix_seed(mix_seed(seed, clock), entity), field);
  double z = hash_to_gaussian(key);
  if (z > 3.0) z = 3.0;
  if (z < -3.0) z = -3.0;
  return 1.0 + eps * z;
}

// Uniform double in [lo, hi) from a hashed counter; test-data generation.
inline double hash_to_range(std::uint64_t key, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(splitmix64(key) >> 11) * 0x1.0p-53);
}

}  // namespace streamcap
