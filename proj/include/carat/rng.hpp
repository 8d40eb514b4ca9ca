// Copyright 2026 The CARAT Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "carat/util.hpp"

namespace carat {

// Deterministic RNG. mt19937_64 is bit-stable across platforms, but the
// standard <random> distributions are not, so the draw functions here are
// hand-rolled on top of the raw engine output.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased draw from [0, n) by rejection.
  int64_t uniform_int(int64_t n) {
    require(n > 0, "Rng::uniform_int: n must be positive");
    const uint64_t un = static_cast<uint64_t>(n);
    const uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return static_cast<int64_t>(x % un);
  }

  // Uniform over [0, n) \ {excluded}.
  int64_t uniform_int_excluding(int64_t n, int64_t excluded) {
    require(n >= 2, "Rng::uniform_int_excluding: needs at least two values");
    int64_t x = uniform_int(n - 1);
    return x >= excluded ? x + 1 : x;
  }

  // k distinct values from [0, n), in random order (partial Fisher-Yates).
  std::vector<int64_t> sample_without_replacement(int64_t n, int64_t k);

  // Random permutation of [0, n).
  std::vector<int64_t> permutation(int64_t n) { return sample_without_replacement(n, n); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int64_t i = static_cast<int64_t>(v.size()) - 1; i > 0; --i) {
      std::swap(v[i], v[static_cast<size_t>(uniform_int(i + 1))]);
    }
  }

  // N(0, 1) via Box-Muller on the deterministic uniform.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Stable sub-seed derivation: one global seed fans out to per-component
  // streams that never alias as long as the labels differ.
  static uint64_t derive(uint64_t seed, std::string_view label) {
    uint64_t h = fnv1a64(label);
    h ^= seed + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    // splitmix64 finalizer
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ull;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebull;
    h ^= h >> 31;
    return h;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace carat
