// Copyright 2026 The keycov Authors.
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

#ifndef KEYCOV_RANDOM_H_
#define KEYCOV_RANDOM_H_

#include <cmath>
#include <cstdint>
#include <random>

namespace keycov {

// Seeded generator whose output is identical on every platform.
// std::mt19937_64 is fully specified by the standard, but the std
// distributions are not, so the conversions are done here.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [lo, hi], inclusive. Rejection-sampled, no modulo bias.
  int64_t UniformInt(int64_t lo, int64_t hi) {
    if (hi <= lo) return lo;
    const uint64_t range = static_cast<uint64_t>(hi - lo) + 1;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return lo + static_cast<int64_t>(x % range);
  }

  bool Bernoulli(double p) { return p > 0.0 && Uniform() < p; }

  // Number of failures before the first success, success probability p.
  int Geometric(double p) {
    int k = 0;
    while (!Bernoulli(p)) {
      ++k;
      if (k > 1000) break;
    }
    return k;
  }

  double Normal() {
    // Box-Muller; spare value discarded to keep the stream simple.
    double u1 = Uniform();
    while (u1 <= 0.0) u1 = Uniform();
    const double u2 = Uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace keycov

#endif  // KEYCOV_RANDOM_H_
