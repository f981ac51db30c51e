// Copyright 2026 The evrel Authors
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

#ifndef EVREL_RNG_HPP_
#define EVREL_RNG_HPP_

#include <cstdint>
#include <random>
#include <vector>

namespace evrel {

// mt19937_64 with hand-rolled draw helpers.  The standard distributions are
// implementation defined, which would break seed reproducibility across
// toolchains; these are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t u64() { return engine_(); }

  // Uniform in [0, n).  Plain modulo; the bias at n << 2^64 is far below
  // anything observable here.
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : u64() % n; }

  int range(int lo, int hi) {  // inclusive bounds
    return lo +
           static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  // Uniform in [0, 1).
  double real() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

  double real(double lo, double hi) { return lo + (hi - lo) * real(); }

  bool chance(double p) { return real() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  // Derives an independent stream, for per-item determinism regardless of
  // draw order elsewhere.
  Rng fork(std::uint64_t stream) const {
    return Rng(seed_ ^ (0x9e3779b97f4a7c15ull * (stream + 1)));
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

}  // namespace evrel

#endif  // EVREL_RNG_HPP_
