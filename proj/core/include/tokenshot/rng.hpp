// Copyright 2026 The tokenshot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TOKENSHOT_RNG_HPP_
#define TOKENSHOT_RNG_HPP_

#include <cstdint>
#include <random>
#include <span>

namespace tokenshot {

/// Portable pseudo-random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard distributions are implementation-defined, so every
/// derived variate is computed here instead:
///   - uniform doubles take the top 53 bits: (x >> 11) * 2^-53, in [0, 1);
///   - bounded integers use rejection sampling on the full 64-bit output;
///   - normals use the Box-Muller transform, one variate per pair of draws.
/// Uniform and integer streams are therefore bit-identical on every platform.
/// Normals go through libm's log/cos and are reproducible per platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }

  /// Uniform in [0, 1).
  double Uniform();

  /// Uniform in [lo, hi).
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  /// Uniform integer in [0, n). Requires n > 0.
  std::uint64_t UniformIndex(std::uint64_t n);

  double Normal();

  /// Derives an independent stream for (seed, stream) pairs, e.g. one per
  /// evaluation episode. Uses the SplitMix64 finalizer to decorrelate.
  static Rng ForStream(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 output function applied to `x`.
std::uint64_t Mix64(std::uint64_t x);

/// Fisher-Yates shuffle driven by `rng`.
template <typename T>
void Shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    auto j = static_cast<std::size_t>(rng.UniformIndex(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace tokenshot

#endif  // TOKENSHOT_RNG_HPP_
