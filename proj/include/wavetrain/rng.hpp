// Copyright 2026 The wavetrain Authors
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

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace wavetrain {

/// SplitMix64 finalizer. Used to mix seeds and tags into independent streams.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Derives a child seed from a base seed and an ordered list of integer
/// tags. The derivation is a pure function, so a stream keyed by
/// (master, iteration, trajectory, ...) does not depend on execution order.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) noexcept;

/// Deterministic random stream with a frozen draw contract:
///   - next_u64(): one draw of the underlying std::mt19937_64 engine.
///   - uniform():  one draw, top 53 bits scaled into [0, 1).
///   - uniform(lo, hi): lo + (hi - lo) * uniform().
///   - uniform_index(n): rejection sampling on next_u64(), one draw in the
///     common case, result in [0, n).
///   - bernoulli(p): uniform() < p.
///   - normal(): Box-Muller on two uniform() draws (u1 first), cosine branch.
/// The engine is standardized, and none of the std distributions (whose
/// output is implementation-defined) are used, so streams are portable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t uniform_index(std::size_t n);
  bool bernoulli(double p) { return uniform() < p; }
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace wavetrain
