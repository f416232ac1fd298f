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

#include "wavetrain/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace wavetrain {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t tag : tags) h = splitmix64(h ^ splitmix64(tag + 0x632BE59BD9B4E019ULL));
  return h;
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t Rng::uniform_index(std::size_t n) {
  if (n <= 1) return 0;
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  // Largest multiple of `bound` representable; draws at or above it are rejected.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return static_cast<std::size_t>(x % bound);
}

double Rng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log1p(-u1));
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace wavetrain
