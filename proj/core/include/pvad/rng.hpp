/*
 * Copyright 2026 The PVAD Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <string_view>

namespace pvad {

/// Deterministic random number generator (xoshiro256++ seeded via
/// splitmix64). All corpus generation, embedding noise and weight
/// initialization flows through this type so that a given seed produces
/// the same stream on every platform, independent of the standard
/// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1).
  double uniform();
  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [lo, hi], inclusive. Requires lo <= hi.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  /// Standard normal deviate (Box-Muller).
  double gaussian();

  /// Independent child stream. Children derived from the same parent
  /// seed with distinct tags are decorrelated and reproducible.
  Rng child(std::uint64_t tag) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t state_[4] = {};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// FNV-1a hash, used to derive child RNG tags from string identifiers.
std::uint64_t hash_str(std::string_view s);

/// Order-dependent combination of two 64-bit values into one.
std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b);

}  // namespace pvad
