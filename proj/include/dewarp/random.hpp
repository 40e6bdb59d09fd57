// Copyright (c) 2026 The dewarp Authors. All Rights Reserved.
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

#include <cstdint>
#include <string_view>

namespace dewarp {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// The splitmix64 output finalizer.
constexpr std::uint64_t Mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// One splitmix64 step from state x: the first output of a stream seeded with x.
constexpr std::uint64_t SplitMix64Hash(std::uint64_t x) noexcept {
  return Mix64(x + kGoldenGamma);
}

constexpr std::uint64_t Fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Per-(utterance, step) seed. Every random draw in warping and shard sampling
// comes from a SplitMix64 stream seeded with a value produced here (or with
// the global seed directly, for shard sampling).
constexpr std::uint64_t DeriveSeed(std::uint64_t global_seed,
                                   std::string_view utterance_id,
                                   std::uint64_t step) noexcept {
  return SplitMix64Hash(global_seed ^ Fnv1a64(utterance_id) ^
                        (step * kGoldenGamma));
}

// Portable deterministic stream. The draw helpers are part of the
// reproducibility contract shared with other implementations:
//   NextBelow(n) = NextU64() % n
//   NextUnit()   = (NextU64() >> 11) * 2^-53, in [0, 1)
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t NextU64() noexcept {
    state_ += kGoldenGamma;
    return Mix64(state_);
  }

  constexpr std::uint64_t NextBelow(std::uint64_t n) noexcept {
    return NextU64() % n;
  }

  constexpr double NextUnit() noexcept {
    return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace dewarp
