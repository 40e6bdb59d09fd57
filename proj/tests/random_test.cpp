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

#include "dewarp/random.hpp"

#include <gtest/gtest.h>

#include <set>

namespace dewarp {
namespace {

// Golden values come from tests/oracles/seeded_stream_oracle.py.

TEST(SplitMix64Test, MatchesReferenceStream) {
  SplitMix64 rng(0);
  EXPECT_EQ(rng.NextU64(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(rng.NextU64(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(rng.NextU64(), 0x06c45d188009454fULL);
}

TEST(SplitMix64Test, UnitDrawsStayInHalfOpenInterval) {
  SplitMix64 rng(99);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.NextUnit();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Fnv1a64Test, KnownValues) {
  EXPECT_EQ(Fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(DeriveSeedTest, Deterministic) {
  EXPECT_EQ(DeriveSeed(42, "utt1", 0), DeriveSeed(42, "utt1", 0));
}

TEST(DeriveSeedTest, HandOracleTriple) {
  EXPECT_EQ(DeriveSeed(42, "utt1", 0), 0xdef4da900b629afdULL);
  EXPECT_EQ(DeriveSeed(42, "utt1", 1), 0x66fb8cc7f0334f81ULL);
}

TEST(DeriveSeedTest, EmptyIdIsValidAndDistinct) {
  EXPECT_EQ(DeriveSeed(0, "", 0), 0xc3817c016ba4ff30ULL);
  EXPECT_EQ(DeriveSeed(0, "a", 0), 0x5f29c2aadd9b8527ULL);
  EXPECT_NE(DeriveSeed(0, "", 0), DeriveSeed(0, "a", 0));
}

TEST(DeriveSeedTest, ConsecutiveStepsDiffer) {
  for (std::uint64_t g : {0ULL, 1ULL, 12345ULL}) {
    for (const char* id : {"", "a", "utt_0001"}) {
      std::set<std::uint64_t> seen;
      for (std::uint64_t step = 0; step < 200; ++step) {
        ASSERT_NE(DeriveSeed(g, id, step), DeriveSeed(g, id, step + 1));
        seen.insert(DeriveSeed(g, id, step));
      }
      EXPECT_EQ(seen.size(), 200U);
    }
  }
}

}  // namespace
}  // namespace dewarp
