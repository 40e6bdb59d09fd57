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
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dewarp/matrix.hpp"
#include "dewarp/random.hpp"
#include "dewarp/spectral.hpp"

namespace dewarp {

// Partition of [0, n_frames) by strictly increasing interior boundaries.
// Segment i spans [start(i), start(i + 1)).
struct Segmentation {
  std::size_t n_frames = 0;
  std::vector<std::size_t> boundaries;

  std::size_t num_segments() const { return boundaries.size() + 1; }
  std::size_t start(std::size_t i) const { return i == 0 ? 0 : boundaries[i - 1]; }
  std::size_t end(std::size_t i) const {
    return i == boundaries.size() ? n_frames : boundaries[i];
  }
  std::vector<std::size_t> lengths() const;

  // Throws std::invalid_argument if the partition invariants do not hold.
  void Validate() const;

  bool operator==(const Segmentation&) const = default;
};

enum class SegmentationStrategy { kRandom, kBoundaryFile, kWhole };

enum class WarpMode {
  kUnitResize,    // every segment -> one frame (pre-training input)
  kFactorResize,  // every segment scaled by a uniform random factor (SegAug)
  kFixedFactor,   // whole spectrogram scaled by one factor (Naive baseline)
};

std::string_view WarpModeName(WarpMode mode);

struct WarpConfig {
  SegmentationStrategy strategy = SegmentationStrategy::kRandom;
  std::size_t avg_segment_frames = 6;
  double factor_min = 1.0 / 3.0;
  double factor_max = 5.0 / 3.0;
  WarpMode mode = WarpMode::kUnitResize;
  double fixed_factor = 1.0 / 6.0;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct WarpRecord {
  std::string utterance_id;
  std::uint64_t seed = 0;
  Segmentation boundaries;
  std::size_t original_len = 0;
  std::size_t warped_len = 0;
};

struct WarpResult {
  MelSpectrogram mel;
  WarpRecord record;
};

// k = floor(N / avg) segments; k - 1 distinct boundaries drawn from
// {1, ..., N-1} by a partial Fisher-Yates shuffle of the stream, then sorted.
// Throws Error{kTooShort} when N < 2 * avg.
Segmentation RandomSegmentation(std::size_t n_frames, SplitMix64& rng,
                                std::size_t avg_segment_frames);

// Parsed boundary file: "<id>\t<i1>,<i2>,..." per line, '#' comments.
class BoundaryFile {
 public:
  struct Lookup {
    Segmentation segmentation;
    // Boundaries >= n_frames - 1 that were discarded.
    std::size_t dropped = 0;
  };

  // Only the line structure is checked here (a TAB after a nonempty, unique
  // id); index lists are validated per lookup so one bad record does not
  // poison the rest of the file. Throws Error{kMalformedBoundaryLine}.
  static BoundaryFile Load(const std::filesystem::path& path);
  static BoundaryFile Parse(std::string_view text, std::string_view source = "");

  // Throws Error{kUnknownUtterance}, Error{kMalformedBoundaryLine} (not an
  // integer list, or an index < 1) or Error{kNonMonotonicBoundaries}.
  Lookup Find(std::string_view utterance_id, std::size_t n_frames) const;

  bool Contains(std::string_view utterance_id) const;
  std::size_t size() const { return entries_.size(); }

 private:
  struct Entry {
    std::string indices;
    std::size_t line = 0;
  };
  std::string source_;
  std::unordered_map<std::string, Entry> entries_;
};

BoundaryFile::Lookup SegmentationFromFile(const std::filesystem::path& path,
                                          std::string_view utterance_id,
                                          std::size_t n_frames);

// Align-corners linear resampling along rows (time), each column independent.
// Output row j samples source position j * (F - 1) / (T - 1), or (F - 1) / 2
// when T == 1. Interpolation is evaluated in double as a + w * (b - a).
Matrix<float> ResizeLinear(const Matrix<float>& segment, std::size_t target_len);

// Segment-wise warp. Random draws (factor_resize only) are taken from rng in
// segment order. The returned record has utterance_id/seed left for the
// caller to fill.
WarpResult Warp(const MelSpectrogram& mel, const Segmentation& seg,
                const WarpConfig& cfg, SplitMix64& rng);

// Stream-driven warp of one utterance at one step:
//   seed = DeriveSeed(cfg.seed, id, step); rng = SplitMix64(seed)
//   segmentation from rng (random), boundary file, or none (whole)
//   Warp(mel, segmentation, cfg, rng)
// boundaries must be non-null for SegmentationStrategy::kBoundaryFile.
WarpResult WarpUtterance(const MelSpectrogram& mel, std::string_view utterance_id,
                         std::uint64_t step, const WarpConfig& cfg,
                         const BoundaryFile* boundaries = nullptr);

// SegAug target: random segmentation plus factor_resize, seeded from
// (global_seed, id, step). cfg.mode and cfg.strategy are ignored.
MelSpectrogram SegAug(const MelSpectrogram& mel, std::uint64_t global_seed,
                      std::string_view utterance_id, std::uint64_t step,
                      const WarpConfig& cfg);

// Inverse of a unit-resize warp given the original segment lengths.
// Throws Error{kLengthMismatch}.
MelSpectrogram DewarpOracle(const MelSpectrogram& warped,
                            const std::vector<std::size_t>& original_lengths);

}  // namespace dewarp
