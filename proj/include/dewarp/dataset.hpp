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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dewarp/spectral.hpp"
#include "dewarp/warp.hpp"

namespace dewarp {

// One manifest line:
//   {"id": "...", "audio": "x.wav", "duration_sec": 1.5, "text": "...", "mel": "x.mels"}
// Only id and audio are required. Relative paths resolve against the
// manifest's directory; loaded entries always hold absolute paths.
struct ManifestEntry {
  std::string id;
  std::filesystem::path audio_path;
  double duration = 0.0;
  std::optional<std::string> transcript;
  std::optional<std::filesystem::path> mel_path;

  bool operator==(const ManifestEntry&) const = default;
};

// Throws Error{kDuplicateId} or Error{kMalformedLine}, both naming the line.
// A missing duration_sec is filled in by reading the audio file.
std::vector<ManifestEntry> LoadManifest(const std::filesystem::path& path);
std::vector<ManifestEntry> ParseManifest(std::string_view text,
                                         const std::filesystem::path& base_dir,
                                         std::string_view source = "");
std::string ManifestToJsonLines(std::span<const ManifestEntry> entries);
void WriteManifest(const std::filesystem::path& path,
                   std::span<const ManifestEntry> entries);

struct ShardSpec {
  double shards = 1.0;
  double shard_minutes = 24.0;
  std::uint64_t seed = 0;

  double target_seconds() const { return shards * shard_minutes * 60.0; }
};

// Seeded Fisher-Yates shuffle (i from n-1 down to 1, j = NextBelow(i + 1)),
// then whole utterances in shuffled order until the cumulative duration
// reaches the target. Throws Error{kInsufficientData}.
std::vector<ManifestEntry> SampleShards(std::span<const ManifestEntry> manifest,
                                        const ShardSpec& spec);

// MELS tensor: "MELS", u32 version (1), u32 N, u32 M, N*M float32 frame-major,
// all little-endian.
inline constexpr std::uint32_t kMelsVersion = 1;

std::vector<std::uint8_t> EncodeMel(const MelSpectrogram& mel);
// Throws Error{kBadMagic}, Error{kVersionUnsupported} or Error{kTruncatedTensor}.
MelSpectrogram DecodeMel(std::span<const std::uint8_t> bytes,
                         std::string_view source = "");
void WriteMel(const std::filesystem::path& path, const MelSpectrogram& mel);
// The format stores no front-end parameters; the result carries defaults.
MelSpectrogram ReadMel(const std::filesystem::path& path);

std::string WarpRecordToJson(const WarpRecord& record);
WarpRecord WarpRecordFromJson(std::string_view text);

// Reads entry.mel_path when present, else loads, resamples to 16 kHz and
// runs the mel front end.
MelSpectrogram LoadUtteranceMel(const ManifestEntry& entry, const SpectralParams& params);

struct ItemError {
  std::string id;
  std::string message;
};

// Writes <out_dir>/<stem>.mels per entry and returns the manifest with
// mel paths and durations filled in. Failed entries are left out and
// reported through errors.
std::vector<ManifestEntry> ComputeMels(std::span<const ManifestEntry> manifest,
                                       const SpectralParams& params,
                                       const std::filesystem::path& out_dir, int jobs,
                                       std::vector<ItemError>* errors);

struct PairIndexEntry {
  std::string id;
  std::uint64_t epoch = 0;
  // Relative to the index file's directory.
  std::string warped_path;
  std::string original_path;
  std::string record_path;
};

struct PairIndex {
  std::vector<PairIndexEntry> pairs;
  std::size_t skipped_too_short = 0;
  std::vector<ItemError> errors;
};

inline constexpr std::string_view kPairIndexName = "pairs.jsonl";
inline constexpr std::string_view kSegAugIndexName = "segaug.jsonl";

// For every utterance and epoch e: WarpUtterance(mel, id, e, cfg) and write
//   <out>/<stem>/original.mels, <out>/<stem>/e<e>.warped.mels,
//   <out>/<stem>/e<e>.record.json
// then <out>/pairs.jsonl once all workers finish. Random-strategy utterances
// with fewer than 2 * avg_segment_frames frames are skipped and counted.
// Per-utterance failures are collected; throws Error{kEmptyOutput} when no
// pair was produced.
PairIndex EmitPretrainingPairs(std::span<const ManifestEntry> manifest,
                               const SpectralParams& params, const WarpConfig& cfg,
                               std::size_t epochs, const std::filesystem::path& out_dir,
                               int jobs, const BoundaryFile* boundaries = nullptr);

struct SegAugIndexEntry {
  std::string id;
  std::uint64_t step = 0;
  std::uint64_t seed = 0;
  std::string path;
};

struct SegAugIndex {
  std::vector<SegAugIndexEntry> targets;
  std::size_t skipped_too_short = 0;
  std::vector<ItemError> errors;
};

// SegAug(mel, cfg.seed, id, step, cfg) for step in [0, steps), written to
// <out>/<stem>/s<step>.segaug.mels with <out>/segaug.jsonl as the index.
SegAugIndex EmitSegAugTargets(std::span<const ManifestEntry> manifest,
                              const SpectralParams& params, const WarpConfig& cfg,
                              std::size_t steps, const std::filesystem::path& out_dir,
                              int jobs);

std::vector<PairIndexEntry> LoadPairIndex(const std::filesystem::path& path);

}  // namespace dewarp
