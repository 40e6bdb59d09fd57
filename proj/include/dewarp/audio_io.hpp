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

#include <filesystem>
#include <vector>

namespace dewarp {

inline constexpr int kWorkingSampleRate = 16000;

struct Waveform {
  std::vector<float> samples;
  int sample_rate = kWorkingSampleRate;
};

// Reads a RIFF/WAVE file holding PCM-16 or IEEE float-32 samples (plain or
// WAVE_FORMAT_EXTENSIBLE). Multichannel input is averaged to mono.
// Throws Error{kMalformedWav} or Error{kUnsupportedEncoding}.
Waveform LoadWav(const std::filesystem::path& path);

// Writes mono PCM-16. Samples are clamped to [-1, 1] and scaled by 32768.
// The file appears atomically (temp file + rename).
void WriteWav(const std::filesystem::path& path, const Waveform& wave);

// Linear-interpolation resampler; output sample i sits at source position
// i * source_rate / target_rate. Identity (bit-exact copy) when rates match.
Waveform Resample(const Waveform& wave, int target_rate);

double DurationSeconds(const Waveform& wave);

}  // namespace dewarp
