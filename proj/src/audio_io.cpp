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

#include "dewarp/audio_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <stdexcept>
#include <string>

#include "dewarp/error.hpp"
#include "dewarp/file_util.hpp"

namespace dewarp {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t ReadU16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t ReadU32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void PutU16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void PutTag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

struct FormatChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
};

[[noreturn]] void Malformed(const std::filesystem::path& path,
                            const std::string& why) {
  throw Error(ErrorKind::kMalformedWav, path.string() + ": " + why);
}

}  // namespace

Waveform LoadWav(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = ReadFileBytes(path);
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    Malformed(path, "missing RIFF/WAVE header");
  }

  std::optional<FormatChunk> fmt;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = ReadU32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size()) {
        Malformed(path, "truncated fmt chunk");
      }
      FormatChunk f;
      f.format = ReadU16(bytes.data() + body);
      f.channels = ReadU16(bytes.data() + body + 2);
      f.sample_rate = ReadU32(bytes.data() + body + 4);
      f.bits = ReadU16(bytes.data() + body + 14);
      if (f.format == kFormatExtensible) {
        if (size < 40) Malformed(path, "truncated extensible fmt chunk");
        // The sub-format GUID starts with the plain format tag.
        f.format = ReadU16(bytes.data() + body + 24);
      }
      fmt = f;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (body + size > bytes.size()) Malformed(path, "truncated data chunk");
      data = bytes.data() + body;
      data_size = size;
      break;
    }
    // Chunks are padded to even sizes.
    pos = body + size + (size & 1U);
  }

  if (!fmt) Malformed(path, "no fmt chunk");
  if (data == nullptr) Malformed(path, "no data chunk");
  if (fmt->channels == 0) Malformed(path, "zero channels");
  if (fmt->sample_rate == 0) Malformed(path, "zero sample rate");

  const bool pcm16 = fmt->format == kFormatPcm && fmt->bits == 16;
  const bool float32 = fmt->format == kFormatFloat && fmt->bits == 32;
  if (!pcm16 && !float32) {
    throw Error(ErrorKind::kUnsupportedEncoding,
                path.string() + ": format tag " + std::to_string(fmt->format) +
                    " with " + std::to_string(fmt->bits) + " bits");
  }

  const std::size_t bytes_per_sample = fmt->bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * fmt->channels;
  if (data_size % frame_bytes != 0) Malformed(path, "partial sample frame");
  const std::size_t frames = data_size / frame_bytes;
  if (frames == 0) Malformed(path, "no samples");

  Waveform wave;
  wave.sample_rate = static_cast<int>(fmt->sample_rate);
  wave.samples.resize(frames);
  const double inv_channels = 1.0 / fmt->channels;
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < fmt->channels; ++c) {
      const std::uint8_t* p = data + i * frame_bytes + c * bytes_per_sample;
      if (pcm16) {
        acc += static_cast<std::int16_t>(ReadU16(p)) / 32768.0;
      } else {
        const float v = std::bit_cast<float>(ReadU32(p));
        if (!std::isfinite(v)) Malformed(path, "non-finite float sample");
        acc += std::clamp(static_cast<double>(v), -1.0, 1.0);
      }
    }
    wave.samples[i] = static_cast<float>(acc * inv_channels);
  }
  return wave;
}

void WriteWav(const std::filesystem::path& path, const Waveform& wave) {
  if (wave.sample_rate <= 0) {
    throw std::invalid_argument("WriteWav: sample_rate must be positive");
  }
  const auto data_size = static_cast<std::uint32_t>(wave.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  PutTag(out, "RIFF");
  PutU32(out, 36 + data_size);
  PutTag(out, "WAVE");
  PutTag(out, "fmt ");
  PutU32(out, 16);
  PutU16(out, kFormatPcm);
  PutU16(out, 1);
  PutU32(out, static_cast<std::uint32_t>(wave.sample_rate));
  PutU32(out, static_cast<std::uint32_t>(wave.sample_rate) * 2);
  PutU16(out, 2);
  PutU16(out, 16);
  PutTag(out, "data");
  PutU32(out, data_size);
  for (float s : wave.samples) {
    const double clamped = std::isfinite(s) ? std::clamp<double>(s, -1.0, 1.0) : 0.0;
    const long q = std::clamp(std::lround(clamped * 32768.0), -32768L, 32767L);
    PutU16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  WriteFileAtomic(path, out);
}

Waveform Resample(const Waveform& wave, int target_rate) {
  if (target_rate <= 0) {
    throw std::invalid_argument("Resample: target_rate must be positive");
  }
  if (wave.sample_rate <= 0) {
    throw std::invalid_argument("Resample: source sample_rate must be positive");
  }
  if (target_rate == wave.sample_rate) return wave;

  const std::size_t in_len = wave.samples.size();
  const double ratio = static_cast<double>(wave.sample_rate) / target_rate;
  const auto out_len = static_cast<std::size_t>(std::llround(
      static_cast<double>(in_len) * target_rate / wave.sample_rate));

  Waveform out;
  out.sample_rate = target_rate;
  out.samples.resize(out_len);
  if (in_len == 0) return out;
  for (std::size_t i = 0; i < out_len; ++i) {
    const double pos =
        std::min(static_cast<double>(i) * ratio, static_cast<double>(in_len - 1));
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, in_len - 1);
    const double w = pos - static_cast<double>(lo);
    const double a = wave.samples[lo];
    const double b = wave.samples[hi];
    out.samples[i] = static_cast<float>(a + w * (b - a));
  }
  return out;
}

double DurationSeconds(const Waveform& wave) {
  if (wave.sample_rate <= 0) return 0.0;
  return static_cast<double>(wave.samples.size()) / wave.sample_rate;
}

}  // namespace dewarp
