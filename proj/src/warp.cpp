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

#include "dewarp/warp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dewarp/error.hpp"

namespace dewarp {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::size_t ScaledLength(double factor, std::size_t length) {
  const long long target = std::llround(factor * static_cast<double>(length));
  return static_cast<std::size_t>(std::max(1LL, target));
}

}  // namespace

std::vector<std::size_t> Segmentation::lengths() const {
  std::vector<std::size_t> out(num_segments());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = end(i) - start(i);
  return out;
}

void Segmentation::Validate() const {
  std::size_t prev = 0;
  for (std::size_t b : boundaries) {
    if (b <= prev || b >= n_frames) {
      throw std::invalid_argument(
          "Segmentation: boundaries must be strictly increasing within (0, N)");
    }
    prev = b;
  }
  if (n_frames == 0) throw std::invalid_argument("Segmentation: N must be >= 1");
}

std::string_view WarpModeName(WarpMode mode) {
  switch (mode) {
    case WarpMode::kUnitResize: return "unit_resize";
    case WarpMode::kFactorResize: return "factor_resize";
    case WarpMode::kFixedFactor: return "fixed_factor";
  }
  return "unknown";
}

void WarpConfig::Validate() const {
  if (!(factor_min > 0.0) || !(factor_min <= factor_max)) {
    throw std::invalid_argument("WarpConfig: require 0 < factor_min <= factor_max");
  }
  if (avg_segment_frames < 1) {
    throw std::invalid_argument("WarpConfig: avg_segment_frames must be >= 1");
  }
  if (!(fixed_factor > 0.0)) {
    throw std::invalid_argument("WarpConfig: fixed_factor must be positive");
  }
}

Segmentation RandomSegmentation(std::size_t n_frames, SplitMix64& rng,
                                std::size_t avg_segment_frames) {
  if (avg_segment_frames < 1) {
    throw std::invalid_argument("RandomSegmentation: avg_segment_frames must be >= 1");
  }
  if (n_frames < 2 * avg_segment_frames) {
    throw Error(ErrorKind::kTooShort,
                std::to_string(n_frames) + " frames < 2 * " +
                    std::to_string(avg_segment_frames));
  }
  const std::size_t k = n_frames / avg_segment_frames;
  std::vector<std::size_t> pool(n_frames - 1);
  std::iota(pool.begin(), pool.end(), std::size_t{1});
  for (std::size_t i = 0; i + 1 < k; ++i) {
    const std::size_t j = i + rng.NextBelow(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k - 1);
  std::sort(pool.begin(), pool.end());
  return Segmentation{n_frames, std::move(pool)};
}

BoundaryFile BoundaryFile::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open boundary file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return Parse(buf.str(), path.string());
}

BoundaryFile BoundaryFile::Parse(std::string_view text, std::string_view source) {
  BoundaryFile file;
  file.source_ = source.empty() ? "<boundaries>" : std::string(source);
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (Trim(line).empty() || Trim(line).front() == '#') continue;

    const auto tab = line.find('\t');
    const std::string_view id = tab == std::string_view::npos ? line : line.substr(0, tab);
    if (tab == std::string_view::npos || id.empty()) {
      throw Error(ErrorKind::kMalformedBoundaryLine,
                  file.source_ + ":" + std::to_string(line_no) +
                      ": expected <utterance_id>TAB<indices>");
    }
    auto [it, inserted] = file.entries_.emplace(
        std::string(id), Entry{std::string(line.substr(tab + 1)), line_no});
    if (!inserted) {
      throw Error(ErrorKind::kMalformedBoundaryLine,
                  file.source_ + ":" + std::to_string(line_no) +
                      ": duplicate utterance '" + std::string(id) +
                      "' (first on line " + std::to_string(it->second.line) + ")");
    }
  }
  return file;
}

bool BoundaryFile::Contains(std::string_view utterance_id) const {
  return entries_.contains(std::string(utterance_id));
}

BoundaryFile::Lookup BoundaryFile::Find(std::string_view utterance_id,
                                        std::size_t n_frames) const {
  const auto it = entries_.find(std::string(utterance_id));
  if (it == entries_.end()) {
    throw Error(ErrorKind::kUnknownUtterance,
                "'" + std::string(utterance_id) + "' not in " + source_);
  }
  const std::string where = source_ + ":" + std::to_string(it->second.line);

  std::vector<std::size_t> parsed;
  std::string_view rest = Trim(it->second.indices);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view token = Trim(rest.substr(0, comma));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
      throw Error(ErrorKind::kMalformedBoundaryLine,
                  where + ": bad frame index '" + std::string(token) + "'");
    }
    if (value < 1) {
      throw Error(ErrorKind::kMalformedBoundaryLine,
                  where + ": frame index " + std::to_string(value) + " < 1");
    }
    if (!parsed.empty() && static_cast<std::size_t>(value) <= parsed.back()) {
      throw Error(ErrorKind::kNonMonotonicBoundaries,
                  where + ": " + std::to_string(value) + " follows " +
                      std::to_string(parsed.back()));
    }
    parsed.push_back(static_cast<std::size_t>(value));
  }

  Lookup out;
  out.segmentation.n_frames = n_frames;
  for (std::size_t b : parsed) {
    if (n_frames == 0 || b >= n_frames - 1) {
      ++out.dropped;
    } else {
      out.segmentation.boundaries.push_back(b);
    }
  }
  return out;
}

BoundaryFile::Lookup SegmentationFromFile(const std::filesystem::path& path,
                                          std::string_view utterance_id,
                                          std::size_t n_frames) {
  return BoundaryFile::Load(path).Find(utterance_id, n_frames);
}

Matrix<float> ResizeLinear(const Matrix<float>& segment, std::size_t target_len) {
  const std::size_t frames = segment.rows();
  if (frames < 1 || target_len < 1) {
    throw std::invalid_argument("ResizeLinear: lengths must be >= 1");
  }
  const std::size_t cols = segment.cols();
  Matrix<float> out(target_len, cols);
  const double span = static_cast<double>(frames - 1);
  for (std::size_t j = 0; j < target_len; ++j) {
    const double pos = target_len == 1
                           ? span / 2.0
                           : static_cast<double>(j) * span /
                                 static_cast<double>(target_len - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double w = pos - static_cast<double>(lo);
    const auto a = segment.row(lo);
    const auto b = segment.row(hi);
    auto dst = out.row(j);
    for (std::size_t c = 0; c < cols; ++c) {
      const double va = a[c];
      const double vb = b[c];
      dst[c] = static_cast<float>(va + w * (vb - va));
    }
  }
  return out;
}

WarpResult Warp(const MelSpectrogram& mel, const Segmentation& seg,
                const WarpConfig& cfg, SplitMix64& rng) {
  cfg.Validate();
  const std::size_t n = mel.frames();
  if (n == 0) throw std::invalid_argument("Warp: empty spectrogram");

  WarpResult result;
  result.mel.params = mel.params;
  result.mel.sample_rate = mel.sample_rate;
  result.mel.values = Matrix<float>(0, mel.bins());
  result.record.original_len = n;

  if (cfg.mode == WarpMode::kFixedFactor) {
    result.mel.values = ResizeLinear(mel.values, ScaledLength(cfg.fixed_factor, n));
    result.record.boundaries = Segmentation{n, {}};
    result.record.warped_len = result.mel.frames();
    return result;
  }

  if (seg.n_frames != n) {
    throw std::invalid_argument("Warp: segmentation covers " +
                                std::to_string(seg.n_frames) + " frames, mel has " +
                                std::to_string(n));
  }
  seg.Validate();

  for (std::size_t i = 0; i < seg.num_segments(); ++i) {
    const std::size_t first = seg.start(i);
    const std::size_t len = seg.end(i) - first;
    std::size_t target = 1;
    if (cfg.mode == WarpMode::kFactorResize) {
      const double u = rng.NextUnit();
      target = ScaledLength(cfg.factor_min + u * (cfg.factor_max - cfg.factor_min), len);
    }
    result.mel.values.append_rows(ResizeLinear(mel.values.slice_rows(first, len), target));
  }
  result.record.boundaries = seg;
  result.record.warped_len = result.mel.frames();
  return result;
}

WarpResult WarpUtterance(const MelSpectrogram& mel, std::string_view utterance_id,
                         std::uint64_t step, const WarpConfig& cfg,
                         const BoundaryFile* boundaries) {
  const std::uint64_t seed = DeriveSeed(cfg.seed, utterance_id, step);
  SplitMix64 rng(seed);
  Segmentation seg{mel.frames(), {}};
  if (cfg.mode != WarpMode::kFixedFactor) {
    switch (cfg.strategy) {
      case SegmentationStrategy::kRandom:
        seg = RandomSegmentation(mel.frames(), rng, cfg.avg_segment_frames);
        break;
      case SegmentationStrategy::kBoundaryFile:
        if (boundaries == nullptr) {
          throw std::invalid_argument("WarpUtterance: boundary strategy needs a file");
        }
        seg = boundaries->Find(utterance_id, mel.frames()).segmentation;
        break;
      case SegmentationStrategy::kWhole:
        break;
    }
  }
  WarpResult result = Warp(mel, seg, cfg, rng);
  result.record.utterance_id = std::string(utterance_id);
  result.record.seed = seed;
  return result;
}

MelSpectrogram SegAug(const MelSpectrogram& mel, std::uint64_t global_seed,
                      std::string_view utterance_id, std::uint64_t step,
                      const WarpConfig& cfg) {
  WarpConfig aug = cfg;
  aug.seed = global_seed;
  aug.mode = WarpMode::kFactorResize;
  aug.strategy = SegmentationStrategy::kRandom;
  return WarpUtterance(mel, utterance_id, step, aug).mel;
}

MelSpectrogram DewarpOracle(const MelSpectrogram& warped,
                            const std::vector<std::size_t>& original_lengths) {
  if (warped.frames() != original_lengths.size()) {
    throw Error(ErrorKind::kLengthMismatch,
                std::to_string(warped.frames()) + " warped frames for " +
                    std::to_string(original_lengths.size()) + " segments");
  }
  MelSpectrogram out;
  out.params = warped.params;
  out.sample_rate = warped.sample_rate;
  out.values = Matrix<float>(0, warped.bins());
  for (std::size_t i = 0; i < original_lengths.size(); ++i) {
    if (original_lengths[i] == 0) {
      throw Error(ErrorKind::kLengthMismatch, "segment " + std::to_string(i) +
                                                  " has zero original length");
    }
    out.values.append_rows(ResizeLinear(warped.values.slice_rows(i, 1),
                                        original_lengths[i]));
  }
  return out;
}

}  // namespace dewarp
