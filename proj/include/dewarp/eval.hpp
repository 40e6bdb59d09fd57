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

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dewarp/matrix.hpp"
#include "dewarp/spectral.hpp"

namespace dewarp {

inline constexpr std::size_t kDefaultCepstra = 13;

// frames x coefficients, c_1..c_D of the orthonormal DCT-II of each log-mel
// frame (c_0 dropped).
using CepstraSequence = Matrix<double>;

CepstraSequence MelCepstra(const MelSpectrogram& mel,
                           std::size_t n_coeffs = kDefaultCepstra);

struct DtwResult {
  double total_cost = 0.0;
  // (reference index, synthesized index) from (0, 0) to (n-1, m-1).
  std::vector<std::pair<std::size_t, std::size_t>> path;
};

// Minimal-cost monotone alignment with steps (1,0), (0,1), (1,1). Backtrace
// prefers the diagonal predecessor, then (i-1, j), then (i, j-1) on ties.
DtwResult Dtw(const Matrix<double>& cost);

struct McdResult {
  double mcd_db = 0.0;
  std::size_t path_len = 0;
  std::size_t n_ref = 0;
  std::size_t n_syn = 0;
};

// (10 / ln 10) * sqrt(2 * sum_d (c_d - c'_d)^2)
double FrameMelCepstralDistance(std::span<const double> a, std::span<const double> b);

// DTW over frame distances, normalised by path length.
// Throws Error{kDimensionMismatch}.
McdResult McdDtw(const CepstraSequence& reference, const CepstraSequence& synthesized);

struct UtteranceMcd {
  std::string id;
  McdResult result;
};

struct McdReport {
  std::vector<UtteranceMcd> utterances;
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  std::size_t count = 0;

  std::string ToJson() const;
  // "mcd_db mean=<..> std=<..> count=<..>"
  std::string SummaryLine() const;
};

McdReport Aggregate(std::vector<UtteranceMcd> per_utterance);

// Pairs <stem>.wav / <stem>.mels files by stem across the two directories;
// stems present in only one directory are reported through `unmatched`.
// WAV inputs are resampled to 16 kHz and passed through the mel front end.
McdReport EvaluateDirectories(const std::filesystem::path& ref_dir,
                              const std::filesystem::path& syn_dir,
                              const SpectralParams& params, int jobs,
                              std::vector<std::string>* unmatched = nullptr);

}  // namespace dewarp
