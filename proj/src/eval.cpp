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

#include "dewarp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "dewarp/audio_io.hpp"
#include "dewarp/dataset.hpp"
#include "dewarp/error.hpp"
#include "dewarp/parallel.hpp"

namespace dewarp {
namespace {

const double kMcdScale = 10.0 / std::numbers::ln10;

}  // namespace

CepstraSequence MelCepstra(const MelSpectrogram& mel, std::size_t n_coeffs) {
  const std::size_t bins = mel.bins();
  if (bins < n_coeffs + 1) {
    throw std::invalid_argument("MelCepstra: need at least n_coeffs + 1 mel bins");
  }
  // basis(d, j) for d = 1..n_coeffs of the orthonormal DCT-II.
  Matrix<double> basis(n_coeffs, bins);
  const double norm = std::sqrt(2.0 / static_cast<double>(bins));
  for (std::size_t d = 0; d < n_coeffs; ++d) {
    for (std::size_t j = 0; j < bins; ++j) {
      basis(d, j) = norm * std::cos(std::numbers::pi * static_cast<double>(d + 1) *
                                    (static_cast<double>(j) + 0.5) /
                                    static_cast<double>(bins));
    }
  }
  CepstraSequence out(mel.frames(), n_coeffs);
  for (std::size_t t = 0; t < mel.frames(); ++t) {
    const auto frame = mel.values.row(t);
    for (std::size_t d = 0; d < n_coeffs; ++d) {
      const auto b = basis.row(d);
      double acc = 0.0;
      for (std::size_t j = 0; j < bins; ++j) acc += b[j] * frame[j];
      out(t, d) = acc;
    }
  }
  return out;
}

DtwResult Dtw(const Matrix<double>& cost) {
  const std::size_t n = cost.rows();
  const std::size_t m = cost.cols();
  if (n == 0 || m == 0) throw std::invalid_argument("Dtw: empty cost matrix");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  Matrix<double> acc(n, m, kInf);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double best;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else {
        best = kInf;
        if (i > 0 && j > 0) best = std::min(best, acc(i - 1, j - 1));
        if (i > 0) best = std::min(best, acc(i - 1, j));
        if (j > 0) best = std::min(best, acc(i, j - 1));
      }
      acc(i, j) = best + cost(i, j);
    }
  }

  DtwResult result;
  result.total_cost = acc(n - 1, m - 1);
  std::size_t i = n - 1;
  std::size_t j = m - 1;
  result.path.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const double diag = acc(i - 1, j - 1);
      const double up = acc(i - 1, j);
      const double left = acc(i, j - 1);
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    } else if (i > 0) {
      --i;
    } else {
      --j;
    }
    result.path.emplace_back(i, j);
  }
  std::reverse(result.path.begin(), result.path.end());
  return result;
}

double FrameMelCepstralDistance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    sum += diff * diff;
  }
  return kMcdScale * std::sqrt(2.0 * sum);
}

McdResult McdDtw(const CepstraSequence& reference, const CepstraSequence& synthesized) {
  if (reference.rows() == 0 || synthesized.rows() == 0) {
    throw std::invalid_argument("McdDtw: empty cepstra sequence");
  }
  if (reference.cols() != synthesized.cols()) {
    throw Error(ErrorKind::kDimensionMismatch,
                std::to_string(reference.cols()) + " vs " +
                    std::to_string(synthesized.cols()) + " coefficients");
  }
  Matrix<double> dist(reference.rows(), synthesized.rows());
  for (std::size_t i = 0; i < reference.rows(); ++i) {
    for (std::size_t j = 0; j < synthesized.rows(); ++j) {
      dist(i, j) = FrameMelCepstralDistance(reference.row(i), synthesized.row(j));
    }
  }
  const DtwResult dtw = Dtw(dist);
  McdResult out;
  out.path_len = dtw.path.size();
  out.mcd_db = dtw.total_cost / static_cast<double>(out.path_len);
  out.n_ref = reference.rows();
  out.n_syn = synthesized.rows();
  return out;
}

McdReport Aggregate(std::vector<UtteranceMcd> per_utterance) {
  McdReport report;
  report.utterances = std::move(per_utterance);
  report.count = report.utterances.size();
  if (report.count == 0) return report;
  double sum = 0.0;
  for (const auto& u : report.utterances) sum += u.result.mcd_db;
  report.mean = sum / static_cast<double>(report.count);
  double sq = 0.0;
  for (const auto& u : report.utterances) {
    const double d = u.result.mcd_db - report.mean;
    sq += d * d;
  }
  report.stddev = std::sqrt(sq / static_cast<double>(report.count));
  return report;
}

std::string McdReport::ToJson() const {
  nlohmann::ordered_json doc;
  doc["utterances"] = nlohmann::ordered_json::array();
  for (const auto& u : utterances) {
    doc["utterances"].push_back({{"id", u.id},
                                 {"mcd_db", u.result.mcd_db},
                                 {"path_len", u.result.path_len},
                                 {"n_ref", u.result.n_ref},
                                 {"n_syn", u.result.n_syn}});
  }
  doc["mean"] = mean;
  doc["std"] = stddev;
  doc["count"] = count;
  return doc.dump(2) + "\n";
}

std::string McdReport::SummaryLine() const {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "mcd_db mean=%.4f std=%.4f count=%zu", mean,
                stddev, count);
  return buf;
}

namespace {

std::map<std::string, std::filesystem::path> ListInputs(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorKind::kIo, dir.string() + " is not a directory");
  }
  std::map<std::string, std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext != ".wav" && ext != ".mels") continue;
    const std::string stem = entry.path().stem().string();
    auto [it, inserted] = out.emplace(stem, entry.path());
    // Prefer the MELS tensor when both forms exist.
    if (!inserted && ext == ".mels") it->second = entry.path();
  }
  return out;
}

MelSpectrogram LoadAsMel(const std::filesystem::path& path, const SpectralParams& params) {
  if (path.extension() == ".mels") {
    MelSpectrogram mel = ReadMel(path);
    mel.params = params;
    return mel;
  }
  return ComputeMelSpectrogram(Resample(LoadWav(path), kWorkingSampleRate), params);
}

}  // namespace

McdReport EvaluateDirectories(const std::filesystem::path& ref_dir,
                              const std::filesystem::path& syn_dir,
                              const SpectralParams& params, int jobs,
                              std::vector<std::string>* unmatched) {
  const auto refs = ListInputs(ref_dir);
  const auto syns = ListInputs(syn_dir);
  std::vector<std::string> ids;
  for (const auto& [id, path] : refs) {
    if (syns.contains(id)) {
      ids.push_back(id);
    } else if (unmatched) {
      unmatched->push_back(id);
    }
  }
  if (unmatched) {
    for (const auto& [id, path] : syns) {
      if (!refs.contains(id)) unmatched->push_back(id);
    }
  }
  std::vector<UtteranceMcd> results(ids.size());
  ParallelFor(ids.size(), jobs, [&](std::size_t i) {
    const auto ref = MelCepstra(LoadAsMel(refs.at(ids[i]), params));
    const auto syn = MelCepstra(LoadAsMel(syns.at(ids[i]), params));
    results[i] = UtteranceMcd{ids[i], McdDtw(ref, syn)};
  });
  return Aggregate(std::move(results));
}

}  // namespace dewarp
