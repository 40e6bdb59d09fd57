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

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "dewarp/audio_io.hpp"
#include "dewarp/dataset.hpp"
#include "dewarp/error.hpp"
#include "test_util.hpp"

namespace dewarp {
namespace {

const double kMcdScale = 10.0 / std::numbers::ln10;

// Exhaustive minimum over all monotone paths, summed in path order.
double BruteForceDtw(const Matrix<double>& c, std::size_t i, std::size_t j, double acc) {
  acc += c(i, j);
  if (i + 1 == c.rows() && j + 1 == c.cols()) return acc;
  double best = std::numeric_limits<double>::infinity();
  if (i + 1 < c.rows()) best = std::min(best, BruteForceDtw(c, i + 1, j, acc));
  if (j + 1 < c.cols()) best = std::min(best, BruteForceDtw(c, i, j + 1, acc));
  if (i + 1 < c.rows() && j + 1 < c.cols()) {
    best = std::min(best, BruteForceDtw(c, i + 1, j + 1, acc));
  }
  return best;
}

Matrix<double> RandomCost(std::size_t n, std::size_t m, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> dist(0.0, 10.0);
  Matrix<double> c(n, m);
  for (double& v : c.data()) v = dist(gen);
  return c;
}

CepstraSequence RandomCepstra(std::size_t n, std::size_t d, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  CepstraSequence c(n, d);
  for (double& v : c.data()) v = dist(gen);
  return c;
}

TEST(MelCepstraTest, ConstantFrameHasNoShape) {
  MelSpectrogram mel;
  mel.values = Matrix<float>(3, 80, -4.25F);
  const auto c = MelCepstra(mel);
  ASSERT_EQ(c.rows(), 3U);
  ASSERT_EQ(c.cols(), 13U);
  for (double v : c.data()) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(MelCepstraTest, CosineBasisFrameSelectsOneCoefficient) {
  MelSpectrogram mel;
  mel.values = Matrix<float>(1, 80);
  for (std::size_t j = 0; j < 80; ++j) {
    mel.values(0, j) = static_cast<float>(
        std::cos(std::numbers::pi * (static_cast<double>(j) + 0.5) * 3.0 / 80.0));
  }
  const auto c = MelCepstra(mel);
  // Orthonormal DCT-II: <x, sqrt(2/80) cos(..)> with ||cos||^2 = 40.
  for (std::size_t d = 0; d < 13; ++d) {
    if (d + 1 == 3) {
      EXPECT_NEAR(c(0, d), std::sqrt(2.0 / 80.0) * 40.0, 1e-5);
    } else {
      EXPECT_NEAR(c(0, d), 0.0, 1e-5) << "c" << d + 1;
    }
  }
}

TEST(MelCepstraTest, ShapeAndPreconditions) {
  const auto mel = testing::RandomMel(25, 80, 3);
  const auto c = MelCepstra(mel);
  EXPECT_EQ(c.rows(), 25U);
  EXPECT_EQ(c.cols(), 13U);
  EXPECT_EQ(MelCepstra(mel, 20).cols(), 20U);
  EXPECT_THROW(MelCepstra(testing::RandomMel(4, 13, 0)), std::invalid_argument);
  EXPECT_NO_THROW(MelCepstra(testing::RandomMel(4, 14, 0)));
}

TEST(DtwTest, SingleCell) {
  const auto r = Dtw(Matrix<double>(1, 1, 2.5));
  EXPECT_EQ(r.total_cost, 2.5);
  ASSERT_EQ(r.path.size(), 1U);
  EXPECT_EQ(r.path[0], (std::pair<std::size_t, std::size_t>{0, 0}));
}

TEST(DtwTest, ZeroMatrixTakesDiagonalFirst) {
  const auto square = Dtw(Matrix<double>(4, 4, 0.0));
  EXPECT_EQ(square.total_cost, 0.0);
  ASSERT_EQ(square.path.size(), 4U);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(square.path[i], std::make_pair(i, i));

  // Backtrace from (3,1): diagonal to (2,0), then vertical steps.
  const auto tall = Dtw(Matrix<double>(4, 2, 0.0));
  const std::vector<std::pair<std::size_t, std::size_t>> expected = {
      {0, 0}, {1, 0}, {2, 0}, {3, 1}};
  EXPECT_EQ(tall.path, expected);
}

TEST(DtwTest, MatchesBruteForceExactly) {
  std::mt19937_64 gen(2024);
  for (int t = 0; t < 150; ++t) {
    const std::size_t n = 1 + gen() % 6;
    const std::size_t m = 1 + gen() % 6;
    const auto c = RandomCost(n, m, gen);
    const auto r = Dtw(c);
    ASSERT_EQ(r.total_cost, BruteForceDtw(c, 0, 0, 0.0)) << n << "x" << m;
  }
}

TEST(DtwTest, PathIsValidAndSumsToCost) {
  std::mt19937_64 gen(7);
  for (int t = 0; t < 50; ++t) {
    const auto c = RandomCost(3 + gen() % 20, 3 + gen() % 20, gen);
    const auto r = Dtw(c);
    ASSERT_EQ(r.path.front(), std::make_pair(std::size_t{0}, std::size_t{0}));
    ASSERT_EQ(r.path.back(), std::make_pair(c.rows() - 1, c.cols() - 1));
    double sum = 0.0;
    for (std::size_t k = 0; k < r.path.size(); ++k) {
      sum += c(r.path[k].first, r.path[k].second);
      if (k == 0) continue;
      const auto di = r.path[k].first - r.path[k - 1].first;
      const auto dj = r.path[k].second - r.path[k - 1].second;
      ASSERT_TRUE((di == 1 && dj <= 1) || (di == 0 && dj == 1));
    }
    ASSERT_EQ(sum, r.total_cost);
    ASSERT_GE(r.path.size(), std::max(c.rows(), c.cols()));
  }
}

TEST(DtwTest, NoWorseThanDiagonal) {
  std::mt19937_64 gen(11);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 2 + gen() % 30;
    const auto c = RandomCost(n, n, gen);
    double diagonal = 0.0;
    for (std::size_t i = 0; i < n; ++i) diagonal += c(i, i);
    ASSERT_LE(Dtw(c).total_cost, diagonal);
  }
}

TEST(McdTest, IdentityIsExactlyZero) {
  for (unsigned s = 0; s < 10; ++s) {
    const auto x = RandomCepstra(5 + s * 3, 13, s);
    const auto r = McdDtw(x, x);
    EXPECT_EQ(r.mcd_db, 0.0);
    EXPECT_EQ(r.path_len, x.rows());
  }
}

TEST(McdTest, SingleFrameClosedForm) {
  const auto a = RandomCepstra(1, 13, 1);
  const auto b = RandomCepstra(1, 13, 2);
  double sq = 0.0;
  for (std::size_t d = 0; d < 13; ++d) sq += (a(0, d) - b(0, d)) * (a(0, d) - b(0, d));
  const double expected = kMcdScale * std::sqrt(2.0 * sq);
  const auto r = McdDtw(a, b);
  EXPECT_LE(std::abs(r.mcd_db - expected), 1e-9 * expected);
  EXPECT_EQ(r.path_len, 1U);
  EXPECT_EQ(r.n_ref, 1U);
  EXPECT_EQ(r.n_syn, 1U);
}

TEST(McdTest, SymmetricAndScales) {
  const auto a = RandomCepstra(17, 13, 3);
  const auto b = RandomCepstra(23, 13, 4);
  const auto ab = McdDtw(a, b);
  const auto ba = McdDtw(b, a);
  EXPECT_NEAR(ab.mcd_db, ba.mcd_db, 1e-12 * ab.mcd_db);
  EXPECT_EQ(ab.path_len, ba.path_len);
  EXPECT_GE(ab.path_len, 23U);
  EXPECT_GT(ab.mcd_db, 0.0);

  CepstraSequence a2 = a;
  CepstraSequence b2 = b;
  for (double& v : a2.data()) v *= 2.5;
  for (double& v : b2.data()) v *= 2.5;
  EXPECT_NEAR(McdDtw(a2, b2).mcd_db, 2.5 * ab.mcd_db, 1e-9 * ab.mcd_db);
}

TEST(McdTest, Preconditions) {
  try {
    McdDtw(RandomCepstra(3, 13, 0), RandomCepstra(3, 12, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDimensionMismatch);
  }
  EXPECT_THROW(McdDtw(CepstraSequence(0, 13), RandomCepstra(3, 13, 0)), std::invalid_argument);
}

TEST(McdReportTest, AggregateJsonAndSummary) {
  const auto report = Aggregate({{"a", {1.0, 3, 3, 3}}, {"b", {3.0, 4, 4, 2}}});
  EXPECT_EQ(report.count, 2U);
  EXPECT_EQ(report.mean, 2.0);
  EXPECT_EQ(report.stddev, 1.0);
  EXPECT_EQ(report.SummaryLine(), "mcd_db mean=2.0000 std=1.0000 count=2");
  const auto j = nlohmann::json::parse(report.ToJson());
  EXPECT_EQ(j["count"], 2);
  EXPECT_EQ(j["utterances"][1]["id"], "b");
  EXPECT_EQ(j["utterances"][1]["path_len"], 4);
  EXPECT_EQ(j["utterances"][0]["mcd_db"], 1.0);
  const auto empty = Aggregate({});
  EXPECT_EQ(empty.count, 0U);
  EXPECT_EQ(empty.mean, 0.0);
}

TEST(EvaluateDirectoriesTest, MatchesByStemAcrossFormats) {
  testing::TempDir dir;
  const auto ref = dir / "ref";
  const auto syn = dir / "syn";
  WriteWav(ref / "a.wav", testing::Babble(0.5, 1));
  WriteWav(syn / "a.wav", testing::Babble(0.5, 1));
  WriteMel(ref / "b.mels", testing::RandomMel(30, 80, 2));
  WriteMel(syn / "b.mels", testing::RandomMel(35, 80, 3));
  WriteWav(ref / "b.wav", testing::Sine(100, 0.2));  // shadowed by b.mels
  WriteMel(ref / "only_ref.mels", testing::RandomMel(10, 80, 4));
  WriteMel(syn / "only_syn.mels", testing::RandomMel(10, 80, 4));

  std::vector<std::string> unmatched;
  const auto report = EvaluateDirectories(ref, syn, SpectralParams{}, 2, &unmatched);
  ASSERT_EQ(report.count, 2U);
  EXPECT_EQ(report.utterances[0].id, "a");
  EXPECT_EQ(report.utterances[0].result.mcd_db, 0.0);
  EXPECT_EQ(report.utterances[1].id, "b");
  EXPECT_EQ(report.utterances[1].result.n_ref, 30U);
  EXPECT_EQ(report.utterances[1].result.mcd_db,
            McdDtw(MelCepstra(testing::RandomMel(30, 80, 2)),
                   MelCepstra(testing::RandomMel(35, 80, 3)))
                .mcd_db);
  EXPECT_EQ(unmatched, (std::vector<std::string>{"only_ref", "only_syn"}));
  EXPECT_THROW(EvaluateDirectories(dir / "nope", syn, SpectralParams{}, 1), Error);
}

TEST(EvaluateDirectoriesTest, SameDirectoryScoresZero) {
  testing::TempDir dir;
  WriteWav(dir / "x.wav", testing::Babble(0.4, 5, 22050));
  WriteWav(dir / "y.wav", testing::Babble(0.6, 6));
  const auto report = EvaluateDirectories(dir.path(), dir.path(), SpectralParams{}, 1);
  EXPECT_EQ(report.count, 2U);
  EXPECT_EQ(report.mean, 0.0);
}

}  // namespace
}  // namespace dewarp
