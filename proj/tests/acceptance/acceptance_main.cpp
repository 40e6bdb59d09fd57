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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Runs against the library and CLI entry point only.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dewarp/audio_io.hpp"
#include "dewarp/cli.hpp"
#include "dewarp/dataset.hpp"
#include "dewarp/eval.hpp"
#include "dewarp/file_util.hpp"
#include "dewarp/random.hpp"
#include "dewarp/spectral.hpp"
#include "dewarp/warp.hpp"
#include "test_util.hpp"

namespace dewarp {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::string detail;
};

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Format(const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

// The 1000 randomized partition cases shared by the first two criteria.
struct PartitionCase {
  std::size_t n;
  std::uint64_t seed;
};

std::vector<PartitionCase> PartitionCases() {
  SplitMix64 pick(0xACCE97ULL);
  std::vector<PartitionCase> cases;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 12 + pick.NextBelow(2000 - 12 + 1);
    cases.push_back({n, pick.NextU64()});
  }
  return cases;
}

Verdict PartitionLaw() {
  const auto start = Clock::now();
  std::size_t bad = 0;
  for (const auto& c : PartitionCases()) {
    SplitMix64 rng(c.seed);
    const auto seg = RandomSegmentation(c.n, rng, 6);
    std::size_t total = 0;
    bool ok = seg.num_segments() == c.n / 6;
    for (std::size_t len : seg.lengths()) {
      ok = ok && len >= 1;
      total += len;
    }
    if (!ok || total != c.n) ++bad;
  }
  const double secs = Seconds(start);
  return {bad == 0 && secs < 5.0,
          Format("1000 cases, %zu violations, %.3f s (limit 5 s)", bad, secs)};
}

Verdict UnitResizeLengthLaw() {
  std::size_t bad = 0;
  for (const auto& c : PartitionCases()) {
    MelSpectrogram mel;
    mel.values = Matrix<float>(c.n, 4, 0.25F);
    SplitMix64 rng(c.seed);
    const auto seg = RandomSegmentation(c.n, rng, 6);
    const auto r = Warp(mel, seg, WarpConfig{}, rng);
    if (r.mel.frames() != c.n / 6 || r.record.warped_len != c.n / 6) ++bad;
  }
  const auto mel = testing::RandomMel(257, 80, 1);
  WarpConfig identity;
  identity.mode = WarpMode::kFactorResize;
  identity.factor_min = identity.factor_max = 1.0;
  SplitMix64 rng(0);
  const bool exact = Warp(mel, Segmentation{257, {}}, identity, rng).mel.values == mel.values;
  return {bad == 0 && exact, Format("%zu length violations in 1000 cases; identity warp %s",
                                    bad, exact ? "bit-exact" : "differs")};
}

Verdict DewarpOracleRoundTrip() {
  double worst = 0.0;
  std::mt19937 gen(99);
  std::uniform_real_distribution<float> level(-11.5F, 3.0F);
  for (std::uint64_t s = 0; s < 100; ++s) {
    SplitMix64 rng(DeriveSeed(5, "dewarp-oracle", s));
    const std::size_t n = 12 + rng.NextBelow(1000);
    const auto seg = RandomSegmentation(n, rng, 6);
    MelSpectrogram mel;
    mel.values = Matrix<float>(n, 80);
    for (std::size_t i = 0; i < seg.num_segments(); ++i) {
      std::vector<float> row(80);
      for (float& v : row) v = level(gen);
      for (std::size_t t = seg.start(i); t < seg.end(i); ++t) {
        std::copy(row.begin(), row.end(), mel.values.row(t).begin());
      }
    }
    const auto back = DewarpOracle(Warp(mel, seg, WarpConfig{}, rng).mel, seg.lengths());
    if (back.frames() != n) return {false, "reconstructed length differs"};
    for (std::size_t i = 0; i < mel.values.data().size(); ++i) {
      worst = std::max(worst, static_cast<double>(std::abs(back.values.data()[i] -
                                                           mel.values.data()[i])));
    }
  }
  return {worst < 1e-6, Format("100 cases, max abs error %.3g (limit 1e-6)", worst)};
}

Verdict InterpolationGoldens() {
  const auto column = [](std::vector<float> v) {
    Matrix<float> m(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
    return m;
  };
  const bool a = ResizeLinear(column({0, 2, 4, 6, 8}), 3) == column({0, 4, 8});
  const bool b = ResizeLinear(column({2, 4, 6}), 1) == column({4});
  const auto m = testing::RandomMel(31, 80, 7).values;
  const bool c = ResizeLinear(m, 31) == m;
  return {a && b && c, Format("[0,2,4,6,8]->3 %s; [2,4,6]->1 %s; identity %s",
                              a ? "ok" : "wrong", b ? "ok" : "wrong", c ? "ok" : "wrong")};
}

double BruteForce(const Matrix<double>& c, std::size_t i, std::size_t j, double acc) {
  acc += c(i, j);
  if (i + 1 == c.rows() && j + 1 == c.cols()) return acc;
  double best = std::numeric_limits<double>::infinity();
  if (i + 1 < c.rows()) best = std::min(best, BruteForce(c, i + 1, j, acc));
  if (j + 1 < c.cols()) best = std::min(best, BruteForce(c, i, j + 1, acc));
  if (i + 1 < c.rows() && j + 1 < c.cols()) best = std::min(best, BruteForce(c, i + 1, j + 1, acc));
  return best;
}

Verdict DtwOracle() {
  const auto start = Clock::now();
  std::mt19937_64 gen(31337);
  std::uniform_real_distribution<double> dist(0.0, 25.0);
  std::size_t mismatches = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + gen() % 6;
    const std::size_t m = 1 + gen() % 6;
    Matrix<double> cost(n, m);
    for (double& v : cost.data()) v = dist(gen);
    if (Dtw(cost).total_cost != BruteForce(cost, 0, 0, 0.0)) ++mismatches;
  }
  const double secs = Seconds(start);
  return {mismatches == 0 && secs < 10.0,
          Format("200 matrices, %zu mismatches, %.3f s (limit 10 s)", mismatches, secs)};
}

Verdict McdIdentityAndClosedForm() {
  std::mt19937 gen(4);
  std::normal_distribution<double> dist(0.0, 2.0);
  double identity_worst = 0.0;
  double rel_worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    CepstraSequence x(5 + t, 13);
    for (double& v : x.data()) v = dist(gen);
    identity_worst = std::max(identity_worst, McdDtw(x, x).mcd_db);

    CepstraSequence a(1, 13);
    CepstraSequence b(1, 13);
    double sq = 0.0;
    for (std::size_t d = 0; d < 13; ++d) {
      a(0, d) = dist(gen);
      b(0, d) = dist(gen);
      sq += (a(0, d) - b(0, d)) * (a(0, d) - b(0, d));
    }
    const double expected = 10.0 / std::numbers::ln10 * std::sqrt(2.0 * sq);
    rel_worst = std::max(rel_worst, std::abs(McdDtw(a, b).mcd_db - expected) / expected);
  }
  return {identity_worst == 0.0 && rel_worst <= 1e-9,
          Format("max mcd(x,x) %.3g; max relative closed-form error %.3g (limit 1e-9)",
                 identity_worst, rel_worst)};
}

Verdict GriffinLimConvergence() {
  const SpectralParams params;
  const auto mag = StftMagnitude(testing::Sine(440.0, 1.0), params);
  const auto r = GriffinLimWithHistory(mag, params, 60);
  double worst_rise = 0.0;
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    worst_rise = std::max(worst_rise, r.history[i] - r.history[i - 1]);
  }
  const bool monotone = worst_rise <= 1e-7;
  const bool converged = r.history.back() < 0.05;
  return {monotone && converged,
          Format("60 iterations on 1 s of 440 Hz: largest rise %.3g (limit 1e-7), "
                 "final error %.4f (limit 0.05), initial %.4f",
                 worst_rise, r.history.back(), r.history.front())};
}

std::uint64_t HashTree(const fs::path& root) {
  std::map<std::string, std::vector<std::uint8_t>> files;
  if (fs::is_regular_file(root)) {
    files[""] = ReadFileBytes(root);
  } else {
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (e.is_regular_file()) {
        files[fs::relative(e.path(), root).generic_string()] = ReadFileBytes(e.path());
      }
    }
  }
  std::string blob;
  for (const auto& [name, bytes] : files) {
    blob += name;
    blob.push_back('\0');
    blob.append(bytes.begin(), bytes.end());
    blob.push_back('\0');
  }
  return Fnv1a64(blob);
}

Verdict CliDeterminism() {
  testing::TempDir dir("dewarp-accept");
  {
    std::ofstream m(dir / "manifest.jsonl");
    for (int i = 0; i < 8; ++i) {
      const std::string id = "utt" + std::to_string(i);
      WriteWav(dir / (id + ".wav"), testing::Babble(0.5 + 0.15 * i, 100 + i));
      m << R"({"id": ")" << id << R"(", "audio": ")" << id << R"(.wav"})" << "\n";
    }
  }
  const auto run = [&](std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    return cli::Run(args, out, err);
  };
  const std::string manifest = (dir / "manifest.jsonl").string();
  std::vector<std::uint64_t> warp_hashes;
  std::vector<std::uint64_t> segaug_hashes;
  std::vector<std::uint64_t> shard_hashes;
  for (const std::string tag : {"1", "2"}) {
    const auto w = dir / ("warp" + tag);
    const auto s = dir / ("segaug" + tag);
    const auto sh = dir / ("shards" + tag + ".jsonl");
    if (run({"--seed", "7", "--jobs", tag, "warp", "--manifest", manifest, "--epochs", "3",
             "--out", w.string()}) != 0 ||
        run({"--seed", "7", "--jobs", tag, "warp", "--manifest", manifest, "--mode", "segaug",
             "--epochs", "3", "--out", s.string()}) != 0 ||
        run({"--seed", "7", "shards", "--manifest", manifest, "--shards", "0.002", "--out",
             sh.string()}) != 0) {
      return {false, "a CLI run failed"};
    }
    warp_hashes.push_back(HashTree(w));
    segaug_hashes.push_back(HashTree(s));
    shard_hashes.push_back(HashTree(sh));
  }
  const bool same = warp_hashes[0] == warp_hashes[1] && segaug_hashes[0] == segaug_hashes[1] &&
                    shard_hashes[0] == shard_hashes[1];
  return {same, Format("warp %016llx/%016llx segaug %016llx/%016llx shards %016llx/%016llx",
                       static_cast<unsigned long long>(warp_hashes[0]),
                       static_cast<unsigned long long>(warp_hashes[1]),
                       static_cast<unsigned long long>(segaug_hashes[0]),
                       static_cast<unsigned long long>(segaug_hashes[1]),
                       static_cast<unsigned long long>(shard_hashes[0]),
                       static_cast<unsigned long long>(shard_hashes[1]))};
}

Verdict ShardAccounting() {
  ShardSpec half;
  half.shards = 0.5;
  const bool target_exact = half.target_seconds() == 720.0;
  std::size_t violations = 0;
  std::mt19937 gen(2718);
  std::uniform_real_distribution<double> dur(0.5, 15.0);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    std::vector<ManifestEntry> corpus;
    double available = 0.0;
    while (available < 3000.0) {
      corpus.push_back({"u" + std::to_string(corpus.size()), "/dev/null", dur(gen), {}, {}});
      available += corpus.back().duration;
    }
    for (const double shards : {0.5, 1.0, 2.0}) {
      ShardSpec spec{shards, 24.0, seed};
      const auto subset = SampleShards(corpus, spec);
      double total = 0.0;
      for (const auto& e : subset) total += e.duration;
      const double before_last = total - subset.back().duration;
      if (!(total >= spec.target_seconds() && before_last < spec.target_seconds())) {
        ++violations;
      }
    }
  }
  return {target_exact && violations == 0,
          Format("0.5-shard target %.1f s; %zu overshoot violations in 600 draws",
                 half.target_seconds(), violations)};
}

}  // namespace
}  // namespace dewarp

int main() {
  using dewarp::Verdict;
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"warp partition law", dewarp::PartitionLaw},
      {"unit-resize length law", dewarp::UnitResizeLengthLaw},
      {"de-warp oracle", dewarp::DewarpOracleRoundTrip},
      {"interpolation goldens", dewarp::InterpolationGoldens},
      {"dtw oracle equivalence", dewarp::DtwOracle},
      {"mcd identity and closed form", dewarp::McdIdentityAndClosedForm},
      {"griffin-lim convergence", dewarp::GriffinLimConvergence},
      {"cli determinism", dewarp::CliDeterminism},
      {"shard accounting", dewarp::ShardAccounting},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %-30s %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    failed += v.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
