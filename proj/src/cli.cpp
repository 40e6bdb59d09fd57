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

#include "dewarp/cli.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string_view>

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "dewarp/audio_io.hpp"
#include "dewarp/dataset.hpp"
#include "dewarp/error.hpp"
#include "dewarp/eval.hpp"
#include "dewarp/file_util.hpp"
#include "dewarp/parallel.hpp"
#include "dewarp/spectral.hpp"
#include "dewarp/warp.hpp"

namespace dewarp::cli {

namespace fs = std::filesystem;

namespace {

struct GlobalFlags {
  std::uint64_t seed = 0;
  int jobs = DefaultJobs();
  std::string log_level;
};

struct FrontEndFlags {
  SpectralParams params;

  void Register(CLI::App* cmd) {
    cmd->add_option("--fft", params.fft_size, "FFT size")->capture_default_str();
    cmd->add_option("--win", params.win_length, "window length (samples)")
        ->capture_default_str();
    cmd->add_option("--hop", params.hop_length, "hop length (samples)")->capture_default_str();
    cmd->add_option("--mels", params.mel_bins, "mel bins")->capture_default_str();
    cmd->add_option("--fmin", params.fmin, "lowest filter edge (Hz)")->capture_default_str();
    cmd->add_option("--fmax", params.fmax, "highest filter edge (Hz)")->capture_default_str();
  }
};

// Thrown for flag values that parse but make no sense together.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr std::array<std::string_view, 7> kLogLevels = {"trace", "debug", "info", "warn",
                                                       "error", "critical", "off"};

bool IsLogLevel(std::string_view name) {
  return std::find(kLogLevels.begin(), kLogLevels.end(), name) != kLogLevels.end();
}

// The flag is validated by the parser; an unknown DEWARP_LOG value falls back
// to info with a warning rather than failing the run.
std::shared_ptr<spdlog::logger> MakeLogger(std::ostream& err, const std::string& flag_level) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("dewarp", sink);
  logger->set_pattern("[%l] %v");
  logger->set_level(spdlog::level::info);
  if (!flag_level.empty()) {
    logger->set_level(spdlog::level::from_str(flag_level));
  } else if (const char* env = std::getenv("DEWARP_LOG"); env != nullptr && *env != '\0') {
    if (IsLogLevel(env)) {
      logger->set_level(spdlog::level::from_str(env));
    } else {
      logger->warn("ignoring unknown DEWARP_LOG value '{}'", env);
    }
  }
  return logger;
}

void LogItemErrors(spdlog::logger& log, const std::vector<ItemError>& errors) {
  for (const auto& e : errors) log.warn("{}: {}", e.id, e.message);
}

int RunMel(const GlobalFlags& g, const std::string& manifest_path, const fs::path& out_dir,
           const SpectralParams& params, std::ostream& out, spdlog::logger& log) {
  try {
    params.Validate(kWorkingSampleRate);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto manifest = LoadManifest(manifest_path);
  std::vector<ItemError> errors;
  const auto updated = ComputeMels(manifest, params, out_dir, g.jobs, &errors);
  LogItemErrors(log, errors);
  if (updated.empty()) throw Error(ErrorKind::kEmptyOutput, "no mel spectrograms written");
  WriteManifest(out_dir / "manifest.jsonl", updated);
  out << "mels=" << updated.size() << " failed=" << errors.size() << "\n";
  return kExitOk;
}

struct WarpFlags {
  std::string mode = "unit";
  std::size_t epochs = 1;
  std::size_t avg_seg = 6;
  std::string factor_min = "1/3";
  std::string factor_max = "5/3";
  std::string fixed_factor = "1/6";
  std::string boundaries;
};

int RunWarp(const GlobalFlags& g, const std::string& manifest_path, const fs::path& out_dir,
            const SpectralParams& params, const WarpFlags& f, std::ostream& out,
            spdlog::logger& log) {
  WarpConfig cfg;
  cfg.seed = g.seed;
  cfg.avg_segment_frames = f.avg_seg;
  try {
    params.Validate(kWorkingSampleRate);
    cfg.factor_min = ParseRatio(f.factor_min);
    cfg.factor_max = ParseRatio(f.factor_max);
    cfg.fixed_factor = ParseRatio(f.fixed_factor);
    cfg.Validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (f.mode == "unit") {
    cfg.mode = WarpMode::kUnitResize;
  } else if (f.mode == "segaug") {
    cfg.mode = WarpMode::kFactorResize;
  } else if (f.mode == "naive") {
    cfg.mode = WarpMode::kFixedFactor;
    cfg.strategy = SegmentationStrategy::kWhole;
  } else {
    throw UsageError("--mode must be unit, segaug or naive");
  }

  std::optional<BoundaryFile> boundary_file;
  if (!f.boundaries.empty()) {
    if (cfg.mode != WarpMode::kUnitResize) {
      throw UsageError("--boundaries applies to --mode unit only");
    }
    boundary_file = BoundaryFile::Load(f.boundaries);
    cfg.strategy = SegmentationStrategy::kBoundaryFile;
  }

  const auto manifest = LoadManifest(manifest_path);
  if (cfg.mode == WarpMode::kFactorResize) {
    const auto index = EmitSegAugTargets(manifest, params, cfg, f.epochs, out_dir, g.jobs);
    LogItemErrors(log, index.errors);
    if (index.skipped_too_short > 0) {
      log.info("skipped {} utterances shorter than {} frames", index.skipped_too_short,
               2 * cfg.avg_segment_frames);
    }
    out << "targets=" << index.targets.size()
        << " skipped_too_short=" << index.skipped_too_short
        << " errors=" << index.errors.size() << "\n";
    return kExitOk;
  }
  const auto index = EmitPretrainingPairs(manifest, params, cfg, f.epochs, out_dir, g.jobs,
                                          boundary_file ? &*boundary_file : nullptr);
  LogItemErrors(log, index.errors);
  if (index.skipped_too_short > 0) {
    log.info("skipped {} utterances shorter than {} frames", index.skipped_too_short,
             2 * cfg.avg_segment_frames);
  }
  out << "pairs=" << index.pairs.size() << " skipped_too_short=" << index.skipped_too_short
      << " errors=" << index.errors.size() << "\n";
  return kExitOk;
}

int RunShards(const GlobalFlags& g, const std::string& manifest_path, const fs::path& out_path,
              double shards, double shard_minutes, std::ostream& out) {
  if (!(shards > 0.0) || !(shard_minutes > 0.0)) {
    throw UsageError("--shards and --shard-minutes must be positive");
  }
  const auto manifest = LoadManifest(manifest_path);
  const ShardSpec spec{shards, shard_minutes, g.seed};
  const auto subset = SampleShards(manifest, spec);
  WriteManifest(out_path, subset);
  double total = 0.0;
  for (const auto& e : subset) total += e.duration;
  out << "entries=" << subset.size() << " seconds=" << total
      << " target=" << spec.target_seconds() << "\n";
  return kExitOk;
}

int RunGlim(const fs::path& mel_path, const fs::path& out_path, int iters,
            const SpectralParams& params, std::ostream& out) {
  if (iters < 0) throw UsageError("--iters must be >= 0");
  try {
    params.Validate(kWorkingSampleRate);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  MelSpectrogram mel = ReadMel(mel_path);
  if (mel.bins() != static_cast<std::size_t>(params.mel_bins)) {
    throw Error(ErrorKind::kDimensionMismatch,
                mel_path.string() + " has " + std::to_string(mel.bins()) +
                    " mel bins; pass --mels to match");
  }
  mel.params = params;
  const auto result = GriffinLimWithHistory(MelToMagnitude(mel), params, iters);
  WriteWav(out_path, result.wave);
  out << "samples=" << result.wave.samples.size()
      << " spectral_convergence=" << result.history.back() << "\n";
  return kExitOk;
}

int RunEvalMcd(const GlobalFlags& g, const fs::path& ref_dir, const fs::path& syn_dir,
               const fs::path& out_path, const SpectralParams& params, std::ostream& out,
               spdlog::logger& log) {
  std::vector<std::string> unmatched;
  const McdReport report = EvaluateDirectories(ref_dir, syn_dir, params, g.jobs, &unmatched);
  for (const auto& id : unmatched) log.warn("{}: present in only one directory", id);
  if (report.count == 0) {
    throw Error(ErrorKind::kEmptyOutput, "no utterance ids shared by the two directories");
  }
  WriteFileAtomic(out_path, report.ToJson());
  out << report.SummaryLine() << "\n";
  return kExitOk;
}

}  // namespace

double ParseRatio(const std::string& text) {
  auto parse_number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v)) {
      throw std::invalid_argument("not a number or ratio: '" + text + "'");
    }
    return v;
  };
  const auto slash = text.find('/');
  if (slash == std::string::npos) return parse_number(text);
  const double num = parse_number(text.substr(0, slash));
  const double den = parse_number(text.substr(slash + 1));
  if (den == 0.0) throw std::invalid_argument("zero denominator in '" + text + "'");
  return num / den;
}

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"dewarp: segment-based mel-spectrogram warping toolkit", "dewarp"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  app.add_option("--seed", g.seed, "global seed")->capture_default_str();
  app.add_option("--jobs", g.jobs, "worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--log-level", g.log_level,
                 "trace|debug|info|warn|error|critical|off (default: $DEWARP_LOG or info)")
      ->check(CLI::IsMember(std::vector<std::string>(kLogLevels.begin(), kLogLevels.end())));

  std::string manifest;
  fs::path out_path;

  auto* mel_cmd = app.add_subcommand("mel", "compute MELS tensors and an updated manifest");
  FrontEndFlags mel_fe;
  mel_cmd->add_option("--manifest", manifest, "input manifest (JSON lines)")->required();
  mel_cmd->add_option("--out", out_path, "output directory")->required();
  mel_fe.Register(mel_cmd);

  auto* warp_cmd = app.add_subcommand("warp", "emit warped pairs or SegAug targets");
  FrontEndFlags warp_fe;
  WarpFlags wf;
  warp_cmd->add_option("--manifest", manifest, "input manifest (JSON lines)")->required();
  warp_cmd->add_option("--mode", wf.mode, "unit | segaug | naive")
      ->check(CLI::IsMember({"unit", "segaug", "naive"}))
      ->capture_default_str();
  warp_cmd->add_option("--epochs", wf.epochs, "epochs (unit/naive) or steps (segaug)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  warp_cmd->add_option("--out", out_path, "output directory")->required();
  warp_cmd->add_option("--avg-seg", wf.avg_seg, "average segment length in frames")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  warp_cmd->add_option("--fmin-factor", wf.factor_min, "SegAug minimum factor")
      ->capture_default_str();
  warp_cmd->add_option("--fmax-factor", wf.factor_max, "SegAug maximum factor")
      ->capture_default_str();
  warp_cmd->add_option("--fixed-factor", wf.fixed_factor, "naive downsampling factor")
      ->capture_default_str();
  warp_cmd->add_option("--boundaries", wf.boundaries, "boundary file (unit mode)");
  warp_fe.Register(warp_cmd);

  auto* shards_cmd = app.add_subcommand("shards", "sample a shard-sized subset of a manifest");
  double shards = 1.0;
  double shard_minutes = 24.0;
  shards_cmd->add_option("--manifest", manifest, "input manifest (JSON lines)")->required();
  shards_cmd->add_option("--shards", shards, "number of shards")->required();
  shards_cmd->add_option("--out", out_path, "output manifest")->required();
  shards_cmd->add_option("--shard-minutes", shard_minutes, "minutes per shard")
      ->capture_default_str();

  auto* glim_cmd = app.add_subcommand("glim", "Griffin-Lim vocoding of a MELS tensor");
  FrontEndFlags glim_fe;
  fs::path mel_path;
  int iters = 60;
  glim_cmd->add_option("--mel", mel_path, "input MELS file")->required();
  glim_cmd->add_option("--out", out_path, "output WAV")->required();
  glim_cmd->add_option("--iters", iters, "Griffin-Lim iterations")->capture_default_str();
  glim_fe.Register(glim_cmd);

  auto* eval_cmd = app.add_subcommand("eval-mcd", "MCD-DTW between two directories");
  FrontEndFlags eval_fe;
  fs::path ref_dir;
  fs::path syn_dir;
  eval_cmd->add_option("--ref-dir", ref_dir, "reference WAV/MELS directory")->required();
  eval_cmd->add_option("--syn-dir", syn_dir, "synthesized WAV/MELS directory")->required();
  eval_cmd->add_option("--out", out_path, "report JSON")->required();
  eval_fe.Register(eval_cmd);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage: " << e.what() << "\n";
    err << "run 'dewarp --help' for the list of commands and flags\n";
    return kExitUsage;
  }

  const auto log = MakeLogger(err, g.log_level);

  try {
    if (mel_cmd->parsed()) return RunMel(g, manifest, out_path, mel_fe.params, out, *log);
    if (warp_cmd->parsed()) {
      return RunWarp(g, manifest, out_path, warp_fe.params, wf, out, *log);
    }
    if (shards_cmd->parsed()) {
      return RunShards(g, manifest, out_path, shards, shard_minutes, out);
    }
    if (glim_cmd->parsed()) return RunGlim(mel_path, out_path, iters, glim_fe.params, out);
    if (eval_cmd->parsed()) {
      return RunEvalMcd(g, ref_dir, syn_dir, out_path, eval_fe.params, out, *log);
    }
  } catch (const UsageError& e) {
    err << "usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  err << "usage: no subcommand given\n";
  return kExitUsage;
}

}  // namespace dewarp::cli
