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

#include "dewarp/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "dewarp/audio_io.hpp"
#include "dewarp/error.hpp"
#include "dewarp/file_util.hpp"
#include "dewarp/parallel.hpp"

namespace dewarp {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string Where(std::string_view source, std::size_t line) {
  return std::string(source.empty() ? "<manifest>" : source) + ":" + std::to_string(line);
}

bool IsBlank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

template <typename Fn>
void ForEachLine(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (IsBlank(line)) continue;
    fn(line, line_no);
  }
}

std::string ReadText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path Resolve(const fs::path& base_dir, const std::string& p) {
  fs::path path(p);
  if (path.is_relative()) path = base_dir / path;
  return fs::absolute(path).lexically_normal();
}

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t GetU32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void CheckUniqueStems(std::span<const ManifestEntry> manifest) {
  std::unordered_map<std::string, std::string> seen;
  for (const auto& e : manifest) {
    const std::string stem = SafeFileStem(e.id);
    auto [it, inserted] = seen.emplace(stem, e.id);
    if (!inserted) {
      throw Error(ErrorKind::kDuplicateId, "ids '" + it->second + "' and '" + e.id +
                                               "' map to the same file name");
    }
  }
}

}  // namespace

std::vector<ManifestEntry> ParseManifest(std::string_view text, const fs::path& base_dir,
                                         std::string_view source) {
  std::vector<ManifestEntry> entries;
  std::unordered_map<std::string, std::size_t> first_line;
  ForEachLine(text, [&](std::string_view line, std::size_t line_no) {
    auto malformed = [&](const std::string& why) {
      throw Error(ErrorKind::kMalformedLine, Where(source, line_no) + ": " + why);
    };
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      malformed(std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) malformed("expected a JSON object");

    auto required_string = [&](const char* key) {
      const auto it = obj.find(key);
      if (it == obj.end()) malformed(std::string("missing field '") + key + "'");
      if (!it->is_string() || it->get_ref<const std::string&>().empty()) {
        malformed(std::string("field '") + key + "' must be a nonempty string");
      }
      return it->get<std::string>();
    };

    ManifestEntry entry;
    entry.id = required_string("id");
    entry.audio_path = Resolve(base_dir, required_string("audio"));

    if (const auto it = obj.find("duration_sec"); it != obj.end()) {
      if (!it->is_number()) malformed("duration_sec must be a number");
      entry.duration = it->get<double>();
      if (!(entry.duration > 0.0) || !std::isfinite(entry.duration)) {
        malformed("duration_sec must be positive");
      }
    } else {
      entry.duration = DurationSeconds(LoadWav(entry.audio_path));
    }

    if (const auto it = obj.find("text"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) malformed("text must be a string");
      const auto& t = it->get_ref<const std::string&>();
      if (IsBlank(t)) malformed("text is present but empty");
      entry.transcript = t;
    }
    if (const auto it = obj.find("mel"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) malformed("mel must be a string");
      entry.mel_path = Resolve(base_dir, it->get<std::string>());
    }

    auto [it, inserted] = first_line.emplace(entry.id, line_no);
    if (!inserted) {
      throw Error(ErrorKind::kDuplicateId,
                  Where(source, line_no) + ": duplicate id '" + entry.id +
                      "' (first on line " + std::to_string(it->second) + ")");
    }
    entries.push_back(std::move(entry));
  });
  return entries;
}

std::vector<ManifestEntry> LoadManifest(const fs::path& path) {
  const fs::path base = fs::absolute(path).parent_path();
  return ParseManifest(ReadText(path), base, path.string());
}

std::string ManifestToJsonLines(std::span<const ManifestEntry> entries) {
  std::string out;
  for (const auto& e : entries) {
    ordered_json obj;
    obj["id"] = e.id;
    obj["audio"] = e.audio_path.string();
    obj["duration_sec"] = e.duration;
    if (e.transcript) obj["text"] = *e.transcript;
    if (e.mel_path) obj["mel"] = e.mel_path->string();
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void WriteManifest(const fs::path& path, std::span<const ManifestEntry> entries) {
  WriteFileAtomic(path, ManifestToJsonLines(entries));
}

std::vector<ManifestEntry> SampleShards(std::span<const ManifestEntry> manifest,
                                        const ShardSpec& spec) {
  if (!(spec.shards > 0.0) || !(spec.shard_minutes > 0.0)) {
    throw std::invalid_argument("SampleShards: shards and shard_minutes must be positive");
  }
  const double target = spec.target_seconds();
  double total = 0.0;
  for (const auto& e : manifest) total += e.duration;
  if (total < target) {
    throw Error(ErrorKind::kInsufficientData,
                "manifest holds " + std::to_string(total) + " s, target is " +
                    std::to_string(target) + " s");
  }

  std::vector<std::size_t> order(manifest.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  SplitMix64 rng(spec.seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = rng.NextBelow(i);
    std::swap(order[i - 1], order[j]);
  }

  std::vector<ManifestEntry> out;
  double acc = 0.0;
  for (std::size_t idx : order) {
    if (acc >= target) break;
    out.push_back(manifest[idx]);
    acc += manifest[idx].duration;
  }
  return out;
}

std::vector<std::uint8_t> EncodeMel(const MelSpectrogram& mel) {
  const auto& v = mel.values;
  for (float x : v.data()) {
    if (!std::isfinite(x)) throw std::invalid_argument("EncodeMel: non-finite value");
  }
  std::vector<std::uint8_t> out;
  out.reserve(16 + v.data().size() * 4);
  for (char c : {'M', 'E', 'L', 'S'}) out.push_back(static_cast<std::uint8_t>(c));
  PutU32(out, kMelsVersion);
  PutU32(out, static_cast<std::uint32_t>(v.rows()));
  PutU32(out, static_cast<std::uint32_t>(v.cols()));
  for (float x : v.data()) PutU32(out, std::bit_cast<std::uint32_t>(x));
  return out;
}

MelSpectrogram DecodeMel(std::span<const std::uint8_t> bytes, std::string_view source) {
  const std::string where = source.empty() ? "<mels>" : std::string(source);
  static constexpr char kMagic[4] = {'M', 'E', 'L', 'S'};
  if (bytes.empty()) throw Error(ErrorKind::kTruncatedTensor, where + ": empty file");
  if (std::memcmp(bytes.data(), kMagic, std::min<std::size_t>(bytes.size(), 4)) != 0) {
    throw Error(ErrorKind::kBadMagic, where);
  }
  if (bytes.size() < 16) throw Error(ErrorKind::kTruncatedTensor, where + ": short header");
  const std::uint32_t version = GetU32(bytes.data() + 4);
  if (version != kMelsVersion) {
    throw Error(ErrorKind::kVersionUnsupported,
                where + ": version " + std::to_string(version));
  }
  const std::uint64_t n = GetU32(bytes.data() + 8);
  const std::uint64_t m = GetU32(bytes.data() + 12);
  const std::uint64_t payload = bytes.size() - 16;
  if (n * m * 4 > payload) {
    throw Error(ErrorKind::kTruncatedTensor,
                where + ": header declares " + std::to_string(n) + "x" +
                    std::to_string(m) + " but payload has " + std::to_string(payload) +
                    " bytes");
  }
  if (n * m * 4 != payload) {
    throw Error(ErrorKind::kTruncatedTensor, where + ": trailing bytes after tensor");
  }
  MelSpectrogram mel;
  std::vector<float> values(n * m);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = std::bit_cast<float>(GetU32(bytes.data() + 16 + 4 * i));
  }
  mel.values = Matrix<float>(n, m, std::move(values));
  mel.params.mel_bins = static_cast<int>(m);
  return mel;
}

void WriteMel(const fs::path& path, const MelSpectrogram& mel) {
  WriteFileAtomic(path, EncodeMel(mel));
}

MelSpectrogram ReadMel(const fs::path& path) {
  return DecodeMel(ReadFileBytes(path), path.string());
}

std::string WarpRecordToJson(const WarpRecord& record) {
  ordered_json obj;
  obj["id"] = record.utterance_id;
  obj["seed"] = record.seed;
  obj["boundaries"] = record.boundaries.boundaries;
  obj["original_len"] = record.original_len;
  obj["warped_len"] = record.warped_len;
  return obj.dump() + "\n";
}

WarpRecord WarpRecordFromJson(std::string_view text) {
  const auto obj = nlohmann::json::parse(text);
  WarpRecord r;
  r.utterance_id = obj.at("id").get<std::string>();
  r.seed = obj.at("seed").get<std::uint64_t>();
  r.original_len = obj.at("original_len").get<std::size_t>();
  r.warped_len = obj.at("warped_len").get<std::size_t>();
  r.boundaries.n_frames = r.original_len;
  r.boundaries.boundaries = obj.at("boundaries").get<std::vector<std::size_t>>();
  return r;
}

MelSpectrogram LoadUtteranceMel(const ManifestEntry& entry, const SpectralParams& params) {
  if (entry.mel_path) {
    MelSpectrogram mel = ReadMel(*entry.mel_path);
    if (mel.bins() != static_cast<std::size_t>(params.mel_bins)) {
      throw Error(ErrorKind::kDimensionMismatch,
                  entry.mel_path->string() + " has " + std::to_string(mel.bins()) +
                      " mel bins, expected " + std::to_string(params.mel_bins));
    }
    mel.params = params;
    return mel;
  }
  return ComputeMelSpectrogram(Resample(LoadWav(entry.audio_path), kWorkingSampleRate),
                               params);
}

std::vector<ManifestEntry> ComputeMels(std::span<const ManifestEntry> manifest,
                                       const SpectralParams& params, const fs::path& out_dir,
                                       int jobs, std::vector<ItemError>* errors) {
  params.Validate(kWorkingSampleRate);
  CheckUniqueStems(manifest);
  const fs::path abs_out = fs::absolute(out_dir).lexically_normal();
  std::vector<std::optional<ManifestEntry>> done(manifest.size());
  std::vector<std::optional<ItemError>> failed(manifest.size());
  ParallelFor(manifest.size(), jobs, [&](std::size_t i) {
    const ManifestEntry& in = manifest[i];
    try {
      const Waveform wave = LoadWav(in.audio_path);
      const MelSpectrogram mel =
          ComputeMelSpectrogram(Resample(wave, kWorkingSampleRate), params);
      ManifestEntry out = in;
      out.duration = DurationSeconds(wave);
      out.mel_path = abs_out / (SafeFileStem(in.id) + ".mels");
      WriteMel(*out.mel_path, mel);
      done[i] = std::move(out);
    } catch (const Error& e) {
      failed[i] = ItemError{in.id, e.what()};
    }
  });
  std::vector<ManifestEntry> out;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (done[i]) out.push_back(std::move(*done[i]));
    if (failed[i] && errors) errors->push_back(std::move(*failed[i]));
  }
  return out;
}

namespace {

struct PendingFile {
  fs::path path;
  std::vector<std::uint8_t> bytes;
};

void WriteAll(const std::vector<PendingFile>& files) {
  for (const auto& f : files) WriteFileAtomic(f.path, f.bytes);
}

std::vector<std::uint8_t> ToBytes(const std::string& s) {
  return {s.begin(), s.end()};
}

bool NeedsRandomSegments(const WarpConfig& cfg) {
  return cfg.mode != WarpMode::kFixedFactor &&
         cfg.strategy == SegmentationStrategy::kRandom;
}

}  // namespace

PairIndex EmitPretrainingPairs(std::span<const ManifestEntry> manifest,
                               const SpectralParams& params, const WarpConfig& cfg,
                               std::size_t epochs, const fs::path& out_dir, int jobs,
                               const BoundaryFile* boundaries) {
  params.Validate(kWorkingSampleRate);
  cfg.Validate();
  if (cfg.strategy == SegmentationStrategy::kBoundaryFile && boundaries == nullptr) {
    throw std::invalid_argument("EmitPretrainingPairs: boundary strategy needs a file");
  }
  CheckUniqueStems(manifest);

  struct Outcome {
    std::vector<PairIndexEntry> pairs;
    bool too_short = false;
    std::optional<ItemError> error;
  };
  std::vector<Outcome> outcomes(manifest.size());

  ParallelFor(manifest.size(), jobs, [&](std::size_t i) {
    const ManifestEntry& entry = manifest[i];
    Outcome& outcome = outcomes[i];
    try {
      const MelSpectrogram mel = LoadUtteranceMel(entry, params);
      if (NeedsRandomSegments(cfg) && mel.frames() < 2 * cfg.avg_segment_frames) {
        outcome.too_short = true;
        return;
      }
      const std::string stem = SafeFileStem(entry.id);
      const std::string original_rel = stem + "/original.mels";
      std::vector<PendingFile> files;
      files.push_back({out_dir / original_rel, EncodeMel(mel)});
      for (std::size_t e = 0; e < epochs; ++e) {
        const WarpResult warped = WarpUtterance(mel, entry.id, e, cfg, boundaries);
        const std::string tag = stem + "/e" + std::to_string(e);
        PairIndexEntry pair{entry.id, e, tag + ".warped.mels", original_rel,
                            tag + ".record.json"};
        files.push_back({out_dir / pair.warped_path, EncodeMel(warped.mel)});
        files.push_back({out_dir / pair.record_path,
                         ToBytes(WarpRecordToJson(warped.record))});
        outcome.pairs.push_back(std::move(pair));
      }
      WriteAll(files);
    } catch (const Error& e) {
      outcome.pairs.clear();
      outcome.error = ItemError{entry.id, e.what()};
    }
  });

  PairIndex index;
  for (auto& o : outcomes) {
    if (o.too_short) ++index.skipped_too_short;
    if (o.error) index.errors.push_back(std::move(*o.error));
    for (auto& p : o.pairs) index.pairs.push_back(std::move(p));
  }
  if (index.pairs.empty()) {
    throw Error(ErrorKind::kEmptyOutput,
                "no pretraining pairs produced (" + std::to_string(index.skipped_too_short) +
                    " too short, " + std::to_string(index.errors.size()) + " failed)");
  }

  std::string lines;
  for (const auto& p : index.pairs) {
    ordered_json obj;
    obj["id"] = p.id;
    obj["epoch"] = p.epoch;
    obj["warped_path"] = p.warped_path;
    obj["original_path"] = p.original_path;
    obj["record_path"] = p.record_path;
    lines += obj.dump() + "\n";
  }
  WriteFileAtomic(out_dir / kPairIndexName, lines);
  return index;
}

SegAugIndex EmitSegAugTargets(std::span<const ManifestEntry> manifest,
                              const SpectralParams& params, const WarpConfig& cfg,
                              std::size_t steps, const fs::path& out_dir, int jobs) {
  params.Validate(kWorkingSampleRate);
  cfg.Validate();
  CheckUniqueStems(manifest);

  struct Outcome {
    std::vector<SegAugIndexEntry> targets;
    bool too_short = false;
    std::optional<ItemError> error;
  };
  std::vector<Outcome> outcomes(manifest.size());

  ParallelFor(manifest.size(), jobs, [&](std::size_t i) {
    const ManifestEntry& entry = manifest[i];
    Outcome& outcome = outcomes[i];
    try {
      const MelSpectrogram mel = LoadUtteranceMel(entry, params);
      if (mel.frames() < 2 * cfg.avg_segment_frames) {
        outcome.too_short = true;
        return;
      }
      const std::string stem = SafeFileStem(entry.id);
      std::vector<PendingFile> files;
      for (std::size_t s = 0; s < steps; ++s) {
        SegAugIndexEntry target{entry.id, s, DeriveSeed(cfg.seed, entry.id, s),
                                stem + "/s" + std::to_string(s) + ".segaug.mels"};
        files.push_back({out_dir / target.path,
                         EncodeMel(SegAug(mel, cfg.seed, entry.id, s, cfg))});
        outcome.targets.push_back(std::move(target));
      }
      WriteAll(files);
    } catch (const Error& e) {
      outcome.targets.clear();
      outcome.error = ItemError{entry.id, e.what()};
    }
  });

  SegAugIndex index;
  for (auto& o : outcomes) {
    if (o.too_short) ++index.skipped_too_short;
    if (o.error) index.errors.push_back(std::move(*o.error));
    for (auto& t : o.targets) index.targets.push_back(std::move(t));
  }
  if (index.targets.empty()) {
    throw Error(ErrorKind::kEmptyOutput, "no SegAug targets produced");
  }
  std::string lines;
  for (const auto& t : index.targets) {
    ordered_json obj;
    obj["id"] = t.id;
    obj["step"] = t.step;
    obj["seed"] = t.seed;
    obj["path"] = t.path;
    lines += obj.dump() + "\n";
  }
  WriteFileAtomic(out_dir / kSegAugIndexName, lines);
  return index;
}

std::vector<PairIndexEntry> LoadPairIndex(const fs::path& path) {
  std::vector<PairIndexEntry> out;
  const std::string text = ReadText(path);
  ForEachLine(text, [&](std::string_view line, std::size_t line_no) {
    try {
      const auto obj = nlohmann::json::parse(line);
      out.push_back(PairIndexEntry{obj.at("id").get<std::string>(),
                                   obj.at("epoch").get<std::uint64_t>(),
                                   obj.at("warped_path").get<std::string>(),
                                   obj.at("original_path").get<std::string>(),
                                   obj.at("record_path").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kMalformedLine, Where(path.string(), line_no) + ": " + e.what());
    }
  });
  return out;
}

}  // namespace dewarp
