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
#include <memory>
#include <vector>

#include "dewarp/audio_io.hpp"
#include "dewarp/matrix.hpp"

namespace dewarp {

// Front-end configuration. Defaults: 50 ms window, 12.5 ms hop at 16 kHz.
struct SpectralParams {
  int fft_size = 1024;
  int win_length = 800;
  int hop_length = 200;
  int mel_bins = 80;
  double fmin = 0.0;
  double fmax = 8000.0;
  double log_floor = 1e-5;

  // Throws std::invalid_argument on an inconsistent configuration.
  void Validate(int sample_rate) const;
  int spectrum_bins() const { return fft_size / 2 + 1; }

  bool operator==(const SpectralParams&) const = default;
};

// Natural-log amplitudes, frames x mel_bins.
struct MelSpectrogram {
  Matrix<float> values;
  SpectralParams params;
  int sample_rate = kWorkingSampleRate;

  std::size_t frames() const { return values.rows(); }
  std::size_t bins() const { return values.cols(); }
};

// Linear magnitudes, frames x (fft_size / 2 + 1).
struct MagnitudeSpectrogram {
  Matrix<double> values;
  int sample_rate = kWorkingSampleRate;

  std::size_t frames() const { return values.rows(); }
};

// N = 1 + floor((len - win) / hop); 0 when len < win.
std::size_t FrameCount(std::size_t num_samples, const SpectralParams& params);

// Smallest float that is >= ln(log_floor): the value of a floored mel cell.
float LogFloorValue(const SpectralParams& params);

double HzToMel(double hz);
double MelToHz(double mel);

// Triangular filters on the mel scale with unit peak. Immutable once built,
// so one instance can be shared by any number of threads.
class MelFilterbank {
 public:
  MelFilterbank(const SpectralParams& params, int sample_rate);

  // mel_bins x spectrum_bins.
  const Matrix<double>& weights() const { return weights_; }
  // spectrum_bins x mel_bins Moore-Penrose pseudo-inverse of weights().
  const Matrix<double>& pseudo_inverse() const { return pinv_; }
  // Peak frequency of each filter in Hz.
  const std::vector<double>& center_hz() const { return center_hz_; }

 private:
  Matrix<double> weights_;
  Matrix<double> pinv_;
  std::vector<double> center_hz_;
};

// Cached per (params, sample_rate).
std::shared_ptr<const MelFilterbank> SharedMelFilterbank(
    const SpectralParams& params, int sample_rate);

// Hann-windowed, uncentered STFT magnitudes. Throws Error{kAudioTooShort}.
MagnitudeSpectrogram StftMagnitude(const Waveform& wave,
                                   const SpectralParams& params);

MelSpectrogram MelFromMagnitude(const MagnitudeSpectrogram& mag,
                                const SpectralParams& params);

MelSpectrogram ComputeMelSpectrogram(const Waveform& wave,
                                     const SpectralParams& params);

// exp, then pseudo-inverse of the filterbank, negatives clamped to zero.
MagnitudeSpectrogram MelToMagnitude(const MelSpectrogram& mel);

// || |S| - M ||_F / || M ||_F over the two-sided spectrum (interior bins
// counted twice), which is the norm the Griffin-Lim iteration decreases.
double SpectralConvergence(const MagnitudeSpectrogram& estimate,
                           const MagnitudeSpectrogram& target);

struct GriffinLimResult {
  Waveform wave;
  // history[t] is the spectral convergence of the signal after t phase
  // updates; history.size() == iterations + 1.
  std::vector<double> history;
};

// Zero-phase initialised Griffin-Lim. Output length is
// (N - 1) * hop + win samples.
GriffinLimResult GriffinLimWithHistory(const MagnitudeSpectrogram& mag,
                                       const SpectralParams& params,
                                       int iterations);

Waveform GriffinLim(const MagnitudeSpectrogram& mag,
                    const SpectralParams& params, int iterations = 60);

}  // namespace dewarp
