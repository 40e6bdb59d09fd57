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

#include "dewarp/spectral.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>

#include "dewarp/error.hpp"

namespace dewarp {
namespace {

// FFTW's planner is not thread-safe; execution on distinct buffers is.
std::mutex& PlannerMutex() {
  static std::mutex mu;
  return mu;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

// Real forward / inverse transforms of one size with private buffers.
// FFTW_ESTIMATE keeps plan selection deterministic, so outputs are
// bit-identical across runs.
class RealFft {
 public:
  explicit RealFft(int size)
      : size_(size),
        bins_(size / 2 + 1),
        real_(static_cast<double*>(fftw_malloc(sizeof(double) * size))),
        spec_(static_cast<fftw_complex*>(
            fftw_malloc(sizeof(fftw_complex) * bins_))) {
    if (!real_ || !spec_) throw std::bad_alloc();
    std::lock_guard lock(PlannerMutex());
    forward_ = fftw_plan_dft_r2c_1d(size_, real_.get(), spec_.get(),
                                    FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(size_, spec_.get(), real_.get(),
                                    FFTW_ESTIMATE | FFTW_DESTROY_INPUT);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  ~RealFft() {
    std::lock_guard lock(PlannerMutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }

  double* real() { return real_.get(); }
  std::complex<double>* spectrum() {
    return reinterpret_cast<std::complex<double>*>(spec_.get());
  }
  void Forward() { fftw_execute(forward_); }
  // Unnormalised: the result is size() times the true inverse.
  void Inverse() { fftw_execute(inverse_); }
  int size() const { return size_; }
  int bins() const { return bins_; }

 private:
  int size_;
  int bins_;
  std::unique_ptr<double, FftwFree> real_;
  std::unique_ptr<fftw_complex, FftwFree> spec_;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

std::vector<double> HannWindow(int length) {
  std::vector<double> w(static_cast<std::size_t>(length));
  for (int n = 0; n < length; ++n) {
    w[static_cast<std::size_t>(n)] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / length);
  }
  return w;
}

// Complex STFT of a signal; frame t covers samples [t*hop, t*hop + win).
Matrix<std::complex<double>> ComplexStft(std::span<const double> signal,
                                         const SpectralParams& p,
                                         const std::vector<double>& window,
                                         RealFft& fft) {
  const std::size_t frames = FrameCount(signal.size(), p);
  Matrix<std::complex<double>> out(frames, static_cast<std::size_t>(fft.bins()));
  const auto win = static_cast<std::size_t>(p.win_length);
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t start = t * static_cast<std::size_t>(p.hop_length);
    double* buf = fft.real();
    for (std::size_t n = 0; n < win; ++n) buf[n] = signal[start + n] * window[n];
    std::fill(buf + win, buf + fft.size(), 0.0);
    fft.Forward();
    std::copy_n(fft.spectrum(), fft.bins(), out.row(t).begin());
  }
  return out;
}

// Least-squares inverse STFT: overlap-add with the analysis window as
// synthesis window, normalised by the summed squared window.
std::vector<double> InverseStft(const Matrix<std::complex<double>>& spec,
                                const SpectralParams& p,
                                const std::vector<double>& window,
                                RealFft& fft) {
  const std::size_t frames = spec.rows();
  const auto win = static_cast<std::size_t>(p.win_length);
  const auto hop = static_cast<std::size_t>(p.hop_length);
  const std::size_t length = (frames - 1) * hop + win;
  std::vector<double> out(length, 0.0);
  std::vector<double> wsum(length, 0.0);
  const double scale = 1.0 / fft.size();
  for (std::size_t t = 0; t < frames; ++t) {
    std::copy(spec.row(t).begin(), spec.row(t).end(), fft.spectrum());
    fft.Inverse();
    const double* frame = fft.real();
    const std::size_t start = t * hop;
    for (std::size_t n = 0; n < win; ++n) {
      out[start + n] += window[n] * frame[n] * scale;
      wsum[start + n] += window[n] * window[n];
    }
  }
  for (std::size_t i = 0; i < length; ++i) {
    if (wsum[i] > 0.0) out[i] /= wsum[i];
  }
  return out;
}

double BinWeight(std::size_t k, std::size_t bins, int fft_size) {
  const bool nyquist = (fft_size % 2 == 0) && k + 1 == bins;
  return (k == 0 || nyquist) ? 1.0 : 2.0;
}

}  // namespace

void SpectralParams::Validate(int sample_rate) const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("SpectralParams: " + what);
  };
  if (sample_rate <= 0) fail("sample_rate must be positive");
  if (hop_length <= 0 || hop_length > win_length || win_length > fft_size) {
    fail("require 0 < hop_length <= win_length <= fft_size");
  }
  if (fmin < 0.0 || fmin >= fmax || fmax > sample_rate / 2.0) {
    fail("require 0 <= fmin < fmax <= sample_rate / 2");
  }
  if (mel_bins < 2) fail("mel_bins must be at least 2");
  if (!(log_floor > 0.0)) fail("log_floor must be positive");
}

std::size_t FrameCount(std::size_t num_samples, const SpectralParams& params) {
  const auto win = static_cast<std::size_t>(params.win_length);
  if (num_samples < win) return 0;
  return 1 + (num_samples - win) / static_cast<std::size_t>(params.hop_length);
}

float LogFloorValue(const SpectralParams& params) {
  const double exact = std::log(params.log_floor);
  float v = static_cast<float>(exact);
  if (static_cast<double>(v) < exact) {
    v = std::nextafter(v, std::numeric_limits<float>::infinity());
  }
  return v;
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank::MelFilterbank(const SpectralParams& params, int sample_rate) {
  params.Validate(sample_rate);
  const auto mels = static_cast<std::size_t>(params.mel_bins);
  const auto bins = static_cast<std::size_t>(params.spectrum_bins());

  const double mel_lo = HzToMel(params.fmin);
  const double mel_hi = HzToMel(params.fmax);
  std::vector<double> edges(mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = MelToHz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                    static_cast<double>(mels + 1));
  }

  weights_ = Matrix<double>(mels, bins, 0.0);
  center_hz_.resize(mels);
  const double bin_hz = static_cast<double>(sample_rate) / params.fft_size;
  for (std::size_t m = 0; m < mels; ++m) {
    const double lo = edges[m];
    const double center = edges[m + 1];
    const double hi = edges[m + 2];
    center_hz_[m] = center;
    double sum = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      const double rising = (f - lo) / (center - lo);
      const double falling = (hi - f) / (hi - center);
      const double w = std::max(0.0, std::min(rising, falling));
      weights_(m, k) = w;
      sum += w;
    }
    if (sum <= 0.0) {
      throw std::invalid_argument(
          "MelFilterbank: filter " + std::to_string(m) +
          " covers no FFT bin; use fewer mel bins or a larger fft_size");
    }
  }

  Eigen::MatrixXd w(mels, bins);
  for (std::size_t m = 0; m < mels; ++m) {
    for (std::size_t k = 0; k < bins; ++k) w(m, k) = weights_(m, k);
  }
  const Eigen::MatrixXd pinv = w.completeOrthogonalDecomposition().pseudoInverse();
  pinv_ = Matrix<double>(bins, mels);
  for (std::size_t k = 0; k < bins; ++k) {
    for (std::size_t m = 0; m < mels; ++m) pinv_(k, m) = pinv(k, m);
  }
}

std::shared_ptr<const MelFilterbank> SharedMelFilterbank(
    const SpectralParams& params, int sample_rate) {
  using Key = std::tuple<int, int, double, double, int>;
  static std::mutex mu;
  static std::map<Key, std::shared_ptr<const MelFilterbank>> cache;
  const Key key{params.fft_size, params.mel_bins, params.fmin, params.fmax,
                sample_rate};
  std::lock_guard lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto bank = std::make_shared<const MelFilterbank>(params, sample_rate);
  cache.emplace(key, bank);
  return bank;
}

MagnitudeSpectrogram StftMagnitude(const Waveform& wave,
                                   const SpectralParams& params) {
  params.Validate(wave.sample_rate);
  if (wave.samples.size() < static_cast<std::size_t>(params.win_length)) {
    throw Error(ErrorKind::kAudioTooShort,
                std::to_string(wave.samples.size()) + " samples < window of " +
                    std::to_string(params.win_length));
  }
  const std::vector<double> signal(wave.samples.begin(), wave.samples.end());
  const std::vector<double> window = HannWindow(params.win_length);
  RealFft fft(params.fft_size);
  const auto spec = ComplexStft(signal, params, window, fft);

  MagnitudeSpectrogram mag;
  mag.sample_rate = wave.sample_rate;
  mag.values = Matrix<double>(spec.rows(), spec.cols());
  for (std::size_t t = 0; t < spec.rows(); ++t) {
    for (std::size_t k = 0; k < spec.cols(); ++k) {
      mag.values(t, k) = std::abs(spec(t, k));
    }
  }
  return mag;
}

MelSpectrogram MelFromMagnitude(const MagnitudeSpectrogram& mag,
                                const SpectralParams& params) {
  const auto bank = SharedMelFilterbank(params, mag.sample_rate);
  const Matrix<double>& w = bank->weights();
  if (mag.values.cols() != w.cols()) {
    throw std::invalid_argument("MelFromMagnitude: spectrum width mismatch");
  }
  const float floor_value = LogFloorValue(params);
  MelSpectrogram mel;
  mel.params = params;
  mel.sample_rate = mag.sample_rate;
  mel.values = Matrix<float>(mag.frames(), w.rows());
  for (std::size_t t = 0; t < mag.frames(); ++t) {
    const auto frame = mag.values.row(t);
    for (std::size_t m = 0; m < w.rows(); ++m) {
      const auto filter = w.row(m);
      double acc = 0.0;
      for (std::size_t k = 0; k < filter.size(); ++k) acc += filter[k] * frame[k];
      const auto v = static_cast<float>(std::log(std::max(acc, params.log_floor)));
      mel.values(t, m) = std::max(v, floor_value);
    }
  }
  return mel;
}

MelSpectrogram ComputeMelSpectrogram(const Waveform& wave,
                                     const SpectralParams& params) {
  return MelFromMagnitude(StftMagnitude(wave, params), params);
}

MagnitudeSpectrogram MelToMagnitude(const MelSpectrogram& mel) {
  const auto bank = SharedMelFilterbank(mel.params, mel.sample_rate);
  const Matrix<double>& pinv = bank->pseudo_inverse();
  if (mel.bins() != pinv.cols()) {
    throw std::invalid_argument("MelToMagnitude: mel width does not match params");
  }
  MagnitudeSpectrogram mag;
  mag.sample_rate = mel.sample_rate;
  mag.values = Matrix<double>(mel.frames(), pinv.rows());
  std::vector<double> linear(mel.bins());
  for (std::size_t t = 0; t < mel.frames(); ++t) {
    const auto row = mel.values.row(t);
    std::transform(row.begin(), row.end(), linear.begin(),
                   [](float v) { return std::exp(static_cast<double>(v)); });
    for (std::size_t k = 0; k < pinv.rows(); ++k) {
      const auto basis = pinv.row(k);
      double acc = 0.0;
      for (std::size_t m = 0; m < linear.size(); ++m) acc += basis[m] * linear[m];
      mag.values(t, k) = std::max(acc, 0.0);
    }
  }
  return mag;
}

double SpectralConvergence(const MagnitudeSpectrogram& estimate,
                           const MagnitudeSpectrogram& target) {
  const auto& a = estimate.values;
  const auto& b = target.values;
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("SpectralConvergence: shape mismatch");
  }
  // fft_size parity is recoverable from the bin count only up to one; the
  // last bin is treated as Nyquist, matching the even sizes used here.
  const int fft_size = static_cast<int>((b.cols() - 1) * 2);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t t = 0; t < b.rows(); ++t) {
    for (std::size_t k = 0; k < b.cols(); ++k) {
      const double weight = BinWeight(k, b.cols(), fft_size);
      const double d = a(t, k) - b(t, k);
      num += weight * d * d;
      den += weight * b(t, k) * b(t, k);
    }
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(num / den);
}

GriffinLimResult GriffinLimWithHistory(const MagnitudeSpectrogram& mag,
                                       const SpectralParams& params,
                                       int iterations) {
  if (iterations < 0) {
    throw std::invalid_argument("GriffinLim: iterations must be >= 0");
  }
  params.Validate(mag.sample_rate);
  if (mag.frames() == 0) {
    throw std::invalid_argument("GriffinLim: empty magnitude spectrogram");
  }
  if (mag.values.cols() != static_cast<std::size_t>(params.spectrum_bins())) {
    throw std::invalid_argument("GriffinLim: spectrum width does not match fft_size");
  }

  const std::vector<double> window = HannWindow(params.win_length);
  RealFft fft(params.fft_size);
  const std::size_t frames = mag.frames();
  const std::size_t bins = mag.values.cols();

  // Zero-phase start: the complex spectrum is the magnitude itself.
  Matrix<std::complex<double>> spec(frames, bins);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t k = 0; k < bins; ++k) spec(t, k) = mag.values(t, k);
  }

  GriffinLimResult result;
  result.history.reserve(static_cast<std::size_t>(iterations) + 1);
  MagnitudeSpectrogram estimate;
  estimate.sample_rate = mag.sample_rate;
  estimate.values = Matrix<double>(frames, bins);

  std::vector<double> signal = InverseStft(spec, params, window, fft);
  for (int it = 0;; ++it) {
    const auto rebuilt = ComplexStft(signal, params, window, fft);
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t k = 0; k < bins; ++k) estimate.values(t, k) = std::abs(rebuilt(t, k));
    }
    result.history.push_back(SpectralConvergence(estimate, mag));
    if (it == iterations) break;
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t k = 0; k < bins; ++k) {
        const std::complex<double> z = rebuilt(t, k);
        const double r = std::abs(z);
        const std::complex<double> phase = r > 0.0 ? z / r : std::complex<double>(1.0);
        spec(t, k) = mag.values(t, k) * phase;
      }
    }
    signal = InverseStft(spec, params, window, fft);
  }

  result.wave.sample_rate = mag.sample_rate;
  result.wave.samples.assign(signal.begin(), signal.end());
  return result;
}

Waveform GriffinLim(const MagnitudeSpectrogram& mag,
                    const SpectralParams& params, int iterations) {
  return GriffinLimWithHistory(mag, params, iterations).wave;
}

}  // namespace dewarp
