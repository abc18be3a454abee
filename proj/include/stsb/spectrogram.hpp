// stsb/spectrogram.hpp

// Copyright 2026  The stsb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef STSB_SPECTROGRAM_HPP
#define STSB_SPECTROGRAM_HPP

#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "stsb/audio.hpp"
#include "stsb/error.hpp"
#include "stsb/types.hpp"

namespace stsb {

struct FrontEndConfig {
  int num_channels = 80;
  double frame_length_ms = 25.0;
  double frame_shift_ms = 10.0;
  int fft_size = 0;  // 0: next power of two >= frame length
  double amplitude_floor = 1e-10;
};

/// C x T log mel amplitudes; column t is frame t.
struct MelSpectrogram {
  MatrixXd values;
  double frame_length_ms = 25.0;
  double frame_shift_ms = 10.0;

  Index channels() const { return values.rows(); }
  Index frames() const { return values.cols(); }
};

/// T x 2C matrix: static log-mel channels followed by their deltas.
struct AcousticFeatures {
  MatrixXd values;

  Index frames() const { return values.rows(); }
  Index dim() const { return values.cols(); }
};

inline int samples_for_ms(double ms, int sample_rate) {
  return static_cast<int>(std::lround(ms * sample_rate / 1000.0));
}

inline int default_fft_size(int frame_len) {
  return static_cast<int>(std::bit_ceil(static_cast<unsigned>(std::max(frame_len, 1))));
}

inline Index num_frames(std::size_t num_samples, int frame_len, int shift) {
  if (num_samples < static_cast<std::size_t>(frame_len)) return 1;
  return 1 + static_cast<Index>((num_samples - frame_len) / shift);
}

/// Hamming-windowed one-sided DFT magnitudes, (fft_size/2 + 1) x T.
/// Inputs shorter than one frame are zero-padded to a single frame.
inline MatrixXd stft_magnitude(const Waveform &w, double frame_length_ms, double frame_shift_ms,
                               int fft_size) {
  const int frame_len = samples_for_ms(frame_length_ms, w.sample_rate);
  const int shift = samples_for_ms(frame_shift_ms, w.sample_rate);
  require(frame_len >= 1 && shift >= 1, ErrorKind::Parameter, "frame length/shift too small");
  require(fft_size >= frame_len && std::has_single_bit(static_cast<unsigned>(fft_size)),
          ErrorKind::Parameter, "fft_size must be a power of two >= frame length");

  const Index frames = num_frames(w.samples.size(), frame_len, shift);
  const Index bins = fft_size / 2 + 1;
  MatrixXd mag(bins, frames);

  std::vector<double> window(frame_len);
  for (int n = 0; n < frame_len; ++n)
    window[n] = frame_len == 1
                    ? 1.0
                    : 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / (frame_len - 1));

  Eigen::FFT<double> fft;
  std::vector<double> buf(fft_size);
  std::vector<std::complex<double>> spec;
  for (Index t = 0; t < frames; ++t) {
    std::fill(buf.begin(), buf.end(), 0.0);
    const std::size_t start = static_cast<std::size_t>(t) * shift;
    for (int n = 0; n < frame_len; ++n) {
      const std::size_t i = start + n;
      if (i < w.samples.size()) buf[n] = w.samples[i] * window[n];
    }
    fft.fwd(spec, buf);
    for (Index k = 0; k < bins; ++k) mag(k, t) = std::abs(spec[k]);
  }
  return mag;
}

inline double hz_to_mel(double hz) { return 1127.0 * std::log1p(hz / 700.0); }

/// C x (fft_size/2 + 1) triangular filters, equally spaced on the mel scale
/// between 0 Hz and Nyquist.
inline MatrixXd mel_filterbank(int num_channels, int fft_size, int sample_rate) {
  require(num_channels >= 2, ErrorKind::Config, "need at least 2 mel channels");
  const Index bins = fft_size / 2 + 1;
  const double mel_hi = hz_to_mel(sample_rate / 2.0);
  const double step = mel_hi / (num_channels + 1);
  MatrixXd fb = MatrixXd::Zero(num_channels, bins);
  for (int c = 0; c < num_channels; ++c) {
    const double left = step * c, center = step * (c + 1), right = step * (c + 2);
    for (Index k = 0; k < bins; ++k) {
      const double mel = hz_to_mel(static_cast<double>(k) * sample_rate / fft_size);
      if (mel > left && mel < right)
        fb(c, k) = mel <= center ? (mel - left) / (center - left) : (right - mel) / (right - center);
    }
    if (fb.row(c).sum() <= 0.0)
      fail(ErrorKind::Config, std::to_string(num_channels) +
                                  " mel channels exceed the resolution of a " +
                                  std::to_string(fft_size) + "-point FFT at " +
                                  std::to_string(sample_rate) + " Hz");
  }
  return fb;
}

inline MelSpectrogram mel_spectrogram(const Waveform &w, const FrontEndConfig &cfg = {}) {
  require(cfg.amplitude_floor > 0.0, ErrorKind::Config, "amplitude_floor must be positive");
  const int frame_len = samples_for_ms(cfg.frame_length_ms, w.sample_rate);
  const int fft_size = cfg.fft_size > 0 ? cfg.fft_size : default_fft_size(frame_len);
  const MatrixXd fb = mel_filterbank(cfg.num_channels, fft_size, w.sample_rate);
  const MatrixXd mag = stft_magnitude(w, cfg.frame_length_ms, cfg.frame_shift_ms, fft_size);
  MelSpectrogram m;
  m.frame_length_ms = cfg.frame_length_ms;
  m.frame_shift_ms = cfg.frame_shift_ms;
  m.values = (fb * mag).array().max(cfg.amplitude_floor).log().matrix();
  return m;
}

/// Static features plus +/-2 frame regression deltas (edges replicated).
inline AcousticFeatures fbank_delta(const MelSpectrogram &m) {
  const Index c = m.channels(), t = m.frames();
  require(t >= 1, ErrorKind::Parameter, "spectrogram has no frames");
  AcousticFeatures f;
  f.values.resize(t, 2 * c);
  f.values.leftCols(c) = m.values.transpose();
  auto frame = [&](Index i) { return m.values.col(std::clamp<Index>(i, 0, t - 1)); };
  for (Index i = 0; i < t; ++i) {
    VectorXd d = (frame(i + 1) - frame(i - 1)) + 2.0 * (frame(i + 2) - frame(i - 2));
    f.values.row(i).tail(c) = (d / 10.0).transpose();
  }
  return f;
}

}  // namespace stsb

#endif  // STSB_SPECTROGRAM_HPP
