// tests/test_spectrogram.cpp

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

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stsb/spectrogram.hpp"

namespace {

stsb::Waveform tone(double hz, std::size_t n, int rate = 16000) {
  stsb::Waveform w;
  w.sample_rate = rate;
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) w.samples[i] = 0.5 * std::sin(2 * std::numbers::pi * hz * i / rate);
  return w;
}

TEST(Stft, ZeroSignal) {
  stsb::Waveform w;
  w.samples.assign(4000, 0.0);
  const auto mag = stsb::stft_magnitude(w, 25, 10, 512);
  EXPECT_EQ(mag.rows(), 257);
  EXPECT_EQ(mag.maxCoeff(), 0.0);
}

TEST(Stft, FrameCount) {
  for (std::size_t n : {400u, 401u, 559u, 560u, 16000u, 12345u}) {
    stsb::Waveform w;
    w.samples.assign(n, 0.1);
    const auto mag = stsb::stft_magnitude(w, 25, 10, 512);
    EXPECT_EQ(mag.cols(), static_cast<long>(1 + (n - 400) / 160)) << n;
  }
  stsb::Waveform short_w;
  short_w.samples.assign(100, 0.1);
  EXPECT_EQ(stsb::stft_magnitude(short_w, 25, 10, 512).cols(), 1);
}

TEST(Stft, BinCenteredSinePeaks) {
  // bin 40 of a 512-point FFT at 16 kHz = 1250 Hz
  const auto w = tone(40 * 16000.0 / 512, 8000);
  const auto mag = stsb::stft_magnitude(w, 25, 10, 512);
  for (Eigen::Index t = 0; t < mag.cols(); ++t) {
    Eigen::Index k;
    mag.col(t).maxCoeff(&k);
    EXPECT_EQ(k, 40);
  }
}

TEST(Stft, MatchesDirectDft) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  stsb::Waveform w;
  w.samples.resize(400);
  for (auto &x : w.samples) x = 0.1 * nd(rng);
  const auto mag = stsb::stft_magnitude(w, 25, 10, 512);
  std::vector<double> frame(512, 0.0);
  for (int n = 0; n < 400; ++n)
    frame[n] = w.samples[n] * (0.54 - 0.46 * std::cos(2 * std::numbers::pi * n / 399));
  const auto ref = oracle::dft_magnitude(frame);
  for (int k = 0; k < 257; ++k) EXPECT_NEAR(mag(k, 0), ref[k], 1e-10);
}

TEST(MelFilterbank, Shape) {
  const auto fb = stsb::mel_filterbank(80, 512, 16000);
  EXPECT_EQ(fb.rows(), 80);
  EXPECT_EQ(fb.cols(), 257);
  EXPECT_GE(fb.minCoeff(), 0.0);
  for (Eigen::Index c = 0; c < 80; ++c) {
    EXPECT_GT(fb.row(c).sum(), 0.0);
    // The lowest filters are narrower than one 31.25 Hz bin, so only their
    // mel-domain supports overlap; from channel 10 up they share bins.
    if (c >= 10 && c + 1 < 80) EXPECT_GT(fb.row(c).dot(fb.row(c + 1)), 0.0) << "filters " << c << "," << c + 1;
  }
  EXPECT_THROW(stsb::mel_filterbank(200, 256, 8000), stsb::Error);
  EXPECT_THROW(stsb::mel_filterbank(1, 512, 16000), stsb::Error);
}

TEST(MelSpectrogram, ZeroSignalIsFloor) {
  stsb::Waveform w;
  w.samples.assign(3200, 0.0);
  const auto m = stsb::mel_spectrogram(w);
  EXPECT_EQ(m.channels(), 80);
  EXPECT_EQ(m.frames(), stsb::stft_magnitude(w, 25, 10, 512).cols());
  for (Eigen::Index i = 0; i < m.values.size(); ++i) EXPECT_EQ(m.values.data()[i], std::log(1e-10));
}

TEST(MelSpectrogram, WhiteNoiseStationary) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd;
  std::vector<double> cvs;
  for (int trial = 0; trial < 100; ++trial) {
    stsb::Waveform w;
    w.samples.resize(8000);
    for (auto &x : w.samples) x = 0.1 * nd(rng);
    const auto m = stsb::mel_spectrogram(w);
    ASSERT_TRUE(m.values.allFinite());
    const Eigen::VectorXd col_means = m.values.colwise().mean().transpose();
    const double mean = col_means.mean();
    const double sd = std::sqrt((col_means.array() - mean).square().mean());
    cvs.push_back(sd / std::abs(mean));
  }
  for (double cv : cvs) EXPECT_LT(cv, 0.2);
}

TEST(FbankDelta, ConstantAndRamp) {
  stsb::MelSpectrogram m;
  m.values = Eigen::MatrixXd::Constant(80, 12, 3.0);
  auto f = stsb::fbank_delta(m);
  EXPECT_EQ(f.dim(), 160);
  EXPECT_EQ(f.frames(), 12);
  EXPECT_EQ(f.values.rightCols(80).cwiseAbs().maxCoeff(), 0.0);

  const double k = 0.75;
  for (Eigen::Index t = 0; t < 12; ++t) m.values.col(t).setConstant(k * t);
  f = stsb::fbank_delta(m);
  for (Eigen::Index t = 2; t < 10; ++t)
    for (Eigen::Index c = 80; c < 160; ++c) EXPECT_NEAR(f.values(t, c), k, 1e-12);
  EXPECT_EQ(f.values(5, 3), k * 5);
}

}  // namespace
