// tests/test_synth.cpp

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
#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stsb/synth.hpp"

namespace {

using namespace stsb;
using namespace stsb::synth;

SpeakerProfile identity_profile() {
  SpeakerProfile p;
  p.speaker_id = "X";
  p.f0_hz = 130.0;
  return p;  // rate 1, tilt 0, shift 1, no pauses, no noise
}

TEST(Synth, IdentityProfileEqualsTemplate) {
  const auto vocab = default_vocabulary();
  for (std::uint64_t seed : {1u, 2u, 3u})
    for (const auto &w : vocab) {
      const Waveform a = synthesize(w, identity_profile(), seed);
      const Waveform b = render_template(w, 130.0, seed);
      ASSERT_EQ(a.samples, b.samples) << w.id;
    }
}

TEST(Synth, HalfRateDoublesDuration) {
  const auto vocab = default_vocabulary();
  auto slow = identity_profile();
  slow.rate_factor = 0.5;
  for (const auto &w : vocab) {
    const auto n1 = static_cast<double>(synthesize(w, identity_profile(), 9).samples.size());
    const auto n2 = static_cast<double>(synthesize(w, slow, 9).samples.size());
    EXPECT_NEAR(n2, 2.0 * n1, 160.0) << w.id;  // one 10 ms frame
  }
}

TEST(Synth, NegativeTiltLowersCentroid) {
  const auto vocab = default_vocabulary();
  auto tilted = identity_profile();
  tilted.tilt_db_per_octave = -6.0;
  for (std::size_t i = 0; i < vocab.size(); i += 4) {
    const auto &w = vocab[i];
    const Waveform a = synthesize(w, identity_profile(), 4);
    const Waveform b = synthesize(w, tilted, 4);
    EXPECT_LT(oracle::spectral_centroid(b.samples, b.sample_rate),
              oracle::spectral_centroid(a.samples, a.sample_rate))
        << w.id;
  }
}

TEST(Synth, FormantShiftMovesVowelPeak) {
  // single-vowel word; the strongest harmonic region moves with the shift
  WordTemplate w{"V", {{SegmentKind::Vowel, 300.0, {700.0, 1800.0, 2800.0}, 0.0}}};
  auto hi = identity_profile();
  hi.formant_shift = 1.15;
  const Waveform a = synthesize(w, identity_profile(), 1);
  const Waveform b = synthesize(w, hi, 1);
  EXPECT_GT(oracle::spectral_centroid(b.samples, b.sample_rate),
            oracle::spectral_centroid(a.samples, a.sample_rate));
}

TEST(Synth, NoiseLevel) {
  std::vector<double> x(16000, 0.0);
  for (std::size_t i = 0; i < x.size(); i += 2) x[i] = 0.5;  // RMS over non-zero samples = 0.5
  std::vector<double> y = x;
  std::mt19937_64 rng(3);
  add_noise(y, -20.0, rng);
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) ss += (y[i] - x[i]) * (y[i] - x[i]);
  EXPECT_NEAR(std::sqrt(ss / 16000.0), 0.05, 0.002);
}

TEST(Synth, DefaultProfilesShape) {
  const auto p = default_profiles(3);
  ASSERT_EQ(p.size(), 29u);
  int dys = 0;
  for (const auto &s : p) {
    s.validate();
    dys += is_dysarthric(s.severity);
  }
  EXPECT_EQ(dys, 16);
  for (const auto &s : default_profiles(3, CorpusVariant::Spectral)) {
    EXPECT_EQ(s.rate_factor, 1.0);
    EXPECT_EQ(s.pause_prob, 0.0);
  }
  const auto r = default_profiles(3, CorpusVariant::Rate);
  for (const auto &s : r) {
    EXPECT_EQ(s.tilt_db_per_octave, 0.0);
    EXPECT_EQ(s.formant_shift, 1.0);
    EXPECT_EQ(s.pause_prob, r.front().pause_prob);
    EXPECT_EQ(s.noise_db, r.front().noise_db);
  }
  // severity bands are ordered by rate
  for (std::size_t i = 1; i < p.size(); ++i)
    if (p[i].severity != p[i - 1].severity && is_dysarthric(p[i].severity))
      EXPECT_GT(p[i].rate_factor, p[i - 1].rate_factor);
}

TEST(Synth, ProfileValidation) {
  auto p = identity_profile();
  p.rate_factor = 0.3;
  EXPECT_THROW(p.validate(), Error);
  p = identity_profile();
  p.formant_shift = 1.3;
  EXPECT_THROW(p.validate(), Error);
  p = identity_profile();
  p.pause_prob = 1.5;
  EXPECT_THROW(p.validate(), Error);
}

TEST(Synth, CorpusDeterministicAndComplete) {
  GroupCounts counts = {1, 0, 0, 0, 1};
  const auto profiles = default_profiles(5, CorpusVariant::Default, counts);
  const auto vocab = default_vocabulary(4);
  CorpusConfig cfg;
  cfg.seed = 11;
  const auto a = generate_corpus(profiles, vocab, cfg);
  const auto b = generate_corpus(profiles, vocab, cfg);
  ASSERT_EQ(a.size(), 2u * 3u * 4u * 2u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].meta, b[i].meta);
    EXPECT_EQ(a[i].wave.samples, b[i].wave.samples);
    double peak = 0.0;
    for (double v : a[i].wave.samples) peak = std::max(peak, std::abs(v));
    EXPECT_LE(peak, 1.0);
  }
  cfg.seed = 12;
  EXPECT_NE(generate_corpus(profiles, vocab, cfg)[0].wave.samples, a[0].wave.samples);

  // one severity group only
  GroupCounts one = {0, 0, 0, 0, 2};
  EXPECT_THROW(generate_corpus(default_profiles(5, CorpusVariant::Default, one), vocab, cfg), Error);
  EXPECT_THROW(generate_corpus(profiles, {}, cfg), Error);
}

TEST(Synth, WriteCorpusAndProfilesRoundTrip) {
  GroupCounts counts = {1, 0, 0, 0, 1};
  const auto profiles = default_profiles(5, CorpusVariant::Default, counts);
  const auto vocab = default_vocabulary(2);
  CorpusConfig cfg;
  cfg.blocks = 1;
  const auto utts = generate_corpus(profiles, vocab, cfg);
  const auto dir = std::filesystem::temp_directory_path() / "stsb_test_corpus";
  std::filesystem::remove_all(dir);
  const auto rows = write_corpus(dir, utts, profiles);
  ASSERT_EQ(rows.size(), utts.size());
  const auto back = read_manifest(dir / "manifest.csv");
  ASSERT_EQ(back.size(), rows.size());
  const Waveform w = load_wav(resolve_row_path(dir / "manifest.csv", back[0]));
  EXPECT_EQ(w.samples.size(), utts[0].wave.samples.size());
  std::ifstream pf(dir / "profiles.csv");
  const auto ps = parse_profiles(pf);
  ASSERT_EQ(ps.size(), profiles.size());
  EXPECT_EQ(ps[0].rate_factor, profiles[0].rate_factor);
  EXPECT_EQ(ps[1].noise_db, profiles[1].noise_db);
  std::filesystem::remove_all(dir);
}

}  // namespace
