// stsb/synth.hpp

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

#ifndef STSB_SYNTH_HPP
#define STSB_SYNTH_HPP

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "stsb/audio.hpp"
#include "stsb/error.hpp"
#include "stsb/manifest.hpp"
#include "stsb/random.hpp"
#include "stsb/types.hpp"

// Formant synthesizer for a small isolated-word corpus. Every speaker is
// described by a profile; dysarthric severity is expressed through speaking
// rate, spectral tilt, additive noise and pause insertion, and every speaker
// carries a formant scaling that is independent of severity.

namespace stsb::synth {

struct SpeakerProfile {
  std::string speaker_id;
  double tilt_db_per_octave = 0.0;
  double formant_shift = 1.0;
  double rate_factor = 1.0;
  double pause_prob = 0.0;
  double noise_db = -std::numeric_limits<double>::infinity();  // relative to speech RMS
  double f0_hz = 120.0;
  Intelligibility severity = Intelligibility::CTL;

  void validate() const {
    const std::string who = "profile " + speaker_id + ": ";
    require(!speaker_id.empty(), ErrorKind::Config, "profile speaker_id is empty");
    require(rate_factor >= 0.4 && rate_factor <= 1.5, ErrorKind::Config,
            who + "rate_factor must lie in [0.4, 1.5]");
    require(formant_shift >= 0.8 && formant_shift <= 1.2, ErrorKind::Config,
            who + "formant_shift must lie in [0.8, 1.2]");
    require(pause_prob >= 0.0 && pause_prob <= 1.0, ErrorKind::Config, who + "pause_prob must lie in [0, 1]");
    require(std::isfinite(tilt_db_per_octave), ErrorKind::Config, who + "tilt_db_per_octave must be finite");
    require(!std::isnan(noise_db) && noise_db < std::numeric_limits<double>::infinity(), ErrorKind::Config,
            who + "noise_db must be finite or -inf");
    require(f0_hz >= 50.0 && f0_hz <= 400.0, ErrorKind::Config, who + "f0_hz must lie in [50, 400]");
  }
};

enum class SegmentKind { Vowel, Fricative, Closure, Burst };

struct Segment {
  SegmentKind kind = SegmentKind::Vowel;
  double duration_ms = 0.0;
  std::array<double, 3> formants{};  // vowels
  double center_hz = 0.0;            // fricatives
};

struct WordTemplate {
  std::string id;
  std::vector<Segment> segments;
};

inline constexpr double kVowelStep = 1.13;

/// Words cross four consonant contexts (none, or a fricative at 2.6, 4.0 or
/// 5.6 kHz) with five vowels whose formants climb a geometric ladder. Within
/// a context, words differ only in the vowel, so a speaker's formant scaling
/// moves a word towards its ladder neighbours.
inline std::vector<WordTemplate> default_vocabulary(int n_words = 20) {
  require(n_words >= 1, ErrorKind::Parameter, "vocabulary needs at least one word");
  const auto vowel = [](int step) {
    const double k = std::pow(kVowelStep, step);
    return Segment{SegmentKind::Vowel, 150.0, {450.0 * k, 1350.0 * k, 2350.0 * k}, 0.0};
  };
  const auto fric = [](double hz) { return Segment{SegmentKind::Fricative, 90.0, {}, hz}; };

  constexpr int kContexts = 4;
  std::vector<WordTemplate> vocab;
  for (int w = 0; w < n_words; ++w) {
    const int context = w % kContexts, step = w / kContexts;
    const Segment v = vowel(step);
    std::vector<Segment> s;
    switch (context) {
      case 0: s = {v}; break;
      case 1: s = {fric(2600.0), v}; break;
      case 2: s = {v, fric(4000.0)}; break;
      default: s = {fric(5600.0), v}; break;
    }
    char id[16];
    std::snprintf(id, sizeof id, "W%02d", w);
    vocab.push_back({id, std::move(s)});
  }
  return vocab;
}

struct SeverityBand {
  Intelligibility group;
  double rate_lo, rate_hi;
  double tilt_lo, tilt_hi;
  double noise_lo, noise_hi;
  double pause_prob;
};

inline const std::array<SeverityBand, 5> &severity_bands() {
  static const std::array<SeverityBand, 5> bands = {{
      {Intelligibility::VL, 0.42, 0.50, -9.0, -8.0, -40.0, -35.0, 0.30},
      {Intelligibility::L, 0.52, 0.60, -7.0, -6.0, -45.0, -40.0, 0.20},
      {Intelligibility::M, 0.65, 0.75, -5.0, -4.0, -50.0, -45.0, 0.10},
      {Intelligibility::H, 0.80, 0.90, -3.0, -2.0, -55.0, -50.0, 0.05},
      {Intelligibility::CTL, 0.95, 1.10, -1.0, 0.0, -65.0, -60.0, 0.00},
  }};
  return bands;
}

/// Default: all cues vary with severity. Spectral: rate and pauses are held
/// at control values. Rate: tilt, formants, noise and pauses are shared, so
/// groups differ only in speaking rate.
enum class CorpusVariant { Default, Spectral, Rate };

inline std::string_view to_string(CorpusVariant v) {
  switch (v) {
    case CorpusVariant::Default: return "default";
    case CorpusVariant::Spectral: return "spectral";
    case CorpusVariant::Rate: return "rate";
  }
  return "?";
}

inline CorpusVariant parse_variant(std::string_view s) {
  if (s == "default") return CorpusVariant::Default;
  if (s == "spectral") return CorpusVariant::Spectral;
  if (s == "rate") return CorpusVariant::Rate;
  fail(ErrorKind::Config, "unknown corpus variant '" + std::string(s) + "'");
}

/// Seed of the bundled corpus.
inline constexpr std::uint64_t kBundledCorpusSeed = 7;

/// Speaker counts per group, in VL, L, M, H, CTL order.
using GroupCounts = std::array<int, 5>;
inline constexpr GroupCounts kDefaultGroupCounts = {4, 4, 4, 4, 13};

inline std::vector<SpeakerProfile> default_profiles(std::uint64_t seed, CorpusVariant variant = CorpusVariant::Default,
                                                    const GroupCounts &counts = kDefaultGroupCounts) {
  auto rng = substream(seed, {hash_name("profiles")});
  auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  std::vector<SpeakerProfile> out;
  int n_dys = 0, n_ctl = 0;
  for (const auto &band : severity_bands()) {
    for (int i = 0; i < counts[static_cast<std::size_t>(group_index(band.group))]; ++i) {
      SpeakerProfile p;
      char id[16];
      if (is_dysarthric(band.group))
        std::snprintf(id, sizeof id, "D%02d", ++n_dys);
      else
        std::snprintf(id, sizeof id, "C%02d", ++n_ctl);
      p.speaker_id = id;
      p.severity = band.group;
      // draw everything so that variants share the draws they keep
      p.rate_factor = uniform(band.rate_lo, band.rate_hi);
      p.tilt_db_per_octave = uniform(band.tilt_lo, band.tilt_hi);
      p.noise_db = uniform(band.noise_lo, band.noise_hi);
      p.formant_shift = uniform(0.85, 1.15);
      p.f0_hz = uniform(95.0, 220.0);
      p.pause_prob = band.pause_prob;
      if (variant == CorpusVariant::Spectral) {
        p.rate_factor = 1.0;
        p.pause_prob = 0.0;
      } else if (variant == CorpusVariant::Rate) {
        p.tilt_db_per_octave = 0.0;
        p.formant_shift = 1.0;
        p.noise_db = -50.0;
        p.pause_prob = 0.1;
      }
      out.push_back(p);
    }
  }
  return out;
}

struct Articulation {
  double f0_hz = 120.0;
  double formant_shift = 1.0;
  double rate_factor = 1.0;
  double pause_prob = 0.0;
};

struct RenderOptions {
  int sample_rate = 16000;
  double edge_silence_ms = 80.0;  // before and after the word, scaled with rate
  double peak = 0.7;
  double voicing = 0.3;  // share of periodic excitation in vowels; the rest is aspiration noise
  bool jitter = true;
};

namespace detail {

/// Two-pole resonator (unity gain at DC).
class Resonator {
 public:
  Resonator(double freq, double bandwidth, double sample_rate) {
    const double t = 1.0 / sample_rate;
    c_ = -std::exp(-2.0 * std::numbers::pi * bandwidth * t);
    b_ = 2.0 * std::exp(-std::numbers::pi * bandwidth * t) * std::cos(2.0 * std::numbers::pi * freq * t);
    a_ = 1.0 - b_ - c_;
  }
  double operator()(double x) {
    const double y = a_ * x + b_ * y1_ + c_ * y2_;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double a_, b_, c_, y1_ = 0.0, y2_ = 0.0;
};

inline void set_rms(std::vector<double> &x, double target) {
  double ss = 0.0;
  for (double v : x) ss += v * v;
  if (ss <= 0.0) return;
  const double g = target / std::sqrt(ss / static_cast<double>(x.size()));
  for (double &v : x) v *= g;
}

inline void apply_ramps(std::vector<double> &x, std::size_t ramp) {
  ramp = std::min(ramp, x.size() / 3);
  for (std::size_t i = 0; i < ramp; ++i) {
    const double g = 0.5 - 0.5 * std::cos(std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(ramp));
    x[i] *= g;
    x[x.size() - 1 - i] *= g;
  }
}

inline std::size_t ms_to_samples(double ms, int sr) {
  return static_cast<std::size_t>(std::llround(ms * 1e-3 * sr));
}

}  // namespace detail

/// Renders one word. `rng` supplies per-utterance jitter and pause draws;
/// the number of draws does not depend on the articulation, so renders that
/// differ only in rate or formant scaling share their jitter.
inline Waveform render_word(const WordTemplate &word, const Articulation &art, std::mt19937_64 &rng,
                            const RenderOptions &opt = {}) {
  require(!word.segments.empty(), ErrorKind::Parameter, "word template " + word.id + " has no segments");
  require(art.rate_factor > 0.0, ErrorKind::Parameter, "rate_factor must be positive");
  const int sr = opt.sample_rate;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto jit = [&](double spread) {
    const double u = unit(rng);
    return opt.jitter ? 1.0 + spread * (2.0 * u - 1.0) : 1.0;
  };
  const double f0 = art.f0_hz * jit(0.05);
  const double formant_jitter = jit(0.02);
  const double stretch = 1.0 / art.rate_factor;

  Waveform w;
  w.sample_rate = sr;
  auto &out = w.samples;
  out.assign(detail::ms_to_samples(opt.edge_silence_ms * stretch, sr), 0.0);
  double phase = 0.0;
  for (std::size_t si = 0; si < word.segments.size(); ++si) {
    const Segment &seg = word.segments[si];
    const double dur_jitter = jit(0.1);
    const bool pause = unit(rng) < art.pause_prob;
    const double pause_ms = 80.0 + 120.0 * unit(rng);
    std::mt19937_64 excitation(rng());  // own stream for sample noise
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t n = std::max<std::size_t>(1, detail::ms_to_samples(seg.duration_ms * dur_jitter * stretch, sr));
    std::vector<double> x(n, 0.0);
    switch (seg.kind) {
      case SegmentKind::Vowel: {
        std::vector<detail::Resonator> res;
        const std::array<double, 3> bw = {80.0, 110.0, 150.0};
        for (int k = 0; k < 3; ++k)
          res.emplace_back(seg.formants[static_cast<std::size_t>(k)] * art.formant_shift * formant_jitter,
                           bw[static_cast<std::size_t>(k)], sr);
        std::vector<double> pulse(n), breath(n);
        double lp = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          phase += f0 / sr;
          double e = 0.0;
          if (phase >= 1.0) {
            phase -= 1.0;
            e = 1.0;
          }
          lp = 0.7 * lp + e;  // soften the glottal pulse
          pulse[i] = lp;
          breath[i] = gauss(excitation);
        }
        detail::set_rms(pulse, opt.voicing);
        detail::set_rms(breath, 1.0 - opt.voicing);
        for (std::size_t i = 0; i < n; ++i) {
          double y = pulse[i] + breath[i];
          for (auto &r : res) y = r(y);
          x[i] = y;
        }
        detail::set_rms(x, 0.2);
        break;
      }
      case SegmentKind::Fricative: {
        const double fc = seg.center_hz * art.formant_shift * formant_jitter;
        detail::Resonator r1(fc, 0.35 * fc, sr), r2(fc, 0.35 * fc, sr);
        for (std::size_t i = 0; i < n; ++i) x[i] = r2(r1(gauss(excitation)));
        detail::set_rms(x, 0.06);
        break;
      }
      case SegmentKind::Burst: {
        for (std::size_t i = 0; i < n; ++i)
          x[i] = gauss(excitation) * std::exp(-5.0 * static_cast<double>(i) / static_cast<double>(n));
        detail::set_rms(x, 0.1);
        break;
      }
      case SegmentKind::Closure:
        break;
    }
    detail::apply_ramps(x, detail::ms_to_samples(10.0, sr));
    out.insert(out.end(), x.begin(), x.end());
    if (pause && si + 1 < word.segments.size())
      out.insert(out.end(), detail::ms_to_samples(pause_ms, sr), 0.0);
  }
  out.insert(out.end(), detail::ms_to_samples(opt.edge_silence_ms * stretch, sr), 0.0);
  return w;
}

/// Multiplies the spectrum by (max(f, 100 Hz) / 100 Hz)^(tilt / 6.02), i.e. a
/// slope of `tilt_db_per_octave` above 100 Hz.
inline void apply_tilt(std::vector<double> &x, int sample_rate, double tilt_db_per_octave) {
  if (tilt_db_per_octave == 0.0 || x.empty()) return;
  const std::size_t n = std::bit_ceil(x.size());
  std::vector<double> padded(x);
  padded.resize(n, 0.0);
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, padded);
  const double expo = tilt_db_per_octave / (20.0 * std::log10(2.0));
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = static_cast<double>(std::min(k, n - k)) * sample_rate / static_cast<double>(n);
    spec[k] *= std::pow(std::max(f, 100.0) / 100.0, expo);
  }
  fft.inv(padded, spec);
  std::copy_n(padded.begin(), x.size(), x.begin());
}

/// White noise at `noise_db` relative to the RMS of the non-silent samples.
inline void add_noise(std::vector<double> &x, double noise_db, std::mt19937_64 &rng) {
  if (!std::isfinite(noise_db) || x.empty()) return;
  double ss = 0.0;
  std::size_t active = 0;
  for (double v : x)
    if (v != 0.0) {
      ss += v * v;
      ++active;
    }
  if (active == 0) return;
  const double sigma = std::sqrt(ss / static_cast<double>(active)) * std::pow(10.0, noise_db / 20.0);
  std::normal_distribution<double> gauss(0.0, sigma);
  for (double &v : x) v += gauss(rng);
}

inline void normalize_peak(std::vector<double> &x, double peak) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  if (m > 0.0)
    for (double &v : x) v *= peak / m;
}

/// Renders `word` with the template articulation (no formant scaling,
/// nominal rate, no pauses), then normalizes the peak.
inline Waveform render_template(const WordTemplate &word, double f0_hz, std::uint64_t utterance_seed,
                                const RenderOptions &opt = {}) {
  auto rng = substream(utterance_seed, {hash_name("articulation")});
  Waveform w = render_word(word, Articulation{f0_hz, 1.0, 1.0, 0.0}, rng, opt);
  normalize_peak(w.samples, opt.peak);
  return w;
}

/// Template rendered with the speaker's articulation, then tilt, noise and
/// peak normalization.
inline Waveform synthesize(const WordTemplate &word, const SpeakerProfile &p, std::uint64_t utterance_seed,
                           const RenderOptions &opt = {}) {
  auto rng = substream(utterance_seed, {hash_name("articulation")});
  Waveform w = render_word(word, Articulation{p.f0_hz, p.formant_shift, p.rate_factor, p.pause_prob}, rng, opt);
  apply_tilt(w.samples, w.sample_rate, p.tilt_db_per_octave);
  auto noise_rng = substream(utterance_seed, {hash_name("noise")});
  add_noise(w.samples, p.noise_db, noise_rng);
  normalize_peak(w.samples, opt.peak);
  return w;
}

struct CorpusConfig {
  std::uint64_t seed = 1;
  int blocks = 3;
  int n_per_word = 2;  // repetitions of each word per block
  RenderOptions render;
};

struct Utterance {
  UtteranceMeta meta;
  Waveform wave;
};

inline std::string block_name(int b) { return "B" + std::to_string(b + 1); }

inline std::string utterance_name(const UtteranceMeta &m, int rep) {
  std::string s = m.speaker_id + "_" + m.block_id + "_" + m.word_id;
  if (rep > 0) s += "_r" + std::to_string(rep);
  return s;
}

/// Every speaker reads every word `n_per_word` times in each block.
/// Deterministic given the seed; utterances are independent, so the order
/// of generation does not matter.
inline std::vector<Utterance> generate_corpus(const std::vector<SpeakerProfile> &profiles,
                                              const std::vector<WordTemplate> &vocab, const CorpusConfig &cfg) {
  require(!vocab.empty(), ErrorKind::Parameter, "vocabulary is empty");
  require(cfg.blocks >= 1 && cfg.n_per_word >= 1, ErrorKind::Parameter, "blocks and n_per_word must be >= 1");
  std::array<bool, 5> seen{};
  for (const auto &p : profiles) {
    p.validate();
    seen[static_cast<std::size_t>(group_index(p.severity))] = true;
  }
  require(std::count(seen.begin(), seen.end(), true) >= 2, ErrorKind::Parameter,
          "profiles must cover at least two severity groups");
  std::vector<Utterance> out;
  for (std::size_t s = 0; s < profiles.size(); ++s)
    for (int b = 0; b < cfg.blocks; ++b)
      for (std::size_t w = 0; w < vocab.size(); ++w)
        for (int r = 0; r < cfg.n_per_word; ++r) {
          Utterance u;
          u.meta = {profiles[s].speaker_id, block_name(b), vocab[w].id, profiles[s].severity};
          const std::uint64_t seed = substream(cfg.seed, {hash_name(profiles[s].speaker_id),
                                                          static_cast<std::uint64_t>(b), w,
                                                          static_cast<std::uint64_t>(r)})();
          u.wave = synthesize(vocab[w], profiles[s], seed, cfg.render);
          u.wave.source_id = utterance_name(u.meta, r);
          out.push_back(std::move(u));
        }
  return out;
}

inline constexpr const char *kProfileHeader =
    "speaker_id,intelligibility,tilt_db_per_octave,formant_shift,rate_factor,pause_prob,noise_db,f0_hz";

inline std::string format_profiles(const std::vector<SpeakerProfile> &profiles) {
  std::ostringstream os;
  os.precision(17);
  os << kProfileHeader << "\n";
  for (const auto &p : profiles)
    os << p.speaker_id << "," << to_string(p.severity) << "," << p.tilt_db_per_octave << "," << p.formant_shift
       << "," << p.rate_factor << "," << p.pause_prob << "," << p.noise_db << "," << p.f0_hz << "\n";
  return os.str();
}

inline std::vector<SpeakerProfile> parse_profiles(std::istream &in, const std::string &name = "profiles") {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::Format, name + ": missing header");
  line = stsb::detail::strip_cr(line);
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  require(line == kProfileHeader, ErrorKind::Format, name + ": unexpected header '" + line + "'");
  std::vector<SpeakerProfile> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = stsb::detail::strip_cr(line);
    if (line.empty()) continue;
    const auto f = stsb::detail::split_csv_line(line);
    const std::string where = name + ":" + std::to_string(lineno);
    require(f.size() == 8, ErrorKind::Format, where + ": expected 8 fields");
    SpeakerProfile p;
    p.speaker_id = f[0];
    const auto g = parse_intelligibility(f[1]);
    require(g.has_value(), ErrorKind::Format, where + ": bad intelligibility '" + f[1] + "'");
    p.severity = *g;
    try {
      p.tilt_db_per_octave = std::stod(f[2]);
      p.formant_shift = std::stod(f[3]);
      p.rate_factor = std::stod(f[4]);
      p.pause_prob = std::stod(f[5]);
      p.noise_db = std::stod(f[6]);
      p.f0_hz = std::stod(f[7]);
    } catch (const std::exception &) {
      fail(ErrorKind::Format, where + ": non-numeric field");
    }
    p.validate();
    out.push_back(p);
  }
  return out;
}

/// Writes wav/<name>.wav, manifest.csv and profiles.csv under `dir`.
inline std::vector<ManifestRow> write_corpus(const std::filesystem::path &dir, const std::vector<Utterance> &utts,
                                             const std::vector<SpeakerProfile> &profiles) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "wav", ec);
  require(!ec, ErrorKind::Io, "cannot create " + (dir / "wav").string() + ": " + ec.message());
  std::vector<ManifestRow> rows;
  for (const auto &u : utts) {
    const std::string rel = "wav/" + u.wave.source_id + ".wav";
    write_wav(dir / rel, u.wave);
    rows.push_back({rel, u.meta});
  }
  write_manifest(dir / "manifest.csv", rows);
  std::ofstream pf(dir / "profiles.csv", std::ios::binary);
  require(static_cast<bool>(pf), ErrorKind::Io, "cannot write " + (dir / "profiles.csv").string());
  pf << format_profiles(profiles);
  return rows;
}

}  // namespace stsb::synth

#endif  // STSB_SYNTH_HPP
