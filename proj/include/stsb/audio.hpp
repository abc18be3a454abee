// stsb/audio.hpp

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

#ifndef STSB_AUDIO_HPP
#define STSB_AUDIO_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

#include "stsb/error.hpp"

namespace stsb {

/// Mono audio in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;
  std::string source_id;

  std::size_t size() const { return samples.size(); }
  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

enum class WavEncoding { Pcm16, Float32 };

namespace detail {

inline std::uint16_t read_u16(const unsigned char *p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline std::uint32_t read_u32(const unsigned char *p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}
inline void put_u16(std::string &out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}
inline void put_u32(std::string &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

}  // namespace detail

/// Parses a RIFF/WAVE byte buffer. Accepts PCM 16-bit and IEEE float-32
/// (plain or WAVE_FORMAT_EXTENSIBLE), any channel count; channels are
/// averaged to mono.
inline Waveform parse_wav(const std::string &bytes, std::string source_id = {}) {
  const auto *b = reinterpret_cast<const unsigned char *>(bytes.data());
  const std::size_t n = bytes.size();
  require(n >= 12 && std::memcmp(b, "RIFF", 4) == 0 && std::memcmp(b + 8, "WAVE", 4) == 0,
          ErrorKind::Format, "not a RIFF/WAVE file: " + source_id);

  bool have_fmt = false;
  std::uint16_t format_tag = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char *data = nullptr;
  std::size_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= n) {
    const unsigned char *chunk = b + pos;
    const std::uint32_t len = detail::read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      require(len >= 16 && body + len <= n, ErrorKind::Format, "truncated fmt chunk");
      format_tag = detail::read_u16(b + body);
      channels = detail::read_u16(b + body + 2);
      rate = detail::read_u32(b + body + 4);
      bits = detail::read_u16(b + body + 14);
      if (format_tag == 0xFFFE) {
        require(len >= 26, ErrorKind::Format, "truncated WAVE_FORMAT_EXTENSIBLE header");
        format_tag = detail::read_u16(b + body + 24);  // first two bytes of the sub-format GUID
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = b + body;
      data_len = std::min<std::size_t>(len, n - body);
      break;
    }
    pos = body + len + (len & 1u);
  }
  require(have_fmt, ErrorKind::Format, "missing fmt chunk: " + source_id);
  require(data != nullptr, ErrorKind::Format, "missing data chunk: " + source_id);
  require(channels >= 1 && rate >= 1, ErrorKind::Format, "invalid channel count or sample rate");

  const bool pcm16 = format_tag == 1 && bits == 16;
  const bool f32 = format_tag == 3 && bits == 32;
  if (!pcm16 && !f32)
    fail(ErrorKind::UnsupportedCodec, "format tag " + std::to_string(format_tag) + " with " +
                                          std::to_string(bits) + " bits: " + source_id);

  const std::size_t bytes_per_frame = static_cast<std::size_t>(channels) * (bits / 8);
  const std::size_t frames = data_len / bytes_per_frame;
  require(frames > 0, ErrorKind::EmptyAudio, "no samples in " + source_id);

  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  w.source_id = std::move(source_id);
  w.samples.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    const unsigned char *p = data + f * bytes_per_frame;
    double acc = 0.0;
    for (std::uint16_t c = 0; c < channels; ++c) {
      if (pcm16) {
        acc += static_cast<std::int16_t>(detail::read_u16(p + 2 * c)) / 32768.0;
      } else {
        const float v = std::bit_cast<float>(detail::read_u32(p + 4 * c));
        require(std::isfinite(v), ErrorKind::Format, "non-finite float sample in " + w.source_id);
        acc += v;
      }
    }
    w.samples[f] = channels == 1 ? acc : acc / channels;
  }
  double peak = 0.0;
  for (double s : w.samples) peak = std::max(peak, std::abs(s));
  if (peak > 1.0)
    for (double &s : w.samples) s /= peak;
  return w;
}

inline Waveform load_wav(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_wav(bytes, path.string());
}

inline std::string encode_wav(const Waveform &w, WavEncoding enc = WavEncoding::Pcm16) {
  const std::uint16_t bits = enc == WavEncoding::Pcm16 ? 16 : 32;
  const std::uint32_t data_len = static_cast<std::uint32_t>(w.samples.size() * (bits / 8));
  std::string out;
  out.reserve(44 + data_len);
  out += "RIFF";
  detail::put_u32(out, 36 + data_len);
  out += "WAVEfmt ";
  detail::put_u32(out, 16);
  detail::put_u16(out, enc == WavEncoding::Pcm16 ? 1 : 3);
  detail::put_u16(out, 1);
  detail::put_u32(out, static_cast<std::uint32_t>(w.sample_rate));
  detail::put_u32(out, static_cast<std::uint32_t>(w.sample_rate) * (bits / 8));
  detail::put_u16(out, bits / 8);
  detail::put_u16(out, bits);
  out += "data";
  detail::put_u32(out, data_len);
  for (double s : w.samples) {
    if (enc == WavEncoding::Pcm16) {
      const double q = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
      detail::put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    } else {
      detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(s)));
    }
  }
  return out;
}

inline void write_wav(const std::filesystem::path &path, const Waveform &w,
                      WavEncoding enc = WavEncoding::Pcm16) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot write " + path.string());
  const std::string bytes = encode_wav(w, enc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorKind::Io, "short write to " + path.string());
}

/// Time-scale by linear-interpolation resampling: output sample j is read
/// at input position j * factor, so duration shrinks by `factor` and every
/// frequency component is multiplied by it.
inline Waveform speed_perturb(const Waveform &w, double factor) {
  require(factor >= 0.5 && factor <= 2.0, ErrorKind::Parameter,
          "speed factor must lie in [0.5, 2.0], got " + std::to_string(factor));
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.source_id = w.source_id;
  const std::size_t n = w.samples.size();
  if (n == 0) return out;
  const std::size_t m = static_cast<std::size_t>(std::floor((n - 1) / factor)) + 1;
  out.samples.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double pos = j * factor;
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    if (i + 1 >= n || frac == 0.0) {
      out.samples[j] = w.samples[std::min(i, n - 1)];
    } else {
      out.samples[j] = (1.0 - frac) * w.samples[i] + frac * w.samples[i + 1];
    }
  }
  return out;
}

/// RMS level of each `frame_len`-sample block in dB; the trailing partial
/// block counts as a frame. Silent frames report -inf.
inline std::vector<double> frame_energies_db(const std::vector<double> &x, std::size_t frame_len) {
  std::vector<double> db;
  for (std::size_t start = 0; start < x.size(); start += frame_len) {
    const std::size_t end = std::min(x.size(), start + frame_len);
    double ss = 0.0;
    for (std::size_t i = start; i < end; ++i) ss += x[i] * x[i];
    const double rms = std::sqrt(ss / static_cast<double>(end - start));
    db.push_back(rms > 0.0 ? 20.0 * std::log10(rms) : -std::numeric_limits<double>::infinity());
  }
  return db;
}

/// Energy VAD. Drops every frame quieter than (loudest frame + floor_db);
/// the loudest frame always survives.
inline Waveform strip_silence(const Waveform &w, double frame_ms = 25.0, double energy_floor_db = -35.0) {
  require(frame_ms > 0.0, ErrorKind::Parameter, "frame_ms must be positive");
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.source_id = w.source_id;
  if (w.samples.empty()) return out;
  const auto frame_len = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(frame_ms * w.sample_rate / 1000.0)));
  const auto db = frame_energies_db(w.samples, frame_len);
  const auto loudest = static_cast<std::size_t>(std::max_element(db.begin(), db.end()) - db.begin());
  const double threshold = db[loudest] + energy_floor_db;

  auto copy_frame = [&](std::size_t f) {
    const std::size_t start = f * frame_len;
    const std::size_t end = std::min(w.samples.size(), start + frame_len);
    out.samples.insert(out.samples.end(), w.samples.begin() + static_cast<std::ptrdiff_t>(start),
                       w.samples.begin() + static_cast<std::ptrdiff_t>(end));
  };
  for (std::size_t f = 0; f < db.size(); ++f)
    if (std::isfinite(db[f]) && db[f] >= threshold) copy_frame(f);
  if (out.samples.empty()) copy_frame(loudest);
  return out;
}

}  // namespace stsb

#endif  // STSB_AUDIO_HPP
