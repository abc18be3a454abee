// stsb/pipeline.hpp

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

#ifndef STSB_PIPELINE_HPP
#define STSB_PIPELINE_HPP

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "stsb/audio.hpp"
#include "stsb/error.hpp"
#include "stsb/spectrogram.hpp"
#include "stsb/stbf.hpp"
#include "stsb/subspace.hpp"
#include "stsb/types.hpp"

namespace stsb {

/// Runs fn(i) for i in [0, n) on `jobs` threads (0: one per hardware
/// thread). Each index is handled
/// exactly once; callers write results into slot i, so the output does not
/// depend on scheduling. The first exception is rethrown after all workers
/// stop.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)> &fn) {
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || stop.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        stop = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto &t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct ExtractOptions {
  FrontEndConfig front_end;
  SubspaceConfig subspace;
  bool strip_silence = true;
  double vad_frame_ms = 25.0;
  double vad_floor_db = -35.0;

  void validate() const {
    subspace.validate();
    require(front_end.num_channels >= 2, ErrorKind::Config, "num_channels must be >= 2");
    require(front_end.frame_length_ms > 0.0, ErrorKind::Config, "frame_length_ms must be positive");
    require(front_end.frame_shift_ms > 0.0, ErrorKind::Config, "frame_shift_ms must be positive");
    require(front_end.amplitude_floor > 0.0, ErrorKind::Config, "amplitude_floor must be positive");
    require(front_end.fft_size == 0 || std::has_single_bit(static_cast<unsigned>(front_end.fft_size)),
            ErrorKind::Config, "fft_size must be 0 or a power of two");
    require(subspace.spectral_bases <= front_end.num_channels, ErrorKind::Config,
            "spectral_bases exceeds num_channels");
    require(vad_frame_ms > 0.0, ErrorKind::Config, "vad_frame_ms must be positive");
  }
};

inline Waveform preprocess(const Waveform &w, const ExtractOptions &opt) {
  return opt.strip_silence ? strip_silence(w, opt.vad_frame_ms, opt.vad_floor_db) : w;
}

inline UtteranceFeature extract_feature(const Waveform &w, const UtteranceMeta &meta, const ExtractOptions &opt) {
  return utterance_feature(mel_spectrogram(preprocess(w, opt), opt.front_end), opt.subspace, meta);
}

inline AcousticFeatures extract_acoustic(const Waveform &w, const ExtractOptions &opt) {
  return fbank_delta(mel_spectrogram(preprocess(w, opt), opt.front_end));
}

inline nlohmann::json meta_to_json(const UtteranceMeta &m) {
  return {{"speaker_id", m.speaker_id},
          {"block_id", m.block_id},
          {"word_id", m.word_id},
          {"intelligibility", std::string(to_string(m.intelligibility))}};
}

inline UtteranceMeta meta_from_json(const nlohmann::json &j) {
  UtteranceMeta m;
  m.speaker_id = j.at("speaker_id").get<std::string>();
  m.block_id = j.at("block_id").get<std::string>();
  m.word_id = j.at("word_id").get<std::string>();
  const auto g = parse_intelligibility(j.at("intelligibility").get<std::string>());
  require(g.has_value(), ErrorKind::Format, "bad intelligibility in sidecar");
  m.intelligibility = *g;
  return m;
}

/// <stem>.stbf holds the concatenated vector (f64); <stem>.json describes it.
inline void save_feature(const std::filesystem::path &stem, const UtteranceFeature &f) {
  const VectorXd v = f.concatenated();
  write_stbf(stem.string() + ".stbf", StbfArray::from_vector(std::vector<double>(v.data(), v.data() + v.size())));
  nlohmann::json j = meta_to_json(f.meta);
  j["spectral_dim"] = f.spectral.size();
  j["temporal_dim"] = f.temporal.size();
  j["spectral_bases"] = f.spectral_bases;
  j["temporal_bases"] = f.temporal_bases;
  j["window"] = f.window;
  j["temporal_padded"] = f.temporal_padded;
  write_file(stem.string() + ".json", j.dump(2) + "\n");
}

inline UtteranceFeature load_feature(const std::filesystem::path &stem) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(stem.string() + ".json"));
  } catch (const nlohmann::json::exception &e) {
    fail(ErrorKind::Format, stem.string() + ".json: " + e.what());
  }
  const auto v = read_stbf(stem.string() + ".stbf").values<double>();
  UtteranceFeature f;
  f.meta = meta_from_json(j);
  const auto ns = j.at("spectral_dim").get<std::size_t>(), nt = j.at("temporal_dim").get<std::size_t>();
  require(v.size() == ns + nt, ErrorKind::Format, stem.string() + ": feature length disagrees with sidecar");
  f.spectral = Eigen::Map<const VectorXd>(v.data(), static_cast<Index>(ns));
  f.temporal = Eigen::Map<const VectorXd>(v.data() + ns, static_cast<Index>(nt));
  f.spectral_bases = j.at("spectral_bases").get<int>();
  f.temporal_bases = j.at("temporal_bases").get<int>();
  f.window = j.at("window").get<int>();
  f.temporal_padded = j.value("temporal_padded", false);
  return f;
}

/// Loads every feature listed in <dir>/summary.json.
inline std::vector<UtteranceFeature> load_feature_set(const std::filesystem::path &dir) {
  nlohmann::json s;
  try {
    s = nlohmann::json::parse(read_file(dir / "summary.json"));
  } catch (const nlohmann::json::exception &e) {
    fail(ErrorKind::Format, (dir / "summary.json").string() + ": " + e.what());
  }
  std::vector<UtteranceFeature> out;
  for (const auto &name : s.at("features")) out.push_back(load_feature(dir / name.get<std::string>()));
  return out;
}

}  // namespace stsb

#endif  // STSB_PIPELINE_HPP
