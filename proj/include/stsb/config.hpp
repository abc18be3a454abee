// stsb/config.hpp

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


#ifndef STSB_CONFIG_HPP
#define STSB_CONFIG_HPP

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "stsb/adapt.hpp"
#include "stsb/classifier.hpp"
#include "stsb/pipeline.hpp"
#include "stsb/synth.hpp"

namespace stsb {

/// Everything a pipeline run depends on. Stored as a UTF-8 key = value
/// file with dotted keys; '#' starts a comment.
struct PipelineConfig {
  std::uint64_t seed = 1;
  ExtractOptions extract;
  ClassifierConfig classifier;
  WordModelConfig word;
  std::vector<std::string> benchmark_configs{"si", "sbe", "sbe-tbe", "sbe-lhuc", "zero-sbe"};
  int benchmark_seeds = 5;
  synth::CorpusVariant corpus_variant = synth::CorpusVariant::Default;
  std::uint64_t corpus_seed = synth::kBundledCorpusSeed;
  int corpus_blocks = 3;
  int corpus_n_per_word = 2;
  int corpus_vocabulary = 20;

  void validate() const;
};

namespace detail {

template <class T>
T parse_number(const std::string &key, const std::string &v) {
  T out{};
  const char *end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (r.ec != std::errc() || r.ptr != end)
    fail(ErrorKind::Config, key + ": cannot parse '" + v + "' as a number");
  return out;
}

inline bool parse_bool(const std::string &key, const std::string &v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(ErrorKind::Config, key + ": expected true or false, got '" + v + "'");
}

inline std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_list(const std::string &v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct ConfigField {
  std::function<void(PipelineConfig &, const std::string &)> set;
  std::function<std::string(const PipelineConfig &)> get;
};

template <class T>
ConfigField number_field(const std::string &key, T PipelineConfig::*m) {
  return {[key, m](PipelineConfig &c, const std::string &v) { c.*m = parse_number<T>(key, v); },
          [m](const PipelineConfig &c) { return std::to_string(c.*m); }};
}

// Member of a nested struct reached through `path`.
template <class S, class T>
ConfigField nested_field(const std::string &key, std::function<S &(PipelineConfig &)> path, T S::*m) {
  auto cpath = [path](const PipelineConfig &c) -> const S & { return path(const_cast<PipelineConfig &>(c)); };
  ConfigField f;
  if constexpr (std::is_same_v<T, bool>) {
    f.set = [key, path, m](PipelineConfig &c, const std::string &v) { path(c).*m = parse_bool(key, v); };
    f.get = [cpath, m](const PipelineConfig &c) { return std::string(cpath(c).*m ? "true" : "false"); };
  } else if constexpr (std::is_floating_point_v<T>) {
    f.set = [key, path, m](PipelineConfig &c, const std::string &v) { path(c).*m = parse_number<T>(key, v); };
    f.get = [cpath, m](const PipelineConfig &c) { return format_double(cpath(c).*m); };
  } else {
    f.set = [key, path, m](PipelineConfig &c, const std::string &v) { path(c).*m = parse_number<T>(key, v); };
    f.get = [cpath, m](const PipelineConfig &c) { return std::to_string(cpath(c).*m); };
  }
  return f;
}

inline const std::map<std::string, ConfigField> &config_fields() {
  static const std::map<std::string, ConfigField> fields = [] {
    std::map<std::string, ConfigField> f;
    std::function<FrontEndConfig &(PipelineConfig &)> fe = [](PipelineConfig &c) -> FrontEndConfig & {
      return c.extract.front_end;
    };
    std::function<SubspaceConfig &(PipelineConfig &)> sub = [](PipelineConfig &c) -> SubspaceConfig & {
      return c.extract.subspace;
    };
    std::function<ExtractOptions &(PipelineConfig &)> ex = [](PipelineConfig &c) -> ExtractOptions & {
      return c.extract;
    };
    std::function<ClassifierConfig &(PipelineConfig &)> cl = [](PipelineConfig &c) -> ClassifierConfig & {
      return c.classifier;
    };
    std::function<WordModelConfig &(PipelineConfig &)> wm = [](PipelineConfig &c) -> WordModelConfig & {
      return c.word;
    };

    f["seed"] = number_field("seed", &PipelineConfig::seed);
    f["front_end.num_channels"] = nested_field("front_end.num_channels", fe, &FrontEndConfig::num_channels);
    f["front_end.frame_length_ms"] = nested_field("front_end.frame_length_ms", fe, &FrontEndConfig::frame_length_ms);
    f["front_end.frame_shift_ms"] = nested_field("front_end.frame_shift_ms", fe, &FrontEndConfig::frame_shift_ms);
    f["front_end.fft_size"] = nested_field("front_end.fft_size", fe, &FrontEndConfig::fft_size);
    f["front_end.amplitude_floor"] = nested_field("front_end.amplitude_floor", fe, &FrontEndConfig::amplitude_floor);
    f["vad.enabled"] = nested_field("vad.enabled", ex, &ExtractOptions::strip_silence);
    f["vad.frame_ms"] = nested_field("vad.frame_ms", ex, &ExtractOptions::vad_frame_ms);
    f["vad.energy_floor_db"] = nested_field("vad.energy_floor_db", ex, &ExtractOptions::vad_floor_db);
    f["subspace.spectral_bases"] = nested_field("subspace.spectral_bases", sub, &SubspaceConfig::spectral_bases);
    f["subspace.temporal_bases"] = nested_field("subspace.temporal_bases", sub, &SubspaceConfig::temporal_bases);
    f["subspace.window"] = nested_field("subspace.window", sub, &SubspaceConfig::window);
    f["subspace.stride"] = nested_field("subspace.stride", sub, &SubspaceConfig::stride);

    f["classifier.input"] = {
        [](PipelineConfig &c, const std::string &v) { c.classifier.input = parse_input_config(v); },
        [](const PipelineConfig &c) { return std::string(to_string(c.classifier.input)); }};
    f["classifier.labels"] = {
        [](PipelineConfig &c, const std::string &v) { c.classifier.labels = parse_label_config(v); },
        [](const PipelineConfig &c) { return std::string(to_string(c.classifier.labels)); }};
    f["classifier.hidden_dim"] = nested_field("classifier.hidden_dim", cl, &ClassifierConfig::hidden_dim);
    f["classifier.projection_dim"] = nested_field("classifier.projection_dim", cl, &ClassifierConfig::projection_dim);
    f["classifier.bottleneck_dim"] = nested_field("classifier.bottleneck_dim", cl, &ClassifierConfig::bottleneck_dim);
    f["classifier.dropout"] = nested_field("classifier.dropout", cl, &ClassifierConfig::dropout);
    f["classifier.intel_weight"] = nested_field("classifier.intel_weight", cl, &ClassifierConfig::intel_weight);
    f["classifier.batch_size"] = nested_field("classifier.batch_size", cl, &ClassifierConfig::batch_size);
    f["classifier.learning_rate"] = nested_field("classifier.learning_rate", cl, &ClassifierConfig::learning_rate);
    f["classifier.momentum"] = nested_field("classifier.momentum", cl, &ClassifierConfig::momentum);
    f["classifier.l2"] = nested_field("classifier.l2", cl, &ClassifierConfig::l2);
    f["classifier.max_epochs"] = nested_field("classifier.max_epochs", cl, &ClassifierConfig::max_epochs);
    f["classifier.patience"] = nested_field("classifier.patience", cl, &ClassifierConfig::patience);
    f["classifier.holdout_fraction"] =
        nested_field("classifier.holdout_fraction", cl, &ClassifierConfig::holdout_fraction);

    f["word.hidden_dim"] = nested_field("word.hidden_dim", wm, &WordModelConfig::hidden_dim);
    f["word.hidden_layers"] = nested_field("word.hidden_layers", wm, &WordModelConfig::hidden_layers);
    f["word.dropout"] = nested_field("word.dropout", wm, &WordModelConfig::dropout);
    f["word.batch_size"] = nested_field("word.batch_size", wm, &WordModelConfig::batch_size);
    f["word.learning_rate"] = nested_field("word.learning_rate", wm, &WordModelConfig::learning_rate);
    f["word.momentum"] = nested_field("word.momentum", wm, &WordModelConfig::momentum);
    f["word.l2"] = nested_field("word.l2", wm, &WordModelConfig::l2);
    f["word.epochs"] = nested_field("word.epochs", wm, &WordModelConfig::epochs);
    f["word.frames_per_utterance"] =
        nested_field("word.frames_per_utterance", wm, &WordModelConfig::frames_per_utterance);
    f["word.adapt_epochs"] = nested_field("word.adapt_epochs", wm, &WordModelConfig::adapt_epochs);
    f["word.adapt_learning_rate"] =
        nested_field("word.adapt_learning_rate", wm, &WordModelConfig::adapt_learning_rate);

    f["benchmark.configs"] = {
        [](PipelineConfig &c, const std::string &v) { c.benchmark_configs = split_list(v); },
        [](const PipelineConfig &c) {
          std::string s;
          for (const auto &x : c.benchmark_configs) s += (s.empty() ? "" : ",") + x;
          return s;
        }};
    f["benchmark.seeds"] = number_field("benchmark.seeds", &PipelineConfig::benchmark_seeds);

    f["corpus.variant"] = {
        [](PipelineConfig &c, const std::string &v) { c.corpus_variant = synth::parse_variant(v); },
        [](const PipelineConfig &c) { return std::string(synth::to_string(c.corpus_variant)); }};
    f["corpus.seed"] = number_field("corpus.seed", &PipelineConfig::corpus_seed);
    f["corpus.blocks"] = number_field("corpus.blocks", &PipelineConfig::corpus_blocks);
    f["corpus.n_per_word"] = number_field("corpus.n_per_word", &PipelineConfig::corpus_n_per_word);
    f["corpus.vocabulary"] = number_field("corpus.vocabulary", &PipelineConfig::corpus_vocabulary);
    return f;
  }();
  return fields;
}

}  // namespace detail

inline void PipelineConfig::validate() const {
  extract.validate();
  classifier.validate();
  word.validate();
  require(!benchmark_configs.empty(), ErrorKind::Config, "benchmark.configs must name at least one config");
  for (const auto &c : benchmark_configs) (void)parse_adaptation_config(c);
  require(benchmark_seeds >= 3, ErrorKind::Config, "benchmark.seeds must be >= 3");
  require(corpus_blocks >= 2, ErrorKind::Config, "corpus.blocks must be >= 2");
  require(corpus_n_per_word >= 1, ErrorKind::Config, "corpus.n_per_word must be >= 1");
  require(corpus_vocabulary >= 2, ErrorKind::Config, "corpus.vocabulary must be >= 2");
}

/// Sets one dotted key. Unknown keys and malformed values raise a config
/// error naming the key.
inline void set_config_value(PipelineConfig &c, const std::string &key, const std::string &value) {
  const auto &fields = detail::config_fields();
  auto it = fields.find(key);
  require(it != fields.end(), ErrorKind::Config, "unknown config key '" + key + "'");
  try {
    it->second.set(c, value);
  } catch (const Error &e) {
    if (e.kind() != ErrorKind::Config) throw;
    const std::string msg = e.what();
    if (msg.find(key) != std::string::npos) throw;
    fail(ErrorKind::Config, key + ": " + msg);
  }
}

/// Applies "key=value" assignments in order; later ones win.
inline void apply_overrides(PipelineConfig &c, const std::vector<std::string> &assignments) {
  for (const auto &a : assignments) {
    const auto eq = a.find('=');
    require(eq != std::string::npos, ErrorKind::Config, "override '" + a + "' is not key=value");
    set_config_value(c, detail::trim(a.substr(0, eq)), detail::trim(a.substr(eq + 1)));
  }
}

inline PipelineConfig parse_config(std::istream &in, const std::string &name = "config") {
  PipelineConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorKind::Config,
            name + ":" + std::to_string(lineno) + ": expected key = value");
    set_config_value(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return c;
}

inline PipelineConfig load_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open config " + path.string());
  return parse_config(in, path.string());
}

/// Every key with its current value, sorted; parse_config reads it back.
inline std::string format_config(const PipelineConfig &c) {
  std::string s;
  for (const auto &[key, field] : detail::config_fields()) s += key + " = " + field.get(c) + "\n";
  return s;
}

inline synth::CorpusConfig corpus_config(const PipelineConfig &c) {
  synth::CorpusConfig cc;
  cc.seed = c.corpus_seed;
  cc.blocks = c.corpus_blocks;
  cc.n_per_word = c.corpus_n_per_word;
  return cc;
}

inline BenchmarkOptions benchmark_options(const PipelineConfig &c, int jobs) {
  BenchmarkOptions o;
  for (const auto &name : c.benchmark_configs) o.configs.push_back(parse_adaptation_config(name));
  o.seeds.clear();
  for (int i = 0; i < c.benchmark_seeds; ++i) o.seeds.push_back(stage_seed(c.seed, "benchmark." + std::to_string(i)));
  o.model = c.word;
  o.jobs = jobs;
  return o;
}

}  // namespace stsb

#endif  // STSB_CONFIG_HPP
