// tools/stsb.cpp

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


// stsb: command-line front end.
//
//   stsb gen-corpus --out corpus
//   stsb extract    --manifest corpus/manifest.csv --out feats
//   stsb train      --features feats --out sbtb.ckpt
//   stsb assess     --model sbtb.ckpt --features feats --mode binary --out report
//   stsb embed      --model sb.ckpt --features feats --out sbe
//   stsb benchmark  --manifest corpus/manifest.csv --sbe sbe --configs si,sbe,sbe-lhuc --out table
//   stsb grad-check
//
// Exit status: 0 success, 1 run failure, 2 configuration or usage error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/cfg/env.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "stsb/stsb.hpp"

namespace fs = std::filesystem;
using namespace stsb;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

struct Common {
  std::string config_file;
  std::vector<std::string> overrides;
  int jobs = 1;
};

PipelineConfig load_pipeline_config(const Common &c) {
  PipelineConfig cfg = c.config_file.empty() ? PipelineConfig{} : load_config(c.config_file);
  apply_overrides(cfg, c.overrides);
  cfg.validate();
  return cfg;
}

std::vector<std::string> split_blocks(const std::string &s) { return detail::split_list(s); }

std::vector<UtteranceFeature> select_blocks(const std::vector<UtteranceFeature> &all, const std::string &blocks) {
  const auto keep = split_blocks(blocks);
  std::vector<UtteranceFeature> out;
  for (const auto &f : all)
    if (keep.empty() || std::find(keep.begin(), keep.end(), f.meta.block_id) != keep.end()) out.push_back(f);
  require(!out.empty(), ErrorKind::Data, "no features in blocks " + blocks);
  return out;
}

void write_text(const fs::path &path, const std::string &text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file(path, text);
}

void write_config_snapshot(const fs::path &path, const PipelineConfig &cfg) { write_text(path, format_config(cfg)); }

// --- gen-corpus --------------------------------------------------------------

int cmd_gen_corpus(const Common &common, const std::string &out, const std::string &profiles_csv) {
  const PipelineConfig cfg = load_pipeline_config(common);
  std::vector<synth::SpeakerProfile> profiles;
  if (profiles_csv.empty()) {
    profiles = synth::default_profiles(cfg.corpus_seed, cfg.corpus_variant);
  } else {
    std::ifstream in(profiles_csv);
    require(static_cast<bool>(in), ErrorKind::Io, "cannot open " + profiles_csv);
    profiles = synth::parse_profiles(in, profiles_csv);
  }
  const auto vocab = synth::default_vocabulary(cfg.corpus_vocabulary);
  const auto t0 = std::chrono::steady_clock::now();
  const auto utts = synth::generate_corpus(profiles, vocab, corpus_config(cfg));
  const auto rows = synth::write_corpus(out, utts, profiles);
  write_config_snapshot(fs::path(out) / "config.txt", cfg);
  spdlog::info("wrote {} utterances from {} speakers to {} in {:.1f} s", rows.size(), profiles.size(), out,
               std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return 0;
}

// --- extract -----------------------------------------------------------------

int cmd_extract(const Common &common, const std::string &manifest, const std::string &out) {
  const PipelineConfig cfg = load_pipeline_config(common);
  const auto rows = read_manifest(manifest);
  fs::create_directories(out);

  struct Slot {
    std::optional<UtteranceFeature> feature;
    std::string error;
  };
  std::vector<Slot> slots(rows.size());
  parallel_for(rows.size(), common.jobs, [&](std::size_t i) {
    try {
      const Waveform w = load_wav(resolve_row_path(manifest, rows[i]));
      slots[i].feature = extract_feature(w, rows[i].meta, cfg.extract);
    } catch (const Error &e) {
      slots[i].error = e.what();
    }
  });

  nlohmann::json summary;
  summary["manifest"] = manifest;
  summary["rows"] = rows.size();
  summary["features"] = nlohmann::json::array();
  summary["failures"] = nlohmann::json::array();
  std::set<std::string> used;
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!slots[i].feature) {
      ++skipped;
      spdlog::warn("skipping {}: {}", rows[i].path, slots[i].error);
      summary["failures"].push_back({{"path", rows[i].path}, {"error", slots[i].error}});
      continue;
    }
    std::string stem = fs::path(rows[i].path).stem().string();
    for (int k = 1; used.count(stem); ++k) stem = fs::path(rows[i].path).stem().string() + "_" + std::to_string(k);
    used.insert(stem);
    save_feature(fs::path(out) / stem, *slots[i].feature);
    summary["features"].push_back(stem);
  }
  summary["count"] = rows.size() - skipped;
  summary["skipped"] = skipped;
  summary["feature_dim"] = cfg.extract.subspace.feature_dim(cfg.extract.front_end.num_channels);
  write_text(fs::path(out) / "summary.json", summary.dump(2) + "\n");
  write_config_snapshot(fs::path(out) / "config.txt", cfg);
  spdlog::info("extracted {} of {} utterances into {}", rows.size() - skipped, rows.size(), out);
  if (skipped * 100 > rows.size()) {
    spdlog::error("{} of {} rows skipped (more than 1%)", skipped, rows.size());
    return kExitFailure;
  }
  return 0;
}

// --- train / assess / embed ---------------------------------------------------

int cmd_train(const Common &common, const std::string &features, const std::string &blocks, const std::string &out) {
  const PipelineConfig cfg = load_pipeline_config(common);
  const auto feats = select_blocks(load_feature_set(features), blocks);
  spdlog::info("training {} classifier ({}) on {} utterances", to_string(cfg.classifier.input),
               to_string(cfg.classifier.labels), feats.size());
  const Classifier clf =
      train_classifier(feats, cfg.classifier, stage_seed(cfg.seed, "train"), [](int e, double tr, double va) {
        spdlog::debug("epoch {:3d}  train {:.4f}  held-out {:.4f}", e, tr, va);
      });
  spdlog::info("stopped after {} epochs; best epoch {} (held-out loss {:.4f})", clf.log.epochs_run,
               clf.log.best_epoch, clf.log.best_val_loss);
  if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
  save_checkpoint(out, to_checkpoint(clf));
  nlohmann::json log{{"epochs_run", clf.log.epochs_run},
                     {"best_epoch", clf.log.best_epoch},
                     {"best_val_loss", clf.log.best_val_loss},
                     {"train_loss", clf.log.train_loss},
                     {"val_loss", clf.log.val_loss}};
  write_text(out + ".log.json", log.dump(2) + "\n");
  return 0;
}

int cmd_assess(const Common &common, const std::string &model, const std::string &features,
               const std::string &blocks, const std::string &mode, const std::string &out) {
  (void)load_pipeline_config(common);
  const Classifier clf = classifier_from_checkpoint(load_checkpoint(model));
  const auto feats = select_blocks(load_feature_set(features), blocks);
  const auto report = assess(clf, feats, parse_assess_mode(mode));
  const std::string csv = std::string(kAssessmentCsvHeader) + "\n" + assessment_csv_row(report) + "\n";
  std::cout << csv;
  if (!out.empty()) {
    write_text(out + ".csv", csv);
    write_text(out + ".json", to_json(report).dump(2) + "\n");
  }
  return 0;
}

int cmd_embed(const Common &common, const std::string &model, const std::string &features, const std::string &blocks,
              const std::string &out) {
  (void)load_pipeline_config(common);
  const Classifier clf = classifier_from_checkpoint(load_checkpoint(model));
  const auto emb = extract_embeddings(clf, select_blocks(load_feature_set(features), blocks));
  if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
  save_embeddings(out, emb);
  spdlog::info("wrote {} speaker embeddings of dimension {}", emb.size(), emb.empty() ? 0 : emb.front().vector.size());
  return 0;
}

// --- benchmark ---------------------------------------------------------------

int cmd_benchmark(const Common &common, const std::string &manifest, const std::string &sbe, const std::string &tbe,
                  const std::string &sbetbe, const std::string &out) {
  const PipelineConfig cfg = load_pipeline_config(common);
  BenchmarkOptions opt = benchmark_options(cfg, common.jobs);

  EmbeddingSets sets;
  const std::pair<AuxFeature, std::string> sources[] = {
      {AuxFeature::SBE, sbe}, {AuxFeature::TBE, tbe}, {AuxFeature::SBETBE, sbetbe}};
  for (const auto &[aux, stem] : sources)
    if (!stem.empty()) sets[aux] = load_embeddings(stem);
  for (const auto &c : opt.configs)
    require(c.aux == AuxFeature::None || sets.count(c.aux), ErrorKind::Config,
            "benchmark config '" + c.name + "' needs --" +
                (c.aux == AuxFeature::SBE ? std::string("sbe") : c.aux == AuxFeature::TBE ? "tbe" : "sbe-tbe") +
                " embeddings");

  const auto rows = read_manifest(manifest);
  std::vector<FrameUtterance> corpus(rows.size());
  parallel_for(rows.size(), common.jobs, [&](std::size_t i) {
    corpus[i].meta = rows[i].meta;
    corpus[i].frames = extract_acoustic(load_wav(resolve_row_path(manifest, rows[i])), cfg.extract).values.cast<float>();
  });
  spdlog::info("running {} configs x {} seeds on {} utterances", opt.configs.size(), opt.seeds.size(), corpus.size());
  const auto t0 = std::chrono::steady_clock::now();
  const auto result = run_benchmark(corpus, sets, opt);
  spdlog::info("benchmark finished in {:.1f} s",
               std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  const std::string csv = benchmark_csv(result);
  std::cout << csv;
  if (!out.empty()) {
    write_text(out + ".csv", csv);
    write_text(out + ".json", to_json(result).dump(2) + "\n");
  }
  return 0;
}

// --- grad-check --------------------------------------------------------------

int cmd_grad_check(const Common &common, bool quick, double tolerance) {
  const PipelineConfig cfg = load_pipeline_config(common);
  bool ok = true;
  std::printf("%-18s %10s %12s\n", "case", "tensors", "max rel err");
  for (const auto &c : grad_check_suite(cfg.seed, !quick)) {
    const bool pass = c.report.max_rel_error <= tolerance;
    ok = ok && pass;
    std::printf("%-18s %10zu %12.3e %s\n", c.name.c_str(), c.report.entries.size(), c.report.max_rel_error,
                pass ? "ok" : "FAIL");
  }
  return ok ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char **argv) {
  auto logger = spdlog::stderr_color_mt("stsb");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");
  spdlog::cfg::load_env_levels();

  CLI::App app{"Spectro-temporal subspace features, intelligibility assessment and speaker adaptation"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config_file, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--set", common.overrides, "override one config key (key=value); repeatable");
  app.add_option("--jobs,-j", common.jobs, "worker threads for per-utterance stages (0: all cores)")
      ->check(CLI::NonNegativeNumber);

  std::string out, manifest, features, model, blocks, mode = "5-way", profiles, sbe, tbe, sbetbe, input, labels,
                                                      configs;
  bool quick = false;
  double tolerance = 1e-4;

  auto *gen = app.add_subcommand("gen-corpus", "synthesize the multi-speaker word corpus");
  gen->add_option("--out", out, "output directory")->required();
  gen->add_option("--profiles", profiles, "speaker profile CSV (default: built-in 29 speakers)");

  auto *ext = app.add_subcommand("extract", "compute utterance features for a manifest");
  ext->add_option("--manifest", manifest, "manifest CSV")->required()->check(CLI::ExistingFile);
  ext->add_option("--out", out, "output directory")->required();

  auto *train = app.add_subcommand("train", "train the intelligibility classifier");
  train->add_option("--features", features, "feature directory from extract")->required();
  train->add_option("--out", out, "checkpoint path")->required();
  train->add_option("--blocks", blocks, "comma-separated training blocks")->default_val("B1,B3");
  train->add_option("--input", input, "SB, TB or SB+TB (classifier.input)");
  train->add_option("--labels", labels, "intel or intel+spk (classifier.labels)");

  auto *as = app.add_subcommand("assess", "score a classifier on held-out features");
  as->add_option("--model", model, "checkpoint")->required()->check(CLI::ExistingFile);
  as->add_option("--features", features, "feature directory")->required();
  as->add_option("--blocks", blocks, "comma-separated test blocks")->default_val("B2");
  as->add_option("--mode", mode, "5-way or binary")->default_val("5-way");
  as->add_option("--out", out, "report prefix (.csv and .json)");

  auto *emb = app.add_subcommand("embed", "average bottleneck activations per speaker");
  emb->add_option("--model", model, "checkpoint")->required()->check(CLI::ExistingFile);
  emb->add_option("--features", features, "feature directory")->required();
  emb->add_option("--blocks", blocks, "comma-separated blocks to average over")->default_val("B1,B3");
  emb->add_option("--out", out, "embedding stem (.stbf and .json)")->required();

  auto *bench = app.add_subcommand("benchmark", "compare adaptation configurations on the word task");
  bench->add_option("--manifest", manifest, "manifest CSV")->required()->check(CLI::ExistingFile);
  bench->add_option("--sbe", sbe, "spectral embedding stem");
  bench->add_option("--tbe", tbe, "temporal embedding stem");
  bench->add_option("--sbe-tbe", sbetbe, "joint embedding stem");
  bench->add_option("--configs", configs, "comma-separated configs (benchmark.configs)");
  bench->add_option("--out", out, "table prefix (.csv and .json)");

  auto *gc = app.add_subcommand("grad-check", "finite-difference gradient checks");
  gc->add_flag("--quick", quick, "skip the full-size classifier");
  gc->add_option("--tolerance", tolerance, "maximum relative error")->default_val(1e-4);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (!input.empty()) common.overrides.push_back("classifier.input=" + input);
  if (!labels.empty()) common.overrides.push_back("classifier.labels=" + labels);
  if (!configs.empty()) common.overrides.push_back("benchmark.configs=" + configs);

  try {
    if (*gen) return cmd_gen_corpus(common, out, profiles);
    if (*ext) return cmd_extract(common, manifest, out);
    if (*train) return cmd_train(common, features, blocks, out);
    if (*as) return cmd_assess(common, model, features, blocks, mode, out);
    if (*emb) return cmd_embed(common, model, features, blocks, out);
    if (*bench) return cmd_benchmark(common, manifest, sbe, tbe, sbetbe, out);
    if (*gc) return cmd_grad_check(common, quick, tolerance);
  } catch (const Error &e) {
    spdlog::error("{}", e.what());
    return e.kind() == ErrorKind::Config || e.kind() == ErrorKind::Shape ? kExitConfig : kExitFailure;
  } catch (const std::exception &e) {
    spdlog::error("{}", e.what());
    return kExitFailure;
  }
  return kExitFailure;
}
