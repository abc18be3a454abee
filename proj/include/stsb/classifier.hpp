// stsb/classifier.hpp

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

#ifndef STSB_CLASSIFIER_HPP
#define STSB_CLASSIFIER_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "stsb/error.hpp"
#include "stsb/neural/network.hpp"
#include "stsb/neural/spec.hpp"
#include "stsb/neural/train.hpp"
#include "stsb/random.hpp"
#include "stsb/stbf.hpp"
#include "stsb/subspace.hpp"
#include "stsb/types.hpp"

namespace stsb {

enum class InputConfig { SB, TB, SBTB };
enum class LabelConfig { IntelOnly, IntelSpk };
enum class AssessMode { FiveWay, Binary };

inline std::string_view to_string(InputConfig c) {
  switch (c) {
    case InputConfig::SB: return "SB";
    case InputConfig::TB: return "TB";
    case InputConfig::SBTB: return "SB+TB";
  }
  return "?";
}

inline InputConfig parse_input_config(std::string_view s) {
  if (s == "SB" || s == "sb") return InputConfig::SB;
  if (s == "TB" || s == "tb") return InputConfig::TB;
  if (s == "SB+TB" || s == "sb+tb" || s == "SBTB" || s == "sbtb") return InputConfig::SBTB;
  fail(ErrorKind::Config, "input must be SB, TB or SB+TB, got '" + std::string(s) + "'");
}

inline std::string_view to_string(LabelConfig c) { return c == LabelConfig::IntelOnly ? "intel" : "intel+spk"; }

inline LabelConfig parse_label_config(std::string_view s) {
  if (s == "intel") return LabelConfig::IntelOnly;
  if (s == "intel+spk") return LabelConfig::IntelSpk;
  fail(ErrorKind::Config, "labels must be intel or intel+spk, got '" + std::string(s) + "'");
}

inline std::string_view to_string(AssessMode m) { return m == AssessMode::FiveWay ? "5-way" : "binary"; }

inline AssessMode parse_assess_mode(std::string_view s) {
  if (s == "5-way" || s == "five-way" || s == "5way") return AssessMode::FiveWay;
  if (s == "binary") return AssessMode::Binary;
  fail(ErrorKind::Config, "mode must be 5-way or binary, got '" + std::string(s) + "'");
}

struct ClassifierConfig {
  int hidden_dim = 2000;
  int projection_dim = 512;  // linear bottleneck into hidden layers 2 and 3
  int bottleneck_dim = 25;
  double dropout = 0.2;
  InputConfig input = InputConfig::SBTB;
  LabelConfig labels = LabelConfig::IntelSpk;
  double intel_weight = 0.5;  // speaker head gets 1 - intel_weight
  int batch_size = 64;
  double learning_rate = 0.01;
  double momentum = 0.9;
  double l2 = 0.0;
  int max_epochs = 100;
  int patience = 10;
  double holdout_fraction = 0.1;

  void validate() const {
    require(hidden_dim >= 1, ErrorKind::Config, "classifier.hidden_dim must be >= 1");
    require(projection_dim >= 1 && projection_dim < hidden_dim, ErrorKind::Config,
            "classifier.projection_dim must lie in [1, hidden_dim)");
    require(bottleneck_dim >= 1, ErrorKind::Config, "classifier.bottleneck_dim must be >= 1");
    require(dropout >= 0.0 && dropout < 1.0, ErrorKind::Config, "classifier.dropout must lie in [0, 1)");
    require(intel_weight > 0.0 && intel_weight <= 1.0, ErrorKind::Config,
            "classifier.intel_weight must lie in (0, 1]");
    require(batch_size >= 2, ErrorKind::Config, "classifier.batch_size must be >= 2");
    require(learning_rate > 0.0, ErrorKind::Config, "classifier.learning_rate must be positive");
    require(momentum >= 0.0 && momentum < 1.0, ErrorKind::Config, "classifier.momentum must lie in [0, 1)");
    require(l2 >= 0.0, ErrorKind::Config, "classifier.l2 must be >= 0");
    require(max_epochs >= 1, ErrorKind::Config, "classifier.max_epochs must be >= 1");
    require(patience >= 1, ErrorKind::Config, "classifier.patience must be >= 1");
    require(holdout_fraction >= 0.0 && holdout_fraction < 0.5, ErrorKind::Config,
            "classifier.holdout_fraction must lie in [0, 0.5)");
  }
};

/// Four hidden layers (hidden, hidden, hidden, bottleneck). Dropout follows
/// the first three; hidden layers 2 and 3 read their input through a linear
/// projection; the output of layer 1 is added to that of layer 3. The trunk
/// ends at the bottleneck, after its ReLU and batchnorm.
inline nn::NetworkSpec classifier_spec(Index input_dim, int n_speakers, const ClassifierConfig &cfg) {
  using nn::LayerSpec;
  const Index h = cfg.hidden_dim, p = cfg.projection_dim, b = cfg.bottleneck_dim;
  nn::NetworkSpec s;
  s.input_dim = input_dim;
  auto &t = s.trunk;
  t = {LayerSpec::affine(input_dim, h), LayerSpec::relu(h), LayerSpec::batch_norm(h)};
  const int layer1_out = static_cast<int>(t.size()) - 1;
  t.push_back(LayerSpec::dropout(h, cfg.dropout));
  for (int layer = 2; layer <= 3; ++layer) {
    t.push_back(LayerSpec::bottleneck(h, p));
    t.push_back(LayerSpec::affine(p, h));
    t.push_back(LayerSpec::relu(h));
    t.push_back(LayerSpec::batch_norm(h));
    if (layer == 3) t.push_back(LayerSpec::skip(h, layer1_out));
    t.push_back(LayerSpec::dropout(h, cfg.dropout));
  }
  t.push_back(LayerSpec::affine(h, b));
  t.push_back(LayerSpec::relu(b));
  t.push_back(LayerSpec::batch_norm(b));
  s.heads.push_back({"intel", {LayerSpec::affine(b, kNumGroups), LayerSpec::softmax(kNumGroups)}});
  if (cfg.labels == LabelConfig::IntelSpk)
    s.heads.push_back({"speaker", {LayerSpec::affine(b, n_speakers), LayerSpec::softmax(n_speakers)}});
  s.validate();
  return s;
}

inline Index input_dim(InputConfig c, const SubspaceConfig &sub, Index channels) {
  const Index sb = static_cast<Index>(sub.spectral_bases) * channels;
  const Index tb = 2 * static_cast<Index>(sub.window) * sub.temporal_bases;
  switch (c) {
    case InputConfig::SB: return sb;
    case InputConfig::TB: return tb;
    case InputConfig::SBTB: return sb + tb;
  }
  return 0;
}

inline VectorXd select_input(const UtteranceFeature &f, InputConfig c) {
  switch (c) {
    case InputConfig::SB: return f.spectral;
    case InputConfig::TB: return f.temporal;
    case InputConfig::SBTB: return f.concatenated();
  }
  return {};
}

/// Per-dimension affine map to zero mean, unit variance on the fitting set.
/// Constant dimensions keep scale 1.
struct Standardizer {
  RowVectorXd mean;
  RowVectorXd scale;

  static Standardizer fit(const MatrixXd &x) {
    Standardizer s;
    s.mean = x.colwise().mean();
    const RowVectorXd var = (x.rowwise() - s.mean).array().square().colwise().mean();
    s.scale = var.unaryExpr([](double v) { return v > 1e-24 ? 1.0 / std::sqrt(v) : 1.0; });
    return s;
  }
  MatrixXd apply(const MatrixXd &x) const {
    require(x.cols() == mean.size(), ErrorKind::Shape,
            "feature dimension " + std::to_string(x.cols()) + " does not match model input " +
                std::to_string(mean.size()));
    return ((x.rowwise() - mean).array().rowwise() * scale.array()).matrix();
  }
};

struct TrainLog {
  int epochs_run = 0;
  int best_epoch = 0;
  double best_val_loss = 0.0;
  std::vector<double> train_loss;
  std::vector<double> val_loss;
};

struct Classifier {
  ClassifierConfig cfg;
  std::uint64_t seed = 0;
  std::vector<std::string> speakers;  // speaker-head class order
  Standardizer norm;
  nn::Network<float> net;
  TrainLog log;

  Index input_dim() const { return net.spec().input_dim; }

  Mat<float> prepare(const std::vector<UtteranceFeature> &feats) const {
    MatrixXd x(static_cast<Index>(feats.size()), input_dim());
    for (std::size_t i = 0; i < feats.size(); ++i) {
      const VectorXd v = select_input(feats[i], cfg.input);
      require(v.size() == input_dim(), ErrorKind::Shape,
              "feature of " + feats[i].meta.speaker_id + " has " + std::to_string(v.size()) +
                  " dims for input " + std::string(to_string(cfg.input)) + ", model expects " +
                  std::to_string(input_dim()));
      x.row(static_cast<Index>(i)) = v.transpose();
    }
    return norm.apply(x).cast<float>();
  }

  /// Eval-mode forward in chunks; `out` receives the trunk or one head.
  MatrixXd evaluate(const std::vector<UtteranceFeature> &feats, int head) const {
    const Mat<float> x = prepare(feats);
    constexpr Index kChunk = 512;
    MatrixXd out;
    for (Index r = 0; r < x.rows(); r += kChunk) {
      const Index n = std::min(kChunk, x.rows() - r);
      const auto o = net.predict(x.middleRows(r, n));
      const Mat<float> &m = head < 0 ? o.trunk : o.heads[static_cast<std::size_t>(head)];
      if (out.size() == 0) out.resize(x.rows(), m.cols());
      out.middleRows(r, n) = m.cast<double>();
    }
    if (out.size() == 0) out.resize(0, head < 0 ? net.spec().trunk_dim() : kNumGroups);
    return out;
  }

  MatrixXd intel_posteriors(const std::vector<UtteranceFeature> &feats) const { return evaluate(feats, 0); }
  MatrixXd bottleneck(const std::vector<UtteranceFeature> &feats) const { return evaluate(feats, -1); }

  std::vector<Intelligibility> predict(const std::vector<UtteranceFeature> &feats) const {
    const MatrixXd p = intel_posteriors(feats);
    std::vector<Intelligibility> out(static_cast<std::size_t>(p.rows()));
    for (Index i = 0; i < p.rows(); ++i) {
      Index k;
      p.row(i).maxCoeff(&k);
      out[static_cast<std::size_t>(i)] = group_from_index(static_cast<int>(k));
    }
    return out;
  }
};

namespace detail {

/// Holds out round(fraction * n_c) utterances of every class c (at least one
/// when the class has two or more). Returns (train, holdout) index lists,
/// each sorted.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    const std::vector<int> &classes, double fraction, std::mt19937_64 &rng) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < classes.size(); ++i) by_class[classes[i]].push_back(i);
  std::vector<std::size_t> train, held;
  for (auto &[c, idx] : by_class) {
    std::shuffle(idx.begin(), idx.end(), rng);
    std::size_t k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
    if (fraction > 0.0 && k == 0 && idx.size() >= 2) k = 1;
    held.insert(held.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
    train.insert(train.end(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(held.begin(), held.end());
  return {train, held};
}

inline nn::Batch<float> gather(const Mat<float> &x, const std::vector<std::vector<int>> &labels,
                               const std::vector<double> &weights, const std::vector<std::size_t> &rows) {
  nn::Batch<float> b;
  b.inputs.resize(static_cast<Index>(rows.size()), x.cols());
  b.labels.assign(labels.size(), std::vector<int>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    b.inputs.row(static_cast<Index>(i)) = x.row(static_cast<Index>(rows[i]));
    for (std::size_t h = 0; h < labels.size(); ++h) b.labels[h][i] = labels[h][rows[i]];
  }
  b.weights = weights;
  return b;
}

}  // namespace detail

using EpochCallback = std::function<void(int epoch, double train_loss, double val_loss)>;

/// Minibatch SGD on both heads with early stopping on held-out loss; the
/// weights of the best epoch are restored at the end.
inline Classifier train_classifier(const std::vector<UtteranceFeature> &feats, const ClassifierConfig &cfg,
                                   std::uint64_t seed, const EpochCallback &on_epoch = {}) {
  cfg.validate();
  require(!feats.empty(), ErrorKind::TrainingData, "no training utterances");
  Classifier clf;
  clf.cfg = cfg;
  clf.seed = seed;

  std::set<std::string> spk_set;
  std::set<int> group_set;
  for (const auto &f : feats) {
    spk_set.insert(f.meta.speaker_id);
    group_set.insert(group_index(f.meta.intelligibility));
  }
  require(group_set.size() >= 2, ErrorKind::TrainingData, "intelligibility head needs at least two classes");
  if (cfg.labels == LabelConfig::IntelSpk)
    require(spk_set.size() >= 2, ErrorKind::TrainingData, "speaker head needs at least two speakers");
  clf.speakers.assign(spk_set.begin(), spk_set.end());

  const Index dim = select_input(feats.front(), cfg.input).size();
  MatrixXd raw(static_cast<Index>(feats.size()), dim);
  std::vector<int> intel(feats.size()), spk(feats.size());
  for (std::size_t i = 0; i < feats.size(); ++i) {
    const VectorXd v = select_input(feats[i], cfg.input);
    require(v.size() == dim, ErrorKind::Shape, "feature dimensions differ between utterances");
    require(v.allFinite(), ErrorKind::NumericInput, "non-finite feature for " + feats[i].meta.speaker_id);
    raw.row(static_cast<Index>(i)) = v.transpose();
    intel[i] = group_index(feats[i].meta.intelligibility);
    spk[i] = static_cast<int>(std::lower_bound(clf.speakers.begin(), clf.speakers.end(), feats[i].meta.speaker_id) -
                              clf.speakers.begin());
  }

  auto split_rng = substream(seed, {hash_name("holdout")});
  auto [train_idx, held_idx] = detail::stratified_split(intel, cfg.holdout_fraction, split_rng);
  require(train_idx.size() >= 2, ErrorKind::TrainingData, "fewer than two training utterances after holdout");

  MatrixXd train_raw(static_cast<Index>(train_idx.size()), dim);
  for (std::size_t i = 0; i < train_idx.size(); ++i)
    train_raw.row(static_cast<Index>(i)) = raw.row(static_cast<Index>(train_idx[i]));
  clf.norm = Standardizer::fit(train_raw);
  const Mat<float> x = clf.norm.apply(raw).cast<float>();

  std::vector<std::vector<int>> labels{intel};
  std::vector<double> weights{1.0};
  if (cfg.labels == LabelConfig::IntelSpk) {
    labels.push_back(spk);
    weights = {cfg.intel_weight, 1.0 - cfg.intel_weight};
  }
  const auto spec = classifier_spec(dim, static_cast<int>(clf.speakers.size()), cfg);
  clf.net = nn::Network<float>(spec, stage_seed(seed, "classifier.init"));

  const nn::Batch<float> held = detail::gather(x, labels, weights, held_idx);
  const nn::SgdOptions sgd{cfg.learning_rate, cfg.momentum, cfg.l2};
  auto order_rng = substream(seed, {hash_name("classifier.batches")});
  std::vector<std::size_t> order = train_idx;
  auto best = clf.net.named_state();
  double best_loss = std::numeric_limits<double>::infinity();
  int since_best = 0;
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    double sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      if (end - start < 2) continue;  // batchnorm needs two rows
      const std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                          order.begin() + static_cast<std::ptrdiff_t>(end));
      const auto batch = detail::gather(x, labels, weights, rows);
      const auto loss = nn::mtl_loss(clf.net, batch, nn::Mode::Train, true);
      require(std::isfinite(loss.total), ErrorKind::Numeric, "training loss diverged");
      nn::sgd_step(clf.net, sgd);
      sum += loss.total * static_cast<double>(rows.size());
      seen += rows.size();
    }
    const double train_loss = seen ? sum / static_cast<double>(seen) : 0.0;
    const double val_loss =
        held.size() > 0 ? nn::mtl_loss(clf.net, held, nn::Mode::Eval, false).total : train_loss;
    clf.log.train_loss.push_back(train_loss);
    clf.log.val_loss.push_back(val_loss);
    clf.log.epochs_run = epoch;
    if (on_epoch) on_epoch(epoch, train_loss, val_loss);
    if (val_loss < best_loss) {
      best_loss = val_loss;
      best = clf.net.named_state();
      clf.log.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  clf.log.best_val_loss = best_loss;
  clf.net.load_named_state(best, {});
  return clf;
}

// --- assessment -----------------------------------------------------------

struct AssessmentReport {
  AssessMode mode = AssessMode::FiveWay;
  InputConfig input = InputConfig::SBTB;
  LabelConfig labels = LabelConfig::IntelSpk;
  std::array<std::optional<double>, kNumGroups> group{};  // percent; VL..H empty in binary mode
  std::optional<double> dys_avg;
  std::optional<double> ctl;
  double overall = 0.0;
  std::array<std::size_t, kNumGroups> counts{};
};

/// Utterance-level accuracy. Binary mode scores DYS (VL, L, M, H) vs CTL.
inline AssessmentReport score_predictions(const std::vector<Intelligibility> &truth,
                                          const std::vector<Intelligibility> &predicted, AssessMode mode) {
  require(truth.size() == predicted.size(), ErrorKind::Shape, "prediction count differs from label count");
  AssessmentReport r;
  r.mode = mode;
  std::array<std::size_t, kNumGroups> correct{};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto g = static_cast<std::size_t>(group_index(truth[i]));
    ++r.counts[g];
    const bool ok = mode == AssessMode::FiveWay ? predicted[i] == truth[i]
                                                 : is_dysarthric(predicted[i]) == is_dysarthric(truth[i]);
    correct[g] += ok ? 1 : 0;
  }
  auto pct = [](std::size_t c, std::size_t n) -> std::optional<double> {
    if (n == 0) return std::nullopt;
    return 100.0 * static_cast<double>(c) / static_cast<double>(n);
  };
  std::size_t dys_c = 0, dys_n = 0;
  for (int g = 0; g < kNumGroups; ++g) {
    const auto gi = static_cast<std::size_t>(g);
    if (g < kNumGroups - 1) {
      dys_c += correct[gi];
      dys_n += r.counts[gi];
      if (mode == AssessMode::FiveWay) r.group[gi] = pct(correct[gi], r.counts[gi]);
    }
  }
  const auto ctl = static_cast<std::size_t>(group_index(Intelligibility::CTL));
  r.group[ctl] = pct(correct[ctl], r.counts[ctl]);
  r.ctl = r.group[ctl];
  r.dys_avg = pct(dys_c, dys_n);
  r.overall = pct(dys_c + correct[ctl], dys_n + r.counts[ctl]).value_or(0.0);
  return r;
}

inline AssessmentReport assess(const Classifier &clf, const std::vector<UtteranceFeature> &feats, AssessMode mode) {
  std::vector<Intelligibility> truth;
  for (const auto &f : feats) truth.push_back(f.meta.intelligibility);
  AssessmentReport r = score_predictions(truth, clf.predict(feats), mode);
  r.input = clf.cfg.input;
  r.labels = clf.cfg.labels;
  return r;
}

inline constexpr const char *kAssessmentCsvHeader = "input,label,mode,VL,L,M,H,DYS-avg,CTL,overall";

inline std::string format_percent(const std::optional<double> &v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

inline std::string assessment_csv_row(const AssessmentReport &r) {
  std::string s = std::string(to_string(r.input)) + "," + std::string(to_string(r.labels)) + "," +
                  std::string(to_string(r.mode));
  for (int g = 0; g < kNumGroups - 1; ++g) s += "," + format_percent(r.group[static_cast<std::size_t>(g)]);
  s += "," + format_percent(r.dys_avg) + "," + format_percent(r.ctl) + "," + format_percent(r.overall);
  return s;
}

inline nlohmann::json to_json(const AssessmentReport &r) {
  auto opt = [](const std::optional<double> &v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json j{{"mode", to_string(r.mode)},
                   {"input", to_string(r.input)},
                   {"labels", to_string(r.labels)},
                   {"dys_avg", opt(r.dys_avg)},
                   {"ctl", opt(r.ctl)},
                   {"overall", r.overall}};
  for (auto g : kAllGroups) {
    const auto gi = static_cast<std::size_t>(group_index(g));
    j["groups"][std::string(to_string(g))] = opt(r.group[gi]);
    j["counts"][std::string(to_string(g))] = r.counts[gi];
  }
  return j;
}

// --- speaker embeddings ---------------------------------------------------

struct SpeakerEmbedding {
  std::string speaker_id;
  VectorXd vector;
  std::size_t n_utterances = 0;
  Intelligibility intelligibility = Intelligibility::CTL;
};

/// Mean bottleneck output per speaker (Eval mode), sorted by speaker id.
inline std::vector<SpeakerEmbedding> extract_embeddings(const Classifier &clf,
                                                        const std::vector<UtteranceFeature> &feats) {
  require(!feats.empty(), ErrorKind::Data, "no utterances to embed");
  const MatrixXd z = clf.bottleneck(feats);
  std::map<std::string, SpeakerEmbedding> acc;
  for (std::size_t i = 0; i < feats.size(); ++i) {
    const auto &m = feats[i].meta;
    require(!m.speaker_id.empty(), ErrorKind::Data, "utterance without speaker id");
    auto [it, fresh] = acc.try_emplace(m.speaker_id);
    auto &e = it->second;
    if (fresh) {
      e.speaker_id = m.speaker_id;
      e.intelligibility = m.intelligibility;
      e.vector = VectorXd::Zero(z.cols());
    }
    require(e.intelligibility == m.intelligibility, ErrorKind::Data,
            "speaker " + m.speaker_id + " appears with two intelligibility groups");
    e.vector += z.row(static_cast<Index>(i)).transpose();
    ++e.n_utterances;
  }
  std::vector<SpeakerEmbedding> out;
  for (auto &[id, e] : acc) {
    e.vector /= static_cast<double>(e.n_utterances);
    require(e.vector.allFinite(), ErrorKind::Numeric, "non-finite embedding for " + id);
    out.push_back(std::move(e));
  }
  return out;
}

/// <stem>.stbf: n x dim (f64), row i is speaker i of <stem>.json.
inline void save_embeddings(const std::filesystem::path &stem, const std::vector<SpeakerEmbedding> &emb) {
  require(!emb.empty(), ErrorKind::Data, "no embeddings to save");
  MatrixXd m(static_cast<Index>(emb.size()), emb.front().vector.size());
  nlohmann::json j;
  j["dim"] = m.cols();
  j["speakers"] = nlohmann::json::array();
  for (std::size_t i = 0; i < emb.size(); ++i) {
    m.row(static_cast<Index>(i)) = emb[i].vector.transpose();
    j["speakers"].push_back({{"speaker_id", emb[i].speaker_id},
                             {"row", i},
                             {"n_utterances", emb[i].n_utterances},
                             {"intelligibility", std::string(to_string(emb[i].intelligibility))}});
  }
  write_stbf(stem.string() + ".stbf", StbfArray::from_matrix<double>(m));
  write_file(stem.string() + ".json", j.dump(2) + "\n");
}

inline std::vector<SpeakerEmbedding> load_embeddings(const std::filesystem::path &stem) {
  const MatrixXd m = read_stbf(stem.string() + ".stbf").matrix<double>();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(stem.string() + ".json"));
  } catch (const nlohmann::json::exception &e) {
    fail(ErrorKind::Format, stem.string() + ".json: " + e.what());
  }
  std::vector<SpeakerEmbedding> out;
  for (const auto &s : j.at("speakers")) {
    SpeakerEmbedding e;
    e.speaker_id = s.at("speaker_id").get<std::string>();
    const auto row = s.at("row").get<Index>();
    require(row >= 0 && row < m.rows(), ErrorKind::Format, "embedding row out of range for " + e.speaker_id);
    e.vector = m.row(row).transpose();
    e.n_utterances = s.at("n_utterances").get<std::size_t>();
    const auto g = parse_intelligibility(s.at("intelligibility").get<std::string>());
    require(g.has_value(), ErrorKind::Format, "bad intelligibility for " + e.speaker_id);
    e.intelligibility = *g;
    out.push_back(std::move(e));
  }
  return out;
}

// --- persistence ----------------------------------------------------------

inline nlohmann::json to_json(const ClassifierConfig &c) {
  return {{"hidden_dim", c.hidden_dim},       {"projection_dim", c.projection_dim},
          {"bottleneck_dim", c.bottleneck_dim}, {"dropout", c.dropout},
          {"input", to_string(c.input)},      {"labels", to_string(c.labels)},
          {"intel_weight", c.intel_weight},   {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate}, {"momentum", c.momentum},
          {"l2", c.l2},                       {"max_epochs", c.max_epochs},
          {"patience", c.patience},           {"holdout_fraction", c.holdout_fraction}};
}

inline ClassifierConfig classifier_config_from_json(const nlohmann::json &j) {
  ClassifierConfig c;
  c.hidden_dim = j.at("hidden_dim").get<int>();
  c.projection_dim = j.at("projection_dim").get<int>();
  c.bottleneck_dim = j.at("bottleneck_dim").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.input = parse_input_config(j.at("input").get<std::string>());
  c.labels = parse_label_config(j.at("labels").get<std::string>());
  c.intel_weight = j.at("intel_weight").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.momentum = j.at("momentum").get<double>();
  c.l2 = j.at("l2").get<double>();
  c.max_epochs = j.at("max_epochs").get<int>();
  c.patience = j.at("patience").get<int>();
  c.holdout_fraction = j.at("holdout_fraction").get<double>();
  return c;
}

inline Checkpoint to_checkpoint(const Classifier &clf) {
  Checkpoint ck;
  ck.header["kind"] = "intelligibility-classifier";
  ck.header["spec"] = nn::to_json(clf.net.spec());
  ck.header["config"] = to_json(clf.cfg);
  ck.header["seed"] = clf.seed;
  ck.header["epoch"] = clf.log.best_epoch;
  ck.header["speakers"] = clf.speakers;
  ck.header["metrics"] = {{"epochs_run", clf.log.epochs_run},
                          {"best_val_loss", clf.log.best_val_loss},
                          {"train_loss", clf.log.train_loss},
                          {"val_loss", clf.log.val_loss}};
  ck.tensors.emplace_back("input.mean", StbfArray::from_matrix<double>(clf.norm.mean));
  ck.tensors.emplace_back("input.scale", StbfArray::from_matrix<double>(clf.norm.scale));
  for (const auto &[name, m] : clf.net.named_state()) ck.tensors.emplace_back(name, StbfArray::from_matrix<float>(m));
  return ck;
}

inline Classifier classifier_from_checkpoint(const Checkpoint &ck) {
  require(ck.header.value("kind", "") == "intelligibility-classifier", ErrorKind::Format,
          "checkpoint is not an intelligibility classifier");
  Classifier clf;
  try {
    clf.cfg = classifier_config_from_json(ck.header.at("config"));
    clf.seed = ck.header.at("seed").get<std::uint64_t>();
    clf.speakers = ck.header.at("speakers").get<std::vector<std::string>>();
    clf.log.best_epoch = ck.header.at("epoch").get<int>();
    const auto &m = ck.header.at("metrics");
    clf.log.epochs_run = m.at("epochs_run").get<int>();
    clf.log.best_val_loss = m.at("best_val_loss").get<double>();
    clf.log.train_loss = m.at("train_loss").get<std::vector<double>>();
    clf.log.val_loss = m.at("val_loss").get<std::vector<double>>();
    clf.net = nn::Network<float>(nn::spec_from_json(ck.header.at("spec")), 0);
  } catch (const nlohmann::json::exception &e) {
    fail(ErrorKind::Format, std::string("classifier checkpoint header: ") + e.what());
  }
  clf.norm.mean = ck.at("input.mean").matrix<double>();
  clf.norm.scale = ck.at("input.scale").matrix<double>();
  require(clf.norm.mean.size() == clf.input_dim() && clf.norm.scale.size() == clf.input_dim(), ErrorKind::Format,
          "standardizer size disagrees with network input");
  std::vector<std::pair<std::string, Mat<float>>> state;
  for (const auto &[name, a] : ck.tensors)
    if (name.rfind("input.", 0) != 0) state.emplace_back(name, a.matrix<float>());
  clf.net.load_named_state(state, {});
  return clf;
}

}  // namespace stsb

#endif  // STSB_CLASSIFIER_HPP
