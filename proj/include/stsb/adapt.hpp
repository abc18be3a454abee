// stsb/adapt.hpp

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

#ifndef STSB_ADAPT_HPP
#define STSB_ADAPT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <boost/math/distributions/binomial.hpp>

#include "json.hpp"
#include "stsb/classifier.hpp"
#include "stsb/error.hpp"
#include "stsb/neural/network.hpp"
#include "stsb/neural/train.hpp"
#include "stsb/pipeline.hpp"
#include "stsb/random.hpp"
#include "stsb/types.hpp"

// Speaker adaptation of a frame-level isolated-word classifier: speaker
// embeddings appended to every acoustic frame, optionally combined with
// LHUC scaling of the hidden layers trained jointly with the model.

namespace stsb {

enum class AuxFeature { None, SBE, TBE, SBETBE };

inline std::string_view to_string(AuxFeature a) {
  switch (a) {
    case AuxFeature::None: return "none";
    case AuxFeature::SBE: return "SBE";
    case AuxFeature::TBE: return "TBE";
    case AuxFeature::SBETBE: return "SBE+TBE";
  }
  return "?";
}

struct AdaptationConfig {
  std::string name = "si";
  AuxFeature aux = AuxFeature::None;
  bool lhuc = false;
  int lhuc_layer = -1;          // hidden layer carrying LHUC; -1 = every hidden layer
  bool zero_embedding = false;  // ablation: embedding inputs replaced by zeros
};

/// Names are '-'-joined tokens: si, sbe, tbe, lhuc, zero. Examples: si,
/// sbe, sbe-tbe, sbe-lhuc, sbe-tbe-lhuc, lhuc, zero-sbe.
inline AdaptationConfig parse_adaptation_config(const std::string &name) {
  AdaptationConfig c;
  c.name = name;
  bool sbe = false, tbe = false, si = false;
  std::size_t start = 0;
  while (start <= name.size()) {
    const std::size_t end = std::min(name.find('-', start), name.size());
    const std::string tok = name.substr(start, end - start);
    if (tok == "si") si = true;
    else if (tok == "sbe") sbe = true;
    else if (tok == "tbe") tbe = true;
    else if (tok == "lhuc") c.lhuc = true;
    else if (tok == "zero") c.zero_embedding = true;
    else fail(ErrorKind::Config, "unknown adaptation config '" + name + "' (token '" + tok + "')");
    start = end + 1;
  }
  c.aux = sbe && tbe ? AuxFeature::SBETBE : sbe ? AuxFeature::SBE : tbe ? AuxFeature::TBE : AuxFeature::None;
  require(!(si && c.aux != AuxFeature::None), ErrorKind::Config, "'" + name + "' mixes si with an embedding");
  require(!c.zero_embedding || c.aux != AuxFeature::None, ErrorKind::Config,
          "'" + name + "': zero needs an embedding to replace");
  return c;
}

struct WordModelConfig {
  int hidden_dim = 256;
  int hidden_layers = 3;
  double dropout = 0.2;
  int batch_size = 256;
  double learning_rate = 0.04;  // decays linearly to zero
  double momentum = 0.9;
  double l2 = 0.0;
  int epochs = 15;
  int frames_per_utterance = 16;  // sampled afresh each epoch; 0 = all frames
  int adapt_epochs = 5;           // test-time LHUC re-estimation
  double adapt_learning_rate = 0.01;

  void validate() const {
    require(hidden_dim >= 1, ErrorKind::Config, "word.hidden_dim must be >= 1");
    require(hidden_layers >= 1, ErrorKind::Config, "word.hidden_layers must be >= 1");
    require(dropout >= 0.0 && dropout < 1.0, ErrorKind::Config, "word.dropout must lie in [0, 1)");
    require(batch_size >= 2, ErrorKind::Config, "word.batch_size must be >= 2");
    require(learning_rate > 0.0, ErrorKind::Config, "word.learning_rate must be positive");
    require(momentum >= 0.0 && momentum < 1.0, ErrorKind::Config, "word.momentum must lie in [0, 1)");
    require(l2 >= 0.0, ErrorKind::Config, "word.l2 must be >= 0");
    require(epochs >= 1, ErrorKind::Config, "word.epochs must be >= 1");
    require(frames_per_utterance >= 0, ErrorKind::Config, "word.frames_per_utterance must be >= 0");
    require(adapt_epochs >= 0, ErrorKind::Config, "word.adapt_epochs must be >= 0");
    require(adapt_learning_rate > 0.0, ErrorKind::Config, "word.adapt_learning_rate must be positive");
  }
};

/// Acoustic frames (T x F, FBank + delta) of one utterance.
struct FrameUtterance {
  UtteranceMeta meta;
  Mat<float> frames;
};

/// Embedding sets keyed by auxiliary feature kind.
using EmbeddingSets = std::map<AuxFeature, std::vector<SpeakerEmbedding>>;

inline nn::NetworkSpec word_model_spec(Index acoustic_dim, Index embed_dim, int vocab, const WordModelConfig &cfg,
                                       const AdaptationConfig &ad) {
  using nn::LayerSpec;
  nn::NetworkSpec s;
  s.input_dim = acoustic_dim + embed_dim;
  const Index h = cfg.hidden_dim;
  for (int l = 0; l < cfg.hidden_layers; ++l) {
    const Index in = l == 0 ? s.input_dim : h;
    // fan-in of the acoustic part: appending embedding inputs keeps the
    // acoustic weights of the initial network unchanged
    s.trunk.push_back(LayerSpec::affine(in, h, l == 0 ? acoustic_dim : 0));
    s.trunk.push_back(LayerSpec::relu(h));
    s.trunk.push_back(LayerSpec::batch_norm(h));
    if (ad.lhuc && (ad.lhuc_layer < 0 || ad.lhuc_layer == l))
      s.trunk.push_back(LayerSpec::lhuc(h, "hidden" + std::to_string(l)));
    if (cfg.dropout > 0.0) s.trunk.push_back(LayerSpec::dropout(h, cfg.dropout));
  }
  s.heads.push_back({"word", {LayerSpec::affine(h, vocab), LayerSpec::softmax(vocab)}});
  s.validate();
  return s;
}

struct WordModel {
  AdaptationConfig adapt;
  WordModelConfig cfg;
  std::vector<std::string> vocab;
  RowVectorXd mean, scale;  // input standardization over training frames
  std::map<std::string, RowVectorXd> embeddings;
  Index embed_dim = 0;
  nn::Network<float> net;

  Index acoustic_dim() const { return net.spec().input_dim - embed_dim; }

  /// Standardized network input for every frame of `u`.
  Mat<float> inputs(const FrameUtterance &u) const {
    require(u.frames.cols() == acoustic_dim(), ErrorKind::Shape,
            "acoustic frames have " + std::to_string(u.frames.cols()) + " dims, model expects " +
                std::to_string(acoustic_dim()));
    MatrixXd x(u.frames.rows(), net.spec().input_dim);
    x.leftCols(acoustic_dim()) = u.frames.cast<double>();
    if (embed_dim > 0) x.rightCols(embed_dim).rowwise() = embedding_of(u.meta.speaker_id);
    return ((x.rowwise() - mean).array().rowwise() * scale.array()).matrix().cast<float>();
  }

  RowVectorXd embedding_of(const std::string &speaker) const {
    auto it = embeddings.find(speaker);
    require(it != embeddings.end(), ErrorKind::Data, "no speaker embedding for " + speaker);
    return it->second;
  }

  /// Mean frame posterior over the utterance.
  RowVectorXd posterior(const FrameUtterance &u) const {
    const Mat<float> x = inputs(u);
    std::vector<int> slots;
    if (net.has_lhuc()) {
      const auto s = net.find_speaker(u.meta.speaker_id);
      slots.assign(static_cast<std::size_t>(x.rows()), s ? *s : -1);
      require(s.has_value(), ErrorKind::Data, "no LHUC vector for " + u.meta.speaker_id);
    }
    const auto out = net.predict(x, slots);
    return out.heads[0].cast<double>().colwise().mean();
  }

  int classify(const FrameUtterance &u) const {
    Index k;
    posterior(u).maxCoeff(&k);
    return static_cast<int>(k);
  }

  int word_index(const std::string &w) const {
    auto it = std::lower_bound(vocab.begin(), vocab.end(), w);
    require(it != vocab.end() && *it == w, ErrorKind::Data, "word " + w + " not in training vocabulary");
    return static_cast<int>(it - vocab.begin());
  }
};

namespace detail {

inline const std::vector<SpeakerEmbedding> *embedding_set(const EmbeddingSets &sets, AuxFeature aux) {
  auto it = sets.find(aux);
  require(it != sets.end() && !it->second.empty(), ErrorKind::Data,
          "no " + std::string(to_string(aux)) + " embeddings supplied");
  return &it->second;
}

struct FrameRef {
  std::uint32_t utt;
  std::uint32_t frame;
};

/// Up to `per_utt` distinct frames of every utterance (all when 0), shuffled.
inline std::vector<FrameRef> sample_frames(const std::vector<const FrameUtterance *> &utts, int per_utt,
                                           std::mt19937_64 &rng) {
  std::vector<FrameRef> refs;
  std::vector<std::uint32_t> idx;
  for (std::size_t u = 0; u < utts.size(); ++u) {
    const auto t = static_cast<std::uint32_t>(utts[u]->frames.rows());
    idx.resize(t);
    std::iota(idx.begin(), idx.end(), 0u);
    std::uint32_t k = t;
    if (per_utt > 0 && static_cast<std::uint32_t>(per_utt) < t) {
      k = static_cast<std::uint32_t>(per_utt);
      for (std::uint32_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::uint32_t> d(i, t - 1);
        std::swap(idx[i], idx[d(rng)]);
      }
    }
    for (std::uint32_t i = 0; i < k; ++i) refs.push_back({static_cast<std::uint32_t>(u), idx[i]});
  }
  std::shuffle(refs.begin(), refs.end(), rng);
  return refs;
}

/// Runs `epochs` passes of minibatch SGD over sampled frames.
inline void fit_frames(WordModel &m, const std::vector<const FrameUtterance *> &utts,
                       const std::vector<Mat<float>> &inputs, int epochs, int per_utt, int batch_size,
                       const nn::SgdOptions &sgd, nn::Mode mode, std::mt19937_64 &rng) {
  std::vector<int> labels(utts.size()), slots(utts.size(), -1);
  for (std::size_t u = 0; u < utts.size(); ++u) {
    labels[u] = m.word_index(utts[u]->meta.word_id);
    if (m.net.has_lhuc()) slots[u] = *m.net.find_speaker(utts[u]->meta.speaker_id);
  }
  const Index dim = m.net.spec().input_dim;
  const auto bs = static_cast<std::size_t>(batch_size);
  nn::SgdOptions step = sgd;
  for (int e = 0; e < epochs; ++e) {
    const auto refs = sample_frames(utts, per_utt, rng);
    const double batches = std::ceil(static_cast<double>(refs.size()) / static_cast<double>(bs));
    double k = 0.0;
    for (std::size_t start = 0; start < refs.size(); start += bs, k += 1.0) {
      // learning rate decays linearly to zero over the run
      step.learning_rate = sgd.learning_rate * (1.0 - (e + k / batches) / epochs);
      const std::size_t end = std::min(refs.size(), start + bs);
      if (end - start < 2) continue;
      nn::Batch<float> b;
      b.inputs.resize(static_cast<Index>(end - start), dim);
      b.labels.assign(1, std::vector<int>(end - start));
      b.weights = {1.0};
      if (m.net.has_lhuc()) b.speakers.resize(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const auto &r = refs[i];
        b.inputs.row(static_cast<Index>(i - start)) = inputs[r.utt].row(r.frame);
        b.labels[0][i - start] = labels[r.utt];
        if (m.net.has_lhuc()) b.speakers[i - start] = slots[r.utt];
      }
      const auto loss = nn::mtl_loss(m.net, b, mode, true);
      require(std::isfinite(loss.total), ErrorKind::Numeric, "word model training diverged");
      nn::sgd_step(m.net, step);
    }
  }
}

}  // namespace detail

/// Trains the word classifier on `train`. With LHUC every training speaker
/// gets its own vector, learned jointly with the shared weights.
inline WordModel train_adapted(const std::vector<FrameUtterance> &train, const AdaptationConfig &ad,
                               const EmbeddingSets &embeddings, const WordModelConfig &cfg, std::uint64_t seed) {
  cfg.validate();
  require(!train.empty(), ErrorKind::TrainingData, "no training utterances");
  WordModel m;
  m.adapt = ad;
  m.cfg = cfg;
  std::set<std::string> words;
  for (const auto &u : train) words.insert(u.meta.word_id);
  require(words.size() >= 2, ErrorKind::TrainingData, "word classifier needs at least two words");
  m.vocab.assign(words.begin(), words.end());

  const Index fa = train.front().frames.cols();
  if (ad.aux != AuxFeature::None) {
    const auto *set = detail::embedding_set(embeddings, ad.aux);
    m.embed_dim = set->front().vector.size();
    for (const auto &e : *set) {
      require(e.vector.size() == m.embed_dim, ErrorKind::Shape, "embedding dimensions differ");
      m.embeddings[e.speaker_id] = ad.zero_embedding ? RowVectorXd::Zero(m.embed_dim) : RowVectorXd(e.vector.transpose());
    }
    for (const auto &u : train) (void)m.embedding_of(u.meta.speaker_id);
  }

  // standardization statistics over all training frames
  const Index dim = fa + m.embed_dim;
  RowVectorXd sum = RowVectorXd::Zero(dim), sq = RowVectorXd::Zero(dim);
  double n = 0.0;
  for (const auto &u : train) {
    require(u.frames.cols() == fa, ErrorKind::Shape, "acoustic dimensions differ between utterances");
    require(u.frames.rows() >= 1, ErrorKind::TrainingData, "utterance without frames");
    MatrixXd x(u.frames.rows(), dim);
    x.leftCols(fa) = u.frames.cast<double>();
    if (m.embed_dim > 0) x.rightCols(m.embed_dim).rowwise() = m.embedding_of(u.meta.speaker_id);
    sum += x.colwise().sum();
    sq += x.array().square().matrix().colwise().sum();
    n += static_cast<double>(x.rows());
  }
  m.mean = sum / n;
  const RowVectorXd var = (sq / n - m.mean.array().square().matrix()).cwiseMax(0.0);
  m.scale = var.unaryExpr([](double v) { return v > 1e-20 ? 1.0 / std::sqrt(v) : 1.0; });

  m.net = nn::Network<float>(word_model_spec(fa, m.embed_dim, static_cast<int>(m.vocab.size()), cfg, ad),
                             stage_seed(seed, "word.init"));
  std::vector<const FrameUtterance *> ptrs;
  std::vector<Mat<float>> inputs;
  for (const auto &u : train) {
    if (m.net.has_lhuc()) m.net.speaker_slot(u.meta.speaker_id);
    ptrs.push_back(&u);
    inputs.push_back(m.inputs(u));
  }
  auto rng = substream(seed, {hash_name("word.frames")});
  detail::fit_frames(m, ptrs, inputs, cfg.epochs, cfg.frames_per_utterance, cfg.batch_size,
                     {cfg.learning_rate, cfg.momentum, cfg.l2}, nn::Mode::Train, rng);
  return m;
}

/// Test-time LHUC: re-estimates only the LHUC vectors of the speakers in
/// `adapt` (starting from their current values; speakers new to the model
/// start at identity) with every other parameter frozen and batchnorm in
/// Eval mode.
inline void adapt_lhuc(WordModel &m, const std::vector<FrameUtterance> &adapt, std::uint64_t seed) {
  require(m.net.has_lhuc(), ErrorKind::Config, "model has no LHUC layers");
  if (adapt.empty() || m.cfg.adapt_epochs == 0) return;
  std::vector<const FrameUtterance *> ptrs;
  std::vector<Mat<float>> inputs;
  for (const auto &u : adapt) {
    m.net.speaker_slot(u.meta.speaker_id);
    ptrs.push_back(&u);
    inputs.push_back(m.inputs(u));
  }
  m.net.freeze_all_but_lhuc();
  for (auto &t : m.net.tensors()) t.velocity.setZero();
  auto rng = substream(seed, {hash_name("word.adapt")});
  detail::fit_frames(m, ptrs, inputs, m.cfg.adapt_epochs, 0, m.cfg.batch_size,
                     {m.cfg.adapt_learning_rate, 0.0, 0.0}, nn::Mode::Eval, rng);
  m.net.set_trainable(true);
}

// --- significance -----------------------------------------------------------

/// Exact two-sided McNemar test on paired correctness: only discordant
/// pairs count, and under the null each is equally likely to favour either
/// system.
inline double mcnemar_p(const std::vector<bool> &a, const std::vector<bool> &b) {
  require(a.size() == b.size(), ErrorKind::Shape, "paired test needs equal-length outcome lists");
  std::size_t only_a = 0, only_b = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    only_a += a[i] && !b[i];
    only_b += !a[i] && b[i];
  }
  const std::size_t n = only_a + only_b;
  if (n == 0) return 1.0;
  const boost::math::binomial_distribution<double> bin(static_cast<double>(n), 0.5);
  const double tail = boost::math::cdf(bin, static_cast<double>(std::min(only_a, only_b)));
  return std::min(1.0, 2.0 * tail);
}

// --- benchmark --------------------------------------------------------------

struct BenchmarkOptions {
  std::vector<AdaptationConfig> configs;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  WordModelConfig model;
  std::vector<std::string> train_blocks{"B1", "B3"};
  std::string test_block = "B2";
  std::string adapt_block = "B3";
  std::string baseline = "si";
  bool test_dysarthric_only = true;
  int jobs = 1;
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::array<double, 4> group_error{};  // VL, L, M, H (percent)
  double avg_error = 0.0;
  std::vector<bool> correct;  // per test utterance, in test-set order
};

struct ConfigOutcome {
  std::string name;
  std::array<double, 4> group_error{};  // mean over seeds
  double avg_error = 0.0;
  double p_value = 1.0;  // pooled paired test against the baseline
  std::vector<SeedOutcome> seeds;
};

struct BenchmarkResult {
  std::string baseline;
  std::vector<std::uint64_t> seeds;
  std::vector<ConfigOutcome> configs;
  std::vector<UtteranceMeta> test_set;

  const ConfigOutcome &at(const std::string &name) const {
    for (const auto &c : configs)
      if (c.name == name) return c;
    fail(ErrorKind::Parameter, "no benchmark row '" + name + "'");
  }
};

inline std::vector<bool> pooled(const ConfigOutcome &c) {
  std::vector<bool> v;
  for (const auto &s : c.seeds) v.insert(v.end(), s.correct.begin(), s.correct.end());
  return v;
}

/// Error rates of one trained model on the test set.
inline SeedOutcome score_word_model(const WordModel &m, const std::vector<const FrameUtterance *> &test) {
  SeedOutcome o;
  std::array<std::size_t, 4> err{}, cnt{};
  std::size_t total_err = 0;
  for (const auto *u : test) {
    const bool ok = m.classify(*u) == m.word_index(u->meta.word_id);
    o.correct.push_back(ok);
    total_err += !ok;
    const int g = group_index(u->meta.intelligibility);
    if (g < 4) {
      ++cnt[static_cast<std::size_t>(g)];
      err[static_cast<std::size_t>(g)] += !ok;
    }
  }
  for (std::size_t g = 0; g < 4; ++g)
    o.group_error[g] = cnt[g] ? 100.0 * static_cast<double>(err[g]) / static_cast<double>(cnt[g]) : 0.0;
  o.avg_error = test.empty() ? 0.0 : 100.0 * static_cast<double>(total_err) / static_cast<double>(test.size());
  return o;
}

/// Trains and scores every (config, seed) pair on fixed block splits and
/// tests each config against the baseline on pooled per-utterance outcomes.
inline BenchmarkResult run_benchmark(const std::vector<FrameUtterance> &corpus, const EmbeddingSets &embeddings,
                                     const BenchmarkOptions &opt) {
  require(!opt.configs.empty(), ErrorKind::Parameter, "benchmark needs at least one config");
  require(opt.seeds.size() >= 3, ErrorKind::Parameter, "benchmark needs at least three seeds");
  opt.model.validate();
  std::vector<FrameUtterance> train, adapt;
  std::vector<const FrameUtterance *> test;
  BenchmarkResult r;
  r.baseline = opt.baseline;
  r.seeds = opt.seeds;
  for (const auto &u : corpus) {
    const auto &b = u.meta.block_id;
    if (std::find(opt.train_blocks.begin(), opt.train_blocks.end(), b) != opt.train_blocks.end()) train.push_back(u);
    if (b == opt.test_block && (!opt.test_dysarthric_only || is_dysarthric(u.meta.intelligibility))) {
      test.push_back(&u);
      r.test_set.push_back(u.meta);
    }
  }
  require(!train.empty(), ErrorKind::TrainingData, "no utterances in the training blocks");
  require(!test.empty(), ErrorKind::Data, "no utterances in the test block");
  std::set<std::string> test_speakers;
  for (const auto *u : test) test_speakers.insert(u->meta.speaker_id);
  for (const auto &u : corpus)
    if (u.meta.block_id == opt.adapt_block && test_speakers.count(u.meta.speaker_id)) adapt.push_back(u);

  const std::size_t nc = opt.configs.size(), ns = opt.seeds.size();
  std::vector<SeedOutcome> outcomes(nc * ns);
  parallel_for(nc * ns, opt.jobs, [&](std::size_t k) {
    const auto &cfg = opt.configs[k / ns];
    const std::uint64_t seed = opt.seeds[k % ns];
    WordModel m = train_adapted(train, cfg, embeddings, opt.model, seed);
    if (cfg.lhuc) adapt_lhuc(m, adapt, seed);
    outcomes[k] = score_word_model(m, test);
    outcomes[k].seed = seed;
  });

  for (std::size_t c = 0; c < nc; ++c) {
    ConfigOutcome co;
    co.name = opt.configs[c].name;
    for (std::size_t s = 0; s < ns; ++s) {
      const auto &o = outcomes[c * ns + s];
      for (std::size_t g = 0; g < 4; ++g) co.group_error[g] += o.group_error[g] / static_cast<double>(ns);
      co.avg_error += o.avg_error / static_cast<double>(ns);
      co.seeds.push_back(o);
    }
    r.configs.push_back(std::move(co));
  }
  const auto base = std::find_if(r.configs.begin(), r.configs.end(),
                                 [&](const ConfigOutcome &c) { return c.name == opt.baseline; });
  if (base != r.configs.end()) {
    const auto b = pooled(*base);
    for (auto &c : r.configs) c.p_value = mcnemar_p(b, pooled(c));
  }
  return r;
}

inline constexpr const char *kBenchmarkCsvHeader = "config,VL,L,M,H,Avg,p-value";

inline std::string benchmark_csv(const BenchmarkResult &r) {
  std::string s = std::string(kBenchmarkCsvHeader) + "\n";
  char buf[160];
  for (const auto &c : r.configs) {
    std::snprintf(buf, sizeof buf, "%s,%.2f,%.2f,%.2f,%.2f,%.2f,%.4g\n", c.name.c_str(), c.group_error[0],
                  c.group_error[1], c.group_error[2], c.group_error[3], c.avg_error, c.p_value);
    s += buf;
  }
  return s;
}

inline nlohmann::json to_json(const BenchmarkResult &r) {
  nlohmann::json j;
  j["baseline"] = r.baseline;
  j["seeds"] = r.seeds;
  j["test_utterances"] = r.test_set.size();
  j["configs"] = nlohmann::json::array();
  for (const auto &c : r.configs) {
    nlohmann::json jc{{"name", c.name}, {"avg_error", c.avg_error}, {"p_value", c.p_value}};
    for (std::size_t g = 0; g < 4; ++g)
      jc["group_error"][std::string(to_string(group_from_index(static_cast<int>(g))))] = c.group_error[g];
    for (const auto &s : c.seeds) {
      nlohmann::json js{{"seed", s.seed}, {"avg_error", s.avg_error}};
      for (std::size_t g = 0; g < 4; ++g)
        js["group_error"][std::string(to_string(group_from_index(static_cast<int>(g))))] = s.group_error[g];
      std::string bits;
      for (bool b : s.correct) bits += b ? '1' : '0';
      js["correct"] = bits;
      jc["per_seed"].push_back(js);
    }
    j["configs"].push_back(jc);
  }
  return j;
}

}  // namespace stsb

#endif  // STSB_ADAPT_HPP
