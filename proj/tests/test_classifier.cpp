// tests/test_classifier.cpp

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

#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stsb/classifier.hpp"

namespace {

using namespace stsb;

ClassifierConfig small_config() {
  ClassifierConfig c;
  c.hidden_dim = 48;
  c.projection_dim = 16;
  c.max_epochs = 40;
  c.patience = 40;
  return c;
}

// Gaussian clusters per group, with a per-speaker offset.
std::vector<UtteranceFeature> cluster_features(std::uint64_t seed, int speakers_per_group, int utts,
                                               double spread = 0.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<VectorXd> centre;
  for (int g = 0; g < kNumGroups; ++g) centre.push_back(VectorXd::NullaryExpr(410, [&] { return n01(rng); }));
  std::vector<UtteranceFeature> out;
  for (int g = 0; g < kNumGroups; ++g)
    for (int s = 0; s < speakers_per_group; ++s) {
      const VectorXd spk = centre[static_cast<std::size_t>(g)] + 0.3 * VectorXd::NullaryExpr(410, [&] { return n01(rng); });
      for (int u = 0; u < utts; ++u) {
        const VectorXd v = spk + spread * VectorXd::NullaryExpr(410, [&] { return n01(rng); });
        UtteranceFeature f;
        f.spectral = v.head(160);
        f.temporal = v.tail(250);
        f.spectral_bases = 2;
        f.temporal_bases = 5;
        f.window = 25;
        f.meta = {"G" + std::to_string(g) + "S" + std::to_string(s), u % 2 ? "B1" : "B2", "W" + std::to_string(u),
                  group_from_index(g)};
        out.push_back(f);
      }
    }
  return out;
}

TEST(ClassifierSpec, PaperDimensions) {
  const ClassifierConfig cfg;
  const SubspaceConfig sub;
  EXPECT_EQ(input_dim(InputConfig::SB, sub, 80), 160);
  EXPECT_EQ(input_dim(InputConfig::TB, sub, 80), 250);
  EXPECT_EQ(input_dim(InputConfig::SBTB, sub, 80), 410);

  const auto spec = classifier_spec(410, 29, cfg);
  EXPECT_EQ(spec.trunk_dim(), 25);
  ASSERT_EQ(spec.heads.size(), 2u);
  nn::Network<float> net(spec, 1);
  std::mt19937_64 rng(1);
  const Mat<float> x = oracle::random_matrix(rng, 4, 410).cast<float>();
  const auto out = net.predict(x);
  EXPECT_EQ(out.heads[0].rows(), 4);
  EXPECT_EQ(out.heads[0].cols(), 5);
  EXPECT_EQ(out.heads[1].cols(), 29);
  EXPECT_EQ(out.trunk.cols(), 25);

  int hidden_2000 = 0, bottlenecks = 0, dropouts = 0, skips = 0;
  for (const auto &l : spec.trunk) {
    hidden_2000 += l.kind == nn::LayerKind::Affine && l.out_dim == 2000;
    bottlenecks += l.kind == nn::LayerKind::LinearBottleneckProjection;
    dropouts += l.kind == nn::LayerKind::Dropout;
    skips += l.kind == nn::LayerKind::SkipJunction;
  }
  EXPECT_EQ(hidden_2000, 3);
  EXPECT_EQ(bottlenecks, 2);
  EXPECT_EQ(dropouts, 3);
  EXPECT_EQ(skips, 1);

  ClassifierConfig intel = cfg;
  intel.labels = LabelConfig::IntelOnly;
  EXPECT_EQ(classifier_spec(160, 29, intel).heads.size(), 1u);
}

TEST(ClassifierSpec, ConfigValidation) {
  ClassifierConfig c;
  c.projection_dim = c.hidden_dim;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.holdout_fraction = 0.6;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.momentum = 1.0;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_THROW(parse_input_config("XB"), Error);
  EXPECT_EQ(parse_input_config("SB+TB"), InputConfig::SBTB);
}

TEST(Assessment, PerfectAndBinary) {
  std::vector<Intelligibility> truth;
  for (auto g : kAllGroups)
    for (int i = 0; i < 7; ++i) truth.push_back(g);
  const auto perfect = score_predictions(truth, truth, AssessMode::FiveWay);
  for (const auto &v : perfect.group) EXPECT_EQ(v.value(), 100.0);
  EXPECT_EQ(perfect.overall, 100.0);
  EXPECT_EQ(perfect.dys_avg.value(), 100.0);

  // every dysarthric utterance labelled VL: wrong 5-way, right binary
  std::vector<Intelligibility> pred = truth;
  for (auto &p : pred)
    if (is_dysarthric(p)) p = Intelligibility::VL;
  const auto five = score_predictions(truth, pred, AssessMode::FiveWay);
  EXPECT_EQ(five.group[1].value(), 0.0);
  EXPECT_NEAR(five.overall, 100.0 * 14.0 / 35.0, 1e-12);
  const auto bin = score_predictions(truth, pred, AssessMode::Binary);
  EXPECT_EQ(bin.overall, 100.0);
  EXPECT_FALSE(bin.group[0].has_value());
  EXPECT_EQ(bin.ctl.value(), 100.0);
}

TEST(Assessment, OverallIsUtteranceWeighted) {
  std::vector<Intelligibility> truth = {Intelligibility::VL, Intelligibility::CTL, Intelligibility::CTL,
                                        Intelligibility::CTL};
  std::vector<Intelligibility> pred = {Intelligibility::L, Intelligibility::CTL, Intelligibility::CTL,
                                       Intelligibility::CTL};
  const auto r = score_predictions(truth, pred, AssessMode::FiveWay);
  EXPECT_EQ(r.overall, 75.0);
  EXPECT_EQ(r.dys_avg.value(), 0.0);
  EXPECT_FALSE(r.group[2].has_value());
  EXPECT_EQ(assessment_csv_row(r), "SB+TB,intel+spk,5-way,0.00,-,-,-,0.00,100.00,75.00");
}

TEST(Assessment, RandomPredictorNearChance) {
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, 4);
    std::vector<Intelligibility> truth, pred;
    for (auto g : kAllGroups)
      for (int i = 0; i < 200; ++i) {
        truth.push_back(g);
        pred.push_back(group_from_index(pick(rng)));
      }
    total += score_predictions(truth, pred, AssessMode::FiveWay).overall;
  }
  EXPECT_NEAR(total / 10.0, 20.0, 3.0);
}

TEST(Classifier, LearnsSeparableClustersAndPersists) {
  const auto feats = cluster_features(3, 3, 12);
  std::vector<UtteranceFeature> train, test;
  for (const auto &f : feats) (f.meta.block_id == "B1" ? train : test).push_back(f);
  const Classifier clf = train_classifier(train, small_config(), 5);
  EXPECT_GE(assess(clf, test, AssessMode::FiveWay).overall, 90.0);
  EXPECT_EQ(clf.speakers.size(), 15u);

  // deterministic given the seed; checkpoint reproduces predictions
  const Classifier again = train_classifier(train, small_config(), 5);
  EXPECT_EQ(clf.intel_posteriors(test), again.intel_posteriors(test));
  const Classifier loaded = classifier_from_checkpoint(decode_checkpoint(encode_checkpoint(to_checkpoint(clf))));
  EXPECT_EQ(loaded.intel_posteriors(test), clf.intel_posteriors(test));
  EXPECT_EQ(loaded.log.best_epoch, clf.log.best_epoch);

  // wrong input width
  ClassifierConfig sb = small_config();
  sb.input = InputConfig::SB;
  Classifier wrong = clf;
  wrong.cfg.input = InputConfig::SB;
  try {
    assess(wrong, test, AssessMode::FiveWay);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::Shape);
  }
}

TEST(Classifier, Embeddings) {
  const auto feats = cluster_features(4, 2, 10);
  ClassifierConfig cfg = small_config();
  cfg.max_epochs = 10;
  const Classifier clf = train_classifier(feats, cfg, 2);
  const auto emb = extract_embeddings(clf, feats);
  ASSERT_EQ(emb.size(), 10u);
  for (const auto &e : emb) {
    EXPECT_EQ(e.vector.size(), 25);
    EXPECT_EQ(e.n_utterances, 10u);
  }
  // one utterance: the embedding is its bottleneck output
  const std::vector<UtteranceFeature> one = {feats[0]};
  const auto single = extract_embeddings(clf, one);
  EXPECT_LT((single[0].vector - clf.bottleneck(one).row(0).transpose()).norm(), 1e-12);
  // duplicating every utterance changes nothing beyond float rounding
  std::vector<UtteranceFeature> doubled = feats;
  doubled.insert(doubled.end(), feats.begin(), feats.end());
  const auto emb2 = extract_embeddings(clf, doubled);
  for (std::size_t i = 0; i < emb.size(); ++i)
    EXPECT_LT((emb[i].vector - emb2[i].vector).norm(), 1e-5 * (1.0 + emb[i].vector.norm()));
  // inconsistent group labels for one speaker
  std::vector<UtteranceFeature> bad = {feats[0], feats[1]};
  bad[1].meta.intelligibility = Intelligibility::CTL;
  EXPECT_THROW(extract_embeddings(clf, bad), Error);

  const auto stem = std::filesystem::temp_directory_path() / "stsb_test_emb";
  save_embeddings(stem, emb);
  const auto back = load_embeddings(stem);
  ASSERT_EQ(back.size(), emb.size());
  EXPECT_EQ(back[3].vector, emb[3].vector);
  EXPECT_EQ(back[3].speaker_id, emb[3].speaker_id);
}

TEST(Classifier, DegenerateData) {
  auto feats = cluster_features(5, 1, 4);
  for (auto &f : feats) f.meta.intelligibility = Intelligibility::M;
  try {
    train_classifier(feats, small_config(), 1);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::TrainingData);
  }
  EXPECT_THROW(train_classifier({}, small_config(), 1), Error);
}

TEST(Classifier, StratifiedHoldout) {
  std::vector<int> classes;
  for (int c = 0; c < 5; ++c)
    for (int i = 0; i < 40; ++i) classes.push_back(c);
  std::mt19937_64 rng(1);
  const auto [train, held] = detail::stratified_split(classes, 0.1, rng);
  EXPECT_EQ(held.size(), 20u);
  EXPECT_EQ(train.size(), 180u);
  std::array<int, 5> per{};
  for (auto i : held) ++per[static_cast<std::size_t>(classes[i])];
  for (int n : per) EXPECT_EQ(n, 4);
}

TEST(Classifier, StandardizerKeepsConstantColumns) {
  MatrixXd x(3, 2);
  x << 1, 5, 2, 5, 3, 5;
  const auto s = Standardizer::fit(x);
  EXPECT_EQ(s.scale(1), 1.0);
  const MatrixXd y = s.apply(x);
  EXPECT_NEAR(y.col(0).mean(), 0.0, 1e-12);
  EXPECT_EQ(y.col(1), VectorXd::Zero(3));
}

}  // namespace
