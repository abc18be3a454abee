// tests/test_corpus.cpp

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


// Checks on the bundled synthetic corpus: the separability oracle, the
// classifier trained on it and the speaker embeddings it yields.

#include <iostream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stsb/classifier.hpp"
#include "stsb/pipeline.hpp"
#include "stsb/synth.hpp"

namespace {

using namespace stsb;

struct Corpus {
  std::vector<UtteranceFeature> train, test;
  MatrixXd cues_train, cues_test;  // oracle audio descriptors
};

const Corpus &bundled() {
  static const Corpus c = [] {
    const auto profiles = synth::default_profiles(synth::kBundledCorpusSeed);
    synth::CorpusConfig cc;
    cc.seed = synth::kBundledCorpusSeed;
    const auto utts = synth::generate_corpus(profiles, synth::default_vocabulary(), cc);
    std::vector<UtteranceFeature> feats(utts.size());
    parallel_for(utts.size(), 0, [&](std::size_t i) { feats[i] = extract_feature(utts[i].wave, utts[i].meta, {}); });
    Corpus out;
    std::vector<Eigen::RowVectorXd> ctr, cte;
    for (std::size_t i = 0; i < utts.size(); ++i) {
      const bool test = utts[i].meta.block_id == "B2";
      (test ? cte : ctr).push_back(oracle::audio_descriptors(utts[i].wave.samples));
      (test ? out.test : out.train).push_back(std::move(feats[i]));
    }
    out.cues_train.resize(static_cast<Index>(ctr.size()), 3);
    out.cues_test.resize(static_cast<Index>(cte.size()), 3);
    for (std::size_t i = 0; i < ctr.size(); ++i) out.cues_train.row(static_cast<Index>(i)) = ctr[i];
    for (std::size_t i = 0; i < cte.size(); ++i) out.cues_test.row(static_cast<Index>(i)) = cte[i];
    return out;
  }();
  return c;
}

std::vector<int> groups(const std::vector<UtteranceFeature> &f) {
  std::vector<int> label;
  for (const auto &u : f) label.push_back(group_index(u.meta.intelligibility));
  return label;
}

ClassifierConfig corpus_config(LabelConfig labels = LabelConfig::IntelSpk) {
  ClassifierConfig c;
  c.input = InputConfig::SBTB;
  c.labels = labels;
  c.max_epochs = 10;
  return c;
}

const Classifier &sbtb() {
  static const Classifier clf = train_classifier(bundled().train, corpus_config(), 1);
  return clf;
}

TEST(Corpus, NearestCentroidOracle) {
  MatrixXd xtr = bundled().cues_train, xte = bundled().cues_test;
  const RowVectorXd mean = xtr.colwise().mean();
  const RowVectorXd sd = (xtr.rowwise() - mean).array().square().colwise().mean().sqrt().matrix();
  xtr = ((xtr.rowwise() - mean).array().rowwise() / sd.array()).matrix();
  xte = ((xte.rowwise() - mean).array().rowwise() / sd.array()).matrix();
  const double acc =
      oracle::nearest_centroid_accuracy(xtr, groups(bundled().train), xte, groups(bundled().test), kNumGroups);
  std::cout << "nearest-centroid 5-way accuracy on audio cues " << 100.0 * acc << "%\n";
  EXPECT_GE(acc, 0.80);
}

TEST(Corpus, FiveWayAccuracy) {
  const auto r = assess(sbtb(), bundled().test, AssessMode::FiveWay);
  std::cout << kAssessmentCsvHeader << "\n" << assessment_csv_row(r) << "\n";
  EXPECT_GE(r.overall, 90.0);
}

TEST(Corpus, SpeakerHeadAblationIsReported) {
  const Classifier intel = train_classifier(bundled().train, corpus_config(LabelConfig::IntelOnly), 1);
  const auto with = assess(sbtb(), bundled().test, AssessMode::FiveWay);
  const auto without = assess(intel, bundled().test, AssessMode::FiveWay);
  std::cout << assessment_csv_row(with) << "\n" << assessment_csv_row(without) << "\n";
  EXPECT_EQ(intel.net.spec().heads.size(), 1u);
}

TEST(Corpus, EmbeddingsCluster) {
  const auto emb = extract_embeddings(sbtb(), bundled().train);
  ASSERT_EQ(emb.size(), 29u);
  MatrixXd x(29, 25);
  std::vector<int> label;
  for (std::size_t i = 0; i < emb.size(); ++i) {
    ASSERT_EQ(emb[i].vector.size(), 25);
    x.row(static_cast<Index>(i)) = emb[i].vector.transpose();
    label.push_back(group_index(emb[i].intelligibility));
  }
  const double s = oracle::silhouette(x, label);
  const double probe = oracle::loo_linear_probe_accuracy(x, label, kNumGroups, 1.0);
  std::cout << "silhouette " << s << ", leave-one-out probe accuracy " << 100.0 * probe << "%\n";
  EXPECT_GT(s, 0.2);
  EXPECT_GE(probe, 0.70);
}

}  // namespace
