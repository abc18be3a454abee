// tests/test_subspace.cpp

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
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stsb/subspace.hpp"

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double orthonormality_defect(const MatrixXd &q) {
  return (q.transpose() * q - MatrixXd::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff();
}

MatrixXd reconstruct(const stsb::SvdResult &r) {
  const auto k = r.sigma.size();
  return r.u.leftCols(k) * r.sigma.asDiagonal() * r.vt.topRows(k);
}

TEST(OracleSelfCheck, JacobiEigenMatchesEigen) {
  std::mt19937_64 rng(1);
  const MatrixXd a = oracle::random_matrix(rng, 12, 12);
  const MatrixXd s = a * a.transpose();
  auto ev = oracle::symmetric_eigenvalues(s);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(s);
  for (int i = 0; i < 12; ++i) EXPECT_NEAR(ev[i], es.eigenvalues()[11 - i], 1e-9);
}

TEST(Svd, Identity) {
  const auto r = stsb::jacobi_svd(MatrixXd::Identity(3, 3));
  EXPECT_EQ(r.sigma, VectorXd::Ones(3));
}

TEST(Svd, RankOne) {
  std::mt19937_64 rng(2);
  VectorXd u = oracle::random_matrix(rng, 7, 1).col(0).normalized();
  VectorXd v = oracle::random_matrix(rng, 11, 1).col(0).normalized();
  const auto r = stsb::jacobi_svd(3.5 * u * v.transpose());
  EXPECT_NEAR(r.sigma[0], 3.5, 1e-12);
  for (Eigen::Index i = 1; i < r.sigma.size(); ++i) EXPECT_EQ(r.sigma[i], 0.0);
  EXPECT_LT(orthonormality_defect(r.u), 1e-12);
  EXPECT_LT(orthonormality_defect(r.vt.transpose()), 1e-12);
}

TEST(Svd, RandomMatchesEigenOracle) {
  std::mt19937_64 rng(3);
  const MatrixXd s = oracle::random_matrix(rng, 80, 120);
  const auto r = stsb::jacobi_svd(s);
  const auto ref = oracle::singular_values(s);
  ASSERT_EQ(r.sigma.size(), 80);
  for (int i = 0; i < 80; ++i) EXPECT_NEAR(r.sigma[i], ref[i], 1e-6);
  EXPECT_LE((reconstruct(r) - s).norm() / s.norm(), 1e-8);
  EXPECT_EQ(r.u.rows(), 80);
  EXPECT_EQ(r.vt.rows(), 120);
  EXPECT_LT(orthonormality_defect(r.u), 1e-8);
  EXPECT_LT(orthonormality_defect(r.vt.transpose()), 1e-8);
}

TEST(Svd, TallAndRankDeficient) {
  std::mt19937_64 rng(4);
  const MatrixXd s = oracle::random_matrix(rng, 30, 3) * oracle::random_matrix(rng, 3, 9);
  for (const MatrixXd &m : {s, MatrixXd(s.transpose())}) {
    const auto r = stsb::jacobi_svd(m);
    EXPECT_LE((reconstruct(r) - m).norm() / m.norm(), 1e-12);
    EXPECT_LT(orthonormality_defect(r.u), 1e-10);
    EXPECT_LT(orthonormality_defect(r.vt.transpose()), 1e-10);
    int nonzero = 0;
    for (Eigen::Index i = 0; i < r.sigma.size(); ++i) nonzero += r.sigma[i] > 0.0;
    EXPECT_EQ(nonzero, 3);
  }
}

TEST(Svd, SignConventionAndDeterminism) {
  std::mt19937_64 rng(5);
  const MatrixXd s = oracle::random_matrix(rng, 20, 33);
  const auto a = stsb::jacobi_svd(s);
  const auto b = stsb::jacobi_svd(s);
  EXPECT_EQ(a.u, b.u);
  EXPECT_EQ(a.vt, b.vt);
  EXPECT_EQ(a.sigma, b.sigma);
  for (Eigen::Index j = 0; j < a.u.cols(); ++j) {
    Eigen::Index at;
    a.u.col(j).cwiseAbs().maxCoeff(&at);
    EXPECT_GE(a.u(at, j), 0.0);
  }
  // A sign flip of the input flips the temporal side only.
  const auto n = stsb::jacobi_svd(-s);
  EXPECT_LT((n.u - a.u).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((n.vt.topRows(20) + a.vt.topRows(20)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Svd, Errors) {
  MatrixXd bad = MatrixXd::Ones(3, 3);
  bad(1, 1) = std::nan("");
  try {
    stsb::jacobi_svd(bad);
    FAIL();
  } catch (const stsb::Error &e) {
    EXPECT_EQ(e.kind(), stsb::ErrorKind::NumericInput);
  }
  EXPECT_THROW(stsb::jacobi_svd(MatrixXd(0, 3)), stsb::Error);
}

TEST(Svd, ZeroMatrix) {
  const auto r = stsb::jacobi_svd(MatrixXd::Zero(4, 6));
  EXPECT_EQ(r.sigma, VectorXd::Zero(4));
  EXPECT_LT(orthonormality_defect(r.u), 1e-14);
  EXPECT_LT(orthonormality_defect(r.vt), 1e-14);
}

TEST(Truncate, EckartYoung) {
  std::mt19937_64 rng(6);
  const MatrixXd s = oracle::random_matrix(rng, 15, 40);
  const auto dec = stsb::jacobi_svd(s);
  for (int d = 1; d <= 15; ++d) {
    const double direct = (s - stsb::low_rank(dec, d)).norm();
    const double tail = std::sqrt(dec.sigma.tail(15 - d).squaredNorm());
    EXPECT_NEAR(direct, tail, 1e-8 * std::max(1.0, tail)) << d;
  }
  const auto tb = stsb::truncate(dec, 2, 5);
  EXPECT_EQ(tb.spectral.rows(), 15);
  EXPECT_EQ(tb.spectral.cols(), 2);
  EXPECT_EQ(tb.temporal.rows(), 5);
  EXPECT_EQ(tb.temporal.cols(), 40);
  EXPECT_EQ(tb.spectral, dec.u.leftCols(2));
  EXPECT_THROW(stsb::truncate(dec, 16, 1), stsb::Error);
  EXPECT_THROW(stsb::truncate(dec, 1, 41), stsb::Error);
  EXPECT_THROW(stsb::truncate(dec, 0, 1), stsb::Error);
}

TEST(Truncate, FullRankRecovery) {
  std::mt19937_64 rng(7);
  const MatrixXd s = oracle::random_matrix(rng, 9, 4) * oracle::random_matrix(rng, 4, 20);
  const auto dec = stsb::jacobi_svd(s);
  EXPECT_LE((stsb::low_rank(dec, 4) - s).norm() / s.norm(), 1e-8);
}

TEST(WindowStats, ConstantVector) {
  std::vector<double> v(40, 2.5);
  const auto st = stsb::temporal_window_stats(v, 25, 1);
  for (int i = 0; i < 25; ++i) {
    EXPECT_DOUBLE_EQ(st.mean[i], 2.5);
    EXPECT_EQ(st.std[i], 0.0);
  }
}

TEST(WindowStats, BruteForceOracle) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  std::vector<double> v(30);
  for (auto &x : v) x = nd(rng);
  const auto st = stsb::temporal_window_stats(v, 25, 1);
  const auto ref = oracle::window_stats(v, 25, 1);
  for (int i = 0; i < 25; ++i) {
    EXPECT_NEAR(st.mean[i], ref.mean[i], 1e-12);
    EXPECT_NEAR(st.std[i], ref.std[i], 1e-12);
  }
  // T < W: cyclic tiling into one window, zero spread
  std::vector<double> short_v = {1.0, 2.0, 3.0};
  const auto s2 = stsb::temporal_window_stats(short_v, 7, 2);
  const std::vector<double> tiled = {1, 2, 3, 1, 2, 3, 1};
  for (int i = 0; i < 7; ++i) {
    EXPECT_EQ(s2.mean[i], tiled[i]);
    EXPECT_EQ(s2.std[i], 0.0);
  }
}

stsb::MelSpectrogram random_spectrogram(std::mt19937_64 &rng, Eigen::Index c, Eigen::Index t) {
  stsb::MelSpectrogram m;
  m.values = oracle::random_matrix(rng, c, t);
  return m;
}

TEST(UtteranceFeature, DimensionsAndDeterminism) {
  std::mt19937_64 rng(9);
  stsb::SubspaceConfig cfg;  // 2, 5, 25, 1
  for (Eigen::Index t : {3, 24, 25, 90, 211}) {
    const auto m = random_spectrogram(rng, 80, t);
    const auto f = stsb::utterance_feature(m, cfg);
    EXPECT_EQ(f.size(), 410);
    EXPECT_EQ(f.spectral.size(), 160);
    EXPECT_EQ(f.temporal.size(), 250);
    EXPECT_EQ(f.temporal_padded, t < 5);
    const auto g = stsb::utterance_feature(m, cfg);
    EXPECT_EQ(f.concatenated(), g.concatenated());
  }
  EXPECT_EQ(cfg.feature_dim(80), 410);
}

TEST(UtteranceFeature, PaddedTemporalBasesAreZero) {
  std::mt19937_64 rng(10);
  const auto m = random_spectrogram(rng, 10, 3);
  const auto f = stsb::utterance_feature(m, {2, 5, 4, 1});
  EXPECT_TRUE(f.temporal_padded);
  EXPECT_EQ(f.temporal.tail(2 * 2 * 4).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT(f.temporal.head(8).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(stsb::utterance_feature(m, {11, 1, 4, 1}), stsb::Error);
}

TEST(UtteranceFeature, SpectralPartSpansConstructedEnvelopes) {
  std::mt19937_64 rng(11);
  const Eigen::Index c = 40, t = 150;
  const MatrixXd env = oracle::random_matrix(rng, c, 2).cwiseAbs();
  MatrixXd course(2, t);
  for (Eigen::Index j = 0; j < t; ++j) {
    course(0, j) = 2.0 + std::sin(0.07 * j);
    course(1, j) = std::cos(0.23 * j);
  }
  stsb::MelSpectrogram m;
  m.values = env * course;
  const auto f = stsb::utterance_feature(m, {2, 2, 25, 1});
  const MatrixXd basis = Eigen::Map<const MatrixXd>(f.spectral.data(), c, 2);
  EXPECT_LT(oracle::max_principal_angle(basis, env), 1e-6);
}

}  // namespace
