// stsb/subspace.hpp

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

#ifndef STSB_SUBSPACE_HPP
#define STSB_SUBSPACE_HPP

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stsb/error.hpp"
#include "stsb/spectrogram.hpp"
#include "stsb/svd.hpp"
#include "stsb/types.hpp"

namespace stsb {

/// Spectral basis = columns of u (C x C), temporal basis = rows of vt (T x T).
using SubspaceDecomposition = SvdResult;

struct SubspaceConfig {
  int spectral_bases = 2;  // d_s
  int temporal_bases = 5;  // d_t
  int window = 25;         // W
  int stride = 1;

  Index feature_dim(Index channels) const {
    return static_cast<Index>(spectral_bases) * channels + 2 * static_cast<Index>(window) * temporal_bases;
  }
  void validate() const {
    require(spectral_bases >= 1, ErrorKind::Config, "spectral_bases must be >= 1");
    require(temporal_bases >= 1, ErrorKind::Config, "temporal_bases must be >= 1");
    require(window >= 1, ErrorKind::Config, "window must be >= 1");
    require(stride >= 1, ErrorKind::Config, "stride must be >= 1");
  }
};

/// Fixed-length per-utterance vector. `spectral` holds the top d_s spectral
/// bases flattened column by column; `temporal` holds, for each of the top
/// d_t temporal bases, its W windowed means followed by its W windowed
/// standard deviations.
struct UtteranceFeature {
  VectorXd spectral;
  VectorXd temporal;
  int spectral_bases = 0;
  int temporal_bases = 0;
  int window = 0;
  UtteranceMeta meta;
  bool temporal_padded = false;  // fewer frames than d_t: zero bases appended

  Index size() const { return spectral.size() + temporal.size(); }
  VectorXd concatenated() const {
    VectorXd v(size());
    v << spectral, temporal;
    return v;
  }
};

inline SubspaceDecomposition decompose(const MelSpectrogram &s) { return jacobi_svd(s.values); }

struct TruncatedBases {
  MatrixXd spectral;  // C x d_s
  MatrixXd temporal;  // d_t x T
};

inline TruncatedBases truncate(const SubspaceDecomposition &dec, int d_s, int d_t) {
  require(d_s >= 1 && d_s <= dec.u.cols(), ErrorKind::Parameter,
          "d_s must lie in [1, " + std::to_string(dec.u.cols()) + "]");
  require(d_t >= 1 && d_t <= dec.vt.rows(), ErrorKind::Parameter,
          "d_t must lie in [1, " + std::to_string(dec.vt.rows()) + "]");
  return {dec.u.leftCols(d_s), dec.vt.topRows(d_t)};
}

/// Rank-d reconstruction sum_{i<d} sigma_i u_i v_i^T.
inline MatrixXd low_rank(const SubspaceDecomposition &dec, Index d) {
  d = std::min<Index>(d, dec.sigma.size());
  return dec.u.leftCols(d) * dec.sigma.head(d).asDiagonal() * dec.vt.topRows(d);
}

struct WindowStats {
  VectorXd mean;
  VectorXd std;
};

/// Elementwise mean and population standard deviation over the sliding
/// windows v[k*stride, k*stride + W). A vector shorter than W is tiled
/// cyclically into a single window.
inline WindowStats temporal_window_stats(std::span<const double> v, int window, int stride) {
  require(window >= 1 && stride >= 1, ErrorKind::Parameter, "window and stride must be >= 1");
  require(!v.empty(), ErrorKind::Parameter, "empty temporal basis vector");
  const auto t = static_cast<Index>(v.size());
  const Index w = window;
  WindowStats out{VectorXd::Zero(w), VectorXd::Zero(w)};
  if (t < w) {
    for (Index i = 0; i < w; ++i) out.mean[i] = v[static_cast<std::size_t>(i % t)];
    return out;
  }
  const Index k = (t - w) / stride + 1;
  Eigen::Map<const VectorXd> x(v.data(), t);
  for (Index j = 0; j < k; ++j) out.mean += x.segment(j * stride, w);
  out.mean /= static_cast<double>(k);
  if (k > 1) {
    for (Index j = 0; j < k; ++j)
      out.std += (x.segment(j * stride, w) - out.mean).array().square().matrix();
    out.std = (out.std / static_cast<double>(k)).array().sqrt().matrix();
  }
  return out;
}

inline UtteranceFeature utterance_feature(const MelSpectrogram &s, const SubspaceConfig &cfg,
                                          UtteranceMeta meta = {}) {
  cfg.validate();
  require(cfg.spectral_bases <= s.channels(), ErrorKind::Config,
          "spectral_bases exceeds mel channel count");
  const SubspaceDecomposition dec = decompose(s);
  const Index c = s.channels(), t = s.frames();

  UtteranceFeature f;
  f.spectral_bases = cfg.spectral_bases;
  f.temporal_bases = cfg.temporal_bases;
  f.window = cfg.window;
  f.meta = std::move(meta);
  f.spectral.resize(c * cfg.spectral_bases);
  for (int i = 0; i < cfg.spectral_bases; ++i) f.spectral.segment(i * c, c) = dec.u.col(i);

  const Index w = cfg.window;
  f.temporal = VectorXd::Zero(2 * w * cfg.temporal_bases);
  f.temporal_padded = t < cfg.temporal_bases;
  const Index usable = std::min<Index>(t, cfg.temporal_bases);
  for (Index i = 0; i < usable; ++i) {
    const VectorXd row = dec.vt.row(i).transpose();
    const auto st = temporal_window_stats(std::span<const double>(row.data(), row.size()),
                                          cfg.window, cfg.stride);
    f.temporal.segment(2 * w * i, w) = st.mean;
    f.temporal.segment(2 * w * i + w, w) = st.std;
  }
  return f;
}

}  // namespace stsb

#endif  // STSB_SUBSPACE_HPP
