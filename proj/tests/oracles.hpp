// tests/oracles.hpp

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

// Independent reference computations used only by tests. Nothing here
// calls into the library routines it is used to check.

#ifndef STSB_TESTS_ORACLES_HPP
#define STSB_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// Cyclic two-sided Jacobi eigenvalues of a symmetric matrix, descending.
inline std::vector<double> symmetric_eigenvalues(Eigen::MatrixXd a) {
  const Eigen::Index n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30 * std::max(1.0, a.squaredNorm())) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return ev;
}

/// Singular values via eigenvalues of the smaller Gram matrix.
inline std::vector<double> singular_values(const Eigen::MatrixXd &s) {
  const Eigen::MatrixXd g = s.rows() <= s.cols() ? Eigen::MatrixXd(s * s.transpose())
                                                 : Eigen::MatrixXd(s.transpose() * s);
  auto ev = symmetric_eigenvalues(g);
  for (double &e : ev) e = std::sqrt(std::max(e, 0.0));
  return ev;
}

/// Singular values as the leading eigenvalues of [[0, S], [S^T, 0]], whose
/// spectrum is {+-sigma_i} plus zeros. Slower than the Gram route but keeps
/// full accuracy for singular values near zero.
inline std::vector<double> singular_values_augmented(const Eigen::MatrixXd &s) {
  const Eigen::Index m = s.rows(), n = s.cols();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + n, m + n);
  h.topRightCorner(m, n) = s;
  h.bottomLeftCorner(n, m) = s.transpose();
  auto ev = symmetric_eigenvalues(h);
  ev.resize(static_cast<std::size_t>(std::min(m, n)));
  return ev;
}

struct WindowStats {
  std::vector<double> mean, std;
};

/// Literal loop over windows, including the cyclic tiling rule for T < W.
inline WindowStats window_stats(const std::vector<double> &v, int w, int stride) {
  const int t = static_cast<int>(v.size());
  std::vector<std::vector<double>> windows;
  if (t < w) {
    std::vector<double> win;
    for (int i = 0; i < w; ++i) win.push_back(v[i % t]);
    windows.push_back(win);
  } else {
    for (int start = 0; start + w <= t; start += stride)
      windows.emplace_back(v.begin() + start, v.begin() + start + w);
  }
  WindowStats out{std::vector<double>(w, 0.0), std::vector<double>(w, 0.0)};
  const double k = static_cast<double>(windows.size());
  for (int i = 0; i < w; ++i) {
    double sum = 0.0;
    for (const auto &win : windows) sum += win[i];
    const double mean = sum / k;
    double var = 0.0;
    for (const auto &win : windows) var += (win[i] - mean) * (win[i] - mean);
    out.mean[i] = mean;
    out.std[i] = std::sqrt(var / k);
  }
  return out;
}

/// Direct O(N^2) DFT magnitude.
inline std::vector<double> dft_magnitude(const std::vector<double> &x) {
  const std::size_t n = x.size();
  std::vector<double> mag(n / 2 + 1);
  for (std::size_t k = 0; k < mag.size(); ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      acc += x[i] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * i) / n);
    mag[k] = std::abs(acc);
  }
  return mag;
}

inline double dominant_frequency(const std::vector<double> &x, int sample_rate) {
  const auto mag = dft_magnitude(x);
  const auto k = std::max_element(mag.begin() + 1, mag.end()) - mag.begin();
  return static_cast<double>(k) * sample_rate / static_cast<double>(x.size());
}

inline double spectral_centroid(const std::vector<double> &x, int sample_rate) {
  const auto mag = dft_magnitude(x);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < mag.size(); ++k) {
    const double f = static_cast<double>(k) * sample_rate / static_cast<double>(x.size());
    num += f * mag[k] * mag[k];
    den += mag[k] * mag[k];
  }
  return num / den;
}

/// Largest principal angle between the column spaces of a and b (both
/// with orthonormal columns after QR).
inline double max_principal_angle(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b) {
  const Eigen::MatrixXd qa = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ() *
                             Eigen::MatrixXd::Identity(a.rows(), a.cols());
  const Eigen::MatrixXd qb = Eigen::HouseholderQR<Eigen::MatrixXd>(b).householderQ() *
                             Eigen::MatrixXd::Identity(b.rows(), b.cols());
  const Eigen::MatrixXd m = qa.transpose() * qb;
  // Smallest cosine = sqrt of smallest eigenvalue of m m^T.
  auto ev = symmetric_eigenvalues(m * m.transpose());
  const double c = std::sqrt(std::clamp(ev.back(), 0.0, 1.0));
  return std::acos(std::min(1.0, c));
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64 &rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = nd(rng);
  return m;
}

/// Central finite-difference derivative of a scalar function.
inline double central_difference(const std::function<double(double)> &f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Three construction cues measured straight from a waveform, over 10 ms
/// blocks at 16 kHz: log active duration (blocks within 30 dB of the
/// loudest), first-difference to signal energy ratio in dB over active
/// blocks (a spectral slope proxy) and the 10th-percentile block energy
/// relative to the loudest (noise floor).
inline Eigen::RowVectorXd audio_descriptors(const std::vector<double> &x) {
  constexpr std::size_t kBlock = 160;
  std::vector<double> e;
  for (std::size_t s = 0; s + kBlock <= x.size(); s += kBlock) {
    double a = 0.0;
    for (std::size_t i = s; i < s + kBlock; ++i) a += x[i] * x[i];
    e.push_back(a / kBlock + 1e-20);
  }
  const double peak = *std::max_element(e.begin(), e.end());
  int active = 0;
  double ex = 0.0, ed = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k) {
    if (e[k] <= peak * 1e-3) continue;
    ++active;
    for (std::size_t i = k * kBlock + 1; i < (k + 1) * kBlock; ++i) {
      ex += x[i] * x[i];
      ed += (x[i] - x[i - 1]) * (x[i] - x[i - 1]);
    }
  }
  std::vector<double> sorted = e;
  std::sort(sorted.begin(), sorted.end());
  Eigen::RowVectorXd d(3);
  d << std::log(0.01 * active), 10.0 * std::log10(ed / ex), 10.0 * std::log10(sorted[sorted.size() / 10] / peak);
  return d;
}

/// Mean silhouette of points (rows of x) under integer labels, Euclidean
/// distance. Points in singleton clusters score 0.
inline double silhouette(const Eigen::MatrixXd &x, const std::vector<int> &label) {
  const auto n = x.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> sum;
    std::vector<int> cnt;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto l = static_cast<std::size_t>(label[static_cast<std::size_t>(j)]);
      if (sum.size() <= l) {
        sum.resize(l + 1, 0.0);
        cnt.resize(l + 1, 0);
      }
      sum[l] += (x.row(i) - x.row(j)).norm();
      ++cnt[l];
    }
    const auto own = static_cast<std::size_t>(label[static_cast<std::size_t>(i)]);
    if (own >= cnt.size() || cnt[own] == 0) continue;
    const double a = sum[own] / cnt[own];
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < cnt.size(); ++l)
      if (l != own && cnt[l] > 0) b = std::min(b, sum[l] / cnt[l]);
    total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(n);
}

/// Accuracy of the nearest class mean (Euclidean) fitted on train rows.
inline double nearest_centroid_accuracy(const Eigen::MatrixXd &train, const std::vector<int> &train_label,
                                        const Eigen::MatrixXd &test, const std::vector<int> &test_label,
                                        int classes) {
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(classes, train.cols());
  std::vector<int> cnt(static_cast<std::size_t>(classes), 0);
  for (Eigen::Index i = 0; i < train.rows(); ++i) {
    mean.row(train_label[static_cast<std::size_t>(i)]) += train.row(i);
    ++cnt[static_cast<std::size_t>(train_label[static_cast<std::size_t>(i)])];
  }
  for (int c = 0; c < classes; ++c)
    if (cnt[static_cast<std::size_t>(c)] > 0) mean.row(c) /= cnt[static_cast<std::size_t>(c)];
  int ok = 0;
  for (Eigen::Index i = 0; i < test.rows(); ++i) {
    Eigen::Index best;
    (mean.rowwise() - test.row(i)).rowwise().squaredNorm().minCoeff(&best);
    ok += static_cast<int>(best) == test_label[static_cast<std::size_t>(i)];
  }
  return static_cast<double>(ok) / static_cast<double>(test.rows());
}

/// Leave-one-out accuracy of a one-vs-rest ridge-regression linear probe.
inline double loo_linear_probe_accuracy(const Eigen::MatrixXd &x, const std::vector<int> &label, int classes,
                                        double ridge) {
  const auto n = x.rows(), d = x.cols();
  int ok = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::MatrixXd a(n - 1, d + 1);
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n - 1, classes);
    for (Eigen::Index j = 0, r = 0; j < n; ++j) {
      if (j == i) continue;
      a.row(r) << x.row(j), 1.0;
      y(r, label[static_cast<std::size_t>(j)]) = 1.0;
      ++r;
    }
    Eigen::MatrixXd g = a.transpose() * a;
    g.diagonal().head(d).array() += ridge;
    const Eigen::MatrixXd w = g.ldlt().solve(a.transpose() * y);
    Eigen::RowVectorXd xi(d + 1);
    xi << x.row(i), 1.0;
    Eigen::Index best;
    (xi * w).maxCoeff(&best);
    ok += static_cast<int>(best) == label[static_cast<std::size_t>(i)];
  }
  return static_cast<double>(ok) / static_cast<double>(n);
}

}  // namespace oracle

#endif  // STSB_TESTS_ORACLES_HPP
