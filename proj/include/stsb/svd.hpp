// stsb/svd.hpp

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

#ifndef STSB_SVD_HPP
#define STSB_SVD_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "stsb/error.hpp"
#include "stsb/types.hpp"

namespace stsb {

/// Full SVD A = U * diag(sigma) * Vt with square orthogonal U (m x m) and
/// Vt (n x n); sigma has min(m, n) entries in descending order.
struct SvdResult {
  MatrixXd u;
  VectorXd sigma;
  MatrixXd vt;
};

namespace detail {

inline Index argmax_abs(const Eigen::Ref<const VectorXd> &v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  return best;
}

/// Extends the orthonormal columns basis.leftCols(k) to a full square
/// orthonormal basis. Each new vector is the unit vector e_i with the
/// largest component outside the current span, orthogonalized twice.
inline void complete_basis(MatrixXd &basis, Index k) {
  const Index m = basis.rows();
  VectorXd residual(m);  // squared norm of e_i's projection off the current span
  for (Index i = 0; i < m; ++i) residual[i] = 1.0 - basis.row(i).head(k).squaredNorm();
  while (k < m) {
    Index pick = 0;
    residual.maxCoeff(&pick);
    VectorXd v = VectorXd::Unit(m, pick);
    for (int pass = 0; pass < 2; ++pass)
      v -= basis.leftCols(k) * (basis.leftCols(k).transpose() * v);
    const double norm = v.norm();
    require(norm > 1e-3, ErrorKind::Decomposition, "failed to complete orthonormal basis");
    basis.col(k) = v / norm;
    residual -= basis.col(k).cwiseAbs2();
    ++k;
  }
}

/// One-sided (Hestenes) Jacobi on a tall matrix (rows >= cols). Returns
/// left vectors (rows x rows), descending singular values and the right
/// rotation (cols x cols, columns are right singular vectors).
inline void one_sided_jacobi(const MatrixXd &a, MatrixXd &left, VectorXd &sigma, MatrixXd &right,
                             int max_sweeps) {
  const Index m = a.rows(), n = a.cols();
  MatrixXd w = a;
  MatrixXd j = MatrixXd::Identity(n, n);
  const double eps = std::numeric_limits<double>::epsilon();
  const double tol = eps * static_cast<double>(m);
  const double tiny = std::numeric_limits<double>::min();

  bool converged = n < 2;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    converged = true;
    for (Index p = 0; p + 1 < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double alpha = w.col(p).squaredNorm();
        const double beta = w.col(q).squaredNorm();
        const double gamma = w.col(p).dot(w.col(q));
        if (alpha <= tiny || beta <= tiny) continue;
        if (std::abs(gamma) <= tol * std::sqrt(alpha) * std::sqrt(beta)) continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Index i = 0; i < m; ++i) {
          const double wp = w(i, p), wq = w(i, q);
          w(i, p) = c * wp - s * wq;
          w(i, q) = s * wp + c * wq;
        }
        for (Index i = 0; i < n; ++i) {
          const double jp = j(i, p), jq = j(i, q);
          j(i, p) = c * jp - s * jq;
          j(i, q) = s * jp + c * jq;
        }
      }
    }
  }
  if (!converged)
    fail(ErrorKind::Decomposition,
         "one-sided Jacobi did not converge within " + std::to_string(max_sweeps) + " sweeps");

  VectorXd norms(n);
  for (Index c = 0; c < n; ++c) norms[c] = w.col(c).norm();
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index x, Index y) { return norms[x] > norms[y]; });

  const double smax = n > 0 ? norms[order[0]] : 0.0;
  const double cutoff = smax * eps * static_cast<double>(std::max(m, n));

  sigma.resize(n);
  right.resize(n, n);
  left.resize(m, m);
  Index rank = 0;
  for (Index k = 0; k < n; ++k) {
    const Index c = order[k];
    right.col(k) = j.col(c);
    if (norms[c] > cutoff && norms[c] > 0.0) {
      sigma[k] = norms[c];
      left.col(rank++) = w.col(c) / norms[c];
    } else {
      sigma[k] = 0.0;
    }
  }
  // Re-orthogonalize in descending order; leading vectors barely move and
  // the correction on trailing ones is scaled by their small sigma.
  for (Index k = 0; k < rank; ++k) {
    for (int pass = 0; pass < 2; ++pass)
      for (Index i = 0; i < k; ++i) left.col(k) -= left.col(i).dot(left.col(k)) * left.col(i);
    left.col(k).normalize();
  }
  complete_basis(left, rank);
}

inline void fix_signs(SvdResult &r) {
  const Index k = r.sigma.size();
  for (Index i = 0; i < r.u.cols(); ++i) {
    const Index at = argmax_abs(r.u.col(i));
    if (r.u(at, i) < 0.0) {
      r.u.col(i) *= -1.0;
      if (i < k) r.vt.row(i) *= -1.0;
    }
  }
  for (Index i = k; i < r.vt.rows(); ++i) {
    const Index at = argmax_abs(r.vt.row(i).transpose());
    if (r.vt(i, at) < 0.0) r.vt.row(i) *= -1.0;
  }
}

}  // namespace detail

/// SVD by one-sided Jacobi in double precision. Singular values below
/// max(m,n) * eps * sigma_max are reported as exactly zero. Signs are fixed
/// so that each left singular vector's largest-magnitude entry is
/// non-negative, which makes the result deterministic.
inline SvdResult jacobi_svd(const MatrixXd &a) {
  require(a.rows() >= 1 && a.cols() >= 1, ErrorKind::Parameter, "SVD of an empty matrix");
  require(a.allFinite(), ErrorKind::NumericInput, "SVD input contains NaN or Inf");
  const Index m = a.rows(), n = a.cols();
  const int max_sweeps = 100 * static_cast<int>(std::min(m, n));
  SvdResult r;
  if (m >= n) {
    MatrixXd right;
    detail::one_sided_jacobi(a, r.u, r.sigma, right, max_sweeps);
    r.vt = right.transpose();
  } else {
    MatrixXd left;
    detail::one_sided_jacobi(a.transpose(), left, r.sigma, r.u, max_sweeps);
    r.vt = left.transpose();
  }
  detail::fix_signs(r);
  return r;
}

}  // namespace stsb

#endif  // STSB_SVD_HPP
