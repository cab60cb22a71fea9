#pragma once

// Canonical correlation analysis and the linear-algebra pieces it rests on.
//
// Everything here is a pure function of its arguments and is templated on the
// scalar type; tolerances scale with std::numeric_limits<Scalar>::epsilon().

#include "icanclean/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace icanclean {

template <typename Scalar>
struct Centered {
  Matrix<Scalar> centered;
  Vector<Scalar> means;
};

/// Subtracts the per-column sample mean.
template <typename Derived>
Centered<typename Derived::Scalar> mean_center(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  validate_finite(m);
  Centered<Scalar> out;
  out.means = m.colwise().mean().transpose();
  out.centered = m.rowwise() - out.means.transpose();
  return out;
}

/// Relative rank tolerance used throughout: max(rows, cols) * eps.
template <typename Scalar>
Scalar default_rank_tolerance(Eigen::Index rows, Eigen::Index cols) {
  return static_cast<Scalar>(std::max(rows, cols)) * std::numeric_limits<Scalar>::epsilon();
}

namespace detail {

template <typename Scalar>
Eigen::Index count_above(const Vector<Scalar>& singular_values, Scalar rel_tol) {
  if (singular_values.size() == 0) return 0;
  const Scalar sigma_max = singular_values.maxCoeff();
  if (!(sigma_max > Scalar(0))) return 0;
  const Scalar cutoff = rel_tol * sigma_max;
  return (singular_values.array() > cutoff).count();
}

// Column-pivoted QR of a centered block, truncated to its numerical rank.
// block * P = [Q_r, *] [R_11 R_12; 0 ~0]
template <typename Scalar>
struct RankRevealingQr {
  Matrix<Scalar> q;    // rows x rank, orthonormal columns
  Matrix<Scalar> r11;  // rank x rank, upper triangular
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic> perm;
  Eigen::Index rank = 0;
};

template <typename Scalar>
RankRevealingQr<Scalar> rank_revealing_qr(const Matrix<Scalar>& block) {
  const Eigen::Index rows = block.rows();
  const Eigen::Index cols = block.cols();
  Eigen::ColPivHouseholderQR<Matrix<Scalar>> qr(block);

  const Eigen::Index k = std::min(rows, cols);
  Matrix<Scalar> r = qr.matrixQR().topLeftCorner(k, cols).template triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Matrix<Scalar>> svd(r);
  Vector<Scalar> sv = svd.singularValues();

  RankRevealingQr<Scalar> out;
  out.rank = count_above<Scalar>(sv, default_rank_tolerance<Scalar>(rows, cols));
  out.perm = qr.colsPermutation();
  out.r11 = r.topLeftCorner(out.rank, out.rank).template triangularView<Eigen::Upper>();
  out.q = qr.householderQ() * Matrix<Scalar>::Identity(rows, out.rank);
  return out;
}

}  // namespace detail

/// Number of singular values above rel_tol * sigma_max. Zero for an all-zero matrix.
template <typename Derived>
Eigen::Index estimate_rank(const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar rel_tol) {
  using Scalar = typename Derived::Scalar;
  validate_finite(m);
  if (!(rel_tol > Scalar(0))) throw ConfigError("estimate_rank: tolerance must be positive");
  Eigen::BDCSVD<Matrix<Scalar>> svd(m.eval());
  return detail::count_above<Scalar>(svd.singularValues(), rel_tol);
}

template <typename Derived>
Eigen::Index estimate_rank(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  return estimate_rank(m, default_rank_tolerance<Scalar>(m.rows(), m.cols()));
}

/// Minimum-norm least-squares solution of basis * coefficients = targets.
///
/// Uses a complete orthogonal decomposition whose pivot threshold is the
/// same relative tolerance as estimate_rank, so rank-deficient bases give the
/// minimum-norm coefficients instead of blowing up.
template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> least_squares_solve(const Eigen::MatrixBase<DerivedA>& basis,
                                                      const Eigen::MatrixBase<DerivedB>& targets) {
  using Scalar = typename DerivedA::Scalar;
  if (basis.rows() != targets.rows()) {
    throw ShapeError("least_squares_solve: basis has " + std::to_string(basis.rows()) +
                     " rows but targets have " + std::to_string(targets.rows()));
  }
  validate_finite(basis, "basis");
  validate_finite(targets, "targets");
  Eigen::CompleteOrthogonalDecomposition<Matrix<Scalar>> cod;
  cod.setThreshold(default_rank_tolerance<Scalar>(basis.rows(), basis.cols()));
  cod.compute(basis.eval());
  return cod.solve(targets.eval());
}

/// Output of one CCA run on (x, y).
///
/// u_variates = (x - x_mean) * a_unmix and v_variates = (y - y_mean) * b_unmix.
/// Variates are zero mean with unit sample variance (denominator T - 1).
/// Components are ordered by descending correlation.
template <typename Scalar>
struct CcaResult {
  Matrix<Scalar> a_unmix;       // N_data x n_comp
  Matrix<Scalar> b_unmix;       // N_noise x n_comp
  Vector<Scalar> correlations;  // n_comp, non-increasing, in [0, 1]
  Matrix<Scalar> u_variates;    // T x n_comp
  Matrix<Scalar> v_variates;    // T x n_comp
  Eigen::Index n_comp = 0;
  Vector<Scalar> x_mean;
  Vector<Scalar> y_mean;
  Eigen::Index rank_x = 0;
  Eigen::Index rank_y = 0;
};

/// Smallest T accepted by canoncorr for the given channel counts.
inline Eigen::Index min_cca_samples(Eigen::Index n_x, Eigen::Index n_y) {
  return std::max<Eigen::Index>(3, std::max(n_x, n_y) + 1);
}

/// Canonical correlation analysis of x (T x N_data) against y (T x N_noise).
///
/// Each mean-centered block is reduced to an orthonormal basis of its numerical
/// range by column-pivoted QR; the SVD of Q_xᵀ Q_y yields the correlations and
/// the rotations, and the unmixing matrices come back through R_11⁻¹. Channels
/// dropped as rank-deficient get zero rows in the unmixing matrices.
///
/// Sign convention: corr(U_i, V_i) >= 0 and the largest-magnitude entry of each
/// a_unmix column is positive.
template <typename DerivedX, typename DerivedY>
CcaResult<typename DerivedX::Scalar> canoncorr(const Eigen::MatrixBase<DerivedX>& x,
                                               const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  using Mat = Matrix<Scalar>;

  validate_finite(x, "data");
  validate_finite(y, "noise");
  if (x.rows() != y.rows()) {
    throw ShapeError("canoncorr: data has " + std::to_string(x.rows()) + " samples but noise has " +
                     std::to_string(y.rows()));
  }
  const Eigen::Index t = x.rows();
  const Eigen::Index needed = min_cca_samples(x.cols(), y.cols());
  if (t < needed) {
    throw InsufficientSamplesError("canoncorr: " + std::to_string(t) + " samples for " +
                                   std::to_string(x.cols()) + " data and " +
                                   std::to_string(y.cols()) + " noise channels; need at least " +
                                   std::to_string(needed));
  }

  auto xc = mean_center(x);
  auto yc = mean_center(y);

  auto qx = detail::rank_revealing_qr<Scalar>(xc.centered);
  if (qx.rank == 0) throw DegenerateInputError("canoncorr: data channels have numerical rank 0");
  auto qy = detail::rank_revealing_qr<Scalar>(yc.centered);
  if (qy.rank == 0) throw DegenerateInputError("canoncorr: noise channels have numerical rank 0");

  const Eigen::Index d = std::min(qx.rank, qy.rank);
  const Mat cross = qx.q.transpose() * qy.q;
  Eigen::JacobiSVD<Mat> svd(cross, Eigen::ComputeThinU | Eigen::ComputeThinV);

  const Scalar scale = std::sqrt(static_cast<Scalar>(t - 1));

  Mat a_reduced = Mat::Zero(x.cols(), d);
  a_reduced.topRows(qx.rank) =
      qx.r11.template triangularView<Eigen::Upper>().solve(svd.matrixU().leftCols(d)) * scale;
  Mat b_reduced = Mat::Zero(y.cols(), d);
  b_reduced.topRows(qy.rank) =
      qy.r11.template triangularView<Eigen::Upper>().solve(svd.matrixV().leftCols(d)) * scale;

  CcaResult<Scalar> out;
  out.a_unmix = qx.perm * a_reduced;
  out.b_unmix = qy.perm * b_reduced;
  out.correlations = svd.singularValues().head(d).cwiseMax(Scalar(0)).cwiseMin(Scalar(1));
  out.n_comp = d;
  out.rank_x = qx.rank;
  out.rank_y = qy.rank;

  for (Eigen::Index j = 0; j < d; ++j) {
    Eigen::Index imax = 0;
    out.a_unmix.col(j).cwiseAbs().maxCoeff(&imax);
    if (out.a_unmix(imax, j) < Scalar(0)) {
      out.a_unmix.col(j) *= Scalar(-1);
      out.b_unmix.col(j) *= Scalar(-1);
    }
  }

  out.u_variates = xc.centered * out.a_unmix;
  out.v_variates = yc.centered * out.b_unmix;
  out.x_mean = std::move(xc.means);
  out.y_mean = std::move(yc.means);
  return out;
}

}  // namespace icanclean
