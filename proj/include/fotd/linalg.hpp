#pragma once

// Dense quasimatrix algebra under a weighted (quadrature) inner product.
//
// A quasimatrix is stored as an n x k Eigen matrix whose rows are grid values.
// Inner products are <A, B> = A^T diag(w) B, so every routine that depends on
// orthonormality takes the quadrature weights explicitly.

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <string>

#include "fotd/errors.hpp"

namespace fotd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Default tolerance on the weighted Gram matrix of a basis.
inline constexpr double kOrthonormalityTolerance = 1e-10;
/// Default relative eigenvalue floor used when inverting a correlation matrix.
inline constexpr double kDefaultRegularization = 1e-12;

namespace detail {

inline std::string shape(Eigen::Index rows, Eigen::Index cols) {
  std::ostringstream os;
  os << rows << "x" << cols;
  return os.str();
}

[[noreturn]] inline void throw_shape(const std::string& op, const std::string& detail) {
  throw Error(ErrorCode::dimension_mismatch, op + ": " + detail);
}

template <typename Derived>
void require_weights(const std::string& op, Eigen::Index rows,
                     const Eigen::MatrixBase<Derived>& weights) {
  if (weights.size() != rows) {
    throw_shape(op, "weights have length " + std::to_string(weights.size()) + " but operands have " +
                        std::to_string(rows) + " rows");
  }
}

}  // namespace detail

/// Grid values of one function together with its quadrature weights.
template <typename Scalar>
struct DiscreteFieldT {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights;

  static DiscreteFieldT with_unit_weights(Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v) {
    DiscreteFieldT f{std::move(v), {}};
    f.weights = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Ones(f.values.size());
    return f;
  }

  bool valid() const {
    return values.size() == weights.size() && (weights.array() > Scalar(0)).all();
  }
};
using DiscreteField = DiscreteFieldT<double>;

/// n x r matrix with weighted-orthonormal columns.
template <typename Scalar>
struct BasisT {
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  MatrixType modes;
  VectorType weights;

  Eigen::Index size() const { return modes.rows(); }
  Eigen::Index rank() const { return modes.cols(); }

  MatrixType gram() const { return modes.transpose() * weights.asDiagonal() * modes; }

  Scalar orthonormality_defect() const {
    return (gram() - MatrixType::Identity(rank(), rank())).cwiseAbs().maxCoeff();
  }
};
using Basis = BasisT<double>;

/// <U, W>: result(i, j) = sum_k w_k U(k, i) W(k, j).
template <typename DerivedU, typename DerivedW, typename DerivedWeights>
Eigen::Matrix<typename DerivedU::Scalar, Eigen::Dynamic, Eigen::Dynamic> weighted_inner(
    const Eigen::MatrixBase<DerivedU>& u, const Eigen::MatrixBase<DerivedW>& w,
    const Eigen::MatrixBase<DerivedWeights>& weights) {
  if (u.rows() != w.rows()) {
    detail::throw_shape("weighted_inner", "left operand is " + detail::shape(u.rows(), u.cols()) +
                                              ", right operand is " + detail::shape(w.rows(), w.cols()));
  }
  detail::require_weights("weighted_inner", u.rows(), weights);
  return u.transpose() * weights.asDiagonal() * w;
}

/// Weighted Frobenius norm sqrt(tr <A, A>).
template <typename Derived, typename DerivedWeights>
typename Derived::Scalar weighted_norm(const Eigen::MatrixBase<Derived>& a,
                                       const Eigen::MatrixBase<DerivedWeights>& weights) {
  detail::require_weights("weighted_norm", a.rows(), weights);
  return std::sqrt((weights.asDiagonal() * a.cwiseAbs2()).sum());
}

/// W - U <U, W>: the component of W orthogonal to span(U).
template <typename Scalar, typename DerivedW>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> project_complement(
    const BasisT<Scalar>& basis, const Eigen::MatrixBase<DerivedW>& w) {
  if (w.rows() != basis.size()) {
    detail::throw_shape("project_complement", "basis has " + std::to_string(basis.size()) +
                                                  " rows, operand is " + detail::shape(w.rows(), w.cols()));
  }
  return w - basis.modes * weighted_inner(basis.modes, w, basis.weights);
}

/// Flips columns so that the first entry that is not negligible (relative to
/// the column's largest entry) is positive. Returns the applied signs.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> apply_sign_convention(
    Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> signs = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Ones(m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const Scalar scale = m.col(j).cwiseAbs().maxCoeff();
    if (scale == Scalar(0)) continue;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (std::abs(m(i, j)) > Scalar(1e-8) * scale) {
        if (m(i, j) < Scalar(0)) {
          m.col(j) *= Scalar(-1);
          signs(j) = Scalar(-1);
        }
        break;
      }
    }
  }
  return signs;
}

template <typename Scalar>
struct Reorthonormalized {
  BasisT<Scalar> basis;
  /// Upper-triangular T (up to column signs) with input = basis.modes * T.
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> factor;
};

/// Weighted Householder QR of U. The returned factor lets callers keep a
/// product U Y^T invariant by updating Y <- Y T^T.
template <typename DerivedU, typename DerivedWeights>
Reorthonormalized<typename DerivedU::Scalar> reorthonormalize_with_factor(
    const Eigen::MatrixBase<DerivedU>& u, const Eigen::MatrixBase<DerivedWeights>& weights) {
  using Scalar = typename DerivedU::Scalar;
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  detail::require_weights("reorthonormalize", u.rows(), weights);
  const Eigen::Index n = u.rows();
  const Eigen::Index r = u.cols();
  if (r > n) {
    detail::throw_shape("reorthonormalize", "cannot orthonormalize " + detail::shape(n, r));
  }
  const auto sqrt_w = weights.array().sqrt().matrix().eval();
  const MatrixType scaled = sqrt_w.asDiagonal() * u;

  Eigen::HouseholderQR<MatrixType> qr(scaled);
  MatrixType q = qr.householderQ() * MatrixType::Identity(n, r);
  MatrixType t = qr.matrixQR().topRows(r).template triangularView<Eigen::Upper>();

  Scalar largest = 0;
  for (Eigen::Index j = 0; j < r; ++j) largest = std::max(largest, scaled.col(j).norm());
  for (Eigen::Index j = 0; j < r; ++j) {
    if (!(std::abs(t(j, j)) > Scalar(1e-13) * largest)) throw RankDeficientError(j);
    if (t(j, j) < Scalar(0)) {
      q.col(j) *= Scalar(-1);
      t.row(j) *= Scalar(-1);
    }
  }

  MatrixType modes = sqrt_w.cwiseInverse().asDiagonal() * q;
  const auto signs = apply_sign_convention(modes);
  t = signs.asDiagonal() * t;
  return {BasisT<Scalar>{std::move(modes), weights}, std::move(t)};
}

template <typename DerivedU, typename DerivedWeights>
BasisT<typename DerivedU::Scalar> reorthonormalize(const Eigen::MatrixBase<DerivedU>& u,
                                                   const Eigen::MatrixBase<DerivedWeights>& weights) {
  return reorthonormalize_with_factor(u, weights).basis;
}

template <typename Scalar>
struct SymmetricEigT {
  /// Orthonormal eigenvectors, columns ordered like `values`.
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors;
  /// Eigenvalues in descending order.
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values;
};
using SymmetricEig = SymmetricEigT<double>;

template <typename Derived>
SymmetricEigT<typename Derived::Scalar> symmetric_eig(const Eigen::MatrixBase<Derived>& c) {
  using Scalar = typename Derived::Scalar;
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (c.rows() != c.cols()) {
    detail::throw_shape("symmetric_eig", "matrix is " + detail::shape(c.rows(), c.cols()));
  }
  const MatrixType sym = (c + c.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<MatrixType> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::non_convergence,
                "symmetric_eig: no convergence within " +
                    std::to_string(Eigen::SelfAdjointEigenSolver<MatrixType>::m_maxIterations) +
                    " sweeps per eigenvalue");
  }
  // Eigen returns ascending order.
  SymmetricEigT<Scalar> out{solver.eigenvectors().rowwise().reverse(), solver.eigenvalues().reverse()};
  apply_sign_convention(out.vectors);
  return out;
}

/// Inverse of a symmetric positive semidefinite matrix with eigenvalues below
/// eps * lambda_max raised to eps * lambda_max before inversion.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> regularized_inverse(
    const Eigen::MatrixBase<Derived>& c, typename Derived::Scalar eps = kDefaultRegularization) {
  using Scalar = typename Derived::Scalar;
  const auto eig = symmetric_eig(c);
  const Scalar lambda_max = eig.values.size() > 0 ? eig.values(0) : Scalar(0);
  if (!(lambda_max > Scalar(0))) {
    throw Error(ErrorCode::degenerate_correlation,
                "degenerate correlation: all eigenvalues are non-positive");
  }
  const Scalar floor = eps * lambda_max;
  const auto inv = eig.values.unaryExpr([floor](Scalar l) { return Scalar(1) / std::max(l, floor); }).eval();
  return eig.vectors * inv.asDiagonal() * eig.vectors.transpose();
}

template <typename Scalar>
struct TruncatedSvdT {
  /// n x r, orthonormal under the weights used for the decomposition.
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> left;
  /// Leading r singular values, descending.
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> singular;
  /// d x r orthonormal right singular vectors.
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> right;
  /// Every singular value of the input, descending.
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> all_singular;
};
using TruncatedSvd = TruncatedSvdT<double>;

/// Best rank-r approximation of A in the weighted Frobenius norm:
/// A ~ left * diag(singular) * right^T.
template <typename DerivedA, typename DerivedWeights>
TruncatedSvdT<typename DerivedA::Scalar> truncated_svd(const Eigen::MatrixBase<DerivedA>& a, Eigen::Index r,
                                                       const Eigen::MatrixBase<DerivedWeights>& weights) {
  using Scalar = typename DerivedA::Scalar;
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  detail::require_weights("truncated_svd", a.rows(), weights);
  const Eigen::Index k = std::min(a.rows(), a.cols());
  if (r < 0 || r > k) {
    detail::throw_shape("truncated_svd", "rank " + std::to_string(r) + " exceeds min dimension of " +
                                             detail::shape(a.rows(), a.cols()));
  }
  const auto sqrt_w = weights.array().sqrt().matrix().eval();
  const MatrixType scaled = sqrt_w.asDiagonal() * a;

  MatrixType u, v;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> s;
  if (k <= 16) {
    Eigen::JacobiSVD<MatrixType> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = svd.matrixU();
    v = svd.matrixV();
    s = svd.singularValues();
  } else {
    Eigen::BDCSVD<MatrixType> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
      throw Error(ErrorCode::non_convergence, "truncated_svd: divide-and-conquer SVD did not converge");
    }
    u = svd.matrixU();
    v = svd.matrixV();
    s = svd.singularValues();
  }

  TruncatedSvdT<Scalar> out;
  out.left = sqrt_w.cwiseInverse().asDiagonal() * u.leftCols(r);
  out.right = v.leftCols(r);
  out.singular = s.head(r);
  out.all_singular = s;
  const auto signs = apply_sign_convention(out.left);
  out.right = out.right * signs.asDiagonal();
  return out;
}

template <typename DerivedA>
TruncatedSvdT<typename DerivedA::Scalar> truncated_svd(const Eigen::MatrixBase<DerivedA>& a, Eigen::Index r) {
  return truncated_svd(a, r, Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, 1>::Ones(a.rows()));
}

}  // namespace fotd
