#pragma once

// Eigen-structure of the unperturbed matrix: dominant eigen-triple and the
// conditioning diagnostics that control how strongly noise is amplified.

#include <algorithm>
#include <complex>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "mlyap/core.hpp"

namespace mlyap {

template <typename Scalar>
struct DominantTriple {
  Scalar lambda{};
  Vector<Scalar> u;  // right eigenvector, |u| = 1
  Vector<Scalar> v;  // left eigenvector, v.u = 1
};

template <typename Scalar>
struct SpectralSummary {
  int n = 0;
  Scalar lambda{};
  Scalar lambda2_abs{};
  Scalar gap{};
  Vector<Scalar> u;
  Vector<Scalar> v;
  Scalar kappa{};    // |v|
  Scalar v2{};       // |v|^2
  Scalar w2{};       // sum_i v_i^2 u_i^2
  Scalar henrici{};  // ||A A^T - A^T A||_F
  // alpha(r-1) = sum_ab (A^r)_ab^2 / (v^2 lambda^{2r}), i.e. f_u = 1, f_v = v^2.
  Vector<Scalar> alpha;
  // alpha_total(r-1) = (1^T A^r 1)^2 / lambda^{2r}, not yet divided by
  // f_u f_v. Totally correlated noise only sees A^r through 1^T A^r 1.
  Vector<Scalar> alpha_total;
};

// Relative gap below which the dominant eigenvalue is treated as tied.
inline constexpr double kDominanceTolerance = 1e-9;
// Imaginary part (relative to ||A||_F) above which lambda counts as complex.
inline constexpr double kRealTolerance = 1e-10;

namespace detail {

template <typename Scalar>
std::vector<int> order_by_magnitude(
    const Vector<std::complex<Scalar>>& values) {
  std::vector<int> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(values(a)) > std::abs(values(b));
  });
  return order;
}

template <typename Scalar>
void orient(Vector<Scalar>& u) {
  const Scalar s = u.sum();
  if (std::abs(s) > Scalar(1e-12)) {
    if (s < 0) u = -u;
    return;
  }
  Eigen::Index i = 0;
  u.cwiseAbs().maxCoeff(&i);
  if (u(i) < 0) u = -u;
}

}  // namespace detail

/// Dominant eigenvalue with its right (unit) and left (v.u = 1) eigenvectors.
///
/// Throws ComplexDominant when the eigenvalue of largest modulus is not real
/// and NonSimpleDominant when it is tied in modulus with another eigenvalue.
/// Negative dominant eigenvalues are accepted; u is oriented so that its
/// entries sum to a non-negative value.
template <typename Derived>
DominantTriple<typename Derived::Scalar> dominant_triple(
    const Eigen::MatrixBase<Derived>& A_in) {
  using Scalar = typename Derived::Scalar;
  require_square_finite(A_in, "dominant_triple");
  const Matrix<Scalar> A = A_in;
  const Eigen::Index n = A.rows();
  const Scalar scale = A.norm();

  Eigen::EigenSolver<Matrix<Scalar>> es(A, true);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::NonConvergence, "eigen-decomposition failed");
  }
  const Vector<std::complex<Scalar>> values = es.eigenvalues();
  const auto order = detail::order_by_magnitude(values);
  const std::complex<Scalar> top = values(order[0]);

  if (std::abs(top.imag()) > Scalar(kRealTolerance) * scale) {
    throw Error(ErrorCode::ComplexDominant, "dominant eigenvalue is not real");
  }
  const Scalar mag = std::abs(top.real());
  const Scalar second = n > 1 ? std::abs(values(order[1])) : Scalar(0);
  if (mag == Scalar(0) || (mag - second) / mag <= Scalar(kDominanceTolerance)) {
    throw Error(ErrorCode::NonSimpleDominant,
                "dominant eigenvalue is repeated or tied in modulus");
  }

  DominantTriple<Scalar> out;
  out.lambda = top.real();
  out.u = es.eigenvectors().col(order[0]).real();
  out.u.normalize();
  detail::orient(out.u);

  // Left eigenvector from the transpose; never from inverting P.
  Eigen::EigenSolver<Matrix<Scalar>> left(A.transpose(), true);
  if (left.info() != Eigen::Success) {
    throw Error(ErrorCode::NonConvergence, "left eigen-decomposition failed");
  }
  Eigen::Index best = 0;
  (left.eigenvalues().array() - std::complex<Scalar>(out.lambda, 0))
      .abs()
      .minCoeff(&best);
  out.v = left.eigenvectors().col(best).real();
  const Scalar vu = out.v.dot(out.u);
  if (std::abs(vu) < Scalar(1e-14) * out.v.norm()) {
    throw Error(ErrorCode::DefectiveMatrix,
                "left and right dominant eigenvectors are orthogonal");
  }
  out.v /= vu;
  return out;
}

template <typename Derived>
typename Derived::Scalar henrici_number(const Eigen::MatrixBase<Derived>& A) {
  return (A * A.transpose() - A.transpose() * A).norm();
}

/// alpha_r for r = 1..r_max in the f_u = 1, f_v = v^2 convention.
template <typename Derived, typename Scalar = typename Derived::Scalar>
Vector<Scalar> alpha_sequence(const Eigen::MatrixBase<Derived>& A,
                              Scalar lambda, Scalar v2, int r_max) {
  Vector<Scalar> alpha(std::max(r_max, 0));
  const Matrix<Scalar> scaled = A / lambda;
  Matrix<Scalar> power = Matrix<Scalar>::Identity(A.rows(), A.cols());
  for (int r = 0; r < r_max; ++r) {
    power = power * scaled;
    alpha(r) = power.squaredNorm() / v2;
  }
  return alpha;
}

/// (1^T (A/lambda)^r 1)^2 for r = 1..r_max.
template <typename Derived, typename Scalar = typename Derived::Scalar>
Vector<Scalar> alpha_total_sequence(const Eigen::MatrixBase<Derived>& A,
                                    Scalar lambda, int r_max) {
  Vector<Scalar> out(std::max(r_max, 0));
  Vector<Scalar> x = Vector<Scalar>::Ones(A.rows());
  for (int r = 0; r < r_max; ++r) {
    x = (A * x / lambda).eval();
    const Scalar s = x.sum();
    out(r) = s * s;
  }
  return out;
}

template <typename Derived>
SpectralSummary<typename Derived::Scalar> spectral_summary(
    const Eigen::MatrixBase<Derived>& A_in, int r_max = 8) {
  using Scalar = typename Derived::Scalar;
  const Matrix<Scalar> A = A_in;
  const auto triple = dominant_triple(A);

  SpectralSummary<Scalar> s;
  s.n = static_cast<int>(A.rows());
  s.lambda = triple.lambda;
  s.u = triple.u;
  s.v = triple.v;

  if (s.n > 1) {
    const Vector<std::complex<Scalar>> values = A.eigenvalues();
    const auto order = detail::order_by_magnitude(values);
    s.lambda2_abs = std::abs(values(order[1]));
  } else {
    s.lambda2_abs = 0;
  }
  s.gap = std::abs(s.lambda) - s.lambda2_abs;
  s.v2 = s.v.squaredNorm();
  s.kappa = std::sqrt(s.v2);
  s.w2 = (s.v.array().square() * s.u.array().square()).sum();
  s.henrici = henrici_number(A);
  s.alpha = alpha_sequence(A, s.lambda, s.v2, r_max);
  s.alpha_total = alpha_total_sequence(A, s.lambda, r_max);
  return s;
}

/// Largest singular value, (rho(A A^T))^{1/2}.
template <typename Derived>
typename Derived::Scalar matrix_two_norm(const Eigen::MatrixBase<Derived>& A) {
  using Scalar = typename Derived::Scalar;
  if (A.size() == 0) return Scalar(0);
  Eigen::JacobiSVD<Matrix<Scalar>> svd(A);
  return svd.singularValues()(0);
}

/// ||A^p - lambda^p u v^T||_F / ||A^p||_F.
template <typename Derived>
typename Derived::Scalar rank1_power_error(const Eigen::MatrixBase<Derived>& A,
                                           int p) {
  using Scalar = typename Derived::Scalar;
  if (p < 1) throw Error(ErrorCode::InvalidArgument, "power must be >= 1");
  const auto triple = dominant_triple(A);
  // Work with (A / lambda)^p so large p neither overflows nor underflows.
  const Matrix<Scalar> scaled = A / triple.lambda;
  Matrix<Scalar> power = scaled;
  for (int i = 1; i < p; ++i) power = power * scaled;
  const Matrix<Scalar> rank1 = triple.u * triple.v.transpose();
  return (power - rank1).norm() / power.norm();
}

/// Residual of v^2 = 1 - sum_{i != 1} (u . e^R_i)(v . e^L_i), where e^R_i are
/// the columns of the eigenvector matrix P and e^L_i the rows of P^{-1}.
template <typename Derived>
typename Derived::Scalar angle_decomposition_check(
    const Eigen::MatrixBase<Derived>& A_in) {
  using Scalar = typename Derived::Scalar;
  using Complex = std::complex<Scalar>;
  const Matrix<Scalar> A = A_in;
  const auto triple = dominant_triple(A);

  Eigen::EigenSolver<Matrix<Scalar>> es(A, true);
  const Matrix<Complex> P = es.eigenvectors();
  Eigen::JacobiSVD<Matrix<Complex>> svd(P);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= Scalar(1e-12) * sv(0)) {
    throw Error(ErrorCode::DefectiveMatrix,
                "eigenvector matrix is numerically singular");
  }
  const Matrix<Complex> Pinv = P.fullPivLu().inverse();
  const auto order = detail::order_by_magnitude<Scalar>(es.eigenvalues());

  const Vector<Complex> u = triple.u.template cast<Complex>();
  const Vector<Complex> v = triple.v.template cast<Complex>();
  Complex sum(0);
  for (Eigen::Index i = 0; i < P.cols(); ++i) {
    if (i == order[0]) continue;
    const Complex ur = (u.transpose() * P.col(i))(0);
    const Complex vl = (Pinv.row(i) * v)(0);
    sum += ur * vl;
  }
  return std::abs(Complex(triple.v.squaredNorm() - 1) + sum);
}

}  // namespace mlyap
