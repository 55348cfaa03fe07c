#pragma once

// The five multiplicative noise models and their second-order statistics.

#include <optional>
#include <string>
#include <string_view>

#include "mlyap/core.hpp"
#include "mlyap/random.hpp"
#include "mlyap/spectral.hpp"

namespace mlyap {

enum class NoiseKind { UH, SH, T, UP, SP };
enum class Distribution { Normal, Uniform };

std::string_view to_string(NoiseKind kind);
std::string_view to_string(Distribution dist);
NoiseKind parse_noise_kind(std::string_view text);
Distribution parse_distribution(std::string_view text);

/// Homogeneous kinds (UH, SH, T) use b2 as the element variance regardless of
/// distribution. Proportional kinds (UP, SP) draw B_ij = q A_ij xi with xi
/// standard normal or uniform on [-1, 1], so the effective variance is
/// f q^2 A_ij^2 with f = 1 or 1/3.
struct NoiseModel {
  NoiseKind kind = NoiseKind::UH;
  double b2 = 0.0;
  double q = 0.0;
  Distribution dist = Distribution::Normal;
  // Rejection bound on |B_ij|; off unless set.
  std::optional<double> truncate_at;

  static NoiseModel uh(double b2, Distribution d = Distribution::Normal) {
    return {NoiseKind::UH, b2, 0.0, d, {}};
  }
  static NoiseModel sh(double b2, Distribution d = Distribution::Normal) {
    return {NoiseKind::SH, b2, 0.0, d, {}};
  }
  static NoiseModel t(double b2, Distribution d = Distribution::Normal) {
    return {NoiseKind::T, b2, 0.0, d, {}};
  }
  static NoiseModel up(double q, Distribution d = Distribution::Normal) {
    return {NoiseKind::UP, 0.0, q, d, {}};
  }
  static NoiseModel sp(double q, Distribution d = Distribution::Normal) {
    return {NoiseKind::SP, 0.0, q, d, {}};
  }

  double f() const { return dist == Distribution::Normal ? 1.0 : 1.0 / 3.0; }
  bool homogeneous() const {
    return kind == NoiseKind::UH || kind == NoiseKind::SH ||
           kind == NoiseKind::T;
  }
  bool proportional() const { return !homogeneous(); }
  bool symmetric_correlated() const {
    return kind == NoiseKind::SH || kind == NoiseKind::SP;
  }
  /// Exponent k of n^k: 2 for totally correlated noise, 1 otherwise.
  int k() const { return kind == NoiseKind::T ? 2 : 1; }

  void validate() const;
};

template <typename Scalar>
struct NoiseStats {
  Scalar eps2{};
  Scalar f_u{};
  Scalar f_v{};
  int k = 1;
};

namespace detail {
inline double delta(int a, int b) { return a == b ? 1.0 : 0.0; }

template <typename Derived>
void require_symmetric_for(const NoiseModel& model,
                           const Eigen::MatrixBase<Derived>& A) {
  if (model.symmetric_correlated() && !is_symmetric(A)) {
    throw Error(ErrorCode::AsymmetricSystem,
                std::string(to_string(model.kind)) +
                    " noise requires a symmetric system matrix");
  }
}
}  // namespace detail

/// <B_ij B_kl> from the correlation rule of the model.
template <typename Derived>
double noise_covariance(const NoiseModel& model,
                        const Eigen::MatrixBase<Derived>& A, int i, int j,
                        int k, int l) {
  const int n = static_cast<int>(A.rows());
  if (i < 0 || j < 0 || k < 0 || l < 0 || i >= n || j >= n || k >= n ||
      l >= n) {
    throw Error(ErrorCode::InvalidArgument, "noise_covariance: index range");
  }
  using detail::delta;
  const double same = delta(i, k) * delta(j, l);
  const double swapped = delta(i, l) * delta(j, k);
  const double fq2 = model.f() * model.q * model.q;
  const double aij = static_cast<double>(A(i, j));
  switch (model.kind) {
    case NoiseKind::UH: return model.b2 * same;
    case NoiseKind::SH: return model.b2 * (same + swapped);
    case NoiseKind::T: return model.b2;
    case NoiseKind::UP: return fq2 * aij * aij * same;
    case NoiseKind::SP: return fq2 * aij * aij * (same + swapped);
  }
  return 0.0;
}

/// eps^2 = <(v^T B u / lambda)^2> together with f_u, f_v and k.
///
/// f_u, f_v are defined for UH and T. For SH they are set so that
/// f_u f_v b^2 / lambda^2 = eps^2 (f_u = 1, f_v = v^2 + 1); for the
/// proportional kinds they are 1 and unused.
template <typename Derived>
NoiseStats<typename Derived::Scalar> epsilon_squared(
    const NoiseModel& model,
    const SpectralSummary<typename Derived::Scalar>& spec,
    const Eigen::MatrixBase<Derived>& A) {
  using Scalar = typename Derived::Scalar;
  model.validate();
  detail::require_symmetric_for(model, A);
  const Scalar lambda2 = spec.lambda * spec.lambda;
  const Scalar b2(model.b2);
  const Scalar fq2(model.f() * model.q * model.q);
  const auto& u = spec.u;
  const auto& v = spec.v;

  NoiseStats<Scalar> st;
  st.k = model.k();
  switch (model.kind) {
    case NoiseKind::UH:
      st.f_u = 1;
      st.f_v = spec.v2;
      st.eps2 = spec.v2 * b2 / lambda2;
      break;
    case NoiseKind::SH:
      st.f_u = 1;
      st.f_v = spec.v2 + 1;
      st.eps2 = 2 * b2 / lambda2;
      break;
    case NoiseKind::T: {
      const Scalar su = u.sum();
      const Scalar sv = v.sum();
      st.f_u = su * su;
      st.f_v = sv * sv;
      st.eps2 = b2 * st.f_u * st.f_v / lambda2;
      break;
    }
    case NoiseKind::UP: {
      const auto vv = v.array().square().matrix();
      const auto uu = u.array().square().matrix();
      const Matrix<Scalar> A2 = A.array().square().matrix();
      st.f_u = st.f_v = 1;
      st.eps2 = fq2 * (vv.transpose() * A2 * uu)(0) / lambda2;
      break;
    }
    case NoiseKind::SP: {
      const Matrix<Scalar> A2 = A.array().square().matrix();
      const auto vv = v.array().square().matrix();
      const auto uu = u.array().square().matrix();
      const Vector<Scalar> vu = v.cwiseProduct(u);
      st.f_u = st.f_v = 1;
      st.eps2 = fq2 *
                ((vv.transpose() * A2 * uu)(0) + (vu.transpose() * A2 * vu)(0)) /
                lambda2;
      break;
    }
  }
  return st;
}

/// Fills B with one draw of the noise matrix. B must already be n x n.
void sample_noise_into(const NoiseModel& model, const MatrixXd& A,
                       Engine& rng, MatrixXd& B);

MatrixXd sample_noise(const NoiseModel& model, const MatrixXd& A, Engine& rng);

}  // namespace mlyap
