#pragma once

// Exact propagation of the second-moment matrix S = <x x^T>.
//
//   S' = A S A^T + N(S)
//
// N depends only on the second-order noise statistics, so the map is linear
// and positive on symmetric matrices. Its spectral radius is exp(L_2).

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "mlyap/core.hpp"
#include "mlyap/noise.hpp"

namespace mlyap {

template <typename Scalar>
class SecondMomentOperator {
 public:
  SecondMomentOperator(const Matrix<Scalar>& A, const NoiseModel& model)
      : A_(A), model_(model) {
    require_square_finite(A, "SecondMomentOperator");
    model.validate();
    const bool sym = is_symmetric(A);
    if (model.kind == NoiseKind::SP && !sym) {
      throw Error(ErrorCode::UnsupportedNoise,
                  "SP noise with an asymmetric system is not supported");
    }
    if (model.kind == NoiseKind::SH && !sym) {
      throw Error(ErrorCode::AsymmetricSystem,
                  "SH noise requires a symmetric system matrix");
    }
    A2_ = A.array().square().matrix();
    fq2_ = Scalar(model.f() * model.q * model.q);
    b2_ = Scalar(model.b2);
  }

  int n() const { return static_cast<int>(A_.rows()); }

  Matrix<Scalar> noise_term(const Matrix<Scalar>& S) const {
    const Eigen::Index n = A_.rows();
    switch (model_.kind) {
      case NoiseKind::UH:
        return b2_ * S.trace() * Matrix<Scalar>::Identity(n, n);
      case NoiseKind::SH:
        return b2_ * (S.trace() * Matrix<Scalar>::Identity(n, n) + S);
      case NoiseKind::T:
        return Matrix<Scalar>::Constant(n, n, b2_ * S.sum());
      case NoiseKind::UP: {
        const Vector<Scalar> d = fq2_ * (A2_ * S.diagonal());
        return d.asDiagonal();
      }
      case NoiseKind::SP: {
        Matrix<Scalar> out = fq2_ * A2_.cwiseProduct(S);
        out.diagonal() += fq2_ * (A2_ * S.diagonal());
        return out;
      }
    }
    return Matrix<Scalar>::Zero(n, n);
  }

  Matrix<Scalar> apply(const Matrix<Scalar>& S) const {
    Matrix<Scalar> out = A_ * S * A_.transpose();
    out += noise_term(S);
    return out;
  }

 private:
  Matrix<Scalar> A_;
  Matrix<Scalar> A2_;
  NoiseModel model_;
  Scalar fq2_{};
  Scalar b2_{};
};

/// tr(S^t) = <|x^t|^2> for t = 0..t_max, starting from S^0 = x0 x0^T.
template <typename Scalar>
std::vector<Scalar> exact_second_moment(const Matrix<Scalar>& A,
                                        const NoiseModel& model,
                                        const Vector<Scalar>& x0, int t_max) {
  if (t_max < 0) throw Error(ErrorCode::InvalidArgument, "t_max must be >= 0");
  if (x0.size() != A.rows()) {
    throw Error(ErrorCode::InvalidArgument, "x0 dimension mismatch");
  }
  const SecondMomentOperator<Scalar> op(A, model);
  Matrix<Scalar> S = x0 * x0.transpose();
  std::vector<Scalar> out;
  out.reserve(static_cast<std::size_t>(t_max) + 1);
  out.push_back(S.trace());
  for (int t = 1; t <= t_max; ++t) {
    S = op.apply(S);
    out.push_back(S.trace());
  }
  return out;
}

template <typename Scalar>
struct ExactL2Result {
  Scalar log_radius{};
  Scalar lower{};  // bracket on the spectral radius
  Scalar upper{};
  int iterations = 0;
  bool bracketed = false;  // false when the trace-ratio fallback was used
};

struct PowerIterationOptions {
  double tol = 1e-12;
  int max_iterations = 100000;
};

/// Log spectral radius of the second-moment operator by power iteration.
///
/// The iterate S stays positive definite, so the extreme generalized
/// eigenvalues of (op(S), S) bracket the radius (Collatz-Wielandt on the PSD
/// cone). Iteration stops when the bracket closes to tol. If S becomes
/// singular (e.g. T noise with A = 0) the relative change of the trace ratio
/// is used instead.
template <typename Scalar>
ExactL2Result<Scalar> exact_L2(const Matrix<Scalar>& A,
                               const NoiseModel& model,
                               const PowerIterationOptions& opt = {}) {
  const SecondMomentOperator<Scalar> op(A, model);
  const Eigen::Index n = A.rows();
  const Scalar tol(opt.tol);

  Matrix<Scalar> S = Matrix<Scalar>::Identity(n, n) / Scalar(n);
  ExactL2Result<Scalar> res;
  Scalar prev_ratio(-1);
  int stalled = 0;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    Matrix<Scalar> next = op.apply(S);
    next = (next + next.transpose()) / Scalar(2);
    const Scalar tr = next.trace();
    res.iterations = it;
    if (!(tr > 0) || !std::isfinite(static_cast<double>(tr))) {
      // Nilpotent map: the second moment dies in finitely many steps.
      res.lower = res.upper = Scalar(0);
      res.log_radius = -std::numeric_limits<Scalar>::infinity();
      res.bracketed = true;
      return res;
    }
    const Scalar ratio = tr / S.trace();

    Eigen::LLT<Matrix<Scalar>> llt(S);
    bool have_bracket = false;
    if (llt.info() == Eigen::Success) {
      const Matrix<Scalar> L = llt.matrixL();
      Matrix<Scalar> M = L.template triangularView<Eigen::Lower>().solve(next);
      M = L.template triangularView<Eigen::Lower>()
              .solve(M.transpose())
              .transpose();
      M = (M + M.transpose()) / Scalar(2);
      Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(M,
                                                       Eigen::EigenvaluesOnly);
      if (es.info() == Eigen::Success) {
        const Scalar lo = es.eigenvalues()(0);
        const Scalar hi = es.eigenvalues()(n - 1);
        if (lo > 0 && std::isfinite(static_cast<double>(hi))) {
          have_bracket = true;
          res.lower = lo;
          res.upper = hi;
          if (hi - lo <= tol * hi) {
            res.bracketed = true;
            res.log_radius = std::log((lo + hi) / Scalar(2));
            return res;
          }
        }
      }
    }
    if (!have_bracket) {
      res.lower = res.upper = ratio;
    }
    if (prev_ratio > 0 && std::abs(ratio - prev_ratio) <= tol * ratio) {
      // Bracket unavailable or stuck on a singular limit; the trace ratio
      // has stopped moving.
      if (!have_bracket || ++stalled >= 50) {
        res.log_radius = std::log(ratio);
        return res;
      }
    } else {
      stalled = 0;
    }
    prev_ratio = ratio;
    S = next / tr;
  }
  throw Error(ErrorCode::NonConvergence,
              "second-moment power iteration hit the cap; bracket [" +
                  std::to_string(static_cast<double>(res.lower)) + ", " +
                  std::to_string(static_cast<double>(res.upper)) + "]");
}

}  // namespace mlyap
