#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace mlyap {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

enum class ErrorCode {
  InvalidArgument,
  ConfigError,
  NonSimpleDominant,
  ComplexDominant,
  DefectiveMatrix,
  AsymmetricSystem,
  UnsupportedNoise,
  NonConvergence,
  DegenerateWindow,
  NegativeEntry,
  NotPrimitive,
  RejectionExhausted,
  UnstableMean,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::NonSimpleDominant: return "NonSimpleDominant";
    case ErrorCode::ComplexDominant: return "ComplexDominant";
    case ErrorCode::DefectiveMatrix: return "DefectiveMatrix";
    case ErrorCode::AsymmetricSystem: return "AsymmetricSystem";
    case ErrorCode::UnsupportedNoise: return "UnsupportedNoise";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::DegenerateWindow: return "DegenerateWindow";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::NotPrimitive: return "NotPrimitive";
    case ErrorCode::RejectionExhausted: return "RejectionExhausted";
    case ErrorCode::UnstableMean: return "UnstableMean";
  }
  return "Unknown";
}

/// Every recoverable failure in the library is reported through this type;
/// the code lets callers (and the CLI) react without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

template <typename Derived>
void require_square_finite(const Eigen::MatrixBase<Derived>& A,
                           std::string_view who) {
  if (A.rows() != A.cols() || A.rows() < 1) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(who) + ": matrix must be square and non-empty");
  }
  if (!A.allFinite()) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(who) + ": matrix has non-finite entries");
  }
}

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& A,
                  typename Derived::RealScalar rel_tol = 1e-12) {
  if (A.rows() != A.cols()) return false;
  const auto scale = A.norm();
  return (A - A.transpose()).norm() <= rel_tol * (scale > 0 ? scale : 1);
}

/// n^k for the small integer exponents used by the noise models.
template <typename Scalar>
Scalar int_pow(Scalar base, int k) {
  Scalar out(1);
  for (int i = 0; i < k; ++i) out *= base;
  return out;
}

}  // namespace mlyap
