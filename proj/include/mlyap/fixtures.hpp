#pragma once

// Reference matrices used by tests, configs and the CLI.

#include <string_view>

#include "mlyap/core.hpp"

namespace mlyap::fixtures {

/// Well-behaved positive 5 x 5 matrix (lambda ~ 0.966, |v|^2 ~ 1.10).
inline MatrixXd exA() {
  MatrixXd A(5, 5);
  A << 0.1795, 0.0861, 0.1860, 0.0924, 0.1661,
       0.1429, 0.1680, 0.0517, 0.2626, 0.3272,
       0.3558, 0.0127, 0.2797, 0.0221, 0.3227,
       0.2766, 0.2654, 0.1611, 0.0408, 0.0745,
       0.3539, 0.3059, 0.0596, 0.2933, 0.3147;
  return A;
}

/// Badly conditioned 5 x 5 matrix (lambda ~ 0.949, |lambda_2| ~ 0.888,
/// |v|^2 in the hundreds).
inline MatrixXd crazyA() {
  MatrixXd A(5, 5);
  A <<  0.5086, 0.3496,  0.0795, -0.2044, -0.3530,
       -0.6168, 0.1553,  0.5224, -0.0293,  0.0137,
       -0.5526, 0.0069,  0.0008, -0.3189,  0.4345,
        0.4805, 0.8053, -0.5502,  0.6173, -0.3041,
       -0.4307, 0.8960,  0.0255,  0.1454,  0.6965;
  return A;
}

/// Mean-value matrix a G with G the all-ones matrix; lambda = n a.
inline MatrixXd mva(int n, double a) { return MatrixXd::Constant(n, n, a); }

/// Cyclic permutation i -> i+1 (mod n).
inline MatrixXd cycle_permutation(int n) {
  MatrixXd P = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) P(i, (i + 1) % n) = 1.0;
  return P;
}

/// Wielandt's extremal primitive matrix: the n-cycle plus one chord that
/// closes an (n-1)-cycle. Its index of primitivity is n^2 - 2n + 2.
inline MatrixXd wielandt(int n) {
  MatrixXd W = cycle_permutation(n);
  W(n - 2, 0) = 1.0;
  return W;
}

/// Named lookup used by configs; throws ConfigError for unknown names.
MatrixXd by_name(std::string_view name);

}  // namespace mlyap::fixtures
