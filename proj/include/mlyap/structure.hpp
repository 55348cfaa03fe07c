#pragma once

// Zero-pattern classification of nonnegative matrices: primitive,
// irreducible with period h, or reducible (Frobenius normal form).

#include <string_view>
#include <vector>

#include "mlyap/core.hpp"

namespace mlyap {

enum class StructureKind { Primitive, IrreducibleImprimitive, Reducible };

std::string_view to_string(StructureKind kind);

struct Classification {
  StructureKind kind = StructureKind::Primitive;
  int period = 1;  // h; meaningful for irreducible matrices
  // Reducible: strongly connected components in Frobenius order, so that
  // permuting A by their concatenation gives a block upper-triangular matrix.
  std::vector<std::vector<int>> blocks;
  std::vector<int> permutation;
  // Irreducible with period h >= 2: the h cyclic index classes.
  std::vector<std::vector<int>> cyclic_classes;
};

// Entries at or below this fraction of max|A| are structural zeros.
inline constexpr double kStructuralZero = 1e-14;

/// Boolean adjacency: pattern(i, j) true when A(i, j) is a structural nonzero.
Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> zero_pattern(
    const MatrixXd& A);

Classification classify(const MatrixXd& A);

/// Primitive matrices the analysis reduces to. Reducible matrices yield their
/// diagonal blocks (each reduced again); period-h matrices yield the diagonal
/// blocks of A^h on the cyclic classes. 1 x 1 zero blocks carry no dynamics
/// and are dropped.
std::vector<MatrixXd> primitive_components(const MatrixXd& A,
                                           const Classification& cls);

/// Smallest p with A^p entrywise positive.
int index_of_primitivity(const MatrixXd& A);

inline int wielandt_bound(int n) { return n * n - 2 * n + 2; }

}  // namespace mlyap
