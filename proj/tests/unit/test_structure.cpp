#include <gtest/gtest.h>

#include <algorithm>
#include <complex>
#include <random>

#include "mlyap/fixtures.hpp"
#include "mlyap/structure.hpp"
#include "oracles.hpp"

using namespace mlyap;

namespace {

MatrixXd random_sparse(std::mt19937_64& rng, int n, double density) {
  std::uniform_real_distribution<double> u(0, 1);
  MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = u(rng) < density ? u(rng) + 0.1 : 0.0;
  return A;
}

MatrixXd permuted(const MatrixXd& A, const std::vector<int>& p) {
  const int n = static_cast<int>(A.rows());
  MatrixXd B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = A(p[i], p[j]);
  return B;
}

}  // namespace

TEST(Classify, Fixtures) {
  const auto a = classify(fixtures::exA());
  EXPECT_EQ(a.kind, StructureKind::Primitive);
  EXPECT_EQ(a.period, 1);
  const auto p = classify(fixtures::cycle_permutation(3));
  EXPECT_EQ(p.kind, StructureKind::IrreducibleImprimitive);
  EXPECT_EQ(p.period, 3);
  ASSERT_EQ(p.cyclic_classes.size(), 3u);
  for (const auto& c : p.cyclic_classes) EXPECT_EQ(c.size(), 1u);
  MatrixXd T(3, 3);
  T << 1, 1, 0, 0, 1, 1, 0, 0, 1;
  const auto t = classify(T);
  EXPECT_EQ(t.kind, StructureKind::Reducible);
  EXPECT_EQ(t.blocks.size(), 3u);
  MatrixXd z(1, 1);
  z << 0.0;
  EXPECT_EQ(classify(z).kind, StructureKind::Reducible);
  z << 2.0;
  EXPECT_EQ(classify(z).kind, StructureKind::Primitive);
}

TEST(Classify, NegativeEntryRejected) {
  try {
    classify(fixtures::crazyA());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NegativeEntry);
  }
}

TEST(Classify, StructuralZeroThreshold) {
  MatrixXd A = fixtures::cycle_permutation(4);
  A(0, 0) = 1e-16;  // below kStructuralZero relative to max
  EXPECT_EQ(classify(A).kind, StructureKind::IrreducibleImprimitive);
  A(0, 0) = 1e-6;
  EXPECT_EQ(classify(A).kind, StructureKind::Primitive);
}

TEST(Classify, AgreesWithBooleanPowerOracle) {
  std::mt19937_64 rng(12);
  int counts[3] = {0, 0, 0};
  for (int trial = 0; trial < 400; ++trial) {
    const int n = 2 + trial % 7;
    const MatrixXd A = random_sparse(rng, n, 0.15 + 0.1 * (trial % 4));
    const auto c = classify(A);
    const bool irr = oracle::irreducible(A);
    if (!irr) {
      EXPECT_EQ(c.kind, StructureKind::Reducible) << A;
      ++counts[2];
      continue;
    }
    const int h = oracle::period(A);
    EXPECT_EQ(c.period, h) << A;
    if (h == 1) {
      EXPECT_EQ(c.kind, StructureKind::Primitive);
      EXPECT_EQ(index_of_primitivity(A),
                oracle::primitivity_index(A, wielandt_bound(n)));
      ++counts[0];
    } else {
      EXPECT_EQ(c.kind, StructureKind::IrreducibleImprimitive);
      ++counts[1];
    }
  }
  // the sample must exercise every branch
  EXPECT_GT(counts[0], 20);
  EXPECT_GT(counts[1], 0);
  EXPECT_GT(counts[2], 20);
}

TEST(Classify, ImprimitiveCases) {
  // bipartite pattern: period 2
  MatrixXd B = MatrixXd::Zero(4, 4);
  B.topRightCorner(2, 2).setConstant(0.5);
  B.bottomLeftCorner(2, 2).setConstant(0.5);
  const auto c = classify(B);
  EXPECT_EQ(c.kind, StructureKind::IrreducibleImprimitive);
  EXPECT_EQ(c.period, 2);
  for (int h : {2, 3, 5, 6}) {
    EXPECT_EQ(classify(fixtures::cycle_permutation(h)).period, h);
  }
}

TEST(Classify, CyclicClassesShiftAlongEdges) {
  // random block-cyclic patterns: edges only run from class k to k+1
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  int seen = 0;
  for (int trial = 0; trial < 500 && seen < 40; ++trial) {
    const int h = 2 + trial % 3;
    const int n = h + 1 + trial % 5;
    std::vector<int> label(n);
    for (int i = 0; i < n; ++i) label[i] = i < h ? i : static_cast<int>(u(rng) * h);
    std::shuffle(label.begin(), label.end(), rng);
    MatrixXd A = MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (label[j] == (label[i] + 1) % h && u(rng) < 0.6) A(i, j) = u(rng) + 0.1;
    if (!oracle::irreducible(A)) continue;
    ++seen;
    const auto c = classify(A);
    ASSERT_EQ(c.kind, StructureKind::IrreducibleImprimitive);
    ASSERT_EQ(c.period, oracle::period(A));
    ASSERT_EQ(static_cast<int>(c.cyclic_classes.size()), c.period);
    std::vector<int> cls(n, -1);
    for (int k = 0; k < c.period; ++k)
      for (int i : c.cyclic_classes[k]) cls[i] = k;
    EXPECT_TRUE(std::find(cls.begin(), cls.end(), -1) == cls.end());
    int shift = -1;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (A(i, j) <= 0) continue;
        const int s = ((cls[j] - cls[i]) % c.period + c.period) % c.period;
        if (shift < 0) shift = s;
        EXPECT_EQ(s, shift);
      }
    EXPECT_NE(shift, 0);
  }
  EXPECT_GE(seen, 20);
}

TEST(Classify, FrobeniusFormIsBlockTriangular) {
  std::mt19937_64 rng(8);
  int seen = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 3 + trial % 6;
    const MatrixXd A = random_sparse(rng, n, 0.2);
    const auto c = classify(A);
    if (c.kind != StructureKind::Reducible) continue;
    ++seen;
    ASSERT_EQ(static_cast<int>(c.permutation.size()), n);
    std::vector<int> block_of(n, -1);
    int covered = 0;
    for (std::size_t b = 0; b < c.blocks.size(); ++b) {
      for (int i : c.blocks[b]) block_of[i] = static_cast<int>(b);
      covered += static_cast<int>(c.blocks[b].size());
      // each diagonal block is strongly connected (or a single index)
      if (c.blocks[b].size() > 1) {
        const int m = static_cast<int>(c.blocks[b].size());
        MatrixXd S(m, m);
        for (int x = 0; x < m; ++x)
          for (int y = 0; y < m; ++y) S(x, y) = A(c.blocks[b][x], c.blocks[b][y]);
        EXPECT_TRUE(oracle::irreducible(S));
      }
    }
    EXPECT_EQ(covered, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (block_of[i] > block_of[j]) EXPECT_EQ(A(i, j), 0.0);
    const MatrixXd P = permuted(A, c.permutation);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j)
        if (block_of[c.permutation[i]] != block_of[c.permutation[j]])
          EXPECT_EQ(P(i, j), 0.0);
  }
  EXPECT_GT(seen, 50);
}

TEST(Classify, PermutationInvariance) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + trial % 5;
    const MatrixXd A = random_sparse(rng, n, 0.3);
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    std::shuffle(p.begin(), p.end(), rng);
    const auto c1 = classify(A);
    const auto c2 = classify(permuted(A, p));
    EXPECT_EQ(c1.kind, c2.kind);
    if (c1.kind != StructureKind::Reducible) EXPECT_EQ(c1.period, c2.period);
    EXPECT_EQ(c1.blocks.size(), c2.blocks.size());
  }
}

TEST(Primitivity, WielandtMatrixAttainsBound) {
  for (int n = 2; n <= 8; ++n) {
    const MatrixXd W = fixtures::wielandt(n);
    EXPECT_EQ(classify(W).kind, StructureKind::Primitive);
    EXPECT_EQ(index_of_primitivity(W), wielandt_bound(n)) << n;
    EXPECT_EQ(oracle::primitivity_index(W, 100), wielandt_bound(n)) << n;
  }
  EXPECT_EQ(index_of_primitivity(fixtures::exA()), 1);
}

TEST(Primitivity, NotPrimitiveRejected) {
  try {
    index_of_primitivity(fixtures::cycle_permutation(4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPrimitive);
  }
}

TEST(Spectrum, ImprimitiveSpectrumIsRotationInvariant) {
  // weighted 4-cycle with a chord that keeps period 2
  MatrixXd A = MatrixXd::Zero(4, 4);
  A(0, 1) = 0.7;
  A(1, 2) = 1.2;
  A(2, 3) = 0.4;
  A(3, 0) = 0.9;
  A(0, 3) = 0.3;
  const auto c = classify(A);
  ASSERT_EQ(c.period, 2);
  const Eigen::VectorXcd ev = A.eigenvalues();
  const std::complex<double> omega = std::polar(1.0, 2 * M_PI / c.period);
  for (int i = 0; i < ev.size(); ++i) {
    double best = 1e9;
    for (int j = 0; j < ev.size(); ++j)
      best = std::min(best, std::abs(ev(i) * omega - ev(j)));
    EXPECT_LT(best, 1e-10);
  }
}

TEST(Components, ImprimitiveGivesPowerBlocks) {
  MatrixXd A = MatrixXd::Zero(4, 4);
  A.topRightCorner(2, 2) << 0.5, 0.2, 0.1, 0.4;
  A.bottomLeftCorner(2, 2) << 0.3, 0.6, 0.2, 0.2;
  const auto c = classify(A);
  const auto comps = primitive_components(A, c);
  ASSERT_EQ(comps.size(), 2u);
  const MatrixXd A2 = A * A;
  double rho_blocks = 0;
  for (const auto& m : comps) {
    EXPECT_EQ(m.rows(), 2);
    EXPECT_EQ(classify(m).kind, StructureKind::Primitive);
    rho_blocks = std::max(rho_blocks, m.eigenvalues().cwiseAbs().maxCoeff());
  }
  EXPECT_NEAR(rho_blocks, A2.eigenvalues().cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Components, ReducibleSplitsAndDropsZeroBlocks) {
  MatrixXd A = MatrixXd::Zero(5, 5);
  A.topLeftCorner(2, 2) << 0.5, 0.5, 0.5, 0.5;
  A(1, 2) = 0.3;  // coupling into a zero 1x1 block
  A(2, 3) = 0.2;
  A.bottomRightCorner(2, 2) << 0.1, 0.9, 0.9, 0.1;
  const auto c = classify(A);
  ASSERT_EQ(c.kind, StructureKind::Reducible);
  const auto comps = primitive_components(A, c);
  ASSERT_EQ(comps.size(), 2u);
  for (const auto& m : comps) {
    EXPECT_EQ(m.rows(), 2);
    EXPECT_EQ(classify(m).kind, StructureKind::Primitive);
  }
}
