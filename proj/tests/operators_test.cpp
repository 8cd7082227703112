// Copyright 2026 The hbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace hbench {
namespace {

using testing::rel_error;
using testing::taylor_oracle;

// --- matrix_exponential -----------------------------------------------------

TEST(MatrixExponential, ZeroIsIdentity) {
  for (double tau : {0.0, 1.0, -3.5, 1e6})
    EXPECT_EQ(matrix_exponential(DenseMatrix(3, 3), tau), DenseMatrix::identity(3));
}

TEST(MatrixExponential, DiagonalLog2) {
  const DenseMatrix A = DenseMatrix::diagonal(std::vector<double>{std::log(2.0), 0.0});
  const DenseMatrix E = matrix_exponential(A, 1.0);
  const DenseMatrix ref = taylor_oracle(A, 1.0);
  EXPECT_NEAR(E(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(E(1, 1), 1.0, 1e-15);
  EXPECT_EQ(E(0, 1), 0.0);
  EXPECT_LE(rel_error(E, ref), 1e-15);
}

TEST(MatrixExponential, F1SupraAtTauZeroIsIdentity) {
  const SupraMatrix S = assemble_supra(testing::f1());
  const DenseMatrix P = matrix_exponential(S.data, 0.0);
  EXPECT_EQ(P, DenseMatrix::identity(5));
  EXPECT_EQ(SupraMatrix({P, S.layout}).block(Layer::kStakeholder, Layer::kMetric).max_abs(), 0.0);
}

TEST(MatrixExponential, MatchesTaylorOracleOnRandomMatrices) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    DenseMatrix A = testing::random_matrix(rng, 6, 6);
    A *= 2.0 / A.norm1() * std::uniform_real_distribution<double>(0.05, 1.0)(rng);
    EXPECT_LE(rel_error(matrix_exponential(A, 1.0), taylor_oracle(A, 1.0)), 1e-10) << trial;
  }
}

TEST(MatrixExponential, HalfSquaringSelfConsistency) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    const DenseMatrix A = testing::random_matrix(rng, 5, 5, -2, 2);
    const double tau = std::uniform_real_distribution<double>(0.1, 2.0)(rng);
    const DenseMatrix half = matrix_exponential(A, tau / 2);
    EXPECT_LE(rel_error(half * half, matrix_exponential(A, tau)), 1e-9);
  }
}

TEST(MatrixExponential, SemigroupProperty) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const DenseMatrix A = testing::random_matrix(rng, 4, 4, -1, 1);
    const double t1 = std::uniform_real_distribution<double>(0, 1.5)(rng);
    const double t2 = std::uniform_real_distribution<double>(0, 1.5)(rng);
    const DenseMatrix lhs = matrix_exponential(A, t1 + t2);
    const DenseMatrix rhs = matrix_exponential(A, t1) * matrix_exponential(A, t2);
    EXPECT_LE(rel_error(rhs, lhs), 1e-8);
  }
}

TEST(MatrixExponential, SymmetricInputGivesSymmetricOutput) {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 50; ++trial) {
    DenseMatrix A = testing::random_matrix(rng, 6, 6, -1, 1);
    A = (A + A.transpose()) * 0.5;
    const DenseMatrix E = matrix_exponential(A, 1.3);
    EXPECT_LE(testing::max_abs_diff(E, E.transpose()), 1e-12 * E.max_abs());
  }
}

TEST(MatrixExponential, LargeNormStillAccurate) {
  // Scaling and squaring path with several squarings; nilpotent part keeps
  // a closed form: exp(t [[a, b], [0, a]]) = e^{ta} [[1, tb], [0, 1]].
  const DenseMatrix A{{3.0, 5.0}, {0.0, 3.0}};
  const DenseMatrix E = matrix_exponential(A, 2.0);
  const double e6 = std::exp(6.0);
  EXPECT_NEAR(E(0, 0) / e6, 1.0, 1e-13);
  EXPECT_NEAR(E(0, 1) / (10.0 * e6), 1.0, 1e-13);
  EXPECT_EQ(E(1, 0), 0.0);
}

TEST(MatrixExponential, Errors) {
  EXPECT_THROW(matrix_exponential(DenseMatrix(2, 3), 1.0), DimensionError);
  EXPECT_THROW(matrix_exponential(DenseMatrix::identity(2), std::nan("")), NumericRangeError);
  EXPECT_THROW(matrix_exponential(DenseMatrix{{800.0}}, 1.0), NumericRangeError);
}

// --- laplacian --------------------------------------------------------------

TEST(Laplacian, F1ExcludesSelfLoops) {
  const DenseMatrix L = laplacian(testing::f1().A_T());
  EXPECT_EQ(L, (DenseMatrix{{0.5, -0.5}, {-0.5, 0.5}}));
}

TEST(Laplacian, ZeroAndRowSums) {
  EXPECT_EQ(laplacian(DenseMatrix(3, 3)), DenseMatrix(3, 3));
  std::mt19937_64 rng(25);
  for (int trial = 0; trial < 50; ++trial) {
    const DenseMatrix L = laplacian(testing::random_matrix(rng, 5, 5, 0, 1));
    for (std::size_t i = 0; i < 5; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < 5; ++j) s += L(i, j);
      EXPECT_NEAR(s, 0.0, 1e-14);
    }
  }
  EXPECT_THROW(laplacian(DenseMatrix(2, 3)), DimensionError);
}

// --- spectral_radius --------------------------------------------------------

TEST(SpectralRadius, Examples) {
  EXPECT_NEAR(spectral_radius(DenseMatrix::identity(2)), 1.0, 1e-12);
  EXPECT_NEAR(spectral_radius(DenseMatrix{{0.0, 1.0}, {1.0, 0.0}}), 1.0, 1e-12);
  EXPECT_NEAR(spectral_radius(testing::f1().A_T()), 1.5, 1e-9);
}

TEST(SpectralRadius, MatchesCharacteristicPolynomial) {
  std::mt19937_64 rng(26);
  for (std::size_t n : {2u, 3u})
    for (int trial = 0; trial < 200; ++trial) {
      DenseMatrix S = testing::random_matrix(rng, n, n, -1, 1);
      S = (S + S.transpose()) * 0.5;
      const auto ev = testing::char_poly_eigenvalues(S);
      const double want = std::max(std::abs(ev.front()), std::abs(ev.back()));
      EXPECT_NEAR(spectral_radius(S), want, 1e-8) << "n=" << n << " trial " << trial;
    }
}

TEST(SpectralRadius, PlusMinusPairUsesShift) {
  // Eigenvalues +2 and -2: plain power iteration oscillates.
  const DenseMatrix A{{0.0, 2.0}, {2.0, 0.0}};
  EXPECT_NEAR(spectral_radius(A), 2.0, 1e-9);
  const DenseMatrix B{{1.0, 0.0}, {0.0, -1.0}};
  EXPECT_NEAR(spectral_radius(B), 1.0, 1e-9);
}

TEST(SpectralRadius, DeterministicFromFixedStart) {
  const DenseMatrix A = testing::f1().A_T();
  EXPECT_EQ(spectral_radius(A), spectral_radius(A));
}

TEST(SpectralRadius, NonConvergenceCarriesLastIterate) {
  // A rotation has complex dominant eigenvalues; power iteration cannot settle.
  const DenseMatrix R{{0.0, -1.0}, {1.0, 0.0}};
  try {
    spectral_radius(R, 1e-12, 50);
    FAIL();
  } catch (const NonConvergenceError& e) {
    EXPECT_EQ(e.last_vector().size(), 2u);
  }
}

TEST(SpectralRadius, InvalidArguments) {
  EXPECT_THROW(spectral_radius(DenseMatrix(2, 3)), DimensionError);
  EXPECT_THROW(spectral_radius(DenseMatrix::identity(2), 0.0), ConfigError);
}

TEST(SymmetricEigenvalues, MatchCharacteristicPolynomial) {
  std::mt19937_64 rng(27);
  for (int trial = 0; trial < 100; ++trial) {
    DenseMatrix S = testing::random_matrix(rng, 3, 3, -1, 1);
    S = (S + S.transpose()) * 0.5;
    const auto want = testing::char_poly_eigenvalues(S);
    const auto got = symmetric_eigenvalues(S);
    ASSERT_EQ(got.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(got[i], want[i], 1e-10);
  }
  const auto f1 = symmetric_eigenvalues(testing::f1().A_T());
  EXPECT_NEAR(f1[0], 1.5, 1e-12);
  EXPECT_NEAR(f1[1], 0.5, 1e-12);
}

// --- projection -------------------------------------------------------------

ConstraintSet capped(double cap) {
  ConstraintSet C;
  C.column_sum_cap = {cap};
  return C;
}

TEST(Project, ClipsNegativesAndBox) {
  ConstraintSet C;
  EXPECT_EQ(project(DenseMatrix{{-0.2}}, C)(0, 0), 0.0);
  C.box_upper = 1.0;
  EXPECT_EQ(project(DenseMatrix{{1.3}}, C)(0, 0), 1.0);
}

TEST(Project, CappedSimplexExample) {
  const DenseMatrix P = project(DenseMatrix{{0.8}, {0.6}}, capped(1.0));
  EXPECT_NEAR(P(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(P(1, 0), 0.4, 1e-15);
  const auto g = testing::grid_qp_2d(0.8, 0.6, 1.0, 1e9);
  EXPECT_NEAR(P(0, 0), g.first, 1e-3);
  EXPECT_NEAR(P(1, 0), g.second, 1e-3);
}

TEST(Project, MatchesGridQpOn2dCases) {
  std::mt19937_64 rng(28);
  std::uniform_real_distribution<double> v(-0.5, 1.5), c(0.2, 1.5), b(0.3, 1.2);
  for (int trial = 0; trial < 60; ++trial) {
    const double v1 = v(rng), v2 = v(rng), cap = c(rng);
    ConstraintSet C = capped(cap);
    double box = 1e9;
    if (trial % 2) C.box_upper = box = b(rng);
    const DenseMatrix P = project(DenseMatrix{{v1}, {v2}}, C);
    const auto g = testing::grid_qp_2d(v1, v2, cap, box);
    EXPECT_NEAR(P(0, 0), g.first, 1e-3) << v1 << "," << v2 << " cap " << cap << " box " << box;
    EXPECT_NEAR(P(1, 0), g.second, 1e-3);
  }
}

TEST(Project, ResultSatisfiesConstraints) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    ConstraintSet C;
    C.box_upper = 0.7;
    C.column_sum_cap = {1.0, 0.5, 2.0};
    const DenseMatrix P = project(testing::random_matrix(rng, 6, 3, -1, 2), C);
    EXPECT_TRUE(satisfies(P, C, 1e-12));
  }
}

TEST(ProjectProperty, IdempotentAndNonExpansive) {
  std::mt19937_64 rng(30);
  std::uniform_real_distribution<double> cap(0.3, 2.0);
  for (int trial = 0; trial < 10000; ++trial) {
    ConstraintSet C;
    C.nonneg = trial % 5 != 0;
    if (trial % 3 == 0) C.box_upper = 0.8;
    if (trial % 4 != 0) C.column_sum_cap = {cap(rng)};
    const DenseMatrix X = testing::random_matrix(rng, 4, 2, -1, 1.5);
    const DenseMatrix Y = testing::random_matrix(rng, 4, 2, -1, 1.5);
    const DenseMatrix PX = project(X, C), PY = project(Y, C);
    ASSERT_EQ(project(PX, C), PX) << trial;
    ASSERT_LE((PX - PY).frobenius(), (X - Y).frobenius() * (1 + 1e-12) + 1e-15) << trial;
  }
}

TEST(Project, SparsityTruncatesAfterwards) {
  ConstraintSet C;
  C.sparsity_k = 1;
  const DenseMatrix P = project(DenseMatrix{{0.2}, {0.5}, {0.1}}, C);
  EXPECT_EQ(P, (DenseMatrix{{0.0}, {0.5}, {0.0}}));
  EXPECT_FALSE(C.is_convex());
}

TEST(Project, InfeasibleOrInvalidConfigurations) {
  ConstraintSet C;
  C.box_upper = -0.5;
  EXPECT_THROW(project(DenseMatrix(2, 2), C), ConfigError);
  C = {};
  C.column_sum_cap = {0.0};
  EXPECT_THROW(project(DenseMatrix(2, 2), C), ConfigError);
  C = {};
  C.column_sum_cap = {1.0, 2.0, 3.0};
  EXPECT_THROW(project(DenseMatrix(2, 2), C), ConfigError);
  C = {};
  C.sparsity_k = 0;
  EXPECT_THROW(project(DenseMatrix(2, 2), C), ConfigError);
}

TEST(Project, NonFiniteInputRejected) {
  EXPECT_THROW(project(DenseMatrix{{std::nan("")}}, ConstraintSet{}), NumericRangeError);
}

}  // namespace
}  // namespace hbench
