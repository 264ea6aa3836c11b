#include <gtest/gtest.h>

#include <random>

#include "sdcx/matcore.hpp"

using namespace sdcx;

namespace {

Mat random_orthogonal(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> N(0, 1);
  Mat M(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) M(i, j) = N(rng);
  return Eigen::HouseholderQR<Mat>(M).householderQ();
}

}  // namespace

TEST(SpecialMatrices, OrderOneValues) {
  EXPECT_EQ(F(1)(0, 0), 1.0);
  EXPECT_EQ(G(1)(0, 0), 0.0);
  EXPECT_EQ(H(1)(0, 0), 0.0);
}

TEST(SpecialMatrices, F2IsSwap) {
  Mat expected(2, 2);
  expected << 0, 1, 1, 0;
  EXPECT_EQ(F(2), expected);
}

TEST(SpecialMatrices, PatternsAndInvolution) {
  for (Index n = 1; n <= 9; ++n) {
    EXPECT_TRUE((F(n) * F(n)).isApprox(Mat::Identity(n, n)));
    EXPECT_EQ(G(n), G(n).transpose());
    EXPECT_EQ(H(n), H(n).transpose());
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        EXPECT_EQ(G(n)(i, j), i + j == n ? 1.0 : 0.0);
        EXPECT_EQ(H(n)(i, j), i + j == n - 2 ? 1.0 : 0.0);
      }
  }
  // F_2 G_2 is the nilpotent Jordan block.
  Mat J(2, 2);
  J << 0, 1, 0, 0;
  EXPECT_EQ(F(2) * G(2), J);
}

TEST(SpecialMatrices, RejectsOrderZero) { EXPECT_THROW(special_matrix(Special::F, 0), InvalidArgument); }

TEST(Commutator, DiagonalAndIdentity) {
  Mat D1 = Vec::LinSpaced(2, 1, 2).asDiagonal();
  Mat D2 = Vec::LinSpaced(2, 3, 4).asDiagonal();
  EXPECT_EQ(max_abs(commutator(D1, D2)), 0.0);
  Mat M = Mat::Random(4, 4);
  EXPECT_EQ(max_abs(commutator(Mat::Identity(4, 4), M)), 0.0);
}

TEST(Commutator, SignFlipAntisymmetry) {
  Mat A = Mat::Random(5, 5), B = Mat::Random(5, 5);
  EXPECT_EQ(commutator(A, B), -commutator(B, A));
}

TEST(Commutator, AntiBlockPairHasFullRank) {
  for (Index n = 1; n <= 6; ++n) {
    Mat B = direct_sum(Mat::Identity(n, n), -Mat::Identity(n, n));
    Mat C = Mat::Zero(2 * n, 2 * n);
    C.topRightCorner(n, n) = Mat::Identity(n, n);
    C.bottomLeftCorner(n, n) = Mat::Identity(n, n);
    EXPECT_EQ(numeric_rank(commutator(B, C)), 2 * n);
  }
}

TEST(Commutator, OrderMismatch) { EXPECT_THROW(commutator(Mat::Zero(2, 2), Mat::Zero(3, 3)), DimensionMismatch); }

TEST(NumericRank, Basics) {
  EXPECT_EQ(numeric_rank(Mat::Zero(3, 3)), 0);
  EXPECT_EQ(numeric_rank(Mat::Identity(5, 5)), 5);
  EXPECT_EQ(numeric_rank(direct_sum(F(2), Mat::Zero(1, 1))), 2);
}

TEST(NumericRank, OrthogonalInvariance) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const Index n = 6;
    Mat M = Mat::Random(n, 3) * Mat::Random(3, n);
    const Mat Q = random_orthogonal(n, rng);
    EXPECT_EQ(numeric_rank(Q.transpose() * M * Q), numeric_rank(M));
  }
}

TEST(CondNumber, Basics) {
  EXPECT_DOUBLE_EQ(cond_number(Mat::Identity(4, 4)), 1.0);
  Mat D = Mat::Zero(2, 2);
  D(0, 0) = 10;
  D(1, 1) = 1;
  EXPECT_DOUBLE_EQ(cond_number(D), 10.0);
  D(0, 0) = 1;
  D(1, 1) = 0;
  EXPECT_TRUE(std::isinf(cond_number(D)));
}

TEST(SymMat, ProjectsRoundoffAndRejectsAsymmetry) {
  Mat M(2, 2);
  M << 1, 2, 2 + 1e-14, 3;
  SymMat S(M);
  EXPECT_EQ(S.mat(), S.mat().transpose());
  M(1, 0) = 2.1;
  EXPECT_THROW(SymMat{M}, NotSymmetric);
  EXPECT_THROW(SymMat{Mat::Zero(2, 3)}, DimensionMismatch);
}

TEST(Congruence, RejectsSingular) {
  EXPECT_THROW(Congruence(direct_sum(Mat::Identity(1, 1), Mat::Zero(1, 1))), SingularMatrix);
  Congruence C(Mat::Identity(3, 3) * 2.0);
  EXPECT_DOUBLE_EQ(C.kappa(), 1.0);
}

TEST(Tolerances, Defaults) {
  Tolerances t;
  EXPECT_EQ(t.rank_tol, 1e-10);
  EXPECT_EQ(t.eig_real_tol, 1e-8);
  EXPECT_EQ(t.resid_tol, 1e-8);
  EXPECT_EQ(t.cluster_tol, 1e-7);
  t.cluster_tol = 0;
  EXPECT_THROW(t.validate(), InvalidArgument);
}

TEST(Kron, MatchesDefinition) {
  Mat A(2, 2);
  A << 1, 2, 3, 4;
  const Mat K = kron(A, F(2));
  EXPECT_EQ(K.block(2, 0, 2, 2), 3.0 * F(2));
  EXPECT_EQ(K.block(0, 2, 2, 2), 2.0 * F(2));
}
