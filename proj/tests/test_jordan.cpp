#include <gtest/gtest.h>

#include "sdcx/jordan.hpp"
#include "sdcx/sdc.hpp"
#include "test_helpers.hpp"

using namespace sdcx;
using namespace sdcx::testing;

namespace {

BlockSpec type1_spec(std::initializer_list<std::tuple<int, double, Index>> blocks) {
  BlockSpec spec;
  for (auto [s, l, n] : blocks) spec.blocks.push_back({BlockType::Type1, s, l, n});
  return spec;
}

void expect_canonical(const Mat& A, const Mat& B, const JordanForm& jf) {
  const double kP = cond_number(jf.P);
  EXPECT_LT(max_abs(jf.P.transpose() * A * jf.P - jf.canonical_A()), 1e-7 * kP * kP);
  EXPECT_LT(max_abs(jf.P.transpose() * B * jf.P - jf.canonical_B()), 1e-7 * kP * kP);
}

}  // namespace

TEST(JordanCanonical, SimpleDiagonalPencil) {
  Mat B = Mat::Zero(3, 3);
  B.diagonal() << 3, 1, 2;
  const auto jf = jordan_canonical(Mat::Identity(3, 3), B);
  ASSERT_EQ(jf.blocks.size(), 3u);
  EXPECT_TRUE(jf.simple());
  EXPECT_NEAR(jf.blocks[0].lambda, 1, 1e-12);
  EXPECT_NEAR(jf.blocks[2].lambda, 3, 1e-12);
  expect_canonical(Mat::Identity(3, 3), B, jf);
}

TEST(JordanCanonical, SingleJordanBlockOfSwapPencil) {
  Mat B(2, 2);
  B << 0, 1, 1, 1;
  const auto jf = jordan_canonical(F(2), B);
  ASSERT_EQ(jf.blocks.size(), 1u);
  EXPECT_EQ(jf.blocks[0].size, 2);
  EXPECT_EQ(jf.blocks[0].sigma, 1);
  EXPECT_NEAR(jf.blocks[0].lambda, 1, 1e-9);
  EXPECT_FALSE(jf.simple());
  expect_canonical(F(2), B, jf);
}

TEST(JordanCanonical, DerogatoryAndSignedStructures) {
  const std::vector<BlockSpec> specs = {
      type1_spec({{1, 0.5, 1}, {-1, 0.5, 2}}),
      type1_spec({{-1, 1.0, 3}, {1, -2.0, 1}, {1, -2.0, 1}}),
      type1_spec({{1, 0.0, 2}, {1, 0.0, 2}, {-1, 3.0, 1}}),
  };
  std::mt19937_64 rng(11);
  for (const auto& spec : specs) {
    auto [S, T] = assemble_blocks(spec);
    for (int trial = 0; trial < 3; ++trial) {
      const Mat Q = trial == 0 ? Mat::Identity(S.n(), S.n()) : random_with_condition(S.n(), 5.0, rng);
      const Mat A = Q.transpose() * S.mat() * Q, B = Q.transpose() * T.mat() * Q;
      const auto jf = jordan_canonical(A, B);
      Index total = 0;
      for (const auto& b : jf.blocks) total += b.size;
      EXPECT_EQ(total, S.n());
      EXPECT_EQ(jf.blocks.size(), spec.blocks.size());
      expect_canonical(A, B, jf);
      // Signs and sizes agree with the descriptor as multisets.
      std::vector<std::tuple<double, Index, int>> want, got;
      for (const auto& b : spec.blocks) want.emplace_back(b.lambda.real(), b.size, b.sigma);
      for (const auto& b : jf.blocks) got.emplace_back(std::round(b.lambda * 1e6) / 1e6, b.size, b.sigma);
      std::sort(want.begin(), want.end());
      std::sort(got.begin(), got.end());
      EXPECT_EQ(want, got);
    }
  }
}

TEST(SplitPerturbation, SwapPencilGetsCornerEpsilon) {
  Mat B(2, 2);
  B << 0, 1, 1, 1;
  for (double eps : {1e-2, 1e-4}) {
    const Mat dB = split_perturbation(F(2), B, eps);
    Mat want = Mat::Zero(2, 2);
    want(0, 0) = eps;
    EXPECT_LT(max_abs(dB - want), 1e-12);
    auto ev = sorted_real(sorted_eigenvalues(F(2).inverse() * (B + dB)));
    EXPECT_NEAR(ev[0], 1 - std::sqrt(eps), 1e-10);
    EXPECT_NEAR(ev[1], 1 + std::sqrt(eps), 1e-10);
  }
}

TEST(SplitPerturbation, ResultIsSimpleAndWithinBudget) {
  const auto spec = type1_spec({{1, 0.0, 2}, {1, 0.0, 2}, {-1, 0.0, 1}, {1, 2.0, 3}});
  auto [S, T] = assemble_blocks(spec);
  std::mt19937_64 rng(5);
  const Mat Q = random_with_condition(S.n(), 3.0, rng);
  const Mat A = Q.transpose() * S.mat() * Q, B = Q.transpose() * T.mat() * Q;
  for (double eps : {1e-1, 1e-3}) {
    const Mat dB = split_perturbation(A, B, eps);
    EXPECT_LE(norm2(dB), eps * (1 + 1e-12));
    EXPECT_TRUE(sdc_check({A, B + dB}).is_sdc());
  }
}

TEST(SplitPerturbation, SimplePencilIsUntouched) {
  Mat B = Mat::Zero(2, 2);
  B.diagonal() << 1, 2;
  EXPECT_EQ(max_abs(split_perturbation(Mat::Identity(2, 2), B, 0.1)), 0.0);
}
