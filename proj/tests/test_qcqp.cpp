// QCQP instances: simplex and boundedness, the random generator, the four
// diagonal reformulations, pointwise verification, homogenization and the
// benchmark harness.
#include <gtest/gtest.h>

#include "sdcx/qcqp.hpp"
#include "test_helpers.hpp"

using namespace sdcx;
using namespace sdcx::testing;

namespace {

Mat box_rows(Index n) {
  Mat L(2 * n, n);
  L << Mat::Identity(n, n), -Mat::Identity(n, n);
  return L;
}

/// Unconstrained-quadratic instance with A₁ = A₂ = I, b = 0 over the unit box.
QcqpInstance identity_instance(Index n) {
  QcqpInstance inst;
  inst.n = n;
  inst.m = 2 * n;
  inst.A1 = inst.A2 = Mat::Identity(n, n);
  inst.b1 = inst.b2 = Vec::Zero(n);
  inst.L = box_rows(n);
  return inst;
}

/// True if some of `rays` random unit directions satisfies Ld ≤ 0.
bool probe_recedes(const Mat& L, int rays, std::mt19937_64& rng) {
  for (int t = 0; t < rays; ++t) {
    Vec d = gaussian_vec(L.cols(), rng);
    d.normalize();
    if ((L * d).maxCoeff() <= 0.0) return true;
  }
  return false;
}

Index count_nonreal(const Mat& M) {
  Index c = 0;
  for (auto z : sorted_eigenvalues(M))
    if (std::abs(z.imag()) > 1e-8 * std::max(1.0, std::abs(z))) ++c;
  return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// Simplex and boundedness
// ---------------------------------------------------------------------------

TEST(Simplex, SmallProgram) {
  // max x + y  s.t.  x + 2y ≤ 4, 3x + y ≤ 6  →  (1.6, 1.2), value 2.8.
  const Mat A = (Mat(2, 2) << 1, 2, 3, 1).finished();
  const auto r = simplex_max(Eigen::Vector2d(1, 1), A, Eigen::Vector2d(4, 6));
  ASSERT_TRUE(r.bounded);
  EXPECT_NEAR(r.value, 2.8, 1e-12);
  EXPECT_NEAR(r.x(0), 1.6, 1e-12);
  EXPECT_NEAR(r.x(1), 1.2, 1e-12);
}

TEST(Simplex, UnboundedAndDegenerate) {
  const Mat A = (Mat(1, 2) << 1, -1).finished();
  EXPECT_FALSE(simplex_max(Eigen::Vector2d(1, 0), A, Eigen::Matrix<double, 1, 1>(1.0)).bounded);
  // Zero right-hand side: every vertex is degenerate; the optimum is 0.
  const Mat D = (Mat(3, 2) << 1, 1, 1, -1, -1, 1).finished();
  const auto r = simplex_max(Eigen::Vector2d(1, 1), D, Vec::Zero(3));
  ASSERT_TRUE(r.bounded);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_THROW(simplex_max(Vec::Ones(2), D, -Vec::Ones(3)), InvalidArgument);
}

TEST(CheckBounded, Examples) {
  for (Index n = 1; n <= 5; ++n) {
    EXPECT_TRUE(check_bounded(box_rows(n)));
    EXPECT_FALSE(check_bounded(Mat::Identity(n, n)));
    const auto d = recession_direction(Mat::Identity(n, n));
    ASSERT_TRUE(d.has_value());
    EXPECT_LE(d->maxCoeff(), 1e-12);
    EXPECT_GT(d->norm(), 0.5);
    // e_1, …, e_n and −Σe_i positively span ℝⁿ.
    Mat S(n + 1, n);
    S << Mat::Identity(n, n), -Mat::Ones(1, n);
    EXPECT_TRUE(check_bounded(S));
  }
}

TEST(CheckBounded, AgreesWithRecessionProbe) {
  std::mt19937_64 rng(51);
  int agree = 0, bounded = 0;
  for (int s = 0; s < 500; ++s) {
    const Index n = 2 + s % 2;
    const Index m = n + s % 5;
    const Mat L = gaussian(m, n, rng);
    const auto d = recession_direction(L);
    const bool probe = probe_recedes(L, 10000, rng);
    // A receding ray found by sampling refutes boundedness outright.
    if (probe) ASSERT_TRUE(d.has_value()) << "sample " << s;
    // An LP direction is itself a certificate.
    if (d) {
      EXPECT_LE((L * *d).maxCoeff(), 1e-9) << "sample " << s;
      EXPECT_GT(d->cwiseAbs().maxCoeff(), 1e-9) << "sample " << s;
    } else {
      ++bounded;
    }
    if (probe == d.has_value()) ++agree;
  }
  EXPECT_GT(bounded, 50);
  EXPECT_LT(bounded, 450);
  EXPECT_GE(agree, 475);
}

TEST(BoundingBox, UnitBox) {
  const auto [lo, hi] = bounding_box(box_rows(3));
  EXPECT_TRUE(lo.isApprox(-Vec::Ones(3)));
  EXPECT_TRUE(hi.isApprox(Vec::Ones(3)));
  EXPECT_THROW(bounding_box(Mat::Identity(2, 2)), InvalidArgument);
}

// ---------------------------------------------------------------------------
// Generator
// ---------------------------------------------------------------------------

TEST(GenerateInstance, Deterministic) {
  const auto a = generate_instance(8, 2, 40, 123), b = generate_instance(8, 2, 40, 123);
  EXPECT_EQ(a.A1, b.A1);
  EXPECT_EQ(a.A2, b.A2);
  EXPECT_EQ(a.b1, b.b1);
  EXPECT_EQ(a.b2, b.b2);
  EXPECT_EQ(a.L, b.L);
  const auto c = generate_instance(8, 2, 40, 124);
  EXPECT_NE(a.A1, c.A1);
}

TEST(GenerateInstance, BlockStructure) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = generate_instance(2, 1, 20, seed);
    // A₁ = VᵀF₂V with V orthogonal: symmetric, involutory, eigenvalues ±1.
    EXPECT_TRUE((inst.A1 * inst.A1).isApprox(Mat::Identity(2, 2), 1e-12));
    EXPECT_NEAR(inst.A1.trace(), 0.0, 1e-12);
    // A₂ = VᵀT₁V: trace-free.
    EXPECT_NEAR(inst.A2.trace(), 0.0, 1e-12);
    EXPECT_EQ(count_nonreal(inst.A1.inverse() * inst.A2), 2);
    EXPECT_TRUE(check_bounded(inst.L));
    EXPECT_EQ(inst.L.rows(), 20);
  }
}

TEST(GenerateInstance, ComplexPairCount) {
  for (Index n : {4, 7, 10})
    for (Index k = 0; 2 * k <= n; ++k)
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto inst = generate_instance(n, k, 10 * n, seed);
        EXPECT_EQ(count_nonreal(inst.A1.inverse() * inst.A2), 2 * k) << n << " " << k << " " << seed;
        EXPECT_TRUE((inst.A1 * inst.A1).isApprox(Mat::Identity(n, n), 1e-10));
      }
}

TEST(GenerateInstance, RealCaseIsSdc) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = generate_instance(4, 0, 40, seed);
    EXPECT_TRUE(sdc_check({inst.A1, inst.A2}).is_sdc());
  }
}

TEST(GenerateInstance, Errors) {
  EXPECT_THROW(generate_instance(3, 2, 10, 0), InvalidArgument);
  EXPECT_THROW(generate_instance(0, 0, 10, 0), InvalidArgument);
  // Fewer than n + 1 half-spaces never bound a polytope.
  EXPECT_THROW(generate_instance(3, 1, 3, 0), ResampleLimitExceeded);
}

// ---------------------------------------------------------------------------
// Reformulations
// ---------------------------------------------------------------------------

TEST(Reformulate, SdcOnRealInstance) {
  const auto inst = generate_instance(6, 0, 60, 9);
  const auto ref = reformulate(inst, QcqpMethod::Sdc);
  EXPECT_EQ(ref.dim, 6);
  EXPECT_EQ(ref.equalities.rows(), 0);
  // Ratios of the diagonal entries are the eigenvalues μ of A₁⁻¹A₂, and the
  // objective diagonal has the inertia of A₁.
  std::vector<cplx> ratios;
  for (Index i = 0; i < 6; ++i) ratios.emplace_back(ref.quad_con(i) / ref.quad_obj(i), 0.0);
  EXPECT_LE(multiset_distance(ratios, sorted_eigenvalues(inst.A1.inverse() * inst.A2)), 1e-8);
  const Vec ev = Eigen::SelfAdjointEigenSolver<Mat>(inst.A1).eigenvalues();
  EXPECT_EQ((ref.quad_obj.array() > 0).count(), (ev.array() > 0).count());
  EXPECT_TRUE(verify_reformulation(inst, ref, 100, 1).passed());
}

TEST(Reformulate, SdcInapplicableWithComplexPairs) {
  const auto inst = generate_instance(6, 1, 60, 9);
  EXPECT_THROW(reformulate(inst, QcqpMethod::Sdc), MethodInapplicable);
}

TEST(Reformulate, DimensionsAndEqualities) {
  const auto inst = generate_instance(10, 2, 100, 5);
  const auto r1 = reformulate(inst, QcqpMethod::Rsdc1);
  EXPECT_EQ(r1.dim, 11);
  EXPECT_EQ(r1.equalities.rows(), 1);
  const auto r2 = reformulate(inst, QcqpMethod::Rsdc2);
  EXPECT_EQ(r2.dim, 12);
  EXPECT_EQ(r2.equalities.rows(), 2);
  const auto re = reformulate(inst, QcqpMethod::Eig);
  EXPECT_EQ(re.dim, 20);
  EXPECT_EQ(re.equalities.rows(), 10);
  for (const auto* r : {&r1, &r2, &re}) {
    EXPECT_EQ(r->quad_obj.size(), r->dim);
    EXPECT_EQ(r->quad_con.size(), r->dim);
    EXPECT_EQ(r->poly.rows(), inst.L.rows());
    EXPECT_EQ(r->poly.cols(), r->dim);
    EXPECT_GE(r->kappa, 1.0);
  }
  EXPECT_LE(r1.eig_residual, 1e-6);
  EXPECT_LE(r2.eig_residual, 1e-6);
}

TEST(Reformulate, RestrictionIdentity) {
  std::mt19937_64 rng(52);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = generate_instance(8, 1 + seed % 3, 80, seed);
    for (auto m : {QcqpMethod::Rsdc1, QcqpMethod::Rsdc2}) {
      const auto ref = reformulate(inst, m);
      const Index n = inst.n, d = ref.dim - n;
      // Coefficient-by-coefficient: the leading blocks are the original data.
      ASSERT_EQ(ref.A_aug.topLeftCorner(n, n), inst.A1);
      ASSERT_EQ(ref.B_aug.topLeftCorner(n, n), inst.A2);
      ASSERT_EQ(ref.b1_aug.head(n), inst.b1);
      ASSERT_EQ(ref.b2_aug.tail(d), Vec::Zero(d));
      const Vec x = gaussian_vec(n, rng);
      Vec xp = Vec::Zero(ref.dim);
      xp.head(n) = x;
      EXPECT_EQ(xp.dot(ref.A_aug * xp) + 2.0 * ref.b1_aug.dot(xp), x.dot(inst.A1 * x) + 2.0 * inst.b1.dot(x));
    }
  }
}

TEST(Reformulate, EigenCoupling) {
  const auto inst = generate_instance(6, 2, 60, 3);
  const auto ref = reformulate(inst, QcqpMethod::Eig);
  // P₁ orthogonal, composite P orthogonal, κ(P₂) = 1 up to roundoff.
  EXPECT_TRUE((ref.P1.transpose() * ref.P1).isApprox(Mat::Identity(6, 6), 1e-12));
  EXPECT_NEAR(ref.kappa, 1.0, 1e-10);
  EXPECT_EQ(ref.quad_obj.tail(6), Vec::Zero(6));
  EXPECT_EQ(ref.quad_con.head(6), Vec::Zero(6));
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

TEST(Verify, IdentityInstance) {
  const auto inst = identity_instance(4);
  for (auto m : {QcqpMethod::Sdc, QcqpMethod::Eig}) {
    const auto v = verify_reformulation(inst, reformulate(inst, m), 200, 7);
    EXPECT_LE(v.max_deviation, 1e-14) << method_name(m);
  }
}

TEST(Verify, AllMethodsAtScale) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto inst = generate_instance(10, 2, 100, seed);
    for (auto m : {QcqpMethod::Rsdc1, QcqpMethod::Rsdc2, QcqpMethod::Eig}) {
      const auto v = verify_reformulation(inst, reformulate(inst, m), 100, seed);
      EXPECT_TRUE(v.passed()) << method_name(m) << " seed " << seed << " dev " << v.relative_deviation;
    }
  }
}

TEST(Verify, CorruptedCongruenceIsDetected) {
  const auto inst = generate_instance(10, 2, 100, 11);
  for (auto m : {QcqpMethod::Rsdc1, QcqpMethod::Rsdc2, QcqpMethod::Eig}) {
    auto ref = reformulate(inst, m);
    Mat P = ref.P.P();
    P(0, 1) += 0.1 * std::max(1.0, max_abs(P));
    ref.P = Congruence(P);
    const auto v = verify_reformulation(inst, ref, 100, 3);
    EXPECT_GT(v.relative_deviation, 1e-3) << method_name(m);
    EXPECT_FALSE(v.passed());
  }
}

// ---------------------------------------------------------------------------
// Homogenization
// ---------------------------------------------------------------------------

TEST(Homogenize, Trivial) {
  const auto r = homogenize_check({Mat::Identity(2, 2)}, {Vec::Zero(2)}, {0.0});
  EXPECT_TRUE(r.premise);
  EXPECT_TRUE(r.conclusion);
}

TEST(Homogenize, ImplicationSweep) {
  int premises = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    const Index n = 2 + seed % 4, m = 2 + seed % 2;
    const Mat P = random_with_condition(n, 10.0, rng);
    const Mat Pinv = P.inverse();
    Family As;
    for (Index i = 0; i < m; ++i) {
      Vec d = gaussian_vec(n, rng);
      if (i == 0) d = d.cwiseAbs().array() + 0.5;  // positive definite member
      As.push_back(sym_part(Pinv.transpose() * d.asDiagonal() * Pinv));
    }
    // Half the runs use b_i = A_i u, which keeps the homogenized family SDC.
    const Vec u = gaussian_vec(n, rng);
    std::vector<Vec> bs;
    std::vector<double> cs;
    for (const auto& A : As) {
      bs.push_back(seed % 2 ? Vec(A * u) : gaussian_vec(n, rng));
      cs.push_back(gaussian_vec(1, rng)(0));
    }
    const auto r = homogenize_check(As, bs, cs, {}, seed);
    if (r.premise) {
      ++premises;
      EXPECT_TRUE(r.conclusion) << "seed " << seed;
    }
    EXPECT_TRUE(r.conclusion) << "seed " << seed;
  }
  EXPECT_GE(premises, 25);
}

TEST(Homogenize, ContrapositiveOnNonSdcFamily) {
  // {I, A₂, A₃} with [A₂, A₃] ≠ 0: a PD member, but not SDC.
  const Mat A2 = (Mat(3, 3) << 1, 1, 0, 1, 0, 1, 0, 1, -1).finished();
  const Mat A3 = (Mat(3, 3) << 0, 0, 1, 0, 2, 0, 1, 0, 0).finished();
  const auto r = homogenize_check({Mat::Identity(3, 3), A2, A3}, {Vec::Zero(3), Vec::Ones(3), Vec::Zero(3)},
                                  {0.0, 1.0, 0.0});
  EXPECT_FALSE(r.conclusion);
  EXPECT_FALSE(r.premise);
}

TEST(Homogenize, Errors) {
  const Mat indefinite = Eigen::Vector2d(1, -1).asDiagonal();
  EXPECT_THROW(homogenize_check({indefinite}, {Vec::Zero(2)}, {0.0}), NoPdElement);
  EXPECT_THROW(homogenize_check({Mat::Identity(2, 2)}, {}, {0.0}), DimensionMismatch);
  EXPECT_THROW(homogenize_check({Mat::Identity(2, 2)}, {Vec::Zero(3)}, {0.0}), DimensionMismatch);
}

// ---------------------------------------------------------------------------
// Benchmark harness
// ---------------------------------------------------------------------------

TEST(Bench, SmallGrid) {
  BenchConfig cfg;
  cfg.ns = {10};
  cfg.ks = {1};
  cfg.seeds = 5;
  cfg.timing = false;
  const auto rep = bench(cfg);
  ASSERT_EQ(rep.rows.size(), 20u);
  for (const auto& r : rep.rows) {
    if (r.method == QcqpMethod::Sdc) {
      EXPECT_EQ(r.status, "MethodInapplicable");
      continue;
    }
    EXPECT_TRUE(r.ok()) << method_name(r.method) << " " << r.status << " " << r.message;
    EXPECT_LE(r.deviation, 1e-6);
    EXPECT_TRUE(std::isfinite(r.kappa));
    EXPECT_EQ(r.gen_ms, 0.0);
  }
  ASSERT_EQ(rep.summary.size(), 4u);
  EXPECT_EQ(rep.summary[0].failures, 5);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_TRUE(std::isfinite(rep.summary[i].median_kappa));
}

TEST(Bench, IndependentOfThreadCount) {
  BenchConfig cfg;
  cfg.ns = {6, 8};
  cfg.ks = {0, 2};
  cfg.seeds = 3;
  cfg.timing = false;
  cfg.master_seed = 77;
  cfg.threads = 1;
  const auto a = bench(cfg);
  cfg.threads = 4;
  const auto b = bench(cfg);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].instance_seed, b.rows[i].instance_seed);
    EXPECT_EQ(a.rows[i].status, b.rows[i].status);
    if (a.rows[i].ok()) {
      EXPECT_EQ(a.rows[i].kappa, b.rows[i].kappa);
      EXPECT_EQ(a.rows[i].deviation, b.rows[i].deviation);
    }
  }
  EXPECT_NE(cell_seed(77, 0), cell_seed(77, 1));
  EXPECT_NE(cell_seed(77, 0), cell_seed(78, 0));
}
