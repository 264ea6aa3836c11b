// qcqp.hpp - random nonconvex QCQP instances and their diagonal
// reformulations.
//
// An instance is
//     min xᵀA₁x + 2b₁ᵀx   s.t.  xᵀA₂x + 2b₂ᵀx ≤ 1,  Lx ≤ 1,
// with {x : Lx ≤ 1} bounded.  Each reformulation replaces the quadratics by
// diagonal ones in new variables, possibly with extra coordinates pinned by
// linear equalities:
//   sdc    x = Pw, PᵀA_iP diagonal (only when {A₁, A₂} is SDC);
//   rsdc1  (x; t) = Pw with t = 0, bordered pencil of order n + 1;
//   rsdc2  (x; t₁; t₂) = Pw with t₁ = t₂ = 0, order n + 2;
//   eig    x = P₁y, y = P₂z, A₁ diagonal in y and A₂ diagonal in z.
// Reformulations are checked pointwise; global solving is out of scope.
#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "rsdc.hpp"

namespace sdcx {

SDCX_DEFINE_ERROR(ResampleLimitExceeded)
SDCX_DEFINE_ERROR(MethodInapplicable)
SDCX_DEFINE_ERROR(NoPdElement)

// ---------------------------------------------------------------------------
// Dense simplex
// ---------------------------------------------------------------------------

struct LpResult {
  bool bounded = true;  ///< false when the objective is unbounded above
  double value = 0.0;
  Vec x;
  Vec ray;  ///< unbounded only: r ≥ 0 with Ar ≤ 0 and cᵀr > 0
};

/// max cᵀx  s.t.  Ax ≤ b, x ≥ 0, for b ≥ 0 (the origin is feasible).  Tableau
/// simplex with Dantzig's entering rule; after a run of degenerate pivots it
/// switches to Bland's rule for good, so it cannot cycle.
inline LpResult simplex_max(const Vec& c, const Mat& A, const Vec& b) {
  using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Index m = A.rows(), n = A.cols();
  if (c.size() != n || b.size() != m) throw DimensionMismatch("simplex_max: inconsistent LP dimensions");
  if (m > 0 && b.minCoeff() < 0.0) throw InvalidArgument("simplex_max requires a nonnegative right-hand side");
  const double scale = std::max({1.0, max_abs(A), max_abs(c)});
  const double eps = 1e-12 * scale;
  Tableau T = Tableau::Zero(m + 1, n + m + 1);
  T.topLeftCorner(m, n) = A;
  T.block(0, n, m, m).setIdentity();
  T.col(n + m).head(m) = b;
  T.row(m).head(n) = -c.transpose();
  std::vector<Index> basis(m);
  for (Index i = 0; i < m; ++i) basis[i] = n + i;

  constexpr int kDegenerateRun = 50;
  bool bland = false;
  int degenerate = 0;
  const Index max_iter = 50 * (n + m) + 1000;
  for (Index it = 0; it < max_iter; ++it) {
    Index enter = -1;
    double most = -eps;
    for (Index j = 0; j < n + m; ++j)
      if (T(m, j) < most) {
        enter = j;
        if (bland) break;
        most = T(m, j);
      }
    if (enter < 0) {
      LpResult r;
      r.value = T(m, n + m);
      r.x = Vec::Zero(n);
      for (Index i = 0; i < m; ++i)
        if (basis[i] < n) r.x(basis[i]) = T(i, n + m);
      return r;
    }
    Index leave = -1;
    double best = 0.0;
    for (Index i = 0; i < m; ++i) {
      if (T(i, enter) <= eps) continue;
      const double ratio = T(i, n + m) / T(i, enter);
      if (leave < 0 || ratio < best - eps || (ratio <= best + eps && basis[i] < basis[leave])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave < 0) {
      LpResult r;
      r.bounded = false;
      r.value = std::numeric_limits<double>::infinity();
      r.ray = Vec::Zero(n);
      if (enter < n) r.ray(enter) = 1.0;
      for (Index i = 0; i < m; ++i)
        if (basis[i] < n) r.ray(basis[i]) = -T(i, enter);
      return r;
    }
    if (best <= eps) {
      if (++degenerate >= kDegenerateRun) bland = true;
    } else {
      degenerate = 0;
    }
    T.row(leave) /= T(leave, enter);
    const Eigen::RowVectorXd pivot_row = T.row(leave);
    Vec factors = T.col(enter);
    factors(leave) = 0.0;
    T.noalias() -= factors * pivot_row;
    basis[leave] = enter;
  }
  throw NoConvergence("simplex_max exceeded its pivot limit");
}

// ---------------------------------------------------------------------------
// Polytope boundedness
// ---------------------------------------------------------------------------

/// A nonzero d with Ld ≤ 0 and ‖d‖∞ = 1, if one exists.  Solves the 2n LPs
/// max ±x_i over {x : Lx ≤ 1} (x = x⁺ − x⁻); the polytope is bounded iff all
/// of them are, and an unbounded one yields its ray as the direction.
inline std::optional<Vec> recession_direction(const Mat& L) {
  const Index n = L.cols(), m = L.rows();
  if (n == 0) return std::nullopt;
  Mat A(m, 2 * n);
  A << L, -L;
  const Vec b = Vec::Ones(m);
  for (Index i = 0; i < n; ++i)
    for (double s : {1.0, -1.0}) {
      Vec c = Vec::Zero(2 * n);
      c(i) = s;
      c(n + i) = -s;
      const auto r = simplex_max(c, A, b);
      if (r.bounded) continue;
      const Vec d = r.ray.head(n) - r.ray.tail(n);
      const double size = d.cwiseAbs().maxCoeff();
      if (size > 0.0) return Vec(d / size);
    }
  return std::nullopt;
}

/// true iff {x : Lx ≤ 1} is bounded, i.e. the recession cone {d : Ld ≤ 0} is {0}.
inline bool check_bounded(const Mat& L) { return !recession_direction(L).has_value(); }

/// Axis-aligned bounding box of {x : Lx ≤ 1} from 2n LPs (x = x⁺ − x⁻).
inline std::pair<Vec, Vec> bounding_box(const Mat& L) {
  const Index n = L.cols(), m = L.rows();
  Mat A(m, 2 * n);
  A << L, -L;
  const Vec b = Vec::Ones(m);
  Vec lo(n), hi(n);
  for (Index i = 0; i < n; ++i) {
    Vec c = Vec::Zero(2 * n);
    c(i) = 1.0;
    c(n + i) = -1.0;
    const auto up = simplex_max(c, A, b), down = simplex_max(-c, A, b);
    if (!up.bounded || !down.bounded) throw InvalidArgument("polytope is unbounded");
    hi(i) = up.value;
    lo(i) = -down.value;
  }
  return {lo, hi};
}

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

inline constexpr int kGeneratorVersion = 1;

struct QcqpInstance {
  Index n = 0, k = 0, m = 0;
  std::uint64_t seed = 0;
  int generator_version = kGeneratorVersion;
  Mat A1, A2;
  Vec b1, b2;
  Mat L;

  double objective(const Vec& x) const { return x.dot(A1 * x) + 2.0 * b1.dot(x); }
  double constraint(const Vec& x) const { return x.dot(A2 * x) + 2.0 * b2.dot(x); }
};

/// Random instance: V from the SVD of a standard Gaussian matrix, σ
/// Rademacher, μ standard normal, T_i = [[x_i, y_i], [y_i, −x_i]];
/// A₁ = VᵀDiag(σ, F₂, …)V and A₂ = VᵀDiag(σμ, T₁, …)V; b₁, b₂, L Gaussian.
/// The whole instance is redrawn while the polytope is unbounded.
inline QcqpInstance generate_instance(Index n, Index k, Index m, std::uint64_t seed) {
  if (n < 1 || k < 0 || 2 * k > n || m < 1)
    throw InvalidArgument("generate_instance requires n >= 1, 0 <= 2k <= n and m >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  auto gaussian = [&](Index r, Index c) {
    Mat M(r, c);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) M(i, j) = normal(rng);
    return M;
  };
  const Index r = n - 2 * k;
  for (int attempt = 0; attempt <= 1000; ++attempt) {
    const Mat V = Eigen::JacobiSVD<Mat>(gaussian(n, n), Eigen::ComputeFullU).matrixU();
    std::vector<Mat> a, b;
    for (Index i = 0; i < r; ++i) {
      const double sigma = coin(rng) ? 1.0 : -1.0;
      const double mu = normal(rng);
      a.push_back(Mat::Constant(1, 1, sigma));
      b.push_back(Mat::Constant(1, 1, sigma * mu));
    }
    for (Index i = 0; i < k; ++i) {
      const double x = normal(rng), y = normal(rng);
      a.push_back(F(2));
      b.push_back((Mat(2, 2) << x, y, y, -x).finished());
    }
    QcqpInstance inst;
    inst.n = n;
    inst.k = k;
    inst.m = m;
    inst.seed = seed;
    inst.A1 = sym_part(V.transpose() * direct_sum(a) * V);
    inst.A2 = sym_part(V.transpose() * direct_sum(b) * V);
    inst.b1 = gaussian(n, 1);
    inst.b2 = gaussian(n, 1);
    inst.L = gaussian(m, n);
    if (check_bounded(inst.L)) return inst;
  }
  throw ResampleLimitExceeded("no bounded polytope after 1000 rejections; increase m");
}

// ---------------------------------------------------------------------------
// Reformulations
// ---------------------------------------------------------------------------

enum class QcqpMethod { Sdc, Rsdc1, Rsdc2, Eig };

inline const char* method_name(QcqpMethod m) {
  switch (m) {
    case QcqpMethod::Sdc: return "sdc";
    case QcqpMethod::Rsdc1: return "rsdc1";
    case QcqpMethod::Rsdc2: return "rsdc2";
    case QcqpMethod::Eig: return "eig";
  }
  return "?";
}

inline QcqpMethod parse_method(const std::string& s) {
  for (auto m : {QcqpMethod::Sdc, QcqpMethod::Rsdc1, QcqpMethod::Rsdc2, QcqpMethod::Eig})
    if (s == method_name(m)) return m;
  throw InvalidArgument("unknown method '" + s + "' (expected sdc, rsdc1, rsdc2 or eig)");
}

inline const std::vector<QcqpMethod>& all_methods() {
  static const std::vector<QcqpMethod> m = {QcqpMethod::Sdc, QcqpMethod::Rsdc1, QcqpMethod::Rsdc2, QcqpMethod::Eig};
  return m;
}

/// Transformed problem in variables v ∈ ℝ^dim:
///     min Σ quad_obj_j v_j² + 2 lin_objᵀv   s.t.  Σ quad_con_j v_j² + 2 lin_conᵀv ≤ 1,
///     poly·v ≤ 1,  equalities·v = 0.
struct Reformulation {
  QcqpMethod method = QcqpMethod::Sdc;
  Index n = 0;
  Index dim = 0;
  Vec quad_obj, quad_con;
  Vec lin_obj, lin_con;
  Mat poly;
  Mat equalities;   ///< one row per equality, dim columns
  Congruence P;     ///< sdc/rsdc: (x; 0) = Pv.  eig: composite P₁P₂ (x = P₁P₂z)
  Mat P1;           ///< eig only: first-stage orthogonal factor (x = P₁y)
  double kappa = 1.0;          ///< κ(P); for eig, κ(P₂)
  double eig_residual = 0.0;   ///< rsdc only: eigenvalue placement error
  // Augmented quadratics in the original (padded) coordinates; empty for eig.
  Mat A_aug, B_aug;
  Vec b1_aug, b2_aug;

  double objective(const Vec& v) const { return v.dot(quad_obj.cwiseProduct(v)) + 2.0 * lin_obj.dot(v); }
  double constraint(const Vec& v) const { return v.dot(quad_con.cwiseProduct(v)) + 2.0 * lin_con.dot(v); }

  /// Reformulation variables of an original point, respecting the equalities.
  Vec lift(const Vec& x) const {
    if (method == QcqpMethod::Eig) {
      Vec v(dim);
      v.head(n) = P1.fullPivLu().solve(x);
      v.tail(n) = P.P().fullPivLu().solve(x);
      return v;
    }
    Vec padded = Vec::Zero(dim);
    padded.head(n) = x;
    return P.P().fullPivLu().solve(padded);
  }
};

namespace detail {

/// Diagonal data from a congruence applied to padded quadratics.
inline Reformulation congruence_reformulation(QcqpMethod method, const QcqpInstance& inst, const Mat& At,
                                              const Mat& Bt, const Mat& P) {
  Reformulation ref;
  ref.method = method;
  ref.n = inst.n;
  ref.dim = At.rows();
  const Index d = ref.dim - inst.n;
  ref.A_aug = At;
  ref.B_aug = Bt;
  ref.b1_aug = Vec::Zero(ref.dim);
  ref.b2_aug = Vec::Zero(ref.dim);
  ref.b1_aug.head(inst.n) = inst.b1;
  ref.b2_aug.head(inst.n) = inst.b2;
  ref.P = Congruence(P);
  ref.kappa = ref.P.kappa();
  ref.quad_obj = (P.transpose() * At * P).diagonal();
  ref.quad_con = (P.transpose() * Bt * P).diagonal();
  ref.lin_obj = P.transpose() * ref.b1_aug;
  ref.lin_con = P.transpose() * ref.b2_aug;
  Mat Lpad = Mat::Zero(inst.L.rows(), ref.dim);
  Lpad.leftCols(inst.n) = inst.L;
  ref.poly = Lpad * P;
  ref.equalities = P.bottomRows(d);
  return ref;
}

inline Reformulation rsdc_reformulation(QcqpMethod method, const QcqpInstance& inst, const XiStrategy& strategy,
                                        const Tolerances& tol) {
  RsdcCertificate cert;
  try {
    cert = method == QcqpMethod::Rsdc1 ? rsdc1_construct(inst.A1, inst.A2, strategy, tol)
                                       : rsdc2_construct(inst.A1, inst.A2, strategy, tol);
  } catch (const Error& e) {
    throw MethodInapplicable(std::string(method_name(method)) + " precondition failed: " + e.what());
  }
  auto ref = congruence_reformulation(method, inst, cert.A_tilde, cert.B_tilde, cert.congruence.P());
  ref.eig_residual = cert.eig_residual;
  return ref;
}

/// Orthonormal eigenvectors of a symmetric matrix.
inline std::pair<Vec, Mat> sym_eigen(const Mat& M) {
  Eigen::SelfAdjointEigenSolver<Mat> es(sym_part(M));
  if (es.info() != Eigen::Success) throw NoConvergence("symmetric eigensolver did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

inline Reformulation eig_reformulation(const QcqpInstance& inst) {
  const Index n = inst.n;
  const auto [l1, P1] = sym_eigen(inst.A1);
  const auto [l2, P2] = sym_eigen(P1.transpose() * inst.A2 * P1);
  Reformulation ref;
  ref.method = QcqpMethod::Eig;
  ref.n = n;
  ref.dim = 2 * n;
  ref.P1 = P1;
  ref.P = Congruence(P1 * P2);
  ref.kappa = cond_number(P2);
  ref.quad_obj = Vec::Zero(2 * n);
  ref.quad_con = Vec::Zero(2 * n);
  ref.quad_obj.head(n) = l1;
  ref.quad_con.tail(n) = l2;
  ref.lin_obj = Vec::Zero(2 * n);
  ref.lin_con = Vec::Zero(2 * n);
  ref.lin_obj.head(n) = P1.transpose() * inst.b1;
  ref.lin_con.tail(n) = ref.P.P().transpose() * inst.b2;
  ref.poly = Mat::Zero(inst.L.rows(), 2 * n);
  ref.poly.leftCols(n) = inst.L * P1;
  ref.equalities = Mat(n, 2 * n);
  ref.equalities << Mat::Identity(n, n), -P2;  // y = P₂z
  return ref;
}

}  // namespace detail

/// Builds the diagonal reformulation; throws MethodInapplicable when the
/// method's precondition fails (sdc on a non-SDC pair, rsdc on a pair with a
/// real eigenvalue structure the bordering cannot handle).
inline Reformulation reformulate(const QcqpInstance& inst, QcqpMethod method, const Tolerances& tol = {},
                                 const XiStrategy& strategy = {}) {
  tol.validate();
  switch (method) {
    case QcqpMethod::Sdc: {
      const auto res = sdc_check({inst.A1, inst.A2}, tol);
      if (!res.is_sdc())
        throw MethodInapplicable("sdc requires {A1, A2} to be SDC (" + res.witness->describe() + ")");
      return detail::congruence_reformulation(method, inst, inst.A1, inst.A2, res.congruence->P());
    }
    case QcqpMethod::Rsdc1:
    case QcqpMethod::Rsdc2: return detail::rsdc_reformulation(method, inst, strategy, tol);
    case QcqpMethod::Eig: return detail::eig_reformulation(inst);
  }
  throw InvalidArgument("unknown reformulation method");
}

// ---------------------------------------------------------------------------
// Pointwise verification
// ---------------------------------------------------------------------------

struct VerifyResult {
  double max_deviation = 0.0;     ///< absolute, over all compared values
  double relative_deviation = 0.0;///< max over samples of deviation / value scale
  double value_scale = 1.0;       ///< max over samples of max(1, |values|)
  Index samples = 0;
  bool passed(double rel_tol = 1e-6) const { return relative_deviation <= rel_tol; }
};

/// Compares objective, quadratic constraint, polytope rows and equality
/// residuals at points drawn uniformly from the polytope's bounding box.
inline VerifyResult verify_reformulation(const QcqpInstance& inst, const Reformulation& ref, Index samples = 100,
                                         std::uint64_t seed = 0) {
  const auto [lo, hi] = bounding_box(inst.L);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  VerifyResult out;
  out.samples = samples;
  for (Index s = 0; s < samples; ++s) {
    Vec x(inst.n);
    for (Index i = 0; i < inst.n; ++i) x(i) = lo(i) + (hi(i) - lo(i)) * U(rng);
    const Vec v = ref.lift(x);
    const double f = inst.objective(x), g = inst.constraint(x);
    const Vec Lx = inst.L * x;
    double dev = std::max(std::abs(f - ref.objective(v)), std::abs(g - ref.constraint(v)));
    dev = std::max(dev, max_abs(Lx - ref.poly * v));
    if (ref.equalities.rows() > 0) dev = std::max(dev, max_abs(ref.equalities * v));
    const double scale = std::max({1.0, std::abs(f), std::abs(g), max_abs(Lx)});
    out.max_deviation = std::max(out.max_deviation, dev);
    out.value_scale = std::max(out.value_scale, scale);
    out.relative_deviation = std::max(out.relative_deviation, dev / scale);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Homogenization
// ---------------------------------------------------------------------------

/// Coefficients of a positive definite element of span(fam): members, their
/// negatives, and 256 seeded Gaussian combinations are tried.
inline std::optional<Vec> find_pd_element(const Family& fam, std::uint64_t seed = 0, const Tolerances& tol = {}) {
  check_family(fam);
  const Index m = static_cast<Index>(fam.size());
  const Index n = fam.front().rows();
  auto is_pd = [&](const Vec& c) {
    Mat S = Mat::Zero(n, n);
    for (Index i = 0; i < m; ++i) S += c(i) * fam[i];
    const Vec d = Eigen::SelfAdjointEigenSolver<Mat>(sym_part(S), Eigen::EigenvaluesOnly).eigenvalues();
    return d(0) > tol.rank_tol * std::max(1.0, std::abs(d(n - 1)));
  };
  for (Index i = 0; i < m; ++i)
    for (double s : {1.0, -1.0})
      if (Vec c = s * unit(m, i); is_pd(c)) return c;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int t = 0; t < 256; ++t) {
    Vec c(m);
    for (Index i = 0; i < m; ++i) c(i) = normal(rng);
    if (is_pd(c)) return c;
  }
  return std::nullopt;
}

struct HomogenizeResult {
  bool premise = false;     ///< {Q_i} ∪ {e_{n+1}e_{n+1}ᵀ} is SDC
  bool conclusion = false;  ///< {A_i} is SDC
  Vec pd_coefficients;
};

/// Q_i = [[A_i, b_i], [b_iᵀ, c_i]].  When span{A_i} contains a positive
/// definite element, SDC of the homogenized family implies SDC of {A_i}.
inline HomogenizeResult homogenize_check(const Family& As, const std::vector<Vec>& bs, const std::vector<double>& cs,
                                         const Tolerances& tol = {}, std::uint64_t seed = 0) {
  tol.validate();
  check_family(As);
  if (bs.size() != As.size() || cs.size() != As.size())
    throw DimensionMismatch("homogenize_check needs one b and one c per matrix");
  const Index n = As.front().rows();
  for (const auto& b : bs)
    if (b.size() != n) throw DimensionMismatch("homogenize_check: b_i must have length n");
  const auto pd = find_pd_element(As, seed, tol);
  if (!pd) throw NoPdElement("no positive definite element found in span{A_i}");
  Family Qs;
  for (std::size_t i = 0; i < As.size(); ++i) {
    Mat Q(n + 1, n + 1);
    Q << As[i], bs[i], bs[i].transpose(), cs[i];
    Qs.push_back(Q);
  }
  Mat E = Mat::Zero(n + 1, n + 1);
  E(n, n) = 1.0;
  Qs.push_back(E);
  HomogenizeResult out;
  out.pd_coefficients = *pd;
  out.premise = sdc_check(Qs, tol, seed).is_sdc();
  out.conclusion = sdc_check(As, tol, seed).is_sdc();
  return out;
}

// ---------------------------------------------------------------------------
// Benchmark harness
// ---------------------------------------------------------------------------

struct BenchConfig {
  std::vector<Index> ns{10};
  std::vector<Index> ks{1};
  Index seeds = 5;
  std::vector<QcqpMethod> methods = all_methods();
  Index m_factor = 10;    ///< polytope rows m = m_factor · n
  Index samples = 100;    ///< verify_reformulation samples per row
  std::uint64_t master_seed = 0;
  unsigned threads = 0;   ///< 0: hardware concurrency
  bool timing = true;     ///< false: timing columns are written as 0
};

struct BenchRow {
  Index n = 0, k = 0, seed = 0;
  std::uint64_t instance_seed = 0;
  QcqpMethod method = QcqpMethod::Sdc;
  Index dim = 0;
  double kappa = std::numeric_limits<double>::quiet_NaN();
  double deviation = std::numeric_limits<double>::quiet_NaN();  ///< relative deviation
  double eig_residual = std::numeric_limits<double>::quiet_NaN();
  double gen_ms = 0.0, reform_ms = 0.0;
  std::string status = "ok";  ///< "ok" or the error name
  std::string message;
  bool ok() const { return status == "ok"; }
};

struct BenchSummary {
  Index n = 0, k = 0;
  QcqpMethod method = QcqpMethod::Sdc;
  Index rows = 0, failures = 0;
  double median_kappa = std::numeric_limits<double>::quiet_NaN();
  double median_deviation = std::numeric_limits<double>::quiet_NaN();
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<BenchSummary> summary;
};

inline double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !std::isfinite(x); }), v.end());
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

/// Seed of cell `index` under `master`: a seed_seq mix, independent of the
/// order in which cells are processed.
inline std::uint64_t cell_seed(std::uint64_t master, std::uint64_t index) {
  std::seed_seq seq{std::uint32_t(master), std::uint32_t(master >> 32), std::uint32_t(index),
                    std::uint32_t(index >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (std::uint64_t(out[0]) << 32) | out[1];
}

namespace detail {

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

inline std::vector<BenchRow> bench_cell(const BenchConfig& cfg, Index n, Index k, Index s, std::uint64_t seed) {
  std::vector<BenchRow> rows;
  auto base = [&] {
    BenchRow r;
    r.n = n;
    r.k = k;
    r.seed = s;
    r.instance_seed = seed;
    return r;
  };
  QcqpInstance inst;
  double gen_ms = 0.0;
  try {
    const auto t0 = std::chrono::steady_clock::now();
    inst = generate_instance(n, k, cfg.m_factor * n, seed);
    gen_ms = elapsed_ms(t0);
  } catch (const Error& e) {
    for (auto m : cfg.methods) {
      BenchRow r = base();
      r.method = m;
      r.status = e.name();
      r.message = e.what();
      rows.push_back(r);
    }
    return rows;
  }
  for (auto m : cfg.methods) {
    BenchRow r = base();
    r.method = m;
    r.gen_ms = cfg.timing ? gen_ms : 0.0;
    try {
      const auto t0 = std::chrono::steady_clock::now();
      const auto ref = reformulate(inst, m);
      r.reform_ms = cfg.timing ? elapsed_ms(t0) : 0.0;
      r.dim = ref.dim;
      r.kappa = ref.kappa;
      if (m == QcqpMethod::Rsdc1 || m == QcqpMethod::Rsdc2) r.eig_residual = ref.eig_residual;
      r.deviation = verify_reformulation(inst, ref, cfg.samples, seed ^ 0x9e3779b97f4a7c15ULL).relative_deviation;
      if (!(r.deviation <= 1e-6)) r.status = "DeviationExceeded";
    } catch (const Error& e) {
      r.status = e.name();
      r.message = e.what();
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace detail

/// Runs every (n, k, seed) cell, in parallel across cells.  Rows are ordered
/// by cell index then method, so the report does not depend on scheduling.
inline BenchReport bench(const BenchConfig& cfg) {
  struct Cell {
    Index n, k, s;
  };
  std::vector<Cell> cells;
  for (Index n : cfg.ns)
    for (Index k : cfg.ks)
      for (Index s = 0; s < cfg.seeds; ++s) cells.push_back({n, k, s});
  std::vector<std::vector<BenchRow>> results(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < cells.size();) {
      const auto& c = cells[i];
      if (2 * c.k > c.n) {
        for (auto m : cfg.methods) {
          BenchRow r;
          r.n = c.n;
          r.k = c.k;
          r.seed = c.s;
          r.method = m;
          r.status = "InvalidArgument";
          r.message = "2k > n";
          results[i].push_back(r);
        }
        continue;
      }
      results[i] = detail::bench_cell(cfg, c.n, c.k, c.s, cell_seed(cfg.master_seed, i));
    }
  };
  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, std::max<std::size_t>(1, cells.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  BenchReport rep;
  for (auto& r : results) rep.rows.insert(rep.rows.end(), r.begin(), r.end());
  for (Index n : cfg.ns)
    for (Index k : cfg.ks)
      for (auto m : cfg.methods) {
        BenchSummary sm;
        sm.n = n;
        sm.k = k;
        sm.method = m;
        std::vector<double> kap, dev;
        for (const auto& r : rep.rows)
          if (r.n == n && r.k == k && r.method == m) {
            ++sm.rows;
            if (!r.ok()) ++sm.failures;
            if (r.ok()) {
              kap.push_back(r.kappa);
              dev.push_back(r.deviation);
            }
          }
        sm.median_kappa = median(kap);
        sm.median_deviation = median(dev);
        rep.summary.push_back(sm);
      }
  return rep;
}

}  // namespace sdcx
