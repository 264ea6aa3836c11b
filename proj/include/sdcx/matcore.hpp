// matcore.hpp - dense real matrix substrate for the sdcx toolkit.
//
// Special matrices F_n / G_n / H_n, ranks, norms, commutators, direct sums,
// the tolerance policy shared by every module and the symmetric-matrix /
// congruence carrier types.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdcx {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using cplx = std::complex<double>;
using Index = Eigen::Index;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Base class of every error raised by the toolkit.  `name()` is the stable
/// machine-readable tag printed by the command-line front end.
class Error : public std::runtime_error {
 public:
  Error(std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

#define SDCX_DEFINE_ERROR(Cls)                                      \
  class Cls : public Error {                                        \
   public:                                                          \
    explicit Cls(const std::string& what) : Error(#Cls, what) {}    \
  };

SDCX_DEFINE_ERROR(InvalidArgument)
SDCX_DEFINE_ERROR(NotSymmetric)
SDCX_DEFINE_ERROR(DimensionMismatch)
SDCX_DEFINE_ERROR(SingularMatrix)
SDCX_DEFINE_ERROR(NoConvergence)

// ---------------------------------------------------------------------------
// Tolerances
// ---------------------------------------------------------------------------

/// Single floating-point interpretation of the exact-arithmetic statements.
struct Tolerances {
  double rank_tol = 1e-10;      ///< relative SVD cutoff
  double eig_real_tol = 1e-8;   ///< |Im| threshold for a "real" eigenvalue
  double resid_tol = 1e-8;      ///< relative off-diagonal residual
  double cluster_tol = 1e-7;    ///< eigenvalue clustering threshold

  void validate() const {
    if (!(rank_tol > 0 && eig_real_tol > 0 && resid_tol > 0 && cluster_tol > 0))
      throw InvalidArgument("all tolerances must be strictly positive");
  }
};

// ---------------------------------------------------------------------------
// Norms and basic helpers
// ---------------------------------------------------------------------------

inline double max_abs(const Mat& M) {
  return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff();
}

inline Vec singular_values(const Mat& M) {
  if (M.size() == 0) return Vec();
  return Eigen::JacobiSVD<Mat>(M).singularValues();
}

/// Spectral norm ‖M‖₂.
inline double norm2(const Mat& M) {
  if (M.size() == 0) return 0.0;
  return singular_values(M)(0);
}

/// Stable symmetric part (M + Mᵀ)/2.
inline Mat sym_part(const Mat& M) { return 0.5 * (M + M.transpose()); }

inline Mat identity(Index n) { return Mat::Identity(n, n); }

// ---------------------------------------------------------------------------
// SymMat
// ---------------------------------------------------------------------------

/// Dense real symmetric matrix.  Small asymmetries (roundoff from congruences)
/// are projected away at construction; gross asymmetry is rejected.
class SymMat {
 public:
  SymMat() = default;

  explicit SymMat(const Mat& M) {
    if (M.rows() != M.cols())
      throw DimensionMismatch("SymMat requires a square matrix, got " +
                              std::to_string(M.rows()) + "x" + std::to_string(M.cols()));
    const double asym = max_abs(M - M.transpose());
    const double scale = std::max(1.0, max_abs(M));
    if (!(asym <= 1e-12 * scale))
      throw NotSymmetric("asymmetry " + std::to_string(asym) + " exceeds 1e-12 relative");
    m_ = sym_part(M);
  }

  /// Projects onto the symmetric matrices without the asymmetry check; for
  /// internally produced congruence images whose roundoff may exceed 1e-12.
  static SymMat project(const Mat& M) {
    if (M.rows() != M.cols()) throw DimensionMismatch("SymMat::project requires a square matrix");
    SymMat s;
    s.m_ = sym_part(M);
    return s;
  }

  Index n() const { return m_.rows(); }
  const Mat& mat() const { return m_; }
  operator const Mat&() const { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }

 private:
  Mat m_;
};

using Family = std::vector<Mat>;

// ---------------------------------------------------------------------------
// Special matrices
// ---------------------------------------------------------------------------

enum class Special { F, G, H };

/// F_n: ones on the anti-diagonal; G_n: ones on the anti-diagonal shifted
/// down-right (i + j = n, zero-based); H_n: shifted up-left (i + j = n − 2).
inline Mat special_matrix(Special kind, Index n) {
  if (n < 1) throw InvalidArgument("special_matrix requires n >= 1");
  Mat M = Mat::Zero(n, n);
  Index target = 0;
  switch (kind) {
    case Special::F: target = n - 1; break;
    case Special::G: target = n; break;
    case Special::H: target = n - 2; break;
  }
  for (Index i = 0; i < n; ++i) {
    const Index j = target - i;
    if (j >= 0 && j < n) M(i, j) = 1.0;
  }
  return M;
}

inline Mat F(Index n) { return special_matrix(Special::F, n); }
inline Mat G(Index n) { return special_matrix(Special::G, n); }
inline Mat H(Index n) { return special_matrix(Special::H, n); }

/// Unit vector e_i of length n (zero-based).
inline Vec unit(Index n, Index i) {
  Vec e = Vec::Zero(n);
  e(i) = 1.0;
  return e;
}

// ---------------------------------------------------------------------------
// Algebraic helpers
// ---------------------------------------------------------------------------

inline Mat commutator(const Mat& A, const Mat& B) {
  if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows())
    throw DimensionMismatch("commutator requires square matrices of equal order");
  return A * B - B * A;
}

inline Mat kron(const Mat& A, const Mat& B) {
  Mat K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

inline Mat direct_sum(const std::vector<Mat>& blocks) {
  Index r = 0, c = 0;
  for (const auto& b : blocks) {
    r += b.rows();
    c += b.cols();
  }
  Mat D = Mat::Zero(r, c);
  Index i = 0, j = 0;
  for (const auto& b : blocks) {
    D.block(i, j, b.rows(), b.cols()) = b;
    i += b.rows();
    j += b.cols();
  }
  return D;
}

inline Mat direct_sum(const Mat& A, const Mat& B) { return direct_sum(std::vector<Mat>{A, B}); }

/// Number of singular values above rank_tol · σ_max.
inline Index numeric_rank(const Mat& M, const Tolerances& tol = {}) {
  if (M.size() == 0) return 0;
  const Vec s = singular_values(M);
  if (s(0) == 0.0) return 0;
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > tol.rank_tol * s(0)) ++r;
  return r;
}

/// Threshold below which σ_min/σ_max certifies a matrix as singular.
inline constexpr double kInvertibilityThreshold = 1e-12;

/// κ(P) = σ_max/σ_min, +∞ when P is not certifiably invertible.
inline double cond_number(const Mat& P) {
  if (P.rows() != P.cols()) throw DimensionMismatch("cond_number requires a square matrix");
  if (P.size() == 0) return 1.0;
  const Vec s = singular_values(P);
  const double smax = s(0), smin = s(s.size() - 1);
  if (!(smax > 0) || smin <= kInvertibilityThreshold * smax)
    return std::numeric_limits<double>::infinity();
  return smax / smin;
}

inline bool certified_invertible(const Mat& P) { return std::isfinite(cond_number(P)); }

/// Orthonormal basis of range(M) (columns of U for the numerically nonzero
/// singular values) and of its orthogonal complement.
struct RangeSplit {
  Mat range;
  Mat complement;
};

inline RangeSplit range_split(const Mat& M, const Tolerances& tol = {}) {
  const Index n = M.rows();
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullU);
  const Vec& s = svd.singularValues();
  Index r = 0;
  if (s.size() > 0 && s(0) > 0)
    for (Index i = 0; i < s.size(); ++i)
      if (s(i) > tol.rank_tol * s(0)) ++r;
  return {svd.matrixU().leftCols(r), svd.matrixU().rightCols(n - r)};
}

/// Orthonormal basis (n × dim) of the right null space using the `dim`
/// smallest right singular vectors.
inline Mat smallest_right_singular_vectors(const Mat& M, Index dim) {
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(dim);
}

// ---------------------------------------------------------------------------
// Congruence
// ---------------------------------------------------------------------------

/// Invertible change of basis P with cached κ(P).
class Congruence {
 public:
  Congruence() = default;
  explicit Congruence(Mat P) : p_(std::move(P)) {
    if (p_.rows() != p_.cols()) throw DimensionMismatch("Congruence requires a square matrix");
    kappa_ = cond_number(p_);
    if (!std::isfinite(kappa_))
      throw SingularMatrix("congruence matrix is not certifiably invertible");
  }
  const Mat& P() const { return p_; }
  double kappa() const { return kappa_; }
  Index n() const { return p_.rows(); }
  Mat apply(const Mat& A) const { return p_.transpose() * A * p_; }

 private:
  Mat p_;
  double kappa_ = 1.0;
};

// ---------------------------------------------------------------------------
// Eigenvalue clustering
// ---------------------------------------------------------------------------

/// A cluster of (nearly) equal eigenvalues: mean value and member indices.
struct Cluster {
  cplx center;
  std::vector<Index> members;
};

namespace detail {

/// Single-linkage clustering under a pairwise linking predicate.
template <class Linked>
inline std::vector<Cluster> link_clusters(const CVec& ev, Linked linked) {
  const Index n = ev.size();
  std::vector<Index> parent(n);
  for (Index i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](Index i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (linked(i, j)) parent[find(i)] = find(j);
  std::vector<Cluster> out;
  std::vector<Index> slot(n, -1);
  for (Index i = 0; i < n; ++i) {
    const Index r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<Index>(out.size());
      out.push_back({});
    }
    out[slot[r]].members.push_back(i);
  }
  for (auto& c : out) {
    cplx s = 0;
    for (Index i : c.members) s += ev(i);
    c.center = s / double(c.members.size());
  }
  std::sort(out.begin(), out.end(), [](const Cluster& a, const Cluster& b) {
    if (a.center.real() != b.center.real()) return a.center.real() < b.center.real();
    return a.center.imag() < b.center.imag();
  });
  return out;
}

}  // namespace detail

/// Single-linkage clustering of eigenvalues in the complex plane with radius
/// `radius`: two eigenvalues belong to one cluster when connected by a chain
/// of hops shorter than the radius.
inline std::vector<Cluster> cluster_eigenvalues(const CVec& ev, double radius) {
  return detail::link_clusters(ev, [&](Index i, Index j) { return std::abs(ev(i) - ev(j)) <= radius; });
}

/// Diagonal d (powers of two) such that D⁻¹MD, D = Diag(d), has equalized
/// row and column norms, as in the classical Parlett–Reinsch balancing.
inline Vec balancing_scaling(Mat M) {
  const Index n = M.rows();
  Vec d = Vec::Ones(n);
  bool changed = true;
  for (int sweep = 0; changed && sweep < 100; ++sweep) {
    changed = false;
    for (Index i = 0; i < n; ++i) {
      double c = M.col(i).cwiseAbs().sum() - std::abs(M(i, i));
      double r = M.row(i).cwiseAbs().sum() - std::abs(M(i, i));
      if (c == 0.0 || r == 0.0) continue;
      const double total = c + r;
      double f = 1.0;
      while (c < r / 2) {
        c *= 2;
        r /= 2;
        f *= 2;
      }
      while (c >= r * 2) {
        c /= 2;
        r *= 2;
        f /= 2;
      }
      if (c + r < 0.95 * total) {
        M.row(i) /= f;
        M.col(i) *= f;
        d(i) *= f;
        changed = true;
      }
    }
  }
  return d;
}

/// Balanced matrix D⁻¹MD.
inline Mat balance(const Mat& M) {
  const Vec d = balancing_scaling(M);
  return d.cwiseInverse().asDiagonal() * M * d.asDiagonal();
}

/// Relative backward error of a matrix formed as S⁻¹A with κ(S) = kappa:
/// a safety factor of 10² over the unit roundoff, clamped to [1e-12, 1e-10].
/// The upper clamp keeps badly conditioned but exactly diagonalizable
/// inputs (graded pencils) from being merged into spurious defective clusters.
inline double backward_error_level(double kappa) {
  if (!std::isfinite(kappa)) return 1e-10;
  return std::clamp(1e2 * std::numeric_limits<double>::epsilon() * kappa, 1e-12, 1e-10);
}

/// Eigenvalues and (optionally) eigenvectors of a real square matrix.
struct EigenDecomposition {
  CVec values;
  CMat vectors;
};

/// Exactly structured inputs (stacked Jordan blocks with identical entries)
/// occasionally stall the real QR iteration.  An orthogonal change of basis
/// and then the complex Schur iteration are tried before giving up.
inline EigenDecomposition eigen_decomposition(const Mat& M, bool vectors) {
  if (M.size() == 0) return {};
  {
    Eigen::EigenSolver<Mat> es(M, vectors);
    if (es.info() == Eigen::Success) return {es.eigenvalues(), vectors ? CMat(es.eigenvectors()) : CMat()};
  }
  const Index n = M.rows();
  Mat G(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) G(i, j) = std::sin(double(7 * i + 3 * j + 1));
  const Mat Q = Eigen::HouseholderQR<Mat>(G).householderQ();
  {
    Eigen::EigenSolver<Mat> es(Q.transpose() * M * Q, vectors);
    if (es.info() == Eigen::Success)
      return {es.eigenvalues(), vectors ? CMat(Q.cast<cplx>() * es.eigenvectors()) : CMat()};
  }
  Eigen::ComplexEigenSolver<CMat> ces(M.cast<cplx>(), vectors);
  if (ces.info() == Eigen::Success) return {ces.eigenvalues(), vectors ? CMat(ces.eigenvectors()) : CMat()};
  throw NoConvergence("eigenvalue iteration did not converge");
}

/// Clusters of eigenvalues of M that cannot be told apart at relative
/// backward error `tau`: λ_i and λ_j are linked when |λ_i − λ_j| ≤ radius or
/// |λ_i − λ_j| ≤ tau·‖M‖·(κ_i + κ_j), κ_i the eigenvalue condition numbers.
/// A Jordan block split by roundoff produces eigenvalues whose separation is
/// tiny compared with their condition, so it is grouped back into one cluster,
/// while well-conditioned close eigenvalues stay apart.
inline std::vector<Cluster> conditioned_clusters(const Mat& M, double radius, double tau = 1e-12) {
  const Index n = M.rows();
  if (n == 0) return {};
  // Condition numbers are taken after balancing: a diagonal similarity does
  // not change the eigenvalues but removes spurious ill-conditioning.
  const Mat Mb = balance(M);
  const EigenDecomposition ed = eigen_decomposition(Mb, true);
  const CVec& ev = ed.values;
  const CMat& V = ed.vectors;
  Eigen::FullPivLU<CMat> lu(V);
  Vec kappa(n);
  if (lu.rank() < n) {
    kappa.setConstant(std::numeric_limits<double>::infinity());
  } else {
    const CMat W = lu.inverse();
    for (Index i = 0; i < n; ++i) kappa(i) = V.col(i).norm() * W.row(i).norm();
  }
  const double s = std::max(1.0, Mb.cwiseAbs().rowwise().sum().maxCoeff());
  return detail::link_clusters(ev, [&](Index i, Index j) {
    const double d = std::abs(ev(i) - ev(j));
    return d <= radius || d <= tau * s * (kappa(i) + kappa(j));
  });
}

/// Spectral scale max(1, max |λ|) used to make eigenvalue thresholds relative.
inline double spectral_scale(const CVec& ev) {
  double s = 1.0;
  for (Index i = 0; i < ev.size(); ++i) s = std::max(s, std::abs(ev(i)));
  return s;
}

/// Real matrix → eigenvalues (complex).
inline CVec eigenvalues(const Mat& M) {
  if (M.size() == 0) return CVec();
  return eigen_decomposition(M, false).values;
}

/// Eigenvalues sorted by (real, imag) for deterministic comparisons.
inline std::vector<cplx> sorted_eigenvalues(const Mat& M) {
  const CVec ev = eigenvalues(M);
  std::vector<cplx> v(ev.data(), ev.data() + ev.size());
  std::sort(v.begin(), v.end(), [](cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return v;
}

}  // namespace sdcx
