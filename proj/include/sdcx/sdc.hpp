// sdc.hpp - deciding simultaneous diagonalizability by congruence (SDC) and
// constructing the diagonalizing congruence.
//
// Nonsingular families are handled through a max-rank element S: the family
// is SDC iff the matrices S⁻¹A_i are diagonalizable with real spectra and
// pairwise commute.  Singular families are first restricted to range(S),
// which must contain the range of every member.
#pragma once

#include "matcore.hpp"

#include <numeric>
#include <optional>
#include <random>

namespace sdcx {

SDCX_DEFINE_ERROR(EmptyFamily)
SDCX_DEFINE_ERROR(NotPositiveDefinite)

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

enum class WitnessKind { NonCommuting, NonRealEigenvalue, NotDiagonalizable, RangeViolation };

inline const char* witness_tag(WitnessKind k) {
  switch (k) {
    case WitnessKind::NonCommuting: return "NonCommuting";
    case WitnessKind::NonRealEigenvalue: return "NonRealEigenvalue";
    case WitnessKind::NotDiagonalizable: return "NotDiagonalizable";
    case WitnessKind::RangeViolation: return "RangeViolation";
  }
  return "Unknown";
}

/// Named reason for a negative verdict.
struct Witness {
  WitnessKind kind = WitnessKind::NotDiagonalizable;
  Index i = 0;             ///< offending member
  Index j = 0;             ///< second member (NonCommuting only)
  double value = 0.0;      ///< commutator norm (NonCommuting only)
  cplx lambda = 0.0;       ///< offending eigenvalue (NonRealEigenvalue only)

  std::string describe() const {
    std::string s = witness_tag(kind);
    switch (kind) {
      case WitnessKind::NonCommuting:
        return s + "(" + std::to_string(i) + ", " + std::to_string(j) + ", " + std::to_string(value) + ")";
      case WitnessKind::NonRealEigenvalue:
        return s + "(" + std::to_string(i) + ", " + std::to_string(lambda.real()) + (lambda.imag() < 0 ? "" : "+") +
               std::to_string(lambda.imag()) + "i)";
      default:
        return s + "(" + std::to_string(i) + ")";
    }
  }
};

enum class Verdict { SDC, NotSDC };

struct SdcResult {
  Verdict verdict = Verdict::NotSDC;
  std::optional<Congruence> congruence;  ///< present on SDC
  std::vector<Vec> diagonals;            ///< one per member, on SDC
  std::optional<Witness> witness;        ///< present on NotSDC

  bool is_sdc() const { return verdict == Verdict::SDC; }
};

inline SdcResult not_sdc(Witness w) {
  SdcResult r;
  r.verdict = Verdict::NotSDC;
  r.witness = w;
  return r;
}

/// Largest normalized off-diagonal residual max_i ‖PᵀA_iP − Diag‖_max / ‖A_i‖.
inline double diagonal_residual(const Family& fam, const Mat& P) {
  double worst = 0.0;
  for (const auto& A : fam) {
    Mat D = P.transpose() * A * P;
    D.diagonal().setZero();
    const double nA = norm2(A);
    if (nA > 0) worst = std::max(worst, max_abs(D) / nA);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Max-rank element
// ---------------------------------------------------------------------------

struct MaxRankElement {
  Vec coefficients;
  Mat S;
  Index rank = 0;
};

inline void check_family(const Family& fam) {
  if (fam.empty()) throw EmptyFamily("family must contain at least one matrix");
  const Index n = fam.front().rows();
  for (const auto& A : fam)
    if (A.rows() != n || A.cols() != n) throw DimensionMismatch("family members must share one square order");
}

/// Max-rank element of span(family): best of the individual members and 64
/// seeded Gaussian combinations; ties broken by the best σ_r/σ_1 ratio.
inline MaxRankElement find_max_rank_element(const Family& fam, std::uint64_t seed = 0,
                                            const Tolerances& tol = {}) {
  check_family(fam);
  const Index m = static_cast<Index>(fam.size());
  const Index n = fam.front().rows();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  MaxRankElement best;
  best.coefficients = Vec::Zero(m);
  best.S = Mat::Zero(n, n);
  double best_ratio = -1.0;
  auto consider = [&](const Vec& c) {
    Mat S = Mat::Zero(n, n);
    for (Index i = 0; i < m; ++i) S += c(i) * fam[i];
    const Vec s = singular_values(S);
    if (s.size() == 0 || s(0) == 0.0) return;
    Index r = 0;
    for (Index i = 0; i < s.size(); ++i)
      if (s(i) > tol.rank_tol * s(0)) ++r;
    const double ratio = s(r - 1) / s(0);
    if (r > best.rank || (r == best.rank && ratio > best_ratio)) {
      best.rank = r;
      best.coefficients = c;
      best.S = sym_part(S);
      best_ratio = ratio;
    }
  };
  for (Index i = 0; i < m; ++i) consider(unit(m, i));
  for (int t = 0; t < 64; ++t) {
    Vec c(m);
    for (Index i = 0; i < m; ++i) c(i) = normal(rng);
    consider(c);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Simultaneous similarity diagonalization of commuting matrices
// ---------------------------------------------------------------------------

/// Raised by simdiag_commuting when a precondition fails.
class SimdiagFailure : public Error {
 public:
  SimdiagFailure(std::string name, const std::string& what, Witness w) : Error(std::move(name), what), witness(w) {}
  Witness witness;
};

/// Joint eigenspaces of a commuting family: orthonormal blocks with the
/// member eigenvalues on each block.
struct JointEigenspaces {
  std::vector<Mat> blocks;
  std::vector<std::vector<double>> values;

  Mat basis() const {
    Index n = 0, d = 0;
    for (const auto& b : blocks) {
      n = b.rows();
      d += b.cols();
    }
    Mat V(n, d);
    Index c = 0;
    for (const auto& b : blocks) {
      V.middleCols(c, b.cols()) = b;
      c += b.cols();
    }
    return V;
  }
};

namespace detail {

/// Threshold for "the k smallest singular values of (M − λI) vanish".
inline double semisimple_threshold(const Mat& M) { return 1e-6 * std::max(1.0, norm2(M)); }

inline void refine(const Family& Ms, const Mat& W, std::size_t start, std::vector<double> vals,
                   const Tolerances& tol, double tau, JointEigenspaces& out) {
  for (std::size_t i = start; i < Ms.size(); ++i) {
    const Mat R = W.transpose() * Ms[i] * W;
    const CVec ev = eigenvalues(R);
    const double scale = spectral_scale(eigenvalues(Ms[i]));
    const auto clusters = conditioned_clusters(R, tol.cluster_tol * scale, tau);
    for (const auto& c : clusters)
      if (std::abs(c.center.imag()) > tol.eig_real_tol * scale)
        throw SimdiagFailure("NotDiagonalizable", "member has a non-real eigenvalue",
                             Witness{WitnessKind::NonRealEigenvalue, Index(i), 0, 0.0, c.center});
    if (clusters.size() == 1) {
      const double lam = clusters.front().center.real();
      if (norm2(R - lam * Mat::Identity(R.rows(), R.rows())) > semisimple_threshold(Ms[i]))
        throw SimdiagFailure("NotDiagonalizable", "member " + std::to_string(i) + " is not diagonalizable",
                             Witness{WitnessKind::NotDiagonalizable, Index(i)});
      vals.push_back(lam);
      continue;
    }
    const Index d = R.rows();
    for (const auto& c : clusters) {
      const Index kc = static_cast<Index>(c.members.size());
      const Mat shifted = R - c.center.real() * Mat::Identity(d, d);
      Eigen::JacobiSVD<Mat> svd(shifted, Eigen::ComputeFullV);
      const Vec& s = svd.singularValues();
      if (s(d - kc) > semisimple_threshold(Ms[i]))
        throw SimdiagFailure("NotDiagonalizable", "member " + std::to_string(i) + " is not diagonalizable",
                             Witness{WitnessKind::NotDiagonalizable, Index(i)});
      const Mat Z = svd.matrixV().rightCols(kc);
      auto v = vals;
      v.push_back(c.center.real());
      refine(Ms, W * Z, i + 1, v, tol, tau, out);
    }
    return;
  }
  out.blocks.push_back(W);
  out.values.push_back(vals);
}

}  // namespace detail

/// Joint eigenspace decomposition by recursive eigenspace refinement.
/// `tau` is the relative backward error of the members (see
/// backward_error_level); it decides which close eigenvalues are one cluster.
inline JointEigenspaces joint_eigenspaces(const Family& Ms, const Tolerances& tol = {}, double tau = 1e-12) {
  check_family(Ms);
  const Index n = Ms.front().rows();
  for (std::size_t i = 0; i < Ms.size(); ++i)
    for (std::size_t j = i + 1; j < Ms.size(); ++j) {
      const double c = norm2(commutator(Ms[i], Ms[j]));
      const double bound = std::max(tol.resid_tol, 1e-6) * std::max(1.0, norm2(Ms[i])) * std::max(1.0, norm2(Ms[j]));
      if (c > bound)
        throw SimdiagFailure("NotCommuting", "members do not commute",
                             Witness{WitnessKind::NonCommuting, Index(i), Index(j), c});
    }
  JointEigenspaces out;
  detail::refine(Ms, Mat::Identity(n, n), 0, {}, tol, tau, out);
  return out;
}

/// Invertible V with V⁻¹MV diagonal for every member of a commuting family of
/// real-diagonalizable matrices.
inline Mat simdiag_commuting(const Family& Ms, const Tolerances& tol = {}) {
  return joint_eigenspaces(Ms, tol).basis();
}

// ---------------------------------------------------------------------------
// SDC decision
// ---------------------------------------------------------------------------

namespace detail {

/// Normalizes columns, reads the diagonals and sorts columns by the diagonal
/// of the first member (then the following members).
inline SdcResult finish_sdc(const Family& fam, Mat P) {
  const Index n = P.cols();
  for (Index c = 0; c < n; ++c) {
    const double nc = P.col(c).norm();
    if (nc > 0) P.col(c) /= nc;
  }
  std::vector<Vec> diags;
  for (const auto& A : fam) diags.push_back((P.transpose() * A * P).diagonal());
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    for (const auto& d : diags) {
      if (d(a) < d(b)) return true;
      if (d(a) > d(b)) return false;
    }
    return false;
  });
  Mat Ps(P.rows(), n);
  for (Index c = 0; c < n; ++c) Ps.col(c) = P.col(order[c]);
  SdcResult r;
  r.verdict = Verdict::SDC;
  r.congruence = Congruence(Ps);
  for (const auto& A : fam) r.diagonals.push_back((Ps.transpose() * A * Ps).diagonal());
  return r;
}

/// Soundness gate: the diagonal residual must satisfy the certificate bound.
inline bool residual_ok(const Family& fam, const Mat& P, const Tolerances& tol) {
  const double k = cond_number(P);
  if (!std::isfinite(k)) return false;
  for (const auto& A : fam) {
    Mat D = P.transpose() * A * P;
    D.diagonal().setZero();
    if (max_abs(D) > tol.resid_tol * k * k * norm2(A) + 1e-300) return false;
  }
  return true;
}

inline SdcResult sdc_nonsingular(const Family& fam, const Mat& S, const Tolerances& tol) {
  const Index n = S.rows();
  const auto lu = S.fullPivLu();
  Family Ms;
  for (const auto& A : fam) Ms.push_back(lu.solve(A));
  const double tau = backward_error_level(cond_number(S));

  // Commutation is screened first: relative to an indefinite S a
  // non-commuting member can also show non-real eigenvalues, and the
  // commutator is the more specific witness.
  for (std::size_t i = 0; i < Ms.size(); ++i)
    for (std::size_t j = i + 1; j < Ms.size(); ++j) {
      const double c = norm2(commutator(Ms[i], Ms[j]));
      if (c > std::max(tol.resid_tol, 1e-6) * std::max(1.0, norm2(Ms[i])) * std::max(1.0, norm2(Ms[j])))
        return not_sdc({WitnessKind::NonCommuting, Index(i), Index(j), c});
    }

  // Spectral checks per member: real clusters that are semisimple.
  for (std::size_t i = 0; i < Ms.size(); ++i) {
    const CVec ev = eigenvalues(Ms[i]);
    const double scale = spectral_scale(ev);
    for (const auto& c : conditioned_clusters(Ms[i], tol.cluster_tol * scale, tau)) {
      if (std::abs(c.center.imag()) > tol.eig_real_tol * scale)
        return not_sdc({WitnessKind::NonRealEigenvalue, Index(i), 0, 0.0, c.center});
      const Index kc = static_cast<Index>(c.members.size());
      const Vec s = singular_values(Ms[i] - c.center.real() * Mat::Identity(n, n));
      if (s(n - kc) > semisimple_threshold(Ms[i])) return not_sdc({WitnessKind::NotDiagonalizable, Index(i)});
    }
  }
  JointEigenspaces joint;
  try {
    joint = joint_eigenspaces(Ms, tol, tau);
  } catch (const SimdiagFailure& f) {
    return not_sdc(f.witness);
  }
  // Within a joint eigenspace every member is a multiple of S, so an
  // orthogonal eigenbasis of the compressed S diagonalizes the whole family.
  Mat P(n, n);
  Index c = 0;
  for (const auto& W : joint.blocks) {
    const Mat Sb = sym_part(W.transpose() * S * W);
    Eigen::SelfAdjointEigenSolver<Mat> es(Sb);
    P.middleCols(c, W.cols()) = W * es.eigenvectors();
    c += W.cols();
  }
  if (!certified_invertible(P) || !residual_ok(fam, P, tol)) {
    // Locate the member responsible for the failed residual.
    Index worst = 0;
    double wv = -1;
    for (std::size_t i = 0; i < fam.size(); ++i) {
      Mat D = P.transpose() * fam[i] * P;
      D.diagonal().setZero();
      const double v = max_abs(D) / std::max(norm2(fam[i]), 1e-300);
      if (v > wv) {
        wv = v;
        worst = Index(i);
      }
    }
    return not_sdc({WitnessKind::NotDiagonalizable, worst});
  }
  return finish_sdc(fam, P);
}

}  // namespace detail

/// Decides SDC of a family and, when positive, returns a certified congruence.
inline SdcResult sdc_check(const Family& fam, const Tolerances& tol = {}, std::uint64_t seed = 0) {
  tol.validate();
  check_family(fam);
  const Index n = fam.front().rows();
  const auto mr = find_max_rank_element(fam, seed, tol);
  if (mr.rank == 0) {
    SdcResult r;
    r.verdict = Verdict::SDC;
    r.congruence = Congruence(Mat::Identity(n, n));
    for (const auto& A : fam) r.diagonals.push_back(A.diagonal());
    return r;
  }
  if (mr.rank == n) return detail::sdc_nonsingular(fam, mr.S, tol);

  const auto split = range_split(mr.S, tol);
  const Mat& U = split.range;
  for (std::size_t i = 0; i < fam.size(); ++i) {
    const double nA = norm2(fam[i]);
    if (nA == 0) continue;
    if (norm2(fam[i] - U * (U.transpose() * fam[i])) > tol.resid_tol * nA)
      return not_sdc({WitnessKind::RangeViolation, Index(i)});
  }
  Family restricted;
  for (const auto& A : fam) restricted.push_back(sym_part(U.transpose() * A * U));
  const SdcResult sub = sdc_check(restricted, tol, seed);
  if (!sub.is_sdc()) return sub;
  Mat P(n, n);
  P.leftCols(U.cols()) = U * sub.congruence->P();
  P.rightCols(n - U.cols()) = split.complement;
  if (!detail::residual_ok(fam, P, tol)) return not_sdc({WitnessKind::NotDiagonalizable, 0});
  return detail::finish_sdc(fam, P);
}

/// SDC decision when a positive definite combination Σ c_i A_i is known.
inline SdcResult sdc_check_pd(const Family& fam, const Vec& pd_coefficients, const Tolerances& tol = {}) {
  tol.validate();
  check_family(fam);
  if (pd_coefficients.size() != static_cast<Index>(fam.size()))
    throw DimensionMismatch("one coefficient per family member is required");
  const Index n = fam.front().rows();
  Mat S = Mat::Zero(n, n);
  for (std::size_t i = 0; i < fam.size(); ++i) S += pd_coefficients(Index(i)) * fam[i];
  S = sym_part(S);
  Eigen::SelfAdjointEigenSolver<Mat> es(S);
  const Vec& d = es.eigenvalues();
  if (!(d(0) > tol.rank_tol * std::max(1.0, std::abs(d(n - 1)))))
    throw NotPositiveDefinite("combination has minimum eigenvalue " + std::to_string(d(0)));
  const Mat Sinvhalf = es.eigenvectors() * d.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  Family Ts;
  for (const auto& A : fam) Ts.push_back(sym_part(Sinvhalf * A * Sinvhalf));
  for (std::size_t i = 0; i < Ts.size(); ++i)
    for (std::size_t j = i + 1; j < Ts.size(); ++j) {
      const double c = norm2(commutator(Ts[i], Ts[j]));
      if (c > tol.resid_tol * std::max(1.0, norm2(Ts[i])) * std::max(1.0, norm2(Ts[j])))
        return not_sdc({WitnessKind::NonCommuting, Index(i), Index(j), c});
    }
  // Symmetric commuting matrices: a joint orthonormal eigenbasis exists.
  JointEigenspaces joint;
  try {
    joint = joint_eigenspaces(Ts, tol);
  } catch (const SimdiagFailure& f) {
    return not_sdc(f.witness);
  }
  const Mat V = joint.basis();
  const Mat P = Sinvhalf * V;
  if (!detail::residual_ok(fam, P, tol)) return not_sdc({WitnessKind::NotDiagonalizable, 0});
  return detail::finish_sdc(fam, P);
}

}  // namespace sdcx
