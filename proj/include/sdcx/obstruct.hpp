// obstruct.hpp - necessary-condition certificates against ASDC and RSDC, and
// the explicit counterexample families.
//
// Two obstructions are computed.  For {I, B, C}, padding with d < rank([B,C])/2
// zero rows/columns never yields an ASDC family, so the triple is not d-RSDC
// for those d.  For a family with an invertible member S, ASDC forces the real
// unital algebra generated by S⁻¹𝒜 to have dimension at most n; a larger
// dimension is a proof that the family is not ASDC.  Absence of a violation is
// never reported as ASDC.
#pragma once

#include <string>
#include <vector>

#include "sdc.hpp"

namespace sdcx {

SDCX_DEFINE_ERROR(NoInvertibleElement)

// ---------------------------------------------------------------------------
// Commutator obstruction
// ---------------------------------------------------------------------------

struct CommutatorObstruction {
  Index rank = 0;         ///< numeric rank of [B, C]
  Index d_threshold = 0;  ///< ceil(rank / 2): padding with fewer zeros fails
};

namespace detail {

/// Rank of a commutator-like product judged against ‖X‖‖Y‖ rather than its
/// own largest singular value, so that a roundoff-sized commutator has rank 0.
inline Index commutator_rank(const Mat& K, double scale, const Tolerances& tol) {
  const Vec s = singular_values(K);
  const double cut = std::max(tol.rank_tol, 64.0 * std::numeric_limits<double>::epsilon()) * scale;
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) ++r;
  return r;
}

inline Index ceil_half(Index r) { return (r + 1) / 2; }

}  // namespace detail

/// rank([B, C]) and ⌈rank/2⌉.  Symmetric in B and C.
inline CommutatorObstruction commutator_obstruction(const Mat& B, const Mat& C, const Tolerances& tol = {}) {
  tol.validate();
  if (B.rows() != B.cols() || C.rows() != C.cols() || B.rows() != C.rows())
    throw DimensionMismatch("commutator_obstruction requires square matrices of equal order");
  if (B.size() == 0) return {};
  const double scale = 2.0 * std::max(norm2(B) * norm2(C), std::numeric_limits<double>::min());
  const Index r = detail::commutator_rank(commutator(B, C), scale, tol);
  return {r, detail::ceil_half(r)};
}

// ---------------------------------------------------------------------------
// Algebra dimension
// ---------------------------------------------------------------------------

struct AlgebraClosure {
  Index dimension = 0;
  Index extensions = 0;     ///< rounds that enlarged the basis
  bool fixpoint = false;    ///< one further round added nothing
  std::vector<Mat> basis;   ///< orthonormal (Frobenius) basis of the algebra
};

namespace detail {

/// A basis direction accepted at relative singular value σ carries roundoff of
/// order u/σ, which products propagate into new directions.  The closure is
/// self-consistent only for a cutoff τ with u/τ < τ, i.e. τ above √u.
inline double closure_cutoff(const Tolerances& tol) { return std::max(tol.rank_tol, 1e-7); }

/// Orthonormal basis of span(mats) by SVD of the vectorized matrices; the
/// rank cutoff is relative to the largest singular value.  Inputs are not
/// rescaled: a product that is small because it nearly lies in the current
/// span must not have its roundoff amplified to unit size.
inline std::vector<Mat> span_basis(const std::vector<Mat>& mats, Index n, const Tolerances& tol) {
  std::vector<Vec> cols;
  for (const auto& M : mats)
    if (M.norm() > 0.0) cols.push_back(Eigen::Map<const Vec>(M.data(), n * n));
  if (cols.empty()) return {};
  Mat V(n * n, static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) V.col(Index(j)) = cols[j];
  Eigen::BDCSVD<Mat> svd(V, Eigen::ComputeThinU);
  const Vec& s = svd.singularValues();
  std::vector<Mat> out;
  for (Index i = 0; i < s.size(); ++i) {
    if (!(s(i) > closure_cutoff(tol) * s(0))) break;
    out.push_back(Eigen::Map<const Mat>(svd.matrixU().col(i).data(), n, n));
  }
  return out;
}

}  // namespace detail

/// Real unital algebra generated by the given matrices: the span of I and the
/// generators is closed under right multiplication by generators until a
/// round adds nothing.  Throws NoConvergence when more than `max_products`
/// enlarging rounds are needed (default n², the largest possible dimension).
inline AlgebraClosure algebra_closure(const std::vector<Mat>& generators, const Tolerances& tol = {},
                                      Index max_products = -1) {
  tol.validate();
  if (generators.empty()) throw EmptyFamily("algebra_dimension needs at least one generator");
  const Index n = generators.front().rows();
  for (const auto& G : generators)
    if (G.rows() != n || G.cols() != n) throw DimensionMismatch("generators must share one square order");
  if (max_products < 0) max_products = n * n;

  std::vector<Mat> gens;
  for (const auto& G : generators) {
    const double f = G.norm();
    if (f > 0.0) gens.push_back(G / f);
  }
  std::vector<Mat> seed{Mat::Identity(n, n) / std::sqrt(double(n))};
  seed.insert(seed.end(), gens.begin(), gens.end());
  AlgebraClosure out;
  out.basis = detail::span_basis(seed, n, tol);
  while (true) {
    std::vector<Mat> cand = out.basis;
    for (const auto& Q : out.basis)
      for (const auto& G : gens) cand.push_back(Q * G);
    auto next = detail::span_basis(cand, n, tol);
    if (next.size() <= out.basis.size()) {
      out.fixpoint = true;
      break;
    }
    out.basis = std::move(next);
    if (++out.extensions > max_products)
      throw NoConvergence("algebra closure did not reach a fixpoint within max_products extensions");
  }
  out.dimension = static_cast<Index>(out.basis.size());
  return out;
}

inline Index algebra_dimension(const std::vector<Mat>& generators, const Tolerances& tol = {},
                               Index max_products = -1) {
  return algebra_closure(generators, tol, max_products).dimension;
}

// ---------------------------------------------------------------------------
// Counterexample families
// ---------------------------------------------------------------------------

struct Counterexample {
  std::string name;
  Family family;
  std::string expected;  ///< the obstruction it is known to exhibit
};

/// Seven symmetric 6×6 matrices: A₁ the anti-identity and A₂, …, A₇ a basis of
/// the symmetric 3×3 matrices in the trailing block.  A₁⁻¹A_i commute with
/// real (zero) spectra, but the algebra they generate has dimension 7 > 6.
inline Family seven_tuple() {
  Family fam{F(6)};
  for (Index r = 3; r < 6; ++r)
    for (Index c = r; c < 6; ++c) {
      Mat E = Mat::Zero(6, 6);
      E(r, c) = E(c, r) = 1.0;
      fam.push_back(E);
    }
  return fam;
}

/// {I_{2n}, I_n ⊕ −I_n, [[0, I_n], [I_n, 0]]}: rank([B, C]) = 2n.
inline Family commutator_triple(Index n) {
  if (n < 1) throw InvalidArgument("commutator_triple requires n >= 1");
  Mat B = Mat::Zero(2 * n, 2 * n), C = Mat::Zero(2 * n, 2 * n);
  B.topLeftCorner(n, n).setIdentity();
  B.bottomRightCorner(n, n) = -Mat::Identity(n, n);
  C.topRightCorner(n, n).setIdentity();
  C.bottomLeftCorner(n, n).setIdentity();
  return {Mat::Identity(2 * n, 2 * n), B, C};
}

/// The built-in families; the commutator triple is instantiated at order 2n.
inline std::vector<Counterexample> builtin_counterexamples(Index n = 2) {
  return {{"seven-tuple", seven_tuple(), "algebra_dim > 6"},
          {"commutator-triple", commutator_triple(n),
           "commutator rank " + std::to_string(2 * n) + ", not ASDC after padding with fewer than " +
               std::to_string(n) + " zeros"}};
}

// ---------------------------------------------------------------------------
// Certificate
// ---------------------------------------------------------------------------

struct ObstructionReport {
  Index commutator_rank = 0;
  Index rsdc_lower_bound = 0;  ///< ceil(commutator_rank / 2)
  Index algebra_dim = 0;
  bool algebra_bound_violated = false;  ///< algebra_dim > n: proof of NotASDC
  bool commutator_checked = false;      ///< the family has three members
};

/// Necessary-condition report for a family with an invertible member S (the
/// max-rank element of its span).  The algebra is generated by S⁻¹A_i.  For
/// three members the commutator rank is that of B S⁻¹C − C S⁻¹B, where B, C
/// are the members other than the one dominating S; for S = I this is [B, C].
inline ObstructionReport not_asdc_certificate(const Family& fam, const Tolerances& tol = {},
                                              std::uint64_t seed = 0) {
  tol.validate();
  const auto mr = find_max_rank_element(fam, seed, tol);
  const Index n = fam.front().rows();
  if (mr.rank < n || !certified_invertible(mr.S))
    throw NoInvertibleElement("no certifiably invertible element in the span of the family");
  const auto lu = mr.S.fullPivLu();
  std::vector<Mat> gens;
  for (const auto& A : fam) gens.push_back(lu.solve(A));

  ObstructionReport rep;
  rep.algebra_dim = algebra_dimension(gens, tol);
  rep.algebra_bound_violated = rep.algebra_dim > n;
  if (fam.size() == 3) {
    Index drop = 0;
    for (Index i = 1; i < 3; ++i)
      if (std::abs(mr.coefficients(i)) > std::abs(mr.coefficients(drop))) drop = i;
    std::vector<Mat> rest;
    for (Index i = 0; i < 3; ++i)
      if (i != drop) rest.push_back(fam[i]);
    const Mat K = rest[0] * lu.solve(rest[1]) - rest[1] * lu.solve(rest[0]);
    const double scale =
        2.0 * std::max(norm2(rest[0]) * norm2(lu.solve(rest[1])), std::numeric_limits<double>::min());
    rep.commutator_rank = detail::commutator_rank(K, scale, tol);
    rep.rsdc_lower_bound = detail::ceil_half(rep.commutator_rank);
    rep.commutator_checked = true;
  }
  return rep;
}

}  // namespace sdcx
