// jordan.hpp - structured canonical form of nonsingular pencils with real
// spectrum, and the simple-eigenvalue splitting perturbation.
//
// For A invertible and M = A⁻¹B with real eigenvalues, a congruence P brings
// the pair to Diag(σ_i F_{n_i}) and Diag(σ_i(λ_i F_{n_i} + G_{n_i})).  The basis
// is built from Jordan chains: on a generalized eigenspace N = M − λI is
// A-selfadjoint, and a vector v with vᵀ A N^{k−1} v ≠ 0 generates a chain of
// maximal length k spanning an A-nondegenerate N-invariant subspace; its
// A-orthogonal complement is again invariant, so the construction recurses.
//
// Jordan structure is not stably computable from perturbed data.  These
// routines are meant for matrices whose structure is exact up to roundoff
// (assembled from block descriptors, or produced by the constructions of this
// library); every result is verified and callers certify their outputs.
#pragma once

#include "canonical.hpp"

namespace sdcx {

SDCX_DEFINE_ERROR(UnsupportedStructure)

struct JordanBlock {
  int sigma = 1;
  double lambda = 0.0;
  Index size = 1;
};

struct JordanForm {
  Mat P;
  std::vector<JordanBlock> blocks;

  Mat canonical_A() const {
    std::vector<Mat> b;
    for (const auto& j : blocks) b.push_back(j.sigma * F(j.size));
    return direct_sum(b);
  }
  Mat canonical_B() const {
    std::vector<Mat> b;
    for (const auto& j : blocks) b.push_back(j.sigma * (j.lambda * F(j.size) + G(j.size)));
    return direct_sum(b);
  }
  bool simple() const {
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (blocks[i].size != 1) return false;
      for (std::size_t j = i + 1; j < blocks.size(); ++j)
        if (blocks[i].lambda == blocks[j].lambda) return false;
    }
    return true;
  }
};

/// A generalized eigenspace: orthonormal basis and eigenvalue.
struct GeneralizedEigenspace {
  Mat W;
  double lambda = 0.0;
};

namespace detail {

/// Clustering radii (relative to the spectral scale) used for defective
/// spectra: roundoff splits a Jordan block of size k by ~δ^{1/k}.  Each
/// candidate grouping is validated (invariance and nilpotency of every cluster,
/// conditioning of the joint basis), finest radius first.
inline const std::vector<double>& defect_radii() {
  static const std::vector<double> r = {1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
  return r;
}

/// Largest condition number of the joint eigenspace basis for which distinct
/// clusters are trusted.  A Jordan block split by roundoff yields nearly
/// parallel "eigenspaces" (κ ≳ u^{−1/2} ≈ 1e8), so such a split is rejected in
/// favour of a coarser radius that merges it back.
inline constexpr double kMaxEigenspaceCond = 1e6;

/// Index of nilpotency of N (numerically), or -1 when N is not nilpotent.
inline Index nilpotency_index(const Mat& N) {
  const Index d = N.rows();
  const double s = std::max(1.0, norm2(N));
  const Mat Ns = N / s;
  Mat P = Mat::Identity(d, d);
  for (Index k = 1; k <= d; ++k) {
    P = P * Ns;
    if (norm2(P) <= 1e-12) return k;
  }
  return -1;
}

/// Generalized eigenspaces for one clustering radius; empty on failure.
inline std::vector<GeneralizedEigenspace> try_split(const Mat& M, double radius, double real_tol) {
  const Index n = M.rows();
  const CVec ev = eigenvalues(M);
  const double scale = spectral_scale(ev);
  const double s = std::max(1.0, norm2(M));
  std::vector<GeneralizedEigenspace> out;
  for (const auto& c : cluster_eigenvalues(ev, radius * scale)) {
    if (std::abs(c.center.imag()) > real_tol * scale) return {};
    const Index d = static_cast<Index>(c.members.size());
    const Mat Ns = (M - c.center.real() * Mat::Identity(n, n)) / s;
    Mat Pw = Mat::Identity(n, n);
    for (Index i = 0; i < d; ++i) Pw = Pw * Ns;
    const Mat W = smallest_right_singular_vectors(Pw, d);
    const Mat R = W.transpose() * M * W;
    // Invariance and nilpotency of the compressed shift.
    if (norm2(M * W - W * R) > 1e-8 * s) return {};
    if (nilpotency_index(R - c.center.real() * Mat::Identity(d, d)) < 0) return {};
    out.push_back({W, c.center.real()});
  }
  return out;
}

}  // namespace detail

/// Splits R^n into the generalized eigenspaces of M (real spectrum required).
inline std::vector<GeneralizedEigenspace> generalized_eigenspaces(const Mat& M, const Tolerances& tol = {}) {
  std::vector<GeneralizedEigenspace> fallback;
  double fallback_cond = std::numeric_limits<double>::infinity();
  for (double r : detail::defect_radii()) {
    const double radius = std::max(r, tol.cluster_tol);
    auto out = detail::try_split(M, radius, std::max(10 * radius, tol.eig_real_tol));
    if (out.empty()) continue;
    if (out.size() == 1) return out;
    Mat W(M.rows(), M.rows());
    Index c = 0;
    for (const auto& g : out) {
      W.middleCols(c, g.W.cols()) = g.W;
      c += g.W.cols();
    }
    const double k = cond_number(W);
    if (k <= detail::kMaxEigenspaceCond) return out;
    if (k < fallback_cond) {
      fallback = std::move(out);
      fallback_cond = k;
    }
  }
  if (!fallback.empty()) return fallback;
  throw UnsupportedStructure("could not resolve a real generalized eigenspace decomposition");
}

namespace detail {

struct Chain {
  int sigma;
  Mat X;  ///< columns x_1 = N^{k−1}v, …, x_k = v
};

/// Jordan chains of an A-selfadjoint nilpotent N in the metric A.
inline void nilpotent_chains(const Mat& A, const Mat& N, std::vector<Chain>& out, Mat basis) {
  const Index d = A.rows();
  if (d == 0) return;
  const Index k = nilpotency_index(N);
  if (k < 0) throw UnsupportedStructure("compressed shift is not nilpotent");
  std::vector<Mat> Npow(k + 1, Mat::Identity(d, d));
  for (Index s = 1; s <= k; ++s) Npow[s] = Npow[s - 1] * N;

  // Vector with vᵀ A N^{k−1} v ≠ 0: dominant eigenvector of the symmetric form.
  const Mat K = sym_part(A * Npow[k - 1]);
  Eigen::SelfAdjointEigenSolver<Mat> es(K);
  Index pick = 0;
  for (Index i = 1; i < d; ++i)
    if (std::abs(es.eigenvalues()(i)) > std::abs(es.eigenvalues()(pick))) pick = i;
  Vec v = es.eigenvectors().col(pick);
  std::vector<double> h(k);
  for (Index s = 0; s < k; ++s) h[s] = v.dot(A * (Npow[s] * v));
  const double lead = h[k - 1];
  if (lead == 0.0) throw UnsupportedStructure("degenerate Jordan chain");
  const int sigma = lead > 0 ? 1 : -1;

  // q(N) with Σ_t q_t h_{s+t} = σ δ_{s,k−1}, then p = √q as a truncated series.
  std::vector<double> q(k, 0.0), p(k, 0.0);
  q[0] = 1.0 / std::abs(lead);
  for (Index j = 1; j < k; ++j) {
    const Index s = k - 1 - j;
    double acc = 0.0;
    for (Index t = 0; t < j; ++t) acc += q[t] * h[s + t];
    q[j] = -acc / lead;
  }
  p[0] = std::sqrt(q[0]);
  for (Index j = 1; j < k; ++j) {
    double acc = q[j];
    for (Index i = 1; i < j; ++i) acc -= p[i] * p[j - i];
    p[j] = acc / (2.0 * p[0]);
  }
  Vec vn = Vec::Zero(d);
  for (Index j = 0; j < k; ++j) vn += p[j] * (Npow[j] * v);

  Mat X(d, k);
  for (Index j = 0; j < k; ++j) X.col(j) = Npow[k - 1 - j] * vn;
  out.push_back({sigma, basis * X});

  if (k == d) return;
  // A-orthogonal complement: invariant under N.
  const Mat Y = smallest_right_singular_vectors(X.transpose() * A, d - k);
  const Mat Ay = sym_part(Y.transpose() * A * Y);
  const Mat Ny = Y.transpose() * N * Y;
  nilpotent_chains(Ay, Ny, out, basis * Y);
}

}  // namespace detail

/// Structured canonical form of a nonsingular real-spectrum pencil.
inline JordanForm jordan_canonical(const Mat& A, const Mat& B, const Tolerances& tol = {}) {
  const Index n = A.rows();
  if (B.rows() != n || A.cols() != n || B.cols() != n) throw DimensionMismatch("pencil orders differ");
  if (!certified_invertible(A)) throw SingularA("A is not certifiably invertible");
  const Mat M = A.fullPivLu().solve(B);

  struct Piece {
    double lambda;
    int sigma;
    Mat X;
  };
  std::vector<Piece> pieces;
  for (const auto& ge : generalized_eigenspaces(M, tol)) {
    const Index d = ge.W.cols();
    const Mat Ac = sym_part(ge.W.transpose() * A * ge.W);
    const Mat Nc = ge.W.transpose() * M * ge.W - ge.lambda * Mat::Identity(d, d);
    std::vector<detail::Chain> chains;
    detail::nilpotent_chains(Ac, Nc, chains, ge.W);
    for (auto& c : chains) pieces.push_back({ge.lambda, c.sigma, c.X});
  }
  std::stable_sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) {
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    return a.X.cols() < b.X.cols();
  });
  JordanForm jf;
  jf.P = Mat(n, n);
  Index c = 0;
  for (const auto& p : pieces) {
    jf.P.middleCols(c, p.X.cols()) = p.X;
    c += p.X.cols();
    jf.blocks.push_back({p.sigma, p.lambda, p.X.cols()});
  }
  const double kP = cond_number(jf.P);
  if (!std::isfinite(kP)) throw UnsupportedStructure("Jordan basis is singular");
  const double scale = std::max({1.0, norm2(A), norm2(B)});
  const double errA = max_abs(jf.P.transpose() * A * jf.P - jf.canonical_A());
  const double errB = max_abs(jf.P.transpose() * B * jf.P - jf.canonical_B());
  if (errA > 1e-6 * scale * kP * kP || errB > 1e-6 * scale * kP * kP)
    throw UnsupportedStructure("structured canonical form could not be certified");
  return jf;
}

/// Canonical perturbation splitting every eigenvalue: block i receives
/// σ_i(η_i F + ε H) with η_i = ε·i/(2m) (i = 0, …, m−1).  Returned for ε = 1 in
/// canonical coordinates; the perturbation is linear in ε.
inline Mat splitting_direction(const JordanForm& jf) {
  const Index m = static_cast<Index>(jf.blocks.size());
  std::vector<Mat> b;
  for (Index i = 0; i < m; ++i) {
    const auto& j = jf.blocks[i];
    const double eta = double(i) / (2.0 * double(m));
    b.push_back(j.sigma * (eta * F(j.size) + H(j.size)));
  }
  return direct_sum(b);
}

/// Perturbation ΔB with ‖ΔB‖₂ ≤ budget such that A⁻¹(B + ΔB) has simple real
/// eigenvalues.  Returns zero when the pencil is already simple.
inline Mat split_perturbation(const Mat& A, const Mat& B, double budget, const Tolerances& tol = {}) {
  if (!certified_invertible(A)) throw SingularA("A is not certifiably invertible");
  // A diagonal congruence by D acts on A⁻¹B as the similarity D⁻¹(A⁻¹B)D, so
  // the pencil is balanced first; ‖D⁻¹ΔD⁻¹‖ ≤ ‖Δ‖/min(d)².
  const Vec d = balancing_scaling(A.fullPivLu().solve(B));
  const Mat Ab = d.asDiagonal() * A * d.asDiagonal(), Bb = d.asDiagonal() * B * d.asDiagonal();
  const JordanForm jf = jordan_canonical(Ab, Bb, tol);
  const Index n = A.rows();
  if (jf.simple()) return Mat::Zero(n, n);
  const Mat Pinv = jf.P.fullPivLu().inverse();
  const Vec dinv = d.cwiseInverse();
  const Mat D = sym_part(dinv.asDiagonal() * (Pinv.transpose() * splitting_direction(jf) * Pinv) * dinv.asDiagonal());
  const double nD = norm2(D);
  // Normalized directions keep a relative margin against rounding of ‖D‖.
  const double e = nD > 1.0 ? budget * (1.0 - 1e-9) / nD : budget;
  return e * D;
}

}  // namespace sdcx
