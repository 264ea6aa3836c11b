// canonical.hpp - canonical form of a real symmetric pencil (A, B).
//
// Generic regime: A invertible and A⁻¹B with simple eigenvalues.  Real
// eigenvalues give 1×1 blocks (σ, σμ); conjugate pairs give 2×2 blocks
// (F_2, [[Im λ, Re λ], [Re λ, −Im λ]]).  Arbitrary canonical descriptors
// (Jordan-type, complex, singular-coupling and zero blocks) are assembled
// exactly from a BlockSpec.
#pragma once

#include "matcore.hpp"

namespace sdcx {

SDCX_DEFINE_ERROR(SingularA)
SDCX_DEFINE_ERROR(RepeatedEigenvalues)
SDCX_DEFINE_ERROR(ClassificationAmbiguous)
SDCX_DEFINE_ERROR(CertificationFailed)

/// 2×2 canonical block [[Im λ, Re λ], [Re λ, −Im λ]] paired with F_2.
inline Mat complex_block(cplx lambda) {
  Mat T(2, 2);
  T << lambda.imag(), lambda.real(), lambda.real(), -lambda.imag();
  return T;
}

// ---------------------------------------------------------------------------
// PencilForm
// ---------------------------------------------------------------------------

struct RealBlock {
  int sigma = 1;
  double mu = 0.0;
};

struct PencilForm {
  Congruence P;
  std::vector<RealBlock> real_blocks;
  std::vector<cplx> complex_blocks;  ///< λ_i with Im λ_i > 0

  Index r() const { return static_cast<Index>(real_blocks.size()); }
  Index k() const { return static_cast<Index>(complex_blocks.size()); }
  Index n() const { return r() + 2 * k(); }

  /// Canonical image of A: Diag(σ_1, …, σ_r, F_2, …, F_2).
  Mat canonical_A() const {
    std::vector<Mat> blocks;
    for (const auto& b : real_blocks) blocks.push_back(Mat::Constant(1, 1, b.sigma));
    for (std::size_t i = 0; i < complex_blocks.size(); ++i) blocks.push_back(F(2));
    return direct_sum(blocks);
  }

  /// Canonical image of B: Diag(σ_1μ_1, …, σ_rμ_r, T_1, …, T_k).
  Mat canonical_B() const {
    std::vector<Mat> blocks;
    for (const auto& b : real_blocks) blocks.push_back(Mat::Constant(1, 1, b.sigma * b.mu));
    for (const auto& l : complex_blocks) blocks.push_back(complex_block(l));
    return direct_sum(blocks);
  }

  /// Eigenvalues of A⁻¹B implied by the form: {μ_i} ∪ {λ_i, λ̄_i}.
  std::vector<cplx> spectrum() const {
    std::vector<cplx> out;
    for (const auto& b : real_blocks) out.emplace_back(b.mu, 0.0);
    for (const auto& l : complex_blocks) {
      out.push_back(l);
      out.push_back(std::conj(l));
    }
    return out;
  }
};

namespace detail {

/// Normalizes the real two-dimensional invariant subspace W = [Re w, Im w]
/// of a non-real eigenvalue λ (Im λ > 0) so that the local Gram matrices become
/// F_2 and [[Im λ, Re λ], [Re λ, −Im λ]].
inline Mat normalize_complex_pair(const Mat& A, const Mat& B, const Mat& W, cplx lambda) {
  const Mat GA = sym_part(W.transpose() * A * W);
  const Mat GB = sym_part(W.transpose() * B * W);
  Eigen::SelfAdjointEigenSolver<Mat> es(GA);
  // es sorts ascending: eigenvalue 0 is negative, eigenvalue 1 positive.
  const double gneg = es.eigenvalues()(0), gpos = es.eigenvalues()(1);
  if (!(gpos > 0 && gneg < 0))
    throw CertificationFailed("local Gram matrix of a complex pair is not indefinite");
  Mat R0(2, 2);
  R0.col(0) = es.eigenvectors().col(1) / std::sqrt(gpos);
  R0.col(1) = es.eigenvectors().col(0) / std::sqrt(-gneg);
  Mat K(2, 2);
  K << 1, 1, 1, -1;
  K /= std::sqrt(2.0);
  Mat R1 = R0 * K;  // R1ᵀ GA R1 = F_2
  Mat GB1 = R1.transpose() * GB * R1;
  if (GB1(0, 0) < 0) {
    Mat S(2, 2);
    S << 0, 1, 1, 0;
    R1 = R1 * S;
    GB1 = S * GB1 * S;
  }
  if (!(GB1(0, 0) > 0)) throw CertificationFailed("degenerate complex-pair normalization");
  const double t = std::sqrt(lambda.imag() / GB1(0, 0));
  Mat D = Mat::Zero(2, 2);
  D(0, 0) = t;
  D(1, 1) = 1.0 / t;
  return W * R1 * D;
}

}  // namespace detail

/// Canonical form of (A, B) in the simple-eigenvalue regime.
inline PencilForm pencil_canonical(const Mat& A, const Mat& B, const Tolerances& tol = {}) {
  tol.validate();
  const Index n = A.rows();
  if (A.cols() != n || B.rows() != n || B.cols() != n)
    throw DimensionMismatch("pencil_canonical requires square matrices of equal order");
  if (n == 0) return PencilForm{Congruence(Mat(0, 0)), {}, {}};
  if (!certified_invertible(A)) throw SingularA("A is not certifiably invertible");

  const Mat M = A.fullPivLu().solve(B);
  const EigenDecomposition ed = eigen_decomposition(M, true);
  const CVec& ev = ed.values;
  const CMat& V = ed.vectors;
  const double scale = spectral_scale(ev);

  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (std::abs(ev(i) - ev(j)) <= tol.cluster_tol * scale)
        throw RepeatedEigenvalues("eigenvalues " + std::to_string(i) + " and " +
                                  std::to_string(j) + " are closer than the clustering threshold");

  struct RealCol {
    double mu;
    int sigma;
    Vec v;
  };
  struct CplxCols {
    cplx lambda;
    Mat W;
  };
  std::vector<RealCol> reals;
  std::vector<CplxCols> cplxs;
  for (Index i = 0; i < n; ++i) {
    const double im = std::abs(ev(i).imag());
    if (im <= tol.eig_real_tol * scale) {
      Vec v = V.col(i).real();
      v.normalize();
      const double g = v.dot(A * v);
      if (g == 0.0) throw CertificationFailed("real eigenvector is A-isotropic");
      reals.push_back({ev(i).real(), g > 0 ? 1 : -1, v / std::sqrt(std::abs(g))});
    } else if (im <= 10.0 * tol.eig_real_tol * scale) {
      throw ClassificationAmbiguous("eigenvalue with imaginary part " + std::to_string(ev(i).imag()) +
                                    " lies in the refusal band");
    } else if (ev(i).imag() > 0) {
      Mat W(n, 2);
      W.col(0) = V.col(i).real();
      W.col(1) = V.col(i).imag();
      W /= W.norm();
      cplxs.push_back({ev(i), detail::normalize_complex_pair(A, B, W, ev(i))});
    }
  }
  std::sort(reals.begin(), reals.end(), [](const RealCol& a, const RealCol& b) { return a.mu < b.mu; });
  std::sort(cplxs.begin(), cplxs.end(), [](const CplxCols& a, const CplxCols& b) {
    if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
    return a.lambda.imag() < b.lambda.imag();
  });
  if (static_cast<Index>(reals.size() + 2 * cplxs.size()) != n)
    throw CertificationFailed("eigenvalue classification does not account for every dimension");

  Mat P(n, n);
  PencilForm form;
  Index c = 0;
  for (const auto& r : reals) {
    P.col(c++) = r.v;
    form.real_blocks.push_back({r.sigma, r.mu});
  }
  for (const auto& z : cplxs) {
    P.block(0, c, n, 2) = z.W;
    c += 2;
    form.complex_blocks.push_back(z.lambda);
  }
  form.P = Congruence(P);

  const double k2 = form.P.kappa() * form.P.kappa();
  const double resA = max_abs(form.P.apply(A) - form.canonical_A());
  const double resB = max_abs(form.P.apply(B) - form.canonical_B());
  const double normA = std::max(norm2(A), 1e-300), normB = std::max(norm2(B), 1.0);
  if (resA > tol.resid_tol * k2 * normA || resB > tol.resid_tol * k2 * std::max(normA, normB) * scale)
    throw CertificationFailed("canonical residual exceeds tolerance");
  return form;
}

/// Inverse of pencil_canonical: (P⁻ᵀ D_A P⁻¹, P⁻ᵀ D_B P⁻¹).
inline std::pair<SymMat, SymMat> assemble_pencil(const PencilForm& form) {
  const Index n = form.n();
  if (n == 0) return {SymMat(Mat(0, 0)), SymMat(Mat(0, 0))};
  const Mat Pinv = form.P.P().fullPivLu().inverse();
  return {SymMat::project(Pinv.transpose() * form.canonical_A() * Pinv),
          SymMat::project(Pinv.transpose() * form.canonical_B() * Pinv)};
}

// ---------------------------------------------------------------------------
// BlockSpec: exact canonical descriptors of arbitrary pairs
// ---------------------------------------------------------------------------

enum class BlockType { Type1 = 1, Type2 = 2, Type3 = 3, Type4 = 4 };

struct BlockDesc {
  BlockType type = BlockType::Type1;
  int sigma = 1;        ///< Type1 only
  cplx lambda = 0.0;    ///< Type1 (real) and Type2 (non-real)
  Index size = 1;       ///< n_i

  /// Order of the assembled block.
  Index order() const {
    switch (type) {
      case BlockType::Type2: return 2 * size;
      case BlockType::Type3: return 2 * size + 1;
      default: return size;
    }
  }
};

struct BlockSpec {
  std::vector<BlockDesc> blocks;

  void validate() const {
    int type4 = 0;
    for (const auto& b : blocks) {
      if (b.size < 1) throw InvalidArgument("block sizes must be >= 1");
      if (b.type == BlockType::Type4) ++type4;
      if (b.type == BlockType::Type1 && b.sigma != 1 && b.sigma != -1)
        throw InvalidArgument("Type1 sign must be +1 or -1");
      if (b.type == BlockType::Type2 && b.lambda.imag() == 0.0)
        throw InvalidArgument("Type2 eigenvalue must be non-real");
    }
    if (type4 > 1) throw InvalidArgument("at most one Type4 block is allowed");
  }

  Index order() const {
    Index n = 0;
    for (const auto& b : blocks) n += b.order();
    return n;
  }

  /// Starting row of every block in the assembled matrices.
  std::vector<Index> offsets() const {
    std::vector<Index> off;
    Index o = 0;
    for (const auto& b : blocks) {
      off.push_back(o);
      o += b.order();
    }
    return off;
  }

  bool singular() const {
    for (const auto& b : blocks)
      if (b.type == BlockType::Type3 || b.type == BlockType::Type4) return true;
    return false;
  }
};

/// Exact (S_i, T_i) pair of a single canonical block.
inline std::pair<Mat, Mat> assemble_block(const BlockDesc& b) {
  const Index n = b.size;
  switch (b.type) {
    case BlockType::Type1: {
      const double l = b.lambda.real();
      return {b.sigma * F(n), b.sigma * (l * F(n) + G(n))};
    }
    case BlockType::Type2: {
      cplx l = b.lambda;
      if (l.imag() < 0) l = std::conj(l);
      return {F(2 * n), kron(F(n), complex_block(l)) + kron(G(n), F(2))};
    }
    case BlockType::Type3: {
      Mat S = Mat::Zero(2 * n + 1, 2 * n + 1);
      S.block(0, n + 1, n, n) = F(n);
      S.block(n + 1, 0, n, n) = F(n);
      return {S, G(2 * n + 1)};
    }
    case BlockType::Type4:
      return {Mat::Zero(n, n), Mat::Zero(n, n)};
  }
  throw InvalidArgument("unknown block type");
}

/// S = Diag(S_1, …, S_m), T = Diag(T_1, …, T_m) exactly.
inline std::pair<SymMat, SymMat> assemble_blocks(const BlockSpec& spec) {
  spec.validate();
  std::vector<Mat> S, T;
  for (const auto& b : spec.blocks) {
    auto [s, t] = assemble_block(b);
    S.push_back(s);
    T.push_back(t);
  }
  return {SymMat(direct_sum(S)), SymMat(direct_sum(T))};
}

}  // namespace sdcx
