// triple.hpp - approximate SDC for nonsingular triples.
//
// A nonsingular triple {A, B, C} is ASDC exactly when S⁻¹B' and S⁻¹C' commute
// and have real spectra (S a max-rank element of the span, B', C' the
// complementary basis elements).  The constructive side works on structured
// triples: A = Diag(σ_i F_{n_i}), B = Diag(σ_i(λ_i F_{n_i} + G_{n_i})) and C
// symmetric with A⁻¹C commuting with A⁻¹B.  Four situations occur:
//
//   Split          A⁻¹B or A⁻¹C has several eigenvalues: the triple decouples
//                  along the generalized eigenspaces and each piece recurses.
//   DistinctSizes  nilpotent, several Jordan sizes: C += ε·Diag(σ_i F_η, 0) on
//                  the k smallest blocks, so A⁻¹C̃ has eigenvalues {0, ε}.
//   EqualSizes     nilpotent, k ≥ 2 blocks of one size η: the k×k pair of
//                  leading coefficients is split and lifted through ⊗F_η.
//   SingleBlock    one Jordan block: B̃ = B + εσ(e₁eₙᵀ + eₙe₁ᵀ) and
//                  C̃ = C + σ(eₙγᵀ + γeₙᵀ), γ_i = ε(c_{i+1} + γ_{i+1}).
//
// A single Jordan block is finished in its own coordinates: A⁻¹B̃ is cyclic
// there, so A⁻¹C̃ is a polynomial p(A⁻¹B̃); a tridiagonal splitting of B̃
// makes A⁻¹B̃ simple and C̃ is carried along as A·p(A⁻¹B̃).  Recursing through
// the generalized eigenspaces of the single-block output instead would need
// a basis with condition ~ε⁻², far beyond what double precision certifies.
#pragma once

#include <functional>
#include <optional>

#include "asdc.hpp"
#include "toeplitz.hpp"

namespace sdcx {

SDCX_DEFINE_ERROR(SingularTriple)
SDCX_DEFINE_ERROR(StructureMismatch)

namespace detail {

inline bool has_nonreal_eigenvalue(const Mat& M, double tau, const Tolerances& tol) {
  const double scale = spectral_scale(eigenvalues(M));
  for (const auto& c : conditioned_clusters(M, tol.cluster_tol * scale, tau))
    if (std::abs(c.center.imag()) > tol.eig_real_tol * scale) return true;
  return false;
}

inline bool commute(const Mat& X, const Mat& Y, double rel) {
  return norm2(commutator(X, Y)) <= rel * std::max(1.0, norm2(X)) * std::max(1.0, norm2(Y));
}

}  // namespace detail

/// ASDC classification of a nonsingular triple.
inline AsdcVerdict asdc_triple_check(const Mat& A, const Mat& B, const Mat& C, const Tolerances& tol = {}) {
  const Family fam{A, B, C};
  check_family(fam);
  const Index n = A.rows();
  const auto mr = find_max_rank_element(fam, 0, tol);
  if (mr.rank < n || !certified_invertible(mr.S))
    throw SingularTriple("no certified-invertible element in the span (rank " + std::to_string(mr.rank) + " < " +
                         std::to_string(n) + ")");
  // S replaces the member with the largest coefficient; the other two complete the basis.
  Index drop = 0;
  for (Index i = 1; i < 3; ++i)
    if (std::abs(mr.coefficients(i)) > std::abs(mr.coefficients(drop))) drop = i;
  Family others;
  for (Index i = 0; i < 3; ++i)
    if (i != drop) others.push_back(fam[i]);
  const auto lu = mr.S.fullPivLu();
  const Mat M1 = lu.solve(others[0]), M2 = lu.solve(others[1]);
  if (!detail::commute(M1, M2, std::max(tol.resid_tol, 1e-6))) return {AsdcStatus::NotASDC, "noncommuting"};
  const double tau = backward_error_level(cond_number(mr.S));
  if (detail::has_nonreal_eigenvalue(M1, tau, tol) || detail::has_nonreal_eigenvalue(M2, tau, tol))
    return {AsdcStatus::NotASDC, "nonreal-eigenvalue"};
  if (sdc_check(fam, tol).is_sdc()) return {AsdcStatus::SDC, "sdc"};
  return {AsdcStatus::ASDC_not_SDC, "commuting-real-spectra"};
}

// ---------------------------------------------------------------------------
// Structured triples
// ---------------------------------------------------------------------------

/// A = Diag(σ_i F_{n_i}), B = Diag(σ_i(λ_i F_{n_i} + G_{n_i})), and C.
struct StructuredTriple {
  std::vector<JordanBlock> blocks;
  Mat C;

  Index n() const {
    Index t = 0;
    for (const auto& b : blocks) t += b.size;
    return t;
  }
  Mat A() const { return JordanForm{Mat(), blocks}.canonical_A(); }
  Mat B() const { return JordanForm{Mat(), blocks}.canonical_B(); }
  ToeplitzPartition partition() const {
    std::vector<Index> s;
    for (const auto& b : blocks) s.push_back(b.size);
    return ToeplitzPartition(s);
  }
};

enum class TripleCase { Done, Split, DistinctSizes, EqualSizes, SingleBlock };

inline const char* triple_case_name(TripleCase c) {
  switch (c) {
    case TripleCase::Done: return "done";
    case TripleCase::Split: return "split";
    case TripleCase::DistinctSizes: return "distinct-sizes";
    case TripleCase::EqualSizes: return "equal-sizes";
    case TripleCase::SingleBlock: return "single-block";
  }
  return "unknown";
}

/// Checks the structured form; throws StructureMismatch naming the failed condition.
inline void validate_structured(const StructuredTriple& st, const Tolerances& tol = {}) {
  if (st.blocks.empty()) throw StructureMismatch("no Jordan blocks");
  for (std::size_t i = 0; i < st.blocks.size(); ++i) {
    const auto& b = st.blocks[i];
    if (b.size < 1) throw StructureMismatch("block sizes must be >= 1");
    if (b.sigma != 1 && b.sigma != -1) throw StructureMismatch("block signs must be +1 or -1");
    if (i > 0) {
      const auto& p = st.blocks[i - 1];
      if (p.lambda > b.lambda || (p.lambda == b.lambda && p.size > b.size))
        throw StructureMismatch("blocks must be ordered by eigenvalue, then by size");
    }
  }
  const Index n = st.n();
  if (st.C.rows() != n || st.C.cols() != n) throw StructureMismatch("C does not match the block orders");
  if (max_abs(st.C - st.C.transpose()) > 1e-12 * std::max(1.0, max_abs(st.C)))
    throw StructureMismatch("C is not symmetric");
  const Mat A = st.A();
  const Mat X = A * st.B(), Y = A * st.C;  // F_n is an involution, so A⁻¹ = A
  if (!detail::commute(X, Y, std::max(tol.resid_tol, 1e-10)))
    throw StructureMismatch("A⁻¹C does not commute with A⁻¹B");
  if (detail::has_nonreal_eigenvalue(Y, 1e-12, tol)) throw StructureMismatch("A⁻¹C has non-real eigenvalues");
}

namespace detail {

/// Leading Toeplitz coefficients between equally sized blocks (no membership check).
inline Mat leading_coefficients(const Mat& T, const ToeplitzPartition& part) {
  const Index k = part.k();
  Mat P = Mat::Zero(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j)
      if (part.sizes[i] == part.sizes[j]) P(i, j) = leading_coefficient(T, part, i, j);
  return P;
}

inline bool all_lambdas_equal(const StructuredTriple& st) {
  for (const auto& b : st.blocks)
    if (b.lambda != st.blocks.front().lambda) return false;
  return true;
}

/// Eigenvalue of A⁻¹C when it is single (A⁻¹C and Π(A⁻¹C) share eigenvalues).
inline double single_eigenvalue(const Mat& Pi) { return Pi.trace() / double(Pi.rows()); }

}  // namespace detail

/// Which perturbation applies to a (validated) structured triple.
inline TripleCase detect_triple_case(const StructuredTriple& st, const Tolerances& tol = {}) {
  const Index n = st.n();
  if (n <= 1) return TripleCase::Done;
  if (!detail::all_lambdas_equal(st)) return TripleCase::Split;
  const auto part = st.partition();
  const Mat Y = st.A() * st.C;
  const Mat Pi = detail::leading_coefficients(Y, part);
  if (generalized_eigenspaces(Pi, tol).size() > 1) return TripleCase::Split;
  const Index k = part.k();
  if (k == 1) return TripleCase::SingleBlock;
  bool equal = true;
  for (Index s : part.sizes) equal = equal && s == part.sizes.front();
  if (!equal) return TripleCase::DistinctSizes;
  if (part.sizes.front() == 1) {
    // A⁻¹B is a multiple of I: nothing to do unless A⁻¹C is not.
    const Mat Y0 = Y - detail::single_eigenvalue(Pi) * Mat::Identity(n, n);
    if (max_abs(Y0) <= 1e-12 * std::max(1.0, max_abs(Y))) return TripleCase::Done;
  }
  return TripleCase::EqualSizes;
}

/// One perturbation step in structured coordinates (A is never changed).
struct TripleStep {
  TripleCase kind = TripleCase::Done;
  Mat B_tilde, C_tilde;
  Vec gamma;  ///< SingleBlock only
};

/// Applies the perturbation of the detected case with parameter ε.  Split and
/// Done return the triple unchanged; a single block of order ≤ 2 is left to
/// the single-block completion (the formula needs n ≥ 3).
inline TripleStep triple_case_step(const StructuredTriple& st, double epsilon, const Tolerances& tol = {}) {
  if (!(epsilon > 0)) throw InvalidArgument("epsilon must be positive");
  TripleStep out;
  out.kind = detect_triple_case(st, tol);
  const Mat A = st.A(), B = st.B();
  out.B_tilde = B;
  out.C_tilde = st.C;
  const Index n = st.n();
  const auto part = st.partition();
  const Mat Y = A * st.C;
  const Mat Pi = detail::leading_coefficients(Y, part);

  switch (out.kind) {
    case TripleCase::Done:
    case TripleCase::Split:
      break;
    case TripleCase::DistinctSizes: {
      const Index eta = part.sizes.front();
      std::vector<Mat> d;
      for (const auto& b : st.blocks)
        d.push_back(b.size == eta ? Mat(epsilon * b.sigma * F(eta)) : Mat(Mat::Zero(b.size, b.size)));
      out.C_tilde = st.C + direct_sum(d);
      break;
    }
    case TripleCase::EqualSizes: {
      // C_ij = F_η(γ_ij I + …) with γ_ij = σ_i Π(A⁻¹C)_ij; shift to the nilpotent part first.
      const Index eta = part.sizes.front(), k = part.k();
      const double mu = detail::single_eigenvalue(Pi);
      Mat Abar = Mat::Zero(k, k), Cbar(k, k);
      for (Index i = 0; i < k; ++i) Abar(i, i) = st.blocks[i].sigma;
      Cbar = sym_part(Abar * (Pi - mu * Mat::Identity(k, k)));
      const Mat dCbar = split_perturbation(Abar, Cbar, epsilon, tol);
      out.C_tilde = st.C + kron(dCbar, F(eta));
      break;
    }
    case TripleCase::SingleBlock: {
      if (n < 3) break;
      const int sigma = st.blocks.front().sigma;
      // A⁻¹C = μI + Σ_{i≥2} c_i N^{i−1}; c_i is the (1, i) entry.
      out.gamma = Vec::Zero(n);
      for (Index i = n - 3; i >= 0; --i) out.gamma(i) = epsilon * (Y(0, i + 1) + out.gamma(i + 1));
      const Vec e1 = unit(n, 0), en = unit(n, n - 1);
      out.B_tilde = B + epsilon * sigma * (e1 * en.transpose() + en * e1.transpose());
      out.C_tilde = st.C + sigma * (en * out.gamma.transpose() + out.gamma * en.transpose());
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full construction
// ---------------------------------------------------------------------------

struct PerturbedTriple {
  Mat A_tilde, B_tilde, C_tilde;
  double epsilon = 0.0;
  double distance = 0.0;   ///< max(‖B − B̃‖₂, ‖C − C̃‖₂); A is not changed
  double parameter = 0.0;  ///< per-step parameter that met the budget
  std::vector<TripleCase> cases;
  SdcResult certificate;
};

namespace detail {

struct TripleDelta {
  Mat dB, dC;
};

inline TripleDelta zero_delta(Index n) { return {Mat::Zero(n, n), Mat::Zero(n, n)}; }

/// Coefficients q with Y = Σ q_j (X/s)^j, s = max(1, ‖X‖); empty when X is not
/// cyclic or Y is not a polynomial in X.
inline std::optional<Vec> polynomial_coefficients(const Mat& X, const Mat& Y, double s) {
  const Index n = X.rows();
  Mat K(n * n, n);
  Mat Pw = Mat::Identity(n, n);
  for (Index j = 0; j < n; ++j) {
    K.col(j) = Eigen::Map<const Vec>(Pw.data(), n * n);
    Pw = Pw * (X / s);
  }
  Eigen::JacobiSVD<Mat> svd(K, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();
  if (sv(n - 1) <= 1e-10 * sv(0)) return std::nullopt;
  const Vec y = Eigen::Map<const Vec>(Y.data(), n * n);
  const Vec q = svd.solve(y);
  if ((K * q - y).norm() > 1e-8 * std::max(1.0, y.norm())) return std::nullopt;
  return q;
}

inline Mat polynomial_value(const Vec& q, const Mat& Xs) {
  const Index n = Xs.rows();
  Mat R = Mat::Zero(n, n), Pw = Mat::Identity(n, n);
  for (Index j = 0; j < q.size(); ++j) {
    R += q(j) * Pw;
    Pw = Pw * Xs;
  }
  return R;
}

/// Single Jordan block in structured coordinates, A⁻¹B upper triangular with
/// nonzero superdiagonal: B̂ = B + δσH makes A⁻¹B̂ tridiagonal with positive
/// off-diagonal products, hence simple real spectrum; Ĉ = A·p(A⁻¹B̂).
inline TripleDelta finish_single_block(const Mat& A, const Mat& B, const Mat& C, int sigma, double delta) {
  const Index n = A.rows();
  const Mat X = A * B, Y = A * C;
  const double s = std::max(1.0, norm2(X));
  const auto q = polynomial_coefficients(X, Y, s);
  if (!q) throw StructureMismatch("A⁻¹C is not a polynomial in A⁻¹B for a single Jordan block");
  TripleDelta d;
  d.dB = delta * sigma * H(n);
  const Mat Xh = A * (B + d.dB);
  d.dC = sym_part(A * polynomial_value(*q, Xh / s)) - C;
  return d;
}

inline Mat map_back(const Mat& Pinv, const Mat& D) { return sym_part(Pinv.transpose() * D * Pinv); }

/// Smallest step parameter worth attempting: eigenvalue gaps below the
/// clustering radii cannot be told apart from Jordan structure.
inline constexpr double kMinStepParameter = 1e-14;

/// Solves a subproblem posed in coordinates P (P⁻¹ given) and maps it back,
/// choosing the largest subproblem parameter whose mapped-back change stays
/// within e.  The a-priori bound ‖P⁻¹‖²·(change) is far too pessimistic for
/// eigenspace bases that are ill conditioned in only a few directions, so the
/// parameter is rescaled by the observed cost instead.
inline TripleDelta fit_subproblem(double e, const Mat& Pinv, std::vector<TripleCase>& cases,
                                  const std::function<TripleDelta(double, std::vector<TripleCase>&)>& solve) {
  double es = e;
  for (int it = 0; it < 6; ++it) {
    std::vector<TripleCase> trial;
    double cost = std::numeric_limits<double>::infinity();
    TripleDelta d;
    try {
      const TripleDelta sub = solve(es, trial);
      d = {map_back(Pinv, sub.dB), map_back(Pinv, sub.dC)};
      cost = std::max(norm2(d.dB), norm2(d.dC));
    } catch (const UnsupportedStructure&) {
    } catch (const SingularA&) {
    }
    if (cost <= e) {
      cases.insert(cases.end(), trial.begin(), trial.end());
      return d;
    }
    es *= std::isfinite(cost) ? std::clamp(0.9 * e / cost, 1e-4, 0.5) : 0.1;
    if (es < kMinStepParameter) break;
  }
  throw UnsupportedStructure("subproblem perturbation does not fit the budget");
}

inline TripleDelta solve_triple(const Mat& A, const Mat& B, const Mat& C, double e, std::vector<TripleCase>& cases,
                                const Tolerances& tol, int depth);

/// Generalized eigenspaces of M for a spectrum known exactly: eigenvalue λ with
/// algebraic multiplicity d spans the null space of (M − λI)^p, the power p
/// chosen where the d smallest singular values separate best from the rest.
/// Avoids rediscovering, by clustering, eigenvalues that a structured step
/// placed on purpose.
inline std::vector<GeneralizedEigenspace> known_eigenspaces(const Mat& M,
                                                            const std::vector<std::pair<double, Index>>& spectrum) {
  const Index n = M.rows();
  const double s = std::max(1.0, norm2(M));
  std::vector<GeneralizedEigenspace> out;
  for (const auto& [lambda, d] : spectrum) {
    if (d == n) return {{Mat::Identity(n, n), lambda}};
    const Mat Ns = (M - lambda * Mat::Identity(n, n)) / s;
    Mat Pw = Mat::Identity(n, n), best;
    double best_gap = 0.0;
    for (Index p = 1; p <= n; ++p) {
      Pw = Pw * Ns;
      Eigen::JacobiSVD<Mat> svd(Pw, Eigen::ComputeFullV);
      const Vec& sv = svd.singularValues();
      const double gap = sv(n - d - 1) / std::max(sv(n - d), std::numeric_limits<double>::min());
      if (gap > best_gap) {
        best_gap = gap;
        best = svd.matrixV().rightCols(d);
      }
    }
    const Mat R = best.transpose() * M * best;
    if (norm2(M * best - best * R) > 1e-8 * s)
      throw UnsupportedStructure("placed eigenvalue does not span an invariant subspace");
    out.push_back({best, lambda});
  }
  return out;
}

/// Decouples the triple along the given eigenspaces of A⁻¹B or A⁻¹C and
/// solves each diagonal block.
inline TripleDelta split_triple(const Mat& A, const Mat& B, const Mat& C, const std::vector<GeneralizedEigenspace>& gs,
                                double e, std::vector<TripleCase>& cases, const Tolerances& tol, int depth) {
  const Index n = A.rows();
  for (const auto& g : gs)
    if (g.W.cols() == n) throw UnsupportedStructure("eigenspace split makes no progress");
  cases.push_back(TripleCase::Split);
  Mat P(n, n);
  Index c = 0;
  for (const auto& g : gs) {
    P.middleCols(c, g.W.cols()) = g.W;
    c += g.W.cols();
  }
  const Mat Pinv = P.fullPivLu().inverse();
  return fit_subproblem(e, Pinv, cases, [&](double es, std::vector<TripleCase>& sub_cases) {
    TripleDelta out = zero_delta(n);
    Index off = 0;
    for (const auto& g : gs) {
      const Index d = g.W.cols();
      auto sub = solve_triple(sym_part(g.W.transpose() * A * g.W), sym_part(g.W.transpose() * B * g.W),
                              sym_part(g.W.transpose() * C * g.W), es, sub_cases, tol, depth + 1);
      out.dB.block(off, off, d, d) = sub.dB;
      out.dC.block(off, off, d, d) = sub.dC;
      off += d;
    }
    return out;
  });
}

/// Eigenspaces behind a Split verdict, read off the structure: coordinate
/// blocks when the block eigenvalues differ, otherwise the eigenspaces of A⁻¹C
/// for the eigenvalues of Π, each with multiplicity weighted by block size.
inline std::vector<GeneralizedEigenspace> structured_eigenspaces(const StructuredTriple& st, const Tolerances& tol) {
  const Index n = st.n();
  const auto off = st.partition().offsets();
  std::vector<GeneralizedEigenspace> out;
  if (!all_lambdas_equal(st)) {
    for (std::size_t i = 0; i < st.blocks.size(); ++i) {
      const double lambda = st.blocks[i].lambda;
      if (!out.empty() && out.back().lambda == lambda) continue;
      std::vector<Index> cols;
      for (std::size_t j = i; j < st.blocks.size() && st.blocks[j].lambda == lambda; ++j)
        for (Index r = 0; r < st.blocks[j].size; ++r) cols.push_back(off[j] + r);
      Mat W = Mat::Zero(n, static_cast<Index>(cols.size()));
      for (std::size_t c = 0; c < cols.size(); ++c) W(cols[c], Index(c)) = 1.0;
      out.push_back({W, lambda});
    }
    return out;
  }
  const auto part = st.partition();
  const Mat Y = st.A() * st.C;
  const Mat Pi = leading_coefficients(Y, part);
  std::vector<std::pair<double, Index>> spectrum;
  const double scale = std::max(1.0, max_abs(Pi));
  std::vector<Index> seen;
  for (Index sz : part.sizes) {
    if (std::find(seen.begin(), seen.end(), sz) != seen.end()) continue;
    seen.push_back(sz);
    std::vector<Index> idx;
    for (Index i = 0; i < part.k(); ++i)
      if (part.sizes[i] == sz) idx.push_back(i);
    Mat Ps(idx.size(), idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = 0; b < idx.size(); ++b) Ps(a, b) = Pi(idx[a], idx[b]);
    for (const auto& g : generalized_eigenspaces(Ps, tol)) {
      auto it = std::find_if(spectrum.begin(), spectrum.end(),
                             [&](const auto& p) { return std::abs(p.first - g.lambda) <= 1e-9 * scale; });
      if (it == spectrum.end())
        spectrum.push_back({g.lambda, sz * g.W.cols()});
      else
        it->second += sz * g.W.cols();
    }
  }
  return known_eigenspaces(Y, spectrum);
}

inline TripleDelta solve_structured(const StructuredTriple& st, double e, std::vector<TripleCase>& cases,
                                    const Tolerances& tol, int depth) {
  const Index n = st.n();
  const Mat A = st.A(), B = st.B();
  const TripleStep step = triple_case_step(st, e, tol);
  cases.push_back(step.kind);
  switch (step.kind) {
    case TripleCase::Done:
      return zero_delta(n);
    case TripleCase::Split:
      return split_triple(A, B, st.C, structured_eigenspaces(st, tol), e, cases, tol, depth + 1);
    case TripleCase::SingleBlock: {
      auto fin = finish_single_block(A, step.B_tilde, step.C_tilde, st.blocks.front().sigma, e);
      return {step.B_tilde - B + fin.dB, step.C_tilde - st.C + fin.dC};
    }
    case TripleCase::DistinctSizes:
    case TripleCase::EqualSizes: {
      // The step placed the spectrum of A⁻¹C̃: split along it directly.
      const auto part = st.partition();
      const Mat Y = A * step.C_tilde;
      const Mat Pi = leading_coefficients(Y, part);
      std::vector<std::pair<double, Index>> spectrum;
      if (step.kind == TripleCase::DistinctSizes) {
        const Index eta = part.sizes.front();
        Index small = 0;
        for (Index sz : part.sizes) small += sz == eta ? sz : 0;
        const double mu = single_eigenvalue(leading_coefficients(A * st.C, part));
        spectrum = {{mu, n - small}, {mu + e, small}};
      } else {
        const Index eta = part.sizes.front();
        for (const auto& g : generalized_eigenspaces(Pi, tol)) spectrum.push_back({g.lambda, eta * g.W.cols()});
      }
      if (spectrum.size() < 2) throw UnsupportedStructure("perturbation step is below the resolvable eigenvalue gap");
      auto sub = split_triple(A, step.B_tilde, step.C_tilde, known_eigenspaces(Y, spectrum), e, cases, tol, depth + 1);
      return {step.B_tilde - B + sub.dB, step.C_tilde - st.C + sub.dC};
    }
  }
  return zero_delta(n);
}

/// Perturbation (ΔB, ΔC) making {A, B + ΔB, C + ΔC} SDC, for A invertible and
/// A⁻¹B, A⁻¹C commuting with real spectra.
inline TripleDelta solve_triple(const Mat& A, const Mat& B, const Mat& C, double e, std::vector<TripleCase>& cases,
                                const Tolerances& tol, int depth) {
  const Index n = A.rows();
  if (n <= 1) return zero_delta(n);
  if (depth > 4 * n + 8) throw UnsupportedStructure("triple recursion did not terminate");
  const auto lu = A.fullPivLu();
  const Mat X = lu.solve(B), Y = lu.solve(C);

  // Several eigenvalues: decouple along generalized eigenspaces.
  const auto gx = generalized_eigenspaces(X, tol);
  const auto gy = gx.size() > 1 ? gx : generalized_eigenspaces(Y, tol);
  if (gy.size() > 1) return split_triple(A, B, C, gy, e, cases, tol, depth);

  // Single eigenvalues: shift to nilpotent and move to Jordan coordinates of
  // the nonzero one.
  const Mat B0 = sym_part(B - gx.front().lambda * A), C0 = sym_part(C - gy.front().lambda * A);
  const bool b_zero = norm2(B0) <= 1e-9 * std::max(1.0, norm2(B));
  const bool c_zero = norm2(C0) <= 1e-9 * std::max(1.0, norm2(C));
  if (b_zero && c_zero) {
    cases.push_back(TripleCase::Done);
    return zero_delta(n);
  }
  const bool swap = b_zero;
  const Mat& D0 = swap ? C0 : B0;
  const Mat& E0 = swap ? B0 : C0;
  JordanForm jf = jordan_canonical(A, D0, tol);
  StructuredTriple st;
  st.blocks = jf.blocks;
  for (auto& b : st.blocks) b.lambda = 0.0;
  st.C = sym_part(jf.P.transpose() * E0 * jf.P);
  const Mat Pinv = jf.P.fullPivLu().inverse();
  TripleDelta out = fit_subproblem(e, Pinv, cases, [&](double es, std::vector<TripleCase>& sub_cases) {
    return solve_structured(st, es, sub_cases, tol, depth + 1);
  });
  if (swap) std::swap(out.dB, out.dC);
  return out;
}

inline PerturbedTriple fit_triple(const Mat& A, const Mat& B, const Mat& C, double epsilon, const Tolerances& tol,
                                  const std::function<TripleDelta(double, std::vector<TripleCase>&)>& attempt) {
  if (!(epsilon > 0)) throw InvalidArgument("epsilon must be positive");
  // Halve the step parameter until the change fits and certifies; a parameter
  // whose nested steps cannot be resolved is skipped like one that is too big.
  std::string last = "could not fit the triple perturbation into the budget";
  double e = epsilon;
  for (int it = 0; it < 20; ++it, e *= 0.5) {
    PerturbedTriple out;
    TripleDelta d;
    try {
      d = attempt(e, out.cases);
    } catch (const UnsupportedStructure& ex) {
      last = ex.what();
      continue;
    }
    out.A_tilde = A;
    out.B_tilde = sym_part(B + d.dB);
    out.C_tilde = sym_part(C + d.dC);
    out.epsilon = epsilon;
    out.parameter = e;
    out.distance = std::max(norm2(out.B_tilde - B), norm2(out.C_tilde - C));
    if (!(out.distance <= epsilon)) continue;
    out.certificate = sdc_check({out.A_tilde, out.B_tilde, out.C_tilde}, tol);
    if (out.certificate.is_sdc()) return out;
    last = "perturbed triple is not SDC (" + out.certificate.witness->describe() + ")";
  }
  throw CertificationFailed(last);
}

}  // namespace detail

/// Perturbs a structured triple to an SDC triple within distance ε.
inline PerturbedTriple perturb_triple_blocks(const StructuredTriple& st, double epsilon, const Tolerances& tol = {}) {
  validate_structured(st, tol);
  return detail::fit_triple(st.A(), st.B(), st.C, epsilon, tol, [&](double e, std::vector<TripleCase>& cases) {
    return detail::solve_structured(st, e, cases, tol, 0);
  });
}

/// Perturbs an ASDC nonsingular triple (A invertible) to an SDC triple within
/// distance ε, changing B and C only.
inline PerturbedTriple perturb_triple(const Mat& A, const Mat& B, const Mat& C, double epsilon,
                                      const Tolerances& tol = {}) {
  const auto v = asdc_triple_check(A, B, C, tol);
  if (v.status == AsdcStatus::NotASDC) throw NotAsdc("triple is not ASDC (" + v.reason + ")");
  if (!certified_invertible(A)) throw SingularA("A is not certifiably invertible");
  if (v.status == AsdcStatus::SDC) {
    PerturbedTriple out{A, B, C, epsilon, 0.0, 0.0, {TripleCase::Done}, sdc_check({A, B, C}, tol)};
    return out;
  }
  return detail::fit_triple(A, B, C, epsilon, tol, [&](double e, std::vector<TripleCase>& cases) {
    return detail::solve_triple(A, B, C, e, cases, tol, 0);
  });
}

}  // namespace sdcx
