// asdc.hpp - approximate SDC for pairs: classification and constructive
// ε-perturbations to SDC pairs.
//
// A nonsingular pair is ASDC exactly when S⁻¹B' has real spectrum (S a
// max-rank element of the span, B' a complementary basis element); a
// singular pair is always ASDC.  The constructions realize this: repeated
// real eigenvalues are split by a canonical perturbation, complex eigenvalues
// of a singular pair are absorbed by bordering the regular part into a kernel
// direction with the 1-RSDC system, scaled so that the change stays within ε.
#pragma once

#include "jordan.hpp"
#include "rsdc.hpp"
#include "sdc.hpp"

namespace sdcx {

SDCX_DEFINE_ERROR(NotAsdc)
SDCX_DEFINE_ERROR(NotSingularSpec)

enum class AsdcStatus { SDC, ASDC_not_SDC, NotASDC };

inline const char* asdc_status_name(AsdcStatus s) {
  switch (s) {
    case AsdcStatus::SDC: return "SDC";
    case AsdcStatus::ASDC_not_SDC: return "ASDC_not_SDC";
    case AsdcStatus::NotASDC: return "NotASDC";
  }
  return "unknown";
}

struct AsdcVerdict {
  AsdcStatus status = AsdcStatus::NotASDC;
  std::string reason;
};

struct PerturbedPair {
  Mat A_tilde, B_tilde;
  double epsilon = 0.0;
  double distance = 0.0;  ///< max(‖A − Ã‖₂, ‖B − B̃‖₂)
  SdcResult certificate;  ///< sdc_check({Ã, B̃}, certified_with)
  /// Tolerances of the certificate.  A bordered kernel direction enters the
  /// pair at order t² (t the border scale), so rank decisions use a cutoff
  /// below that scale when it is smaller than the default one.
  Tolerances certified_with;
};

namespace detail {

/// Basis pair (X, Y) of span{A, B} with X invertible, and the map back:
/// A = a_x X + a_y Y, B = b_x X + b_y Y.
struct PencilBasis {
  Mat X, Y;
  double ax, ay, bx, by;
};

inline PencilBasis invertible_basis(const Mat& A, const Mat& B, const Vec& c) {
  if (certified_invertible(A)) return {A, B, 1, 0, 0, 1};
  if (certified_invertible(B)) return {B, A, 0, 1, 1, 0};
  // S = c_A A + c_B B with both coefficients nonzero (A and B singular).
  const Mat S = sym_part(c(0) * A + c(1) * B);
  return {S, B, 1.0 / c(0), -c(1) / c(0), 0, 1};
}

inline double pair_distance(const Mat& A, const Mat& B, const Mat& At, const Mat& Bt) {
  return std::max(norm2(A - At), norm2(B - Bt));
}

}  // namespace detail

/// ASDC classification of a pair.
inline AsdcVerdict asdc_pair_check(const Mat& A, const Mat& B, const Tolerances& tol = {}) {
  if (A.rows() != B.rows() || A.cols() != B.cols() || A.rows() != A.cols())
    throw DimensionMismatch("pair members must share one square order");
  const Index n = A.rows();
  const bool sdc = sdc_check({A, B}, tol).is_sdc();
  const auto mr = find_max_rank_element({A, B}, 0, tol);
  if (mr.rank < n) {
    if (sdc) return {AsdcStatus::SDC, "sdc"};
    return {AsdcStatus::ASDC_not_SDC, "singular-pair"};
  }
  const Mat& Bp = mr.coefficients(0) != 0.0 ? B : A;
  const Mat M = mr.S.fullPivLu().solve(Bp);
  const double scale = spectral_scale(eigenvalues(M));
  for (const auto& c : conditioned_clusters(M, tol.cluster_tol * scale, backward_error_level(cond_number(mr.S))))
    if (std::abs(c.center.imag()) > tol.eig_real_tol * scale) return {AsdcStatus::NotASDC, "nonreal-eigenvalue"};
  if (sdc) return {AsdcStatus::SDC, "sdc"};
  return {AsdcStatus::ASDC_not_SDC, "real-spectrum"};
}

namespace detail {

/// Tolerances able to resolve a perturbation entering at absolute size `floor`.
inline Tolerances certification_tolerance(const Tolerances& tol, double floor, const Mat& A, const Mat& B) {
  Tolerances t = tol;
  if (floor > 0) t.rank_tol = std::min(tol.rank_tol, 1e-3 * floor / std::max({1.0, norm2(A), norm2(B)}));
  return t;
}

inline PerturbedPair finish_perturbation(const Mat& A, const Mat& B, Mat At, Mat Bt, double eps,
                                         const Tolerances& tol) {
  PerturbedPair out;
  out.certified_with = tol;
  out.A_tilde = sym_part(At);
  out.B_tilde = sym_part(Bt);
  out.epsilon = eps;
  out.distance = pair_distance(A, B, out.A_tilde, out.B_tilde);
  if (!(out.distance <= eps))
    throw CertificationFailed("perturbation distance " + std::to_string(out.distance) + " exceeds budget " +
                              std::to_string(eps));
  out.certificate = sdc_check({out.A_tilde, out.B_tilde}, tol);
  if (!out.certificate.is_sdc())
    throw CertificationFailed("perturbed pair is not SDC (" + out.certificate.witness->describe() + ")");
  return out;
}

/// Bordered pair scaled by t: X ⊕ t², [[Y, t·u], [t·uᵀ, t²·z]] as the
/// perturbation (ΔX, ΔY) of X ⊕ 0, Y ⊕ 0.
inline std::pair<Mat, Mat> scaled_border(Index rho, const Vec& u, double z, double t) {
  Mat dX = Mat::Zero(rho + 1, rho + 1), dY = Mat::Zero(rho + 1, rho + 1);
  dX(rho, rho) = t * t;
  dY.block(0, rho, rho, 1) = t * u;
  dY.block(rho, 0, 1, rho) = t * u.transpose();
  dY(rho, rho) = t * t * z;
  return {dX, dY};
}

/// Largest t = √budget·2^{−j} whose scaled border, after `map`, fits the budget.
template <class Map>
inline double fit_border_scale(Index rho, const Vec& u, double z, double budget, Map map) {
  double t = std::sqrt(budget);
  for (int it = 0; it < 200; ++it) {
    auto [dX, dY] = scaled_border(rho, u, z, t);
    if (map(dX, dY) <= budget) return t;
    t *= 0.5;
  }
  throw CertificationFailed("could not fit the border into the budget");
}

}  // namespace detail

/// Perturbs an ASDC pair to an SDC pair within spectral distance ε.
inline PerturbedPair perturb_pair(const Mat& A, const Mat& B, double epsilon, const Tolerances& tol = {}) {
  if (!(epsilon > 0)) throw InvalidArgument("epsilon must be positive");
  const auto verdict = asdc_pair_check(A, B, tol);
  if (verdict.status == AsdcStatus::NotASDC) throw NotAsdc("pair is not ASDC (" + verdict.reason + ")");
  const Index n = A.rows();
  if (verdict.status == AsdcStatus::SDC) {
    PerturbedPair out{A, B, epsilon, 0.0, sdc_check({A, B}, tol), tol};
    return out;
  }
  const auto mr = find_max_rank_element({A, B}, 0, tol);

  if (mr.rank == n) {
    // Nonsingular: split repeated eigenvalues of X⁻¹Y, keeping X fixed.
    const auto pb = detail::invertible_basis(A, B, mr.coefficients);
    const double growth = std::max({1.0, std::abs(pb.ay), std::abs(pb.by)});
    const Mat dY = split_perturbation(pb.X, pb.Y, epsilon / growth, tol);
    return detail::finish_perturbation(A, B, A + pb.ay * dY, B + pb.by * dY, epsilon, tol);
  }

  // Singular: restrict to range(S), border into one kernel direction.
  const auto split = range_split(mr.S, tol);
  const Mat& U = split.range;
  const Index rho = U.cols();
  for (const Mat* M : {&A, &B})
    if (norm2(*M - U * (U.transpose() * *M)) > tol.resid_tol * std::max(1.0, norm2(*M)))
      throw UnsupportedStructure("range of a member is not contained in the max-rank range; use perturb_blocks");
  Mat Q(n, rho + 1);
  Q.leftCols(rho) = U;
  Q.col(rho) = split.complement.col(0);
  const Mat Au = sym_part(U.transpose() * A * U), Bu = sym_part(U.transpose() * B * U);
  const auto mru = find_max_rank_element({Au, Bu}, 0, tol);
  const auto pb = detail::invertible_basis(Au, Bu, mru.coefficients);

  // Stage 0: separate repeated eigenvalues of the restricted pencil.
  const double budget = epsilon / 2;
  const double growth = std::max({1.0, std::abs(pb.ay), std::abs(pb.by)});
  Mat Y = pb.Y, dA0 = Mat::Zero(rho, rho), dB0 = Mat::Zero(rho, rho);
  try {
    (void)pencil_canonical(pb.X, pb.Y, tol);
  } catch (const RepeatedEigenvalues&) {
    const Mat Mx = pb.X.fullPivLu().solve(pb.Y);
    const double scale = spectral_scale(eigenvalues(Mx));
    for (const auto& c : conditioned_clusters(Mx, tol.cluster_tol * scale, backward_error_level(cond_number(pb.X))))
      if (std::abs(c.center.imag()) > tol.eig_real_tol * scale)
        throw UnsupportedStructure("repeated non-real eigenvalues in the regular part; use perturb_blocks");
    const Mat dY = split_perturbation(pb.X, pb.Y, budget / growth, tol);
    Y += dY;
    dA0 = pb.ay * dY;
    dB0 = pb.by * dY;
  }

  // Stage 1: 1-RSDC border of (X, Y), scaled by t.  Eigenvalues separated
  // by stage 0 are only O(budget) apart, so the clustering threshold follows.
  Tolerances tol1 = tol;
  if (dB0.size() > 0 && max_abs(dA0) + max_abs(dB0) > 0)
    tol1.cluster_tol = std::min(tol.cluster_tol, 1e-3 * budget / (growth * double(rho)));
  const auto cert = rsdc1_construct(pb.X, Y, XiStrategy::spread(), tol1);
  const Vec u = cert.B_tilde.block(0, rho, rho, 1);
  const double z = cert.B_tilde(rho, rho);
  auto lift = [&](const Mat& dX, const Mat& dY) {
    Mat dA = pb.ax * dX + pb.ay * dY, dB = pb.bx * dX + pb.by * dY;
    dA.topLeftCorner(rho, rho) += dA0;
    dB.topLeftCorner(rho, rho) += dB0;
    return std::pair<Mat, Mat>{Q * dA * Q.transpose(), Q * dB * Q.transpose()};
  };
  const double t = detail::fit_border_scale(rho, u, z, epsilon, [&](const Mat& dX, const Mat& dY) {
    auto [dA, dB] = lift(dX, dY);
    return std::max(norm2(dA), norm2(dB));
  });
  auto [dX, dY] = detail::scaled_border(rho, u, z, t);
  auto [dA, dB] = lift(dX, dY);
  return detail::finish_perturbation(A, B, A + dA, B + dB, epsilon,
                                     detail::certification_tolerance(tol, t * t * std::min(1.0, std::max(std::abs(pb.ax), std::abs(pb.bx))), A, B));
}

// ---------------------------------------------------------------------------
// Exact constructions on block descriptors
// ---------------------------------------------------------------------------

namespace detail {

/// Canonical splitting perturbation of regular blocks (added to B): Type1
/// gets σ(ηF + e·H), Type2 gets ηF_{2n} + e·H_n⊗F₂, with η_i = e·i/(2m).
inline Mat regular_split_direction(const std::vector<BlockDesc>& regular, double e) {
  const Index m = static_cast<Index>(regular.size());
  std::vector<Mat> blocks;
  for (Index i = 0; i < m; ++i) {
    const auto& b = regular[i];
    const double eta = e * double(i) / (2.0 * double(m));
    if (b.type == BlockType::Type1)
      blocks.push_back(b.sigma * (eta * F(b.size) + e * H(b.size)));
    else
      blocks.push_back(eta * F(2 * b.size) + e * kron(H(b.size), F(2)));
  }
  return direct_sum(blocks);
}

inline bool regular_part_simple(const std::vector<BlockDesc>& regular) {
  for (std::size_t i = 0; i < regular.size(); ++i) {
    if (regular[i].size != 1) return false;
    for (std::size_t j = i + 1; j < regular.size(); ++j) {
      const cplx a = regular[i].lambda, b = regular[j].lambda;
      const bool conj_eq = regular[i].type == BlockType::Type2 && regular[j].type == BlockType::Type2 &&
                           a.real() == b.real() && std::abs(a.imag()) == std::abs(b.imag());
      if (regular[i].type == regular[j].type && (a == b || conj_eq)) return false;
    }
  }
  return true;
}

/// Spread interpolation points, shifted by a fraction of their spacing so that
/// none sits on 0 or on a real eigenvalue.
inline std::vector<double> separated_spread(const PencilForm& form, Index count) {
  const auto base = choose_xi(form, count, XiStrategy::spread());
  const auto [lo, hi] = xi_interval(form);
  const double spacing = count > 1 ? (hi - lo) / double(count - 1) : 1.0;
  std::vector<double> avoid = {0.0};
  for (const auto& b : form.real_blocks) avoid.push_back(b.mu);
  for (double frac : {0.5, 0.25, 0.75, 0.125, 0.375, 0.625, 0.875}) {
    std::vector<double> xi = base;
    double gap = std::numeric_limits<double>::infinity();
    for (auto& x : xi) {
      x += frac * spacing;
      for (double a : avoid) gap = std::min(gap, std::abs(x - a));
    }
    if (gap >= 0.05 * spacing) return xi;
  }
  return base;
}

/// Stage-2 split of one component, when its pencil is not already simple.
inline Mat component_split(const Mat& A, const Mat& B, double budget, const Tolerances& tol) {
  if (sdc_check({A, B}, tol).is_sdc()) return Mat::Zero(A.rows(), A.cols());
  return split_perturbation(A, B, budget, tol);
}

}  // namespace detail

/// ε-perturbation of the exact pair described by a singular block spec.
inline PerturbedPair perturb_blocks(const BlockSpec& spec, double epsilon, const Tolerances& tol = {}) {
  spec.validate();
  if (!(epsilon > 0)) throw InvalidArgument("epsilon must be positive");
  if (!spec.singular()) throw NotSingularSpec("block spec has no Type3 or Type4 block");
  auto [S0, T0] = assemble_blocks(spec);
  const Mat A = S0.mat(), B = T0.mat();
  const Index n = A.rows();
  const auto off = spec.offsets();
  Mat dA = Mat::Zero(n, n), dB = Mat::Zero(n, n);
  const double third = epsilon / 3.0;

  std::vector<Index> reg_rows;
  std::vector<BlockDesc> regular;
  std::vector<std::size_t> type3;
  std::optional<std::size_t> type4;
  for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
    const auto& b = spec.blocks[i];
    if (b.type == BlockType::Type1 || b.type == BlockType::Type2) {
      regular.push_back(b);
      for (Index r = 0; r < b.order(); ++r) reg_rows.push_back(off[i] + r);
    } else if (b.type == BlockType::Type3) {
      type3.push_back(i);
    } else {
      type4 = i;
    }
  }
  auto gather = [](const Mat& M, const std::vector<Index>& idx) {
    Mat R(idx.size(), idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < idx.size(); ++j) R(i, j) = M(idx[i], idx[j]);
    return R;
  };
  auto scatter = [](Mat& M, const Mat& R, const std::vector<Index>& idx) {
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < idx.size(); ++j) M(idx[i], idx[j]) += R(i, j);
  };
  auto type3_rows = [&](std::size_t i) {
    std::vector<Index> rows;
    for (Index r = 0; r < spec.blocks[i].order(); ++r) rows.push_back(off[i] + r);
    return rows;
  };
  auto center = [&](std::size_t i) { return off[i] + spec.blocks[i].size; };

  std::size_t first_free_type3 = 0;
  double floor = 0.0;
  if (!regular.empty()) {
    const Index rho = static_cast<Index>(reg_rows.size());
    // Stage 0: simple spectrum on the regular part.
    if (!detail::regular_part_simple(regular)) {
      Mat D = detail::regular_split_direction(regular, 1.0);
      const double nD = norm2(D);
      scatter(dB, (nD > 1.0 ? third / nD : third) * D, reg_rows);
    }
    const Mat AR = gather(A + dA, reg_rows), BR = gather(B + dB, reg_rows);
    const auto form = pencil_canonical(AR, BR, tol);

    // Stage 1: border into a Type4 coordinate or the first Type3 center.
    const bool via_type3 = !type3.empty();
    if (via_type3 || form.k() > 0) {
      const Index count = form.k() > 0 ? 2 * form.k() + 1 : 1;
      std::vector<double> xi = via_type3 ? detail::separated_spread(form, count)
                                         : choose_xi(form, count, XiStrategy::spread());
      Vec u = Vec::Zero(rho);
      double z = 0.0;
      if (form.k() > 0) {
        const auto cert = rsdc1_construct(AR, BR, XiStrategy::fixed(xi), tol);
        u = cert.B_tilde.block(0, rho, rho, 1);
        z = cert.B_tilde(rho, rho);
      } else {
        z = xi.front();
      }
      std::vector<Index> rows = reg_rows;
      rows.push_back(via_type3 ? center(type3.front()) : off[*type4]);
      auto place = [&](const Mat& dX, const Mat& dY) {
        Mat a = Mat::Zero(n, n), b = Mat::Zero(n, n);
        scatter(a, dX, rows);
        scatter(b, dY, rows);
        return std::pair<Mat, Mat>{a, b};
      };
      const double t = detail::fit_border_scale(rho, u, z, third, [&](const Mat& dX, const Mat& dY) {
        return std::max(norm2(dX), norm2(dY));
      });
      auto [dX, dY] = detail::scaled_border(rho, u, z, t);
      floor = t * t;
      auto [a, b] = place(dX, dY);
      dA += a;
      dB += b;
      if (via_type3) {
        // Stage 2 on the component formed by the regular part and this block.
        std::vector<Index> comp = reg_rows;
        for (Index r : type3_rows(type3.front())) comp.push_back(r);
        const Mat dS = detail::component_split(gather(A + dA, comp), gather(B + dB, comp), third, tol);
        scatter(dB, dS, comp);
        first_free_type3 = 1;
      }
    }
  }
  // Remaining Type3 blocks: center entry ε, then a split of the nilpotent
  // pencil.  These blocks are disjoint from the others, so the block-diagonal
  // changes are measured separately and each may use the whole budget.
  for (std::size_t j = first_free_type3; j < type3.size(); ++j) {
    const auto rows = type3_rows(type3[j]);
    dA(center(type3[j]), center(type3[j])) += epsilon;
    const Mat dS = detail::component_split(gather(A + dA, rows), gather(B + dB, rows), epsilon, tol);
    scatter(dB, dS, rows);
  }
  return detail::finish_perturbation(A, B, A + dA, B + dB, epsilon,
                                     detail::certification_tolerance(tol, floor, A, B));
}

}  // namespace sdcx
