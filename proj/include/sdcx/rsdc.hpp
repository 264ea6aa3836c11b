// rsdc.hpp - restricted SDC constructions.
//
// Given a pencil (A, B) with A invertible and A⁻¹B with simple eigenvalues,
// the pair is bordered by one (1-RSDC) or two (2-RSDC) extra rows and columns
// so that the enlarged pair is SDC while its top-left n×n blocks are exactly A
// and B.  The border is chosen so that the enlarged pencil has prescribed real
// interpolation points ξ as eigenvalues, which reduces to a small linear
// system in a basis of polynomials built from the complex eigenvalues.
#pragma once

#include "canonical.hpp"
#include "sdc.hpp"

#include <random>

namespace sdcx {

SDCX_DEFINE_ERROR(IllConditionedSystem)
SDCX_DEFINE_ERROR(RealLambda)

// ---------------------------------------------------------------------------
// Interpolation points
// ---------------------------------------------------------------------------

enum class XiKind { Spread, Chebyshev, Random, Explicit };

struct XiStrategy {
  XiKind kind = XiKind::Chebyshev;
  std::uint64_t seed = 0;          ///< Random only
  std::vector<double> points;      ///< Explicit only

  static XiStrategy spread() { return {XiKind::Spread, 0, {}}; }
  static XiStrategy chebyshev() { return {XiKind::Chebyshev, 0, {}}; }
  static XiStrategy random(std::uint64_t s) { return {XiKind::Random, s, {}}; }
  static XiStrategy fixed(std::vector<double> p) { return {XiKind::Explicit, 0, std::move(p)}; }
};

inline const char* xi_kind_name(XiKind k) {
  switch (k) {
    case XiKind::Spread: return "spread";
    case XiKind::Chebyshev: return "chebyshev";
    case XiKind::Random: return "random";
    case XiKind::Explicit: return "explicit";
  }
  return "unknown";
}

/// Interval [min(Re λ, μ) − 1, max(Re λ, μ) + 1] ([−1, 1] for an empty form).
inline std::pair<double, double> xi_interval(const PencilForm& form) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& b : form.real_blocks) {
    lo = std::min(lo, b.mu);
    hi = std::max(hi, b.mu);
  }
  for (const auto& l : form.complex_blocks) {
    lo = std::min(lo, l.real());
    hi = std::max(hi, l.real());
  }
  if (!std::isfinite(lo)) return {-1.0, 1.0};
  return {lo - 1.0, hi + 1.0};
}

/// `count` distinct real interpolation points, sorted ascending.
inline std::vector<double> choose_xi(const PencilForm& form, Index count, const XiStrategy& strategy) {
  if (count < 1) throw InvalidArgument("choose_xi requires count >= 1");
  const auto [lo, hi] = xi_interval(form);
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  std::vector<double> xi(count);
  switch (strategy.kind) {
    case XiKind::Spread:
      for (Index j = 0; j < count; ++j) xi[j] = count == 1 ? mid : lo + (hi - lo) * double(j) / double(count - 1);
      break;
    case XiKind::Chebyshev:
      for (Index j = 0; j < count; ++j) {
        const double c = std::cos(M_PI * (2.0 * double(j) + 1.0) / (2.0 * double(count)));
        xi[j] = mid + half * (std::abs(c) < 1e-15 ? 0.0 : c);
      }
      break;
    case XiKind::Random: {
      std::mt19937_64 rng(strategy.seed);
      std::uniform_real_distribution<double> U(lo, hi);
      const double gap = 1e-6 * (hi - lo);
      Index filled = 0;
      while (filled < count) {
        const double x = U(rng);
        bool ok = true;
        for (Index j = 0; j < filled; ++j)
          if (std::abs(xi[j] - x) <= gap) ok = false;
        if (ok) xi[filled++] = x;
      }
      break;
    }
    case XiKind::Explicit:
      if (static_cast<Index>(strategy.points.size()) != count)
        throw InvalidArgument("explicit interpolation points: expected " + std::to_string(count) + ", got " +
                              std::to_string(strategy.points.size()));
      xi = strategy.points;
      for (std::size_t i = 0; i < xi.size(); ++i)
        for (std::size_t j = i + 1; j < xi.size(); ++j)
          if (xi[i] == xi[j]) throw InvalidArgument("explicit interpolation points must be distinct");
      break;
  }
  std::sort(xi.begin(), xi.end());
  return xi;
}

// ---------------------------------------------------------------------------
// Border parameters
// ---------------------------------------------------------------------------

/// Solves x = Im λ(β² − α²) − 2 Re λ αβ and y = 2αβ for (α, β) with β ≥ 0.
inline std::pair<double, double> alpha_beta_recover(double x, double y, cplx lambda) {
  if (lambda.imag() == 0.0) throw RealLambda("alpha/beta recovery requires a non-real eigenvalue");
  const double p = 0.5 * y;
  const double s = (x + 2.0 * lambda.real() * p) / lambda.imag();
  const double beta2 = 0.5 * (s + std::hypot(s, 2.0 * p));
  const double beta = std::sqrt(std::max(beta2, 0.0));
  double alpha;
  if (beta > 0.0 && std::abs(p) > 0.0) {
    alpha = p / beta;
  } else {
    alpha = std::sqrt(std::max(beta2 - s, 0.0));
  }
  return {alpha, beta};
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

struct RsdcCertificate {
  Index order_added = 1;
  Mat A_tilde, B_tilde;
  std::vector<double> xi;
  // 1-RSDC system solution and border parameters.
  Vec x, y;
  double z = 0.0;
  Vec alpha, beta;
  // 2-RSDC solution (z_1, …, z_k, z_{k+1}) and its real/imaginary parts.
  CVec zc;
  Vec a, b;
  Mat gamma;  ///< border column(s) in canonical coordinates (n × d)
  Congruence congruence;
  double kappa = 1.0;
  double interp_cond = 1.0;       ///< condition number of the interpolation matrix
  double eig_residual = 0.0;      ///< placement error of eig(Ã⁻¹B̃), relative
  std::vector<std::string> warnings;
  PencilForm form;
};

namespace detail {

/// Expected spectrum of the bordered pencil: {μ_i} ∪ {ξ_j, repeated `mult` times}.
inline std::vector<cplx> expected_spectrum(const PencilForm& form, const std::vector<double>& xi, int mult) {
  std::vector<cplx> e;
  for (const auto& b : form.real_blocks) e.emplace_back(b.mu, 0.0);
  for (double x : xi)
    for (int t = 0; t < mult; ++t) e.emplace_back(x, 0.0);
  return e;
}

/// Sorted-multiset distance between eig(Ã⁻¹B̃) and the expected values,
/// relative to max(1, max|expected|).
inline double placement_error(const Mat& At, const Mat& Bt, std::vector<cplx> expected) {
  auto got = sorted_eigenvalues(At.fullPivLu().solve(Bt));
  auto lt = [](cplx a, cplx b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); };
  std::sort(expected.begin(), expected.end(), lt);
  if (got.size() != expected.size()) return std::numeric_limits<double>::infinity();
  double scale = 1.0, err = 0.0;
  for (auto e : expected) scale = std::max(scale, std::abs(e));
  for (std::size_t i = 0; i < got.size(); ++i) err = std::max(err, std::abs(got[i] - expected[i]));
  return err / scale;
}

inline void check_conditioning(double c, RsdcCertificate& cert) {
  if (!(c <= 1e12))
    throw IllConditionedSystem("interpolation matrix condition " + std::to_string(c) +
                               " exceeds 1e12; retry with a different interpolation strategy");
  if (c > 1e8) cert.warnings.push_back("interpolation matrix condition " + std::to_string(c) + " exceeds 1e8");
}

/// Shared certification: SDC of the enlarged pair and eigenvalue placement.
inline void certify(RsdcCertificate& cert, const Mat& A, const Mat& B, int mult, const Tolerances& tol) {
  const Index n = A.rows();
  if (cert.A_tilde.topLeftCorner(n, n) != A || cert.B_tilde.topLeftCorner(n, n) != B)
    throw CertificationFailed("top-left blocks differ from the input");
  const auto res = sdc_check({cert.A_tilde, cert.B_tilde}, tol);
  if (!res.is_sdc())
    throw CertificationFailed("enlarged pair is not SDC (" + res.witness->describe() + ")");
  cert.congruence = *res.congruence;
  cert.kappa = res.congruence->kappa();
  cert.eig_residual = placement_error(cert.A_tilde, cert.B_tilde, expected_spectrum(cert.form, cert.xi, mult));
  if (!(cert.eig_residual <= 1e-6))
    throw CertificationFailed("eigenvalue placement error " + std::to_string(cert.eig_residual));
}

}  // namespace detail

/// One-row bordering: Ã = A ⊕ (1), B̃ = [[B, P⁻ᵀγ], [γᵀP⁻¹, z]].
inline RsdcCertificate rsdc1_construct(const Mat& A, const Mat& B, const XiStrategy& strategy = {},
                                       const Tolerances& tol = {}) {
  RsdcCertificate cert;
  cert.order_added = 1;
  cert.form = pencil_canonical(A, B, tol);
  const PencilForm& form = cert.form;
  const Index n = form.n(), r = form.r(), k = form.k();

  cert.A_tilde = Mat::Zero(n + 1, n + 1);
  cert.B_tilde = Mat::Zero(n + 1, n + 1);
  cert.A_tilde.topLeftCorner(n, n) = A;
  cert.B_tilde.topLeftCorner(n, n) = B;
  cert.A_tilde(n, n) = 1.0;
  cert.gamma = Mat::Zero(n, 1);
  cert.x = cert.y = cert.alpha = cert.beta = Vec::Zero(k);

  if (k > 0) {
    cert.xi = choose_xi(form, 2 * k + 1, strategy);
    const auto& lam = form.complex_blocks;
    auto quad = [&](Index i, double t) { return std::norm(lam[i] - t); };  // (λ−ξ)(λ̄−ξ)
    Mat V(2 * k + 1, 2 * k + 1);
    Vec rhs(2 * k + 1);
    for (Index j = 0; j < 2 * k + 1; ++j) {
      const double t = cert.xi[j];
      double h = 1.0;
      for (Index i = 0; i < k; ++i) h *= quad(i, t);
      for (Index i = 0; i < k; ++i) {
        double f = 1.0;
        for (Index l = 0; l < k; ++l)
          if (l != i) f *= quad(l, t);
        V(j, 2 * i) = f;
        V(j, 2 * i + 1) = t * f;
      }
      V(j, 2 * k) = h;
      rhs(j) = t * h;
    }
    cert.interp_cond = cond_number(V);
    detail::check_conditioning(cert.interp_cond, cert);
    const Vec sol = V.fullPivLu().solve(rhs);
    for (Index i = 0; i < k; ++i) {
      cert.x(i) = sol(2 * i);
      cert.y(i) = sol(2 * i + 1);
      const auto [al, be] = alpha_beta_recover(cert.x(i), cert.y(i), lam[i]);
      cert.alpha(i) = al;
      cert.beta(i) = be;
      cert.gamma(r + 2 * i, 0) = al;
      cert.gamma(r + 2 * i + 1, 0) = be;
    }
    cert.z = sol(2 * k);
    const Vec border = form.P.P().transpose().fullPivLu().solve(cert.gamma.col(0));
    cert.B_tilde.block(0, n, n, 1) = border;
    cert.B_tilde.block(n, 0, 1, n) = border.transpose();
    cert.B_tilde(n, n) = cert.z;
  } else {
    cert.xi = {0.0};  // the appended coordinate carries eigenvalue z = 0
  }
  detail::certify(cert, A, B, 1, tol);
  return cert;
}

/// Two-row bordering: Ã = A ⊕ F_2, B̃ with 2×2 border blocks [[b, a], [a, −b]].
inline RsdcCertificate rsdc2_construct(const Mat& A, const Mat& B, const XiStrategy& strategy = {},
                                       const Tolerances& tol = {}) {
  RsdcCertificate cert;
  cert.order_added = 2;
  cert.form = pencil_canonical(A, B, tol);
  const PencilForm& form = cert.form;
  const Index n = form.n(), r = form.r(), k = form.k();

  cert.A_tilde = Mat::Zero(n + 2, n + 2);
  cert.B_tilde = Mat::Zero(n + 2, n + 2);
  cert.A_tilde.topLeftCorner(n, n) = A;
  cert.B_tilde.topLeftCorner(n, n) = B;
  cert.A_tilde.bottomRightCorner(2, 2) = F(2);
  cert.gamma = Mat::Zero(n, 2);
  cert.zc = CVec::Zero(k + 1);
  cert.a = cert.b = Vec::Zero(k + 1);

  if (k > 0) {
    cert.xi = choose_xi(form, k + 1, strategy);
    const auto& lam = form.complex_blocks;
    CMat V(k + 1, k + 1);
    CVec rhs(k + 1);
    for (Index j = 0; j < k + 1; ++j) {
      const double t = cert.xi[j];
      cplx h = 1.0;
      for (Index i = 0; i < k; ++i) h *= lam[i] - t;
      for (Index i = 0; i < k; ++i) {
        cplx f = 1.0;
        for (Index l = 0; l < k; ++l)
          if (l != i) f *= lam[l] - t;
        V(j, i) = f;
      }
      V(j, k) = h;
      rhs(j) = t * h;
    }
    const auto sv = Eigen::JacobiSVD<CMat>(V).singularValues();
    cert.interp_cond = sv(k) > 0 ? sv(0) / sv(k) : std::numeric_limits<double>::infinity();
    detail::check_conditioning(cert.interp_cond, cert);
    const CVec w = V.fullPivLu().solve(rhs);
    // The bordered block's characteristic polynomial is (z_{k+1} − ξ)h − Σ z_i² f_i,
    // so the system's first k unknowns are −z_i².
    for (Index i = 0; i < k; ++i) cert.zc(i) = std::sqrt(-w(i));
    cert.zc(k) = w(k);
    cert.a = cert.zc.real();
    cert.b = cert.zc.imag();
    for (Index i = 0; i < k; ++i) {
      cert.gamma(r + 2 * i, 0) = cert.b(i);
      cert.gamma(r + 2 * i, 1) = cert.a(i);
      cert.gamma(r + 2 * i + 1, 0) = cert.a(i);
      cert.gamma(r + 2 * i + 1, 1) = -cert.b(i);
    }
    const Mat border = form.P.P().transpose().fullPivLu().solve(cert.gamma);
    cert.B_tilde.block(0, n, n, 2) = border;
    cert.B_tilde.block(n, 0, 2, n) = border.transpose();
    Mat corner(2, 2);
    corner << cert.b(k), cert.a(k), cert.a(k), -cert.b(k);
    cert.B_tilde.bottomRightCorner(2, 2) = corner;
  } else {
    cert.xi = {0.0};  // F₂ against a zero corner: eigenvalue 0, twice
  }
  detail::certify(cert, A, B, 2, tol);
  return cert;
}

}  // namespace sdcx
