// toeplitz.hpp - block upper triangular Toeplitz matrices.
//
// For a partition (n_1, …, n_k), 𝕋(n_1, …, n_k) is the space of matrices whose
// (i, j) blocks are upper triangular Toeplitz with zero padding on the left
// (n_i ≤ n_j) or at the bottom (n_i > n_j).  It is exactly the commutant of the
// nilpotent Jordan matrix with block sizes n_i.  The map Π collects the leading
// coefficients between equally sized blocks and preserves the spectrum.
#pragma once

#include "matcore.hpp"

namespace sdcx {

SDCX_DEFINE_ERROR(NotInT)

struct ToeplitzPartition {
  std::vector<Index> sizes;

  ToeplitzPartition() = default;
  ToeplitzPartition(std::initializer_list<Index> s) : sizes(s) { validate(); }
  explicit ToeplitzPartition(std::vector<Index> s) : sizes(std::move(s)) { validate(); }

  void validate() const {
    if (sizes.empty()) throw InvalidArgument("partition must contain at least one block");
    for (Index s : sizes)
      if (s < 1) throw InvalidArgument("partition sizes must be >= 1");
  }
  Index k() const { return static_cast<Index>(sizes.size()); }
  Index n() const {
    Index t = 0;
    for (Index s : sizes) t += s;
    return t;
  }
  std::vector<Index> offsets() const {
    std::vector<Index> o;
    Index t = 0;
    for (Index s : sizes) {
      o.push_back(t);
      t += s;
    }
    return o;
  }
};

/// Position of the square Toeplitz part inside an n_i × n_j block: returns the
/// (row, col) of its top-left corner and its order min(n_i, n_j).
struct ToeplitzWindow {
  Index row0, col0, order;
};

inline ToeplitzWindow toeplitz_window(Index ni, Index nj) {
  if (ni <= nj) return {0, nj - ni, ni};
  return {0, 0, nj};
}

/// Leading coefficient t^(1) of block (i, j).
inline double leading_coefficient(const Mat& T, const ToeplitzPartition& part, Index i, Index j) {
  const auto off = part.offsets();
  const auto w = toeplitz_window(part.sizes[i], part.sizes[j]);
  return T(off[i] + w.row0, off[j] + w.col0);
}

inline bool is_block_toeplitz(const Mat& T, const ToeplitzPartition& part, const Tolerances& tol = {}) {
  part.validate();
  if (T.rows() != part.n() || T.cols() != part.n())
    throw DimensionMismatch("matrix order does not match the partition");
  const double thresh = tol.resid_tol * std::max(1.0, max_abs(T));
  const auto off = part.offsets();
  for (Index bi = 0; bi < part.k(); ++bi)
    for (Index bj = 0; bj < part.k(); ++bj) {
      const Index ni = part.sizes[bi], nj = part.sizes[bj];
      const auto w = toeplitz_window(ni, nj);
      const Mat blk = T.block(off[bi], off[bj], ni, nj);
      for (Index r = 0; r < ni; ++r)
        for (Index c = 0; c < nj; ++c) {
          const Index lr = r - w.row0, lc = c - w.col0;
          const bool inside = lr >= 0 && lr < w.order && lc >= 0 && lc < w.order;
          if (!inside || lc < lr) {
            if (std::abs(blk(r, c)) > thresh) return false;
          } else if (std::abs(blk(r, c) - blk(w.row0, w.col0 + (lc - lr))) > thresh) {
            return false;
          }
        }
    }
  return true;
}

/// Block diagonal nilpotent Jordan matrix with blocks F_{n_i}G_{n_i}.
inline Mat jordan_nilpotent(const ToeplitzPartition& part) {
  part.validate();
  std::vector<Mat> blocks;
  for (Index s : part.sizes) blocks.push_back(F(s) * G(s));
  return direct_sum(blocks);
}

/// Π(T)_{ij} = leading Toeplitz coefficient when n_i = n_j, else 0.
inline Mat pi_map(const Mat& T, const ToeplitzPartition& part, const Tolerances& tol = {}) {
  if (!is_block_toeplitz(T, part, tol)) throw NotInT("matrix is not block upper triangular Toeplitz");
  const Index k = part.k();
  Mat P = Mat::Zero(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j)
      if (part.sizes[i] == part.sizes[j]) P(i, j) = leading_coefficient(T, part, i, j);
  return P;
}

/// Builds a member of 𝕋 from per-block coefficient lists (coeffs[i][j][ℓ] is
/// t^(ℓ+1) of block (i, j); missing coefficients are zero).
inline Mat toeplitz_from_coefficients(const ToeplitzPartition& part,
                                      const std::vector<std::vector<Vec>>& coeffs) {
  const Index n = part.n();
  Mat T = Mat::Zero(n, n);
  const auto off = part.offsets();
  for (Index bi = 0; bi < part.k(); ++bi)
    for (Index bj = 0; bj < part.k(); ++bj) {
      const auto w = toeplitz_window(part.sizes[bi], part.sizes[bj]);
      const Vec& c = coeffs[bi][bj];
      for (Index r = 0; r < w.order; ++r)
        for (Index l = 0; r + l < w.order && l < c.size(); ++l)
          T(off[bi] + w.row0 + r, off[bj] + w.col0 + r + l) = c(l);
    }
  return T;
}

}  // namespace sdcx
