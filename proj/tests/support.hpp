#pragma once

// Shared generators and helpers for the test suite: random models with
// controlled conditioning, similarity transforms, non-minimal paddings, and
// finitely supported series.

#include <algorithm>
#include <initializer_list>
#include <utility>
#include <vector>

#include <Eigen/QR>

#include "lpvlft/analysis.hpp"
#include "lpvlft/model.hpp"
#include "lpvlft/numeric.hpp"
#include "lpvlft/realize.hpp"
#include "lpvlft/transform.hpp"

namespace testsupport {

using namespace lpvlft;

inline double max_err(const Matrix& a, const Matrix& b) {
  return max_abs(Matrix(a - b));
}

inline Matrix random_nonsingular(Rng& rng, Index n) {
  for (;;) {
    Matrix m = rng.matrix(n, n);
    if (numeric_rank(m) == n) return m;
  }
}

// Symmetric positive-definite similarity with condition number at most 4.
inline Matrix well_conditioned_similarity(Rng& rng, Index n) {
  Matrix q = Eigen::HouseholderQR<Matrix>(rng.matrix(n, n))
                 .householderQ() *
             Matrix::Identity(n, n);
  Vector d = rng.vector(n, 0.5, 2.0);
  return q * d.asDiagonal() * q.transpose();
}

// Random scheduling realization: `sizes` block dims (one per parameter),
// F rescaled so its spectral norm lands in [norm_lo, norm_hi]; redrawn until
// minimal.
inline PsiRealization random_stable_psi(Rng& rng, Index npsi,
                                        std::vector<Index> sizes,
                                        double norm_lo = 0.3,
                                        double norm_hi = 0.9) {
  BlockStructure blocks(sizes);
  const Index n = blocks.total();
  for (;;) {
    Matrix f = rng.matrix(n, n);
    double norm = spectral_norm(f);
    if (norm > 0) f *= rng.vector(1, norm_lo, norm_hi)(0) / norm;
    Matrix g = rng.matrix(n, 1);
    Matrix h = rng.matrix(npsi, n);
    LftModel lft(npsi, 1, blocks, f, g, h, Matrix::Zero(npsi, 1));
    if (is_minimal(lft).minimal) return PsiRealization(lft);
  }
}

inline FalpvModel random_falpv(Rng& rng, Index nx, Index nu, Index ny,
                               Index np, Index npsi) {
  std::vector<Matrix> a, b, c, d;
  for (Index l = 0; l <= npsi; ++l) {
    a.push_back(rng.matrix(nx, nx));
    b.push_back(rng.matrix(nx, nu));
    c.push_back(rng.matrix(ny, nx));
    d.push_back(rng.matrix(ny, nu));
  }
  return FalpvModel(nx, nu, ny, np, std::move(a), std::move(b), std::move(c),
                    std::move(d));
}

// Rescales the A-family so that ||A(p)|| stays below `bound` for every p in
// the box (estimated on random samples with headroom), keeping trajectories
// of both simulation routes well conditioned.
inline FalpvModel make_contractive(FalpvModel sys, const PsiEvaluator& psi,
                                   Rng& rng, double bound = 0.9) {
  double worst = 0.0;
  for (int k = 0; k < 64; ++k) {
    Vector point = rng.vector(sys.np);
    Vector values = psi(point);
    worst = std::max(worst, spectral_norm(eval_falpv_matrices(sys, values).A));
  }
  if (worst > 0) {
    double scale = bound / (worst * 1.25);
    if (scale < 1.0)
      for (Matrix& a : sys.A) a *= scale;
  }
  return sys;
}

// x -> T x change of state coordinates: A_l -> T A_l T^{-1}, B_l -> T B_l,
// C_l -> C_l T^{-1}.
inline FalpvModel apply_similarity(const FalpvModel& sys, const Matrix& t) {
  Matrix t_inv = t.inverse();
  FalpvModel out = sys;
  for (std::size_t l = 0; l < sys.A.size(); ++l) {
    out.A[l] = t * sys.A[l] * t_inv;
    out.B[l] = t * sys.B[l];
    out.C[l] = sys.C[l] * t_inv;
  }
  return out;
}

// Appends `extra` state directions that are unreachable and unobservable
// (decoupled parameter-dependent dynamics).
inline FalpvModel pad_falpv(Rng& rng, const FalpvModel& sys, Index extra) {
  FalpvModel out = sys;
  out.nx = sys.nx + extra;
  for (std::size_t l = 0; l < sys.A.size(); ++l) {
    Matrix a = Matrix::Zero(out.nx, out.nx);
    a.topLeftCorner(sys.nx, sys.nx) = sys.A[l];
    a.bottomRightCorner(extra, extra) = rng.matrix(extra, extra);
    out.A[l] = a;
    Matrix b = Matrix::Zero(out.nx, sys.nu);
    b.topRows(sys.nx) = sys.B[l];
    out.B[l] = b;
    Matrix c = Matrix::Zero(sys.ny, out.nx);
    c.leftCols(sys.nx) = sys.C[l];
    out.C[l] = c;
  }
  return out;
}

inline FalpvModel random_minimal_falpv(Rng& rng, Index nx, Index nu, Index ny,
                                       Index np, Index npsi) {
  for (;;) {
    FalpvModel sys = random_falpv(rng, nx, nu, ny, np, npsi);
    if (falpv_is_minimal(sys).minimal) return sys;
  }
}

inline std::vector<Index> random_blocks(Rng& rng, Index count, Index max_size) {
  std::vector<Index> sizes;
  for (Index i = 0; i < count; ++i)
    sizes.push_back(rng.uniform_int(1, static_cast<int>(max_size)));
  return sizes;
}

inline LftModel random_lft(Rng& rng, std::vector<Index> sizes, Index p_out,
                           Index m_in) {
  BlockStructure blocks(sizes);
  const Index n = blocks.total();
  return LftModel(p_out, m_in, blocks, rng.matrix(n, n), rng.matrix(n, m_in),
                  rng.matrix(p_out, n), rng.matrix(p_out, m_in));
}

// Enlarges every block by `extra` unreachable-and-unobservable directions;
// `couple` additionally wires them forward into the kept states (they stay
// unreachable because nothing ever excites them).
inline LftModel pad_lft(Rng& rng, const LftModel& m, Index extra, bool couple) {
  std::vector<Index> sizes;
  for (Index i = 0; i < m.d(); ++i) sizes.push_back(m.blocks.dim(i) + extra);
  BlockStructure blocks(sizes);
  const Index n = blocks.total();
  Matrix a = Matrix::Zero(n, n);
  Matrix b = Matrix::Zero(n, m.m_in);
  Matrix c = Matrix::Zero(m.p_out, n);
  for (Index i = 0; i < m.d(); ++i) {
    const Index ni = m.blocks.dim(i);
    b.middleRows(blocks.offset(i), ni) = m.b_cell(i + 1);
    c.middleCols(blocks.offset(i), ni) = m.c_cell(i + 1);
    for (Index j = 0; j < m.d(); ++j) {
      const Index nj = m.blocks.dim(j);
      a.block(blocks.offset(i), blocks.offset(j), ni, nj) = m.a_cell(i + 1, j + 1);
      a.block(blocks.offset(i) + ni, blocks.offset(j) + nj, extra, extra) =
          rng.matrix(extra, extra);
      if (couple)
        a.block(blocks.offset(i), blocks.offset(j) + nj, ni, extra) =
            rng.matrix(ni, extra);
    }
  }
  return LftModel(m.p_out, m.m_in, blocks, a, b, c, m.D);
}

inline Word random_word(Rng& rng, int alphabet, int length) {
  Word w;
  for (int i = 0; i < length; ++i) w.push_back(rng.uniform_int(1, alphabet));
  return w;
}

// Finitely supported series with `support` random nonzero coefficients on
// words of length 1..max_len (depth set to cover realization needs).
inline TruncatedSeries random_supported_series(Rng& rng, int alphabet,
                                               Index rows, Index cols,
                                               int max_len, int support,
                                               int depth) {
  TruncatedSeries series(alphabet, depth, rows, cols);
  for (int k = 0; k < support; ++k) {
    Word w = random_word(rng, alphabet, rng.uniform_int(1, max_len));
    series.set(w, rng.matrix(rows, cols));
  }
  return series;
}

// Convenience constructor for small series from word/column pairs.
inline TruncatedSeries make_series(
    int alphabet, int depth, Index rows,
    std::initializer_list<std::pair<Word, std::vector<double>>> entries) {
  TruncatedSeries series(alphabet, depth, rows, 1);
  for (const auto& [word, values] : entries) {
    Matrix m(rows, 1);
    for (Index r = 0; r < rows; ++r) m(r, 0) = values[static_cast<std::size_t>(r)];
    series.set(word, m);
  }
  return series;
}

}  // namespace testsupport
