#pragma once

// Lifting of functional-affine parameter dependence into a single
// linear-fractional model: builds an LFT whose parameter channel reproduces
// the scheduling functions applied to the plant coefficient blocks, then
// assembles it with the state shift into one closed model.

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "lpvlft/model.hpp"
#include "lpvlft/realize.hpp"

namespace lpvlft {

// Raised when a supplied rank factorization of the coefficient block does not
// satisfy the single-function lifting contract.
class InvalidFactorError : public ContractError {
 public:
  using ContractError::ContractError;
};

// [A_l B_l; C_l D_l] for scheduling function l (1-based; l = 0 gives the
// constant part).
Matrix coefficient_block(const FalpvModel& sys, int l);

// Coefficient of the lifted matrix series at one word: the sum over
// scheduling functions l of S_l(w) * [A_l B_l; C_l D_l], where S is the
// column series of the scheduling functions.
Matrix tilde_series(const FalpvModel& sys, const TruncatedSeries& psi_taylor,
                    const Word& w);

// LFT whose map at a parameter point equals the parameter-dependent part of
// the plant coefficients: p_out = nx + ny rows, m_in = nx + nu columns.
struct SigmaPsiLft {
  LftModel lft{1, 1, BlockStructure({1}), Matrix::Zero(1, 1), Matrix::Zero(1, 1),
               Matrix::Zero(1, 1), Matrix::Zero(1, 1)};
  Index nx = 0;
  Index nu = 0;
  Index ny = 0;

  Matrix hx() const { return lft.C.topRows(nx); }
  Matrix hy() const { return lft.C.bottomRows(ny); }
  Matrix gx() const { return lft.B.leftCols(nx); }
  Matrix gu() const { return lft.B.rightCols(nu); }
};

// General lifting: F (x) I, G (x) I and the sum over scheduling functions of
// H_l (x) [A_l B_l; C_l D_l], with every parameter block inflated by nx + nu.
LftModel lift_kron(const FalpvModel& sys, const PsiRealization& psi);

// minimize_lft(lift_kron(sys, psi)) with the row/column split metadata
// attached; minimization never touches the external dimensions.
SigmaPsiLft minimal_sigma_psi(const FalpvModel& sys, const PsiRealization& psi);

// Single-function lifting through a rank factorization
// [A_1 B_1; C_1 D_1] = L * R: blocks inflate only by the factor rank.
// Requires exactly one scheduling function, matching shapes, a reconstruction
// residual of at most 1e-10 (relative) and L of full column rank.
SigmaPsiLft fast_path_factor(const FalpvModel& sys, const PsiRealization& psi,
                             const Matrix& left, const Matrix& right);

// Default factorization of the single coefficient block: [A_1; 0] * [I 0]
// when only A_1 is nonzero and square invertible, (block, I) when the block
// has full column rank, otherwise a rank-revealing SVD factorization.
std::pair<Matrix, Matrix> default_coefficient_factor(const FalpvModel& sys);

// Final closed model: blocks (n_x, nbar_1, ..., nbar_np); the first block is
// the state shift, the remaining blocks take delta_l = p_l / lambda.
struct AssembledLft {
  LftModel lft{1, 1, BlockStructure({1}), Matrix::Zero(1, 1), Matrix::Zero(1, 1),
               Matrix::Zero(1, 1), Matrix::Zero(1, 1)};
  Index nx = 0;
  Index nu = 0;
  Index ny = 0;
  Index np = 0;
  double lambda = 1.0;  // argument prescale carried by the parameter blocks

  Index psi_dim() const { return lft.dim() - nx; }
  BlockStructure psi_blocks() const;

  Matrix a0() const { return lft.A.topLeftCorner(nx, nx); }
  Matrix hx() const { return lft.A.topRightCorner(nx, psi_dim()); }
  Matrix gx() const { return lft.A.bottomLeftCorner(psi_dim(), nx); }
  Matrix core() const { return lft.A.bottomRightCorner(psi_dim(), psi_dim()); }
  Matrix b0() const { return lft.B.topRows(nx); }
  Matrix gu() const { return lft.B.bottomRows(psi_dim()); }
  Matrix c0() const { return lft.C.leftCols(nx); }
  Matrix hy() const { return lft.C.rightCols(psi_dim()); }
};

// Joins the constant coefficient part with the lifted parameter part.
AssembledLft assemble(const FalpvModel& sys, const SigmaPsiLft& sigma,
                      double lambda = 1.0);

// Scheduling-function source for the transform: either a ready realization or
// a truncated argument series to be realized first.
struct TaylorPsi {
  TruncatedSeries series{1, 0, 1, 1};
  int order_bound = 0;
};
using PsiSource = std::variant<PsiRealization, TaylorPsi>;

struct TransformOptions {
  bool fast_path = false;   // use the factored lifting (one function only)
  int check_depth = -1;     // formal-series check depth; -1 picks the default
  int pointwise_trials = 20;
  std::uint64_t seed = 1;
};

struct TransformReport {
  Index psi_dim = 0;               // realization size of the scheduling map
  double psi_stability_margin = 0.0;
  double lambda = 1.0;
  bool fast_path = false;
  Index lifted_dim = 0;            // parameter-channel size before reduction
  Index sigma_psi_dim = 0;         // parameter-channel size after reduction
  bool sigma_psi_minimal = false;
  bool sigma_psi_stable = false;
  double sigma_psi_margin = 0.0;
  bool assembled_minimal = false;
  std::vector<Index> psi_block_dims;
  int check_depth = 0;
  int pointwise_trials = 0;
  std::uint64_t seed = 0;
  double max_pointwise_error = 0.0;
  double max_series_error = 0.0;
};

struct TransformResult {
  AssembledLft model;
  PsiRealization psi;  // realization actually embedded (argument prescaled)
  TransformReport report;
};

/// Full pipeline: realize / stabilize the scheduling functions, lift the
// coefficient dependence, reduce, verify, and assemble.
TransformResult transform(const FalpvModel& sys, const PsiSource& psi,
                          const TransformOptions& options = {});

}  // namespace lpvlft
