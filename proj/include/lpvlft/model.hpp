#pragma once

#include "lpvlft/numeric.hpp"

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpvlft {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Shape, signature, or domain violations detected at construction or call
/// time.  The CLI maps these to exit code 2.
struct ContractError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A word letter outside {1, ..., d}.
struct AlphabetError : ContractError {
  using ContractError::ContractError;
};

/// (I - A*Delta) numerically singular in a feedback loop.
struct WellPosednessError : std::runtime_error {
  WellPosednessError(const std::string& what, double rcond_est, long at_step = -1)
      : std::runtime_error(what), rcond(rcond_est), step(at_step) {}
  double rcond = 0.0;
  long step = -1;  // time index for simulation loops, -1 otherwise
};

// ---------------------------------------------------------------------------
// Words
// ---------------------------------------------------------------------------

/// A word over the alphabet {1, ..., d}.  Letters are 1-based and are read
/// left to right in application order: the first letter acts first.  The
/// empty vector is the empty word.
using Word = std::vector<int>;

/// Throws AlphabetError unless every letter lies in {1, ..., alphabet}.
void validate_word(const Word& w, int alphabet);

/// Adds `offset` to every letter (the index-shift map between a scheduling
/// alphabet {1..k} and an extended alphabet that reserves letter 1).
Word shift_letters(const Word& w, int offset);

/// Calls fn(word) for every word of length min_len..max_len in breadth-first
/// lexicographic order.  fn returns false to stop early; the function
/// returns false iff stopped.
bool for_each_word(int alphabet, int min_len, int max_len,
                   const std::function<bool(const Word&)>& fn);

// ---------------------------------------------------------------------------
// Block structures
// ---------------------------------------------------------------------------

/// Sizes of the diagonal blocks of a structured uncertainty
/// Delta = Diag[delta_1 I_{n_1}, ..., delta_d I_{n_d}].  Zero-size blocks
/// are allowed (minimization may empty a block but never drops it).
class BlockStructure {
 public:
  BlockStructure() = default;
  explicit BlockStructure(std::vector<Index> dims);

  Index count() const { return static_cast<Index>(dims_.size()); }
  Index total() const { return total_; }
  Index dim(Index i) const { return dims_.at(static_cast<size_t>(i)); }
  Index offset(Index i) const { return offsets_.at(static_cast<size_t>(i)); }
  const std::vector<Index>& dims() const { return dims_; }

  bool operator==(const BlockStructure& other) const { return dims_ == other.dims_; }

 private:
  std::vector<Index> dims_;
  std::vector<Index> offsets_;
  Index total_ = 0;
};

/// Delta(point) = Diag[point_1 I_{n_1}, ..., point_d I_{n_d}].
Matrix delta_of_point(const Vector& point, const BlockStructure& blocks);

// ---------------------------------------------------------------------------
// Functional-affine LPV models
// ---------------------------------------------------------------------------

/// Discrete-time LPV state-space model whose matrices depend affinely on a
/// vector of scheduling functions psi: X(p) = X_0 + sum_l X_l psi_l(p), with
/// scheduling range [-1, 1]^np and zero initial state.
struct FalpvModel {
  Index nx = 0, nu = 0, ny = 0, np = 0;
  // Coefficient families, one entry per l = 0..npsi.
  std::vector<Matrix> A, B, C, D;

  FalpvModel() = default;
  FalpvModel(Index nx, Index nu, Index ny, Index np, std::vector<Matrix> A,
             std::vector<Matrix> B, std::vector<Matrix> C, std::vector<Matrix> D);

  Index npsi() const { return static_cast<Index>(A.size()) - 1; }
};

/// Matrices of a FALPV model at one scheduling point, given the values
/// psi_l(p).
struct EvaluatedFalpv {
  Matrix A, B, C, D;
};

/// X = X_0 + sum_l X_l psi_values(l-1) for each of the four families.
/// Exact affine combination: no balancing or reordering is applied.
EvaluatedFalpv eval_falpv_matrices(const FalpvModel& model, const Vector& psi_values);

// ---------------------------------------------------------------------------
// LFT models
// ---------------------------------------------------------------------------

/// Linear fractional transformation model M = (p_out, m_in, blocks, A, B, C, D)
/// with upper-loop uncertainty closed through Delta:
/// M * Delta = D + C Delta (I - A Delta)^{-1} B.
struct LftModel {
  Index p_out = 0, m_in = 0;
  BlockStructure blocks;
  Matrix A, B, C, D;

  LftModel() = default;
  LftModel(Index p_out, Index m_in, BlockStructure blocks, Matrix A, Matrix B,
           Matrix C, Matrix D);

  Index dim() const { return blocks.total(); }
  Index d() const { return blocks.count(); }

  // Cells of the canonical partition induced by the block structure
  // (1-based block indices i, j in {1, ..., d}).
  Matrix a_cell(Index i, Index j) const;
  Matrix b_cell(Index j) const;
  Matrix c_cell(Index i) const;
};

/// All cells of the canonical partition: A[i][j], B[j], C[i] with 0-based
/// storage indices for blocks i, j.
struct CanonicalPartition {
  std::vector<std::vector<Matrix>> A;
  std::vector<Matrix> B;
  std::vector<Matrix> C;
};

CanonicalPartition canonical_partition(const LftModel& m);

/// Coefficient of the formal input-output series of M at word nu:
/// empty word -> D; (i) -> C_i B_i; (i_1..i_k) -> C_{i_k} A_{i_k,i_{k-1}}
/// ... A_{i_2,i_1} B_{i_1}.
Matrix formal_io_map(const LftModel& m, const Word& nu);

/// Structured word products for a nonempty word nu = (i_1..i_k):
///   a   = A_{i_k,i_{k-1}} ... A_{i_2,i_1}   (identity of size n_{i_1} for k = 1)
///   ab  = a * B_{i_1}
///   ca  = C_{i_k} * a
///   cab = C_{i_k} * a * B_{i_1}             (equals formal_io_map(m, nu))
struct WordProducts {
  Matrix a, ab, ca, cab;
};

WordProducts word_products(const LftModel& m, const Word& nu);

/// Formal IO series of M truncated at the given depth (the empty-word
/// coefficient is stored as the D term of the returned series).
class TruncatedSeries;
TruncatedSeries series_of_lft(const LftModel& m, int depth);

/// M * Delta = D + C Delta (I - A Delta)^{-1} B.  Throws WellPosednessError
/// when the reciprocal condition estimate of (I - A Delta) falls below
/// kRcondMin.
Matrix star_product(const LftModel& m, const Matrix& delta);

// ---------------------------------------------------------------------------
// Scheduling-function realizations
// ---------------------------------------------------------------------------

/// LFT realization of a scheduling-function vector psi: R^np -> R^npsi,
/// psi(p) = H Delta_p (I - F Delta_p)^{-1} G with Delta_p = delta_of_point(p).
/// Stored as an LftModel with A = F, B = G, C = H, D = 0 and one block per
/// scheduling coordinate.
struct PsiRealization {
  LftModel lft;

  PsiRealization() = default;
  explicit PsiRealization(LftModel m);

  Index npsi() const { return lft.p_out; }
  Index np() const { return lft.d(); }
  const Matrix& F() const { return lft.A; }
  const Matrix& G() const { return lft.B; }
  const Matrix& H() const { return lft.C; }

  /// psi(point) via the star product.
  Vector eval(const Vector& point) const;
};

// ---------------------------------------------------------------------------
// Truncated formal power series
// ---------------------------------------------------------------------------

/// Matrix-valued noncommutative formal power series truncated at a word
/// length `depth`.  Words of length <= depth that were never set are zero;
/// the empty-word coefficient is stored like any other.
class TruncatedSeries {
 public:
  TruncatedSeries() = default;
  TruncatedSeries(int alphabet, int depth, Index rows, Index cols);

  int alphabet() const { return alphabet_; }
  int depth() const { return depth_; }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }

  void set(const Word& w, Matrix value);
  Matrix at(const Word& w) const;

  /// Stored (explicitly set) coefficients only.
  const std::map<Word, Matrix>& stored() const { return coeffs_; }

 private:
  int alphabet_ = 0;
  int depth_ = 0;
  Index rows_ = 0, cols_ = 0;
  std::map<Word, Matrix> coeffs_;
};

}  // namespace lpvlft
