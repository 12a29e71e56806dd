#pragma once

#include "lpvlft/model.hpp"

#include <optional>

namespace lpvlft {

// ---------------------------------------------------------------------------
// Errors raised by realization and minimization
// ---------------------------------------------------------------------------

struct RealizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Hankel rank did not stabilize within the supplied order bound, or the
/// realized series fails to reproduce the data.
struct OrderBoundError : RealizationError {
  using RealizationError::RealizationError;
};

/// Singular-value gap at the rank cut is too small to trust.
struct IllConditionedError : RealizationError {
  using RealizationError::RealizationError;
};

/// The scheduling functions admit no stable realization usable by the
/// pipeline (for example a nonzero constant term, or no stability
/// certificate even after argument scaling).
struct RecognizabilityError : RealizationError {
  using RealizationError::RealizationError;
};

// ---------------------------------------------------------------------------
// Linear representations of truncated series
// ---------------------------------------------------------------------------

/// Shared-state representation of a matrix series over the alphabet
/// {1, ..., d}: one state transition per letter and one output map per
/// letter, read against a single initial matrix:
///
///   coeff(i_1 i_2 .. i_k) = C[i_k] * A[i_{k-1}] * ... * A[i_1] * B,  k >= 1.
///
/// The empty-word coefficient is not part of the representation; it travels
/// separately as a feedthrough term.  For a one-letter alphabet this reads
/// coeff(1^k) = C * A^{k-1} * B.
struct LinearRepresentation {
  Index state_dim = 0;
  std::vector<Matrix> A;  // one n x n matrix per letter
  std::vector<Matrix> C;  // one r x n matrix per letter
  Matrix B;               // n x c

  int alphabet() const { return static_cast<int>(A.size()); }
  Index out_rows() const { return C.empty() ? 0 : C.front().rows(); }
  Index in_cols() const { return B.cols(); }
};

/// coeff(w) of the represented series; w must be nonempty.
Matrix representation_coefficient(const LinearRepresentation& rep, const Word& w);

/// Ho-Kalman realization from truncated series data.  The Hankel matrix is
/// indexed by (suffix, prefix) word pairs with 1 <= |suffix| <= order_bound+1
/// and 0 <= |prefix| <= order_bound; its entry at (u, v) is the coefficient
/// of the concatenated word v.u.  The empty-word coefficient is excluded
/// (it is the feedthrough term, not Hankel data).
///
/// Requires series.depth() >= 2*order_bound + 1.  Throws OrderBoundError when
/// the Hankel rank has not stabilized at the bound or the extracted
/// representation fails to reproduce the data, IllConditionedError when the
/// singular-value gap at the rank cut is below 10x the rank threshold.
LinearRepresentation hankel_realize(const TruncatedSeries& series, int order_bound);

/// Embeds a representation as an LFT with d equal blocks of size state_dim:
/// C-cell(i) = C[i], A-cell(i,j) = A[j], B-cell(j) = B, D = feedthrough.
/// The formal IO map of the result equals the represented series at every
/// nonempty word (the block products telescope), and its empty-word value is
/// the feedthrough term.
LftModel representation_to_lft(const LinearRepresentation& rep,
                               const Matrix& feedthrough);

// ---------------------------------------------------------------------------
// Block-structured minimization
// ---------------------------------------------------------------------------

/// Per-block reachability and observability ranks.  A model is minimal when
/// every block is fully reachable and fully observable.
struct MinimalityReport {
  bool minimal = false;
  std::vector<Index> reach_dims;  // dim of the block reachability space
  std::vector<Index> obs_dims;    // n_i minus dim of the block unobservable space
};

MinimalityReport is_minimal(const LftModel& m);

struct MinimizeResult {
  LftModel model;
  /// Orthonormal per-block maps T_i (original n_i x minimized n_i) with
  /// A_min(i,j) = T_i^T A(i,j) T_j, B_min(j) = T_j^T B(j), C_min(i) = C(i) T_i.
  std::vector<Matrix> maps;
};

/// Removes unreachable and unobservable directions block by block.  The
/// block count never changes; block sizes may shrink to zero.  The formal IO
/// map is preserved and the result passes is_minimal.
MinimizeResult minimize_lft(const LftModel& m);

// ---------------------------------------------------------------------------
// Stability
// ---------------------------------------------------------------------------

/// Block-diagonal quadratic certificate: P = Diag[P_1, ..., P_d] > 0 with
/// A^T P A - P < 0.  margin is the smallest eigenvalue of P - A^T P A.
struct StabilityCertificate {
  BlockStructure blocks;
  std::vector<Matrix> P;
  double margin = 0.0;

  Matrix assembled() const;
};

/// Independent verification by eigenvalue computation: every P_i symmetric
/// positive definite and P - A^T P A positive definite.
bool verify_certificate(const LftModel& m, const StabilityCertificate& cert);

/// Searches for a block-diagonal certificate: first P = I, then the
/// block-diagonal projection of the unstructured Lyapunov solution, then
/// coordinate descent over per-block scalar multipliers.  Absence of a
/// certificate means "unknown", not "unstable".
std::optional<StabilityCertificate> check_stability(const LftModel& m);

struct ScaledPsi {
  PsiRealization model;
  double lambda = 1.0;
};

/// Argument scaling that makes any realization stable: with
/// lambda = min(1, 1 / (||F||_2 (1 + 1e-6))), the model (lambda F, G,
/// lambda H) realizes p -> psi(lambda p) and has spectral norm < 1 whenever
/// lambda < 1.  Word coefficients scale by lambda^{|word|}.
ScaledPsi stabilize_scale(const PsiRealization& psi);

/// Full scheduling-function pipeline: realize Taylor data, embed, minimize,
/// certify stability (scaling the argument if needed).
struct PsiRealizeResult {
  PsiRealization model;
  double lambda = 1.0;
  double stability_margin = 0.0;
  Index representation_dim = 0;
  bool zero_series = false;
};

/// Throws RecognizabilityError when the empty-word coefficient is nonzero or
/// no stability certificate can be found even after scaling; propagates
/// hankel_realize errors.
PsiRealizeResult realize_psi(const TruncatedSeries& taylor, int order_bound);

}  // namespace lpvlft
