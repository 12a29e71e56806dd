#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

namespace lpvlft {

using Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Relative tolerance for SVD-based rank decisions.  The effective threshold
// for a matrix M is max(rows, cols) * sigma_max(M) * kRankRelTol.
inline constexpr double kRankRelTol = 1e-10;

// Reciprocal condition estimate below which a loop matrix (I - A*Delta) is
// treated as singular.
inline constexpr double kRcondMin = 1e-10;

/// Largest absolute entry; 0 for empty matrices.
double max_abs(const Matrix& m);

/// Spectral norm (largest singular value); 0 for empty matrices.
double spectral_norm(const Matrix& m);

/// Rank threshold max(rows, cols) * sigma_max * kRankRelTol for the given
/// singular values.
double rank_threshold(Index rows, Index cols, const Vector& singular_values);

/// Numeric rank with the shared threshold rule.
Index numeric_rank(const Matrix& m);

/// Orthonormal basis of the column space (columns of the result).
Matrix orth_basis(const Matrix& m);

/// Orthonormal basis of the kernel (columns of the result).
Matrix nullspace_basis(const Matrix& m);

/// Moore-Penrose pseudo-inverse with the shared rank threshold.
Matrix pseudo_inverse(const Matrix& m);

/// Solves A^T P A - P = -Q for symmetric P by summing the convergent series
/// with squared powers of A.  Returns false when the iteration diverges,
/// i.e. when A has spectral radius >= 1.
bool solve_discrete_lyapunov(const Matrix& a, const Matrix& q, Matrix& p);

/// Shortest locale-independent decimal string that parses back to exactly
/// the same double (17 significant digits).
std::string format_double(double v);

/// Parses a double written by format_double; returns false on malformed
/// input or trailing garbage.
bool parse_double(const std::string& text, double& out);

/// Deterministic uniform sampling that does not depend on the standard
/// library's distribution implementations, so seeded runs reproduce
/// byte-identical output everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform(double lo = 0.0, double hi = 1.0);
  int uniform_int(int lo, int hi);  // inclusive bounds
  Matrix matrix(Index rows, Index cols, double lo = -1.0, double hi = 1.0);
  Vector vector(Index n, double lo = -1.0, double hi = 1.0);

 private:
  std::uint64_t state_;
};

}  // namespace lpvlft
