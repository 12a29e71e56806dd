#pragma once

// Executable checks of the transformation guarantees: trajectory simulation
// of the plant and of the closed linear-fractional loop, formal input-output
// equivalence, Markov-parameter equivalence of plants, structured
// isomorphism search, and the affine sampling-basis utility.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "lpvlft/model.hpp"
#include "lpvlft/transform.hpp"

namespace lpvlft {

// Raised when sampled scheduling-function values look linearly dependent, so
// no well-conditioned affine basis exists.
class DependenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Trajectory {
  Index horizon = 0;
  std::vector<Vector> u;  // horizon entries
  std::vector<Vector> p;  // horizon entries, componentwise in [-1, 1]
  std::vector<Vector> x;  // horizon + 1 entries, x[0] = 0
  std::vector<Vector> y;  // horizon entries
};

// Values of the scheduling functions at one parameter point.
using PsiEvaluator = std::function<Vector(const Vector&)>;

// Evaluator backed by a realization of the scheduling functions.
PsiEvaluator evaluator_of(const PsiRealization& psi);

// State recursion x(t+1) = A(p(t)) x(t) + B(p(t)) u(t) from x(0) = 0 with
// y(t) = C(p(t)) x(t) + D(p(t)) u(t); scheduling-function evaluation failures
// are reported with the offending step.
Trajectory simulate_falpv(const FalpvModel& sys, const std::vector<Vector>& u,
                          const std::vector<Vector>& p, Index horizon,
                          const PsiEvaluator& psi);

struct LoopSimulation {
  Trajectory trajectory;
  std::vector<Vector> z;  // per-step loop solutions, horizon entries
};

// Implicit-loop simulation of the assembled model: at each step solves
// z(t) = (I - F Delta)^{-1} (Gx x(t) + Gu u(t)) with Delta built from
// p(t) / lambda on the parameter blocks, then advances the shift state.
LoopSimulation simulate_lft_loop(const AssembledLft& m,
                                 const std::vector<Vector>& u,
                                 const std::vector<Vector>& p, Index horizon);

struct EquivalenceResult {
  bool equivalent = true;
  std::optional<Word> counterexample;  // a shortest differing word
};

// Decides equality of the formal input-output maps of two LFTs on all words
// of length <= depth (default dim1 + dim2), tolerance 1e-9 per entry.
EquivalenceResult formal_equivalence(const LftModel& m1, const LftModel& m2,
                                     int depth = -1);

// Decides equality of the plant Markov parameters C_i A_v B_j (all letters
// i, j in 0..n_psi, |v| <= depth, default nx1 + nx2) and of the D_i.
bool falpv_equivalence(const FalpvModel& s1, const FalpvModel& s2,
                       int depth = -1);

struct FalpvMinimality {
  bool minimal = false;
  Index reach_dim = 0;
  Index obs_dim = 0;
};

// Rank conditions over the extended alphabet {0..n_psi} (constant part
// included as letter 0).
FalpvMinimality falpv_is_minimal(const FalpvModel& sys);

// Searches for a block-diagonal similarity T with T A1 = A2 T cellwise,
// T B1 = B2 and C1 = C2 T; both inputs must be minimal with equal block
// structures. Returns the per-block factors, or nothing when the models are
// not equivalent.
std::optional<std::vector<Matrix>> find_structured_isomorphism(
    const LftModel& m1, const LftModel& m2);

struct AffineBasis {
  std::vector<Vector> points;  // n_psi + 1 sample points in [-1, 1]^{n_p}
  Matrix coefficients;         // (n_psi + 1) x n_psi; column l solves for e_l
  double condition = 0.0;      // condition number of the augmented system
};

// Random search for sample points whose augmented value matrix [1, psi(p_i)]
// is well conditioned; column l of the coefficients reproduces delta_{j,l}
// against the function values and sums to one.
AffineBasis affine_basis_coefficients(const PsiEvaluator& psi, Index npsi,
                                      Index np, std::uint64_t seed = 1);

}  // namespace lpvlft
