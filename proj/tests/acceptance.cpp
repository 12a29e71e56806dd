// Acceptance gate for the transformation pipeline: eight criteria, one
// [PASS]/[FAIL] line each, nonzero exit when anything fails.  Tolerances are
// pinned below; runtime budgets are enforced where a criterion carries one.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "lpvlft/analysis.hpp"
#include "lpvlft/realize.hpp"
#include "lpvlft/transform.hpp"
#include "support.hpp"

using namespace lpvlft;
using testsupport::max_err;

namespace {

constexpr double kTrajectoryTol = 1e-9;   // trajectory / loop-signal deviation
constexpr double kCoefficientTol = 1e-8;  // realized-series coefficient error
constexpr double kIsomorphismTol = 1e-8;  // structured-similarity residual
constexpr double kMarginTol = 1e-12;      // pinned certificate margins

struct CriterionResult {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return buf;
}

std::string word_text(const Word& w) {
  if (w.empty()) return "eps";
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(w[i]);
  }
  return out;
}

// ---- shared model builders ----

PsiRealization chain_psi() {
  Matrix f(2, 2), g(2, 1);
  f << 0, 0, 1, 0;
  g << 1, 0;
  return PsiRealization(LftModel(2, 1, BlockStructure({2}), f, g,
                                 Matrix::Identity(2, 2), Matrix::Zero(2, 1)));
}

PsiRealization geometric_psi() {
  Matrix f(1, 1), g(1, 1), h(1, 1);
  f << 0.5;
  g << 1;
  h << 1;
  return PsiRealization(
      LftModel(1, 1, BlockStructure({1}), f, g, h, Matrix::Zero(1, 1)));
}

PsiEvaluator pair_eval() {
  return [](const Vector& p) {
    Vector out(2);
    out << p(0), p(0) * p(0);
    return out;
  };
}

// Plant with A(p) = A0 + A1 p + A2 p^2 (A1, A2 nonsingular), constant B, C.
FalpvModel polynomial_example(Rng& rng) {
  Matrix z21 = Matrix::Zero(2, 1), z12 = Matrix::Zero(1, 2),
         z11 = Matrix::Zero(1, 1);
  FalpvModel sys(2, 1, 1, 1,
                 {rng.matrix(2, 2), testsupport::random_nonsingular(rng, 2),
                  testsupport::random_nonsingular(rng, 2)},
                 {rng.matrix(2, 1), z21, z21}, {rng.matrix(1, 2), z12, z12},
                 {z11, z11, z11});
  return testsupport::make_contractive(sys, pair_eval(), rng);
}

// Plant with A(p) = A0 + A1 p/(1-0.5p) (A1 nonsingular), constant B, C.
FalpvModel rational_example(Rng& rng) {
  Matrix z21 = Matrix::Zero(2, 1), z12 = Matrix::Zero(1, 2),
         z11 = Matrix::Zero(1, 1);
  FalpvModel sys(2, 1, 1, 1,
                 {rng.matrix(2, 2), testsupport::random_nonsingular(rng, 2)},
                 {rng.matrix(2, 1), z21}, {rng.matrix(1, 2), z12}, {z11, z11});
  return testsupport::make_contractive(sys, evaluator_of(geometric_psi()), rng);
}

AssembledLft wrap_assembled(LftModel lft, Index nx, Index nu, Index ny,
                            Index np) {
  AssembledLft out;
  out.lft = std::move(lft);
  out.nx = nx;
  out.nu = nu;
  out.ny = ny;
  out.np = np;
  out.lambda = 1.0;
  return out;
}

double residual_of_isomorphism(const LftModel& m1, const LftModel& m2,
                               const std::vector<Matrix>& factors) {
  Matrix big = Matrix::Zero(m1.dim(), m1.dim());
  Index at = 0;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const Index n = factors[i].rows();
    big.block(at, at, n, n) = factors[i];
    at += n;
  }
  double r = max_err(big * m1.A, m2.A * big);
  r = std::max(r, max_err(big * m1.B, m2.B));
  r = std::max(r, max_err(m1.C, m2.C * big));
  return r;
}

// ---- criterion 1: polynomial dependence end to end ----

CriterionResult criterion1() {
  Rng rng(101);
  FalpvModel sys = polynomial_example(rng);

  // Closed model written out by hand: shift block of size 2, one parameter
  // block of size 4 stacking (x p, x p^2) worth of channels.
  Matrix a = Matrix::Zero(6, 6);
  a.block(0, 0, 2, 2) = sys.A[0];
  a.block(0, 2, 2, 2) = sys.A[1];
  a.block(0, 4, 2, 2) = sys.A[2];
  a.block(2, 0, 2, 2) = Matrix::Identity(2, 2);
  a.block(4, 2, 2, 2) = Matrix::Identity(2, 2);
  Matrix b = Matrix::Zero(6, 1);
  b.topRows(2) = sys.B[0];
  Matrix c = Matrix::Zero(1, 6);
  c.leftCols(2) = sys.C[0];
  AssembledLft hand = wrap_assembled(
      LftModel(1, 1, BlockStructure({2, 4}), a, b, c, Matrix::Zero(1, 1)), 2,
      1, 1, 1);

  TransformResult result = transform(sys, chain_psi());
  EquivalenceResult eq = formal_equivalence(result.model.lft, hand.lft);
  if (!eq.equivalent) {
    return {false, "transformed model differs from the hand-built one at word " +
                       word_text(eq.counterexample.value_or(Word{}))};
  }

  const Index horizon = 50;
  std::vector<Vector> u, p;
  for (Index t = 0; t < horizon; ++t) {
    u.push_back(rng.vector(1));
    p.push_back(rng.vector(1));
  }
  Trajectory plant = simulate_falpv(sys, u, p, horizon, pair_eval());
  LoopSimulation loop = simulate_lft_loop(hand, u, p, horizon);
  double worst = 0.0;
  for (Index t = 0; t < horizon; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    worst = std::max(worst,
                     (loop.trajectory.y[ti] - plant.y[ti]).cwiseAbs().maxCoeff());
    Vector expected(4);
    expected << plant.x[ti], p[ti](0) * plant.x[ti];
    worst = std::max(worst, (loop.z[ti] - expected).cwiseAbs().maxCoeff());
  }
  if (worst > kTrajectoryTol) {
    return {false, "loop signal deviates from (x, x p) by " + num(worst)};
  }
  return {true, "equivalent to the printed form; max loop deviation " +
                    num(worst)};
}

// ---- criterion 2: rational dependence end to end ----

CriterionResult criterion2() {
  Rng rng(202);
  FalpvModel sys = rational_example(rng);

  Matrix a = Matrix::Zero(4, 4);
  a.block(0, 0, 2, 2) = sys.A[0];
  a.block(0, 2, 2, 2) = sys.A[1];
  a.block(2, 0, 2, 2) = Matrix::Identity(2, 2);
  a.block(2, 2, 2, 2) = 0.5 * Matrix::Identity(2, 2);
  Matrix b = Matrix::Zero(4, 1);
  b.topRows(2) = sys.B[0];
  Matrix c = Matrix::Zero(1, 4);
  c.leftCols(2) = sys.C[0];
  AssembledLft hand = wrap_assembled(
      LftModel(1, 1, BlockStructure({2, 2}), a, b, c, Matrix::Zero(1, 1)), 2,
      1, 1, 1);

  TransformResult result = transform(sys, geometric_psi());
  EquivalenceResult eq = formal_equivalence(result.model.lft, hand.lft);
  if (!eq.equivalent) {
    return {false, "transformed model differs from the hand-built one at word " +
                       word_text(eq.counterexample.value_or(Word{}))};
  }
  if (!is_minimal(result.model.lft).minimal || !is_minimal(hand.lft).minimal) {
    return {false, "expected both closed models to be minimal"};
  }
  auto factors = find_structured_isomorphism(result.model.lft, hand.lft);
  if (!factors) {
    return {false, "no structured similarity between pipeline and hand form"};
  }
  double residual =
      residual_of_isomorphism(result.model.lft, hand.lft, *factors);
  if (residual > kIsomorphismTol) {
    return {false, "similarity residual " + num(residual)};
  }

  const Index horizon = 50;
  std::vector<Vector> u, p;
  for (Index t = 0; t < horizon; ++t) {
    u.push_back(rng.vector(1));
    p.push_back(rng.vector(1, -0.9, 0.9));
  }
  Trajectory plant =
      simulate_falpv(sys, u, p, horizon, evaluator_of(geometric_psi()));
  LoopSimulation loop = simulate_lft_loop(hand, u, p, horizon);
  double worst = 0.0;
  for (Index t = 0; t < horizon; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    worst = std::max(worst,
                     (loop.trajectory.y[ti] - plant.y[ti]).cwiseAbs().maxCoeff());
    Vector expected = plant.x[ti] / (1.0 - 0.5 * p[ti](0));
    worst = std::max(worst, (loop.z[ti] - expected).cwiseAbs().maxCoeff());
  }
  if (worst > kTrajectoryTol) {
    return {false, "loop signal deviates from x/(1-0.5p) by " + num(worst)};
  }
  return {true, "similar to the printed form; max loop deviation " +
                    num(worst)};
}

// ---- criterion 3: trajectory preservation property suite ----

CriterionResult criterion3() {
  Rng rng(303);
  double worst = 0.0;
  for (int instance = 0; instance < 50; ++instance) {
    const Index nx = rng.uniform_int(1, 3);
    const Index nu = rng.uniform_int(1, 3);
    const Index ny = rng.uniform_int(1, 3);
    const Index np = rng.uniform_int(1, 2);
    const Index npsi = rng.uniform_int(1, 2);
    std::vector<Index> sizes;
    if (np == 1) {
      sizes = {static_cast<Index>(rng.uniform_int(1, 2))};
    } else {
      sizes = {1, 1};
    }
    PsiRealization psi = testsupport::random_stable_psi(rng, npsi, sizes);
    FalpvModel sys = testsupport::make_contractive(
        testsupport::random_falpv(rng, nx, nu, ny, np, npsi),
        evaluator_of(psi), rng);

    TransformResult result = transform(sys, psi);
    const Index horizon = 50;
    std::vector<Vector> u, p;
    for (Index t = 0; t < horizon; ++t) {
      u.push_back(rng.vector(nu));
      p.push_back(rng.vector(np));
    }
    Trajectory plant = simulate_falpv(sys, u, p, horizon, evaluator_of(psi));
    LoopSimulation loop = simulate_lft_loop(result.model, u, p, horizon);
    for (Index t = 0; t <= horizon; ++t) {
      const auto ti = static_cast<std::size_t>(t);
      if (t < horizon) {
        worst = std::max(worst, (loop.trajectory.y[ti] - plant.y[ti])
                                    .cwiseAbs()
                                    .maxCoeff());
      }
      worst = std::max(
          worst, (loop.trajectory.x[ti] - plant.x[ti]).cwiseAbs().maxCoeff());
    }
    if (worst > kTrajectoryTol) {
      return {false, "instance " + std::to_string(instance) +
                         " deviates by " + num(worst)};
    }
  }
  return {true, "50 instances, max trajectory deviation " + num(worst)};
}

// ---- criterion 4: minimality and isomorphism preservation ----

CriterionResult criterion4() {
  Rng rng(404);
  double worst_residual = 0.0;
  for (int instance = 0; instance < 30; ++instance) {
    const Index nx = rng.uniform_int(1, 3);
    const Index nu = rng.uniform_int(1, 2);
    const Index ny = rng.uniform_int(1, 2);
    const Index npsi = rng.uniform_int(1, 2);
    std::vector<Index> sizes = {static_cast<Index>(rng.uniform_int(1, 2))};
    PsiRealization psi = testsupport::random_stable_psi(rng, npsi, sizes);
    FalpvModel sys =
        testsupport::random_minimal_falpv(rng, nx, nu, ny, 1, npsi);
    Matrix t = testsupport::well_conditioned_similarity(rng, nx);
    FalpvModel moved = testsupport::apply_similarity(sys, t);

    TransformResult r1 = transform(sys, psi);
    TransformResult r2 = transform(moved, psi);
    EquivalenceResult eq = formal_equivalence(r1.model.lft, r2.model.lft);
    if (!eq.equivalent) {
      return {false, "instance " + std::to_string(instance) +
                         ": transforms of isomorphic plants differ at word " +
                         word_text(eq.counterexample.value_or(Word{}))};
    }
    if (!is_minimal(r1.model.lft).minimal ||
        !is_minimal(r2.model.lft).minimal) {
      return {false, "instance " + std::to_string(instance) +
                         ": transform of a minimal plant is not minimal"};
    }
    auto factors = find_structured_isomorphism(r1.model.lft, r2.model.lft);
    if (!factors) {
      return {false, "instance " + std::to_string(instance) +
                         ": no structured similarity found"};
    }
    double residual =
        residual_of_isomorphism(r1.model.lft, r2.model.lft, *factors);
    worst_residual = std::max(worst_residual, residual);
    if (residual > kIsomorphismTol) {
      return {false, "instance " + std::to_string(instance) +
                         ": similarity residual " + num(residual)};
    }
  }

  for (int instance = 0; instance < 10; ++instance) {
    const Index nx = rng.uniform_int(1, 2);
    const Index npsi = rng.uniform_int(1, 2);
    PsiRealization psi = testsupport::random_stable_psi(
        rng, npsi, {static_cast<Index>(rng.uniform_int(1, 2))});
    FalpvModel sys = testsupport::random_minimal_falpv(rng, nx, 1, 1, 1, npsi);
    FalpvModel padded =
        testsupport::pad_falpv(rng, sys, rng.uniform_int(1, 2));
    TransformResult result = transform(padded, psi);
    if (is_minimal(result.model.lft).minimal) {
      return {false, "padded instance " + std::to_string(instance) +
                         " still reported as minimal"};
    }
  }
  return {true, "30 isomorphic pairs preserved (worst residual " +
                    num(worst_residual) + "); 10 padded plants flagged"};
}

// ---- criterion 5: order-sensitive product contrast ----

CriterionResult criterion5() {
  // Plant shared by both closed forms.
  Matrix a0(2, 2), a1(2, 2), b0(2, 1), c0(1, 2);
  a0 << 1, 0, 0, 0;
  a1 << 1, 0, 2, 1;
  b0 << 0, 1;
  c0 << 1, 0;
  Matrix z22 = Matrix::Zero(2, 2), z21 = Matrix::Zero(2, 1),
         z12 = Matrix::Zero(1, 2), z11 = Matrix::Zero(1, 1);
  FalpvModel plant(2, 1, 1, 2, {a0, a1}, {b0, z21}, {c0, z12}, {z11, z11});
  Matrix t(2, 2);
  t << 1, 2, 3, 4;
  FalpvModel moved = testsupport::apply_similarity(plant, t);

  // First published closed form: product read one way.
  Matrix a_first = Matrix::Zero(4, 4);
  a_first.block(0, 0, 2, 2) = a0;
  a_first.block(0, 2, 2, 2) = a1;
  Matrix f11(2, 2), f12(2, 2);
  f11 << 0, 0, 0, 1;
  f12 << 0, 1, 0, 0;
  a_first.block(2, 0, 2, 2) = f11;
  a_first.block(2, 2, 2, 2) = f12;
  Matrix b_first = Matrix::Zero(4, 1);
  b_first.topRows(2) = b0;
  Matrix c_first = Matrix::Zero(1, 4);
  c_first.leftCols(2) = c0;
  LftModel first(1, 1, BlockStructure({2, 1, 1}), a_first, b_first, c_first,
                 Matrix::Zero(1, 1));

  // Second published closed form: transformed plant, product read the other
  // way (numbers as printed, rounded to the shown digits).
  Matrix f01(2, 2), f11_hat(2, 2), f12_hat(2, 2);
  f01 << 0, -6.3246, 0, -15.8114;
  f11_hat << -0.9487, 0.3162, 0, 0;
  f12_hat << 0, 0, 1, 0;
  Matrix a_second = Matrix::Zero(4, 4);
  a_second.block(0, 0, 2, 2) = t * a0 * t.inverse();
  a_second.block(0, 2, 2, 2) = f01;
  a_second.block(2, 0, 2, 2) = f11_hat;
  a_second.block(2, 2, 2, 2) = f12_hat;
  Matrix b_second = Matrix::Zero(4, 1);
  b_second.topRows(2) = t * b0;
  Matrix c_second = Matrix::Zero(1, 4);
  c_second.leftCols(2) = c0 * t.inverse();
  LftModel second(1, 1, BlockStructure({2, 1, 1}), a_second, b_second,
                  c_second, Matrix::Zero(1, 1));

  EquivalenceResult eq = formal_equivalence(first, second);
  if (eq.equivalent) {
    return {false, "published contrast pair came out formally equivalent"};
  }
  if (!eq.counterexample) {
    return {false, "inequivalence reported without a separating word"};
  }
  const Word separating = *eq.counterexample;
  double gap = max_err(formal_io_map(first, separating),
                       formal_io_map(second, separating));
  if (gap <= 1e-9) {
    return {false, "separating word does not actually separate"};
  }

  // The pipeline with the product supplied as series data is order-robust:
  // the two transforms agree.
  TaylorPsi taylor;
  taylor.series = testsupport::make_series(2, 5, 1, {{{1, 2}, {1.0}}});
  taylor.order_bound = 2;
  TransformResult r1 = transform(plant, taylor);
  TransformResult r2 = transform(moved, taylor);
  EquivalenceResult ours = formal_equivalence(r1.model.lft, r2.model.lft);
  if (!ours.equivalent) {
    return {false, "pipeline outputs for the isomorphic pair differ at word " +
                       word_text(ours.counterexample.value_or(Word{}))};
  }
  return {true, "contrast pair separated at word (" + word_text(separating) +
                    "), gap " + num(gap) + "; pipeline outputs equivalent"};
}

// ---- criterion 6: realization against brute force ----

CriterionResult criterion6() {
  Rng rng(606);
  double worst = 0.0;
  for (int instance = 0; instance < 100; ++instance) {
    const int alphabet = rng.uniform_int(1, 3);
    const Index rows = rng.uniform_int(1, 2);
    const Index cols = rng.uniform_int(1, 2);
    const int support = rng.uniform_int(1, 4);
    TruncatedSeries series = testsupport::random_supported_series(
        rng, alphabet, rows, cols, 2, support, 5);

    LinearRepresentation rep = hankel_realize(series, 2);
    bool ok = true;
    for_each_word(alphabet, 1, 5, [&](const Word& w) {
      double err = max_err(representation_coefficient(rep, w), series.at(w));
      worst = std::max(worst, err);
      if (err > kCoefficientTol) ok = false;
      return ok;
    });
    if (!ok) {
      return {false, "instance " + std::to_string(instance) +
                         " coefficient error " + num(worst)};
    }
  }
  return {true, "100 series realized, worst coefficient error " + num(worst)};
}

// ---- criterion 7: minimization against brute force ----

CriterionResult criterion7() {
  Rng rng(707);
  for (int instance = 0; instance < 100; ++instance) {
    const Index count = rng.uniform_int(1, 3);
    std::vector<Index> sizes = testsupport::random_blocks(rng, count, 3);
    const Index p_out = rng.uniform_int(1, 2);
    const Index m_in = rng.uniform_int(1, 2);
    LftModel input = testsupport::random_lft(rng, sizes, p_out, m_in);
    if (instance % 2 == 0) {
      input = testsupport::pad_lft(rng, input, rng.uniform_int(1, 2),
                                   rng.uniform_int(0, 1) == 1);
    }

    const bool was_minimal = is_minimal(input).minimal;
    MinimizeResult reduced = minimize_lft(input);
    if (reduced.model.dim() > input.dim()) {
      return {false, "instance " + std::to_string(instance) +
                         ": dimension increased"};
    }
    if (was_minimal != (reduced.model.dim() == input.dim())) {
      return {false, "instance " + std::to_string(instance) +
                         ": dimension change disagrees with minimality"};
    }
    if (!is_minimal(reduced.model).minimal) {
      return {false, "instance " + std::to_string(instance) +
                         ": output fails the minimality test"};
    }
    EquivalenceResult eq = formal_equivalence(input, reduced.model);
    if (!eq.equivalent) {
      return {false, "instance " + std::to_string(instance) +
                         ": reduced model differs at word " +
                         word_text(eq.counterexample.value_or(Word{}))};
    }
  }
  return {true, "100 models reduced, equivalence and minimality preserved"};
}

// ---- criterion 8: stability certificates ----

CriterionResult criterion8() {
  auto chain_cert = check_stability(chain_psi().lft);
  if (!chain_cert) return {false, "no certificate for the nilpotent shift"};
  if (std::abs(chain_cert->margin - 1.0) > kMarginTol) {
    return {false, "nilpotent-shift margin " + num(chain_cert->margin) +
                       " instead of 1"};
  }
  if (!verify_certificate(chain_psi().lft, *chain_cert)) {
    return {false, "nilpotent-shift certificate fails re-verification"};
  }

  auto geo_cert = check_stability(geometric_psi().lft);
  if (!geo_cert) return {false, "no certificate for the geometric core"};
  if (std::abs(geo_cert->margin - 0.75) > kMarginTol) {
    return {false, "geometric-core margin " + num(geo_cert->margin) +
                       " instead of 0.75"};
  }
  if (!verify_certificate(geometric_psi().lft, *geo_cert)) {
    return {false, "geometric-core certificate fails re-verification"};
  }

  // Every certificate the search returns must survive the independent
  // eigenvalue check.
  Rng rng(808);
  for (int instance = 0; instance < 20; ++instance) {
    const Index count = rng.uniform_int(1, 3);
    std::vector<Index> sizes = testsupport::random_blocks(rng, count, 3);
    PsiRealization psi = testsupport::random_stable_psi(
        rng, rng.uniform_int(1, 2), sizes);
    auto cert = check_stability(psi.lft);
    if (!cert) {
      return {false, "no certificate for a contractive random model"};
    }
    if (!verify_certificate(psi.lft, *cert)) {
      return {false, "random-model certificate fails re-verification"};
    }
  }
  return {true, "margins 1 and 0.75 reproduced; 22 certificates re-verified"};
}

struct Criterion {
  const char* label;
  std::function<CriterionResult()> run;
  double budget_seconds;  // 0 = no budget stated
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"polynomial-dependence example end to end", criterion1, 1.0},
      {"rational-dependence example end to end", criterion2, 1.0},
      {"trajectory preservation on random instances", criterion3, 30.0},
      {"minimality and isomorphism preservation", criterion4, 60.0},
      {"order-sensitive contrast pair", criterion5, 0.0},
      {"realization vs brute-force coefficients", criterion6, 30.0},
      {"minimization equivalence suite", criterion7, 60.0},
      {"stability certificate margins", criterion8, 0.0},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    CriterionResult result;
    try {
      result = criteria[i].run();
    } catch (const std::exception& e) {
      result = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (result.pass && criteria[i].budget_seconds > 0.0 &&
        seconds > criteria[i].budget_seconds) {
      result.pass = false;
      result.detail += " (exceeded " +
                       std::to_string(criteria[i].budget_seconds) +
                       " s budget)";
    }
    if (!result.pass) ++failures;
    std::printf("[%s] criterion %zu: %s (%.2f s) - %s\n",
                result.pass ? "PASS" : "FAIL", i + 1, criteria[i].label,
                seconds, result.detail.c_str());
  }
  if (failures == 0) {
    std::printf("acceptance: all %zu criteria passed\n", criteria.size());
  } else {
    std::printf("acceptance: %d of %zu criteria FAILED\n", failures,
                criteria.size());
  }
  return failures == 0 ? 0 : 1;
}
