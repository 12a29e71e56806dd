#include "lpvlft/analysis.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>

namespace lpvlft {

namespace {

constexpr double kEquivTol = 1e-9;
constexpr double kIsoTol = 1e-8;

void validate_signals(const std::vector<Vector>& u, const std::vector<Vector>& p,
                      Index horizon, Index nu, Index np) {
  if (horizon < 0) throw ContractError("simulate: negative horizon");
  if (static_cast<Index>(u.size()) < horizon ||
      static_cast<Index>(p.size()) < horizon) {
    throw ContractError("simulate: input/scheduling signals shorter than the "
                        "horizon");
  }
  for (Index t = 0; t < horizon; ++t) {
    if (u[static_cast<size_t>(t)].size() != nu) {
      throw ContractError("simulate: input sample has wrong dimension");
    }
    const Vector& pt = p[static_cast<size_t>(t)];
    if (pt.size() != np) {
      throw ContractError("simulate: scheduling sample has wrong dimension");
    }
    if (pt.size() > 0 && pt.cwiseAbs().maxCoeff() > 1.0 + 1e-12) {
      throw ContractError(
          "simulate: scheduling sample outside the unit box [-1,1]");
    }
  }
}

}  // namespace

PsiEvaluator evaluator_of(const PsiRealization& psi) {
  return [psi](const Vector& point) { return psi.eval(point); };
}

Trajectory simulate_falpv(const FalpvModel& sys, const std::vector<Vector>& u,
                          const std::vector<Vector>& p, Index horizon,
                          const PsiEvaluator& psi) {
  validate_signals(u, p, horizon, sys.nu, sys.np);
  Trajectory out;
  out.horizon = horizon;
  out.u.assign(u.begin(), u.begin() + horizon);
  out.p.assign(p.begin(), p.begin() + horizon);
  out.x.push_back(Vector::Zero(sys.nx));
  for (Index t = 0; t < horizon; ++t) {
    Vector values;
    try {
      values = psi(out.p[static_cast<size_t>(t)]);
    } catch (const WellPosednessError& e) {
      throw WellPosednessError(
          "simulate_falpv: scheduling-function evaluation failed at step " +
              std::to_string(t) + ": " + e.what(),
          e.rcond, t);
    }
    if (values.size() != sys.npsi()) {
      throw ContractError(
          "simulate_falpv: evaluator returned wrong number of values");
    }
    const EvaluatedFalpv mats = eval_falpv_matrices(sys, values);
    const Vector& xt = out.x.back();
    const Vector& ut = out.u[static_cast<size_t>(t)];
    out.y.push_back(mats.C * xt + mats.D * ut);
    out.x.push_back(mats.A * xt + mats.B * ut);
  }
  return out;
}

LoopSimulation simulate_lft_loop(const AssembledLft& m,
                                 const std::vector<Vector>& u,
                                 const std::vector<Vector>& p, Index horizon) {
  validate_signals(u, p, horizon, m.nu, m.np);
  const Index nq = m.psi_dim();
  const BlockStructure psi_blocks = m.psi_blocks();
  const Matrix a0 = m.a0(), hx = m.hx(), gx = m.gx(), core = m.core();
  const Matrix b0 = m.b0(), gu = m.gu(), c0 = m.c0(), hy = m.hy();
  const Matrix d0 = m.lft.D;

  LoopSimulation out;
  out.trajectory.horizon = horizon;
  out.trajectory.u.assign(u.begin(), u.begin() + horizon);
  out.trajectory.p.assign(p.begin(), p.begin() + horizon);
  out.trajectory.x.push_back(Vector::Zero(m.nx));
  for (Index t = 0; t < horizon; ++t) {
    const Vector& xt = out.trajectory.x.back();
    const Vector& ut = out.trajectory.u[static_cast<size_t>(t)];
    Vector z = Vector::Zero(nq);
    Vector w = Vector::Zero(nq);
    if (nq > 0) {
      const Vector scaled = out.trajectory.p[static_cast<size_t>(t)] / m.lambda;
      const Matrix delta = delta_of_point(scaled, psi_blocks);
      const Matrix loop = Matrix::Identity(nq, nq) - core * delta;
      Eigen::FullPivLU<Matrix> lu(loop);
      const double rcond = lu.rcond();
      if (!(rcond > kRcondMin)) {
        throw WellPosednessError(
            "simulate_lft_loop: loop matrix near-singular at step " +
                std::to_string(t),
            rcond, t);
      }
      z = lu.solve(gx * xt + gu * ut);
      w = delta * z;
    }
    out.z.push_back(z);
    out.trajectory.y.push_back(c0 * xt + hy * w + d0 * ut);
    out.trajectory.x.push_back(a0 * xt + hx * w + b0 * ut);
  }
  return out;
}

EquivalenceResult formal_equivalence(const LftModel& m1, const LftModel& m2,
                                     int depth) {
  if (m1.p_out != m2.p_out || m1.m_in != m2.m_in || m1.d() != m2.d()) {
    throw ContractError(
        "formal_equivalence: incompatible signatures (outputs, inputs, or "
        "block counts differ)");
  }
  if (depth < 0) depth = static_cast<int>(m1.dim() + m2.dim());

  EquivalenceResult result;
  if (max_abs(m1.D - m2.D) > kEquivTol) {
    result.equivalent = false;
    result.counterexample = Word{};
    return result;
  }

  const Index d = m1.d();
  const CanonicalPartition p1 = canonical_partition(m1);
  const CanonicalPartition p2 = canonical_partition(m2);

  struct Node {
    Word word;      // last letter names the block the paths live in
    Matrix top;     // [A#B]-style path of m1, n1_block x m_in
    Matrix bottom;  // same path in m2, n2_block x m_in
  };
  // Per-block orthonormal bases of the stacked columns seen so far.
  std::vector<Matrix> bases;
  for (Index i = 0; i < d; ++i) {
    bases.emplace_back(m1.blocks.dim(i) + m2.blocks.dim(i), 0);
  }

  auto retain = [&](Node& node) {
    const auto block = static_cast<size_t>(node.word.back() - 1);
    Matrix stacked(node.top.rows() + node.bottom.rows(),
                   bases[block].cols() + node.top.cols());
    stacked.leftCols(bases[block].cols()) = bases[block];
    stacked.rightCols(node.top.cols()).topRows(node.top.rows()) = node.top;
    stacked.rightCols(node.top.cols()).bottomRows(node.bottom.rows()) =
        node.bottom;
    Matrix grown = orth_basis(stacked);
    if (grown.cols() > bases[block].cols()) {
      bases[block] = std::move(grown);
      return true;
    }
    return false;
  };

  std::vector<Node> frontier;
  for (Index j = 1; j <= d && depth >= 1; ++j) {
    Node node{Word{static_cast<int>(j)}, p1.B[static_cast<size_t>(j - 1)],
              p2.B[static_cast<size_t>(j - 1)]};
    frontier.push_back(std::move(node));
  }

  for (int level = 1; level <= depth && !frontier.empty(); ++level) {
    std::vector<Node> retained;
    for (Node& node : frontier) {
      const auto block = static_cast<size_t>(node.word.back() - 1);
      const Matrix diff = p1.C[block] * node.top - p2.C[block] * node.bottom;
      if (max_abs(diff) > kEquivTol) {
        result.equivalent = false;
        result.counterexample = node.word;
        return result;
      }
      if (retain(node)) retained.push_back(std::move(node));
    }
    frontier.clear();
    if (level == depth) break;
    for (const Node& node : retained) {
      const auto from = static_cast<size_t>(node.word.back() - 1);
      for (Index i = 1; i <= d; ++i) {
        Node next;
        next.word = node.word;
        next.word.push_back(static_cast<int>(i));
        next.top = p1.A[static_cast<size_t>(i - 1)][from] * node.top;
        next.bottom = p2.A[static_cast<size_t>(i - 1)][from] * node.bottom;
        frontier.push_back(std::move(next));
      }
    }
  }
  return result;
}

bool falpv_equivalence(const FalpvModel& s1, const FalpvModel& s2, int depth) {
  if (s1.nu != s2.nu || s1.ny != s2.ny || s1.np != s2.np ||
      s1.npsi() != s2.npsi()) {
    throw ContractError("falpv_equivalence: signature dims differ");
  }
  if (depth < 0) depth = static_cast<int>(s1.nx + s2.nx);

  for (size_t i = 0; i < s1.D.size(); ++i) {
    if (max_abs(s1.D[i] - s2.D[i]) > kEquivTol) return false;
  }

  const Index letters = s1.npsi() + 1;  // constant part is letter 0
  struct Node {
    Matrix top;     // A_v B_j in s1, nx1 x nu
    Matrix bottom;  // same in s2
  };
  Matrix basis(s1.nx + s2.nx, 0);
  auto retain = [&](const Node& node) {
    Matrix stacked(s1.nx + s2.nx, basis.cols() + node.top.cols());
    stacked.leftCols(basis.cols()) = basis;
    stacked.rightCols(node.top.cols()).topRows(s1.nx) = node.top;
    stacked.rightCols(node.top.cols()).bottomRows(s2.nx) = node.bottom;
    Matrix grown = orth_basis(stacked);
    if (grown.cols() > basis.cols()) {
      basis = std::move(grown);
      return true;
    }
    return false;
  };
  auto outputs_match = [&](const Node& node) {
    for (Index i = 0; i < letters; ++i) {
      const Matrix diff = s1.C[static_cast<size_t>(i)] * node.top -
                          s2.C[static_cast<size_t>(i)] * node.bottom;
      if (max_abs(diff) > kEquivTol) return false;
    }
    return true;
  };

  std::vector<Node> frontier;
  for (Index j = 0; j < letters; ++j) {
    frontier.push_back(
        {s1.B[static_cast<size_t>(j)], s2.B[static_cast<size_t>(j)]});
  }
  // Level k checks C_i A_v B_j with |v| = k.
  for (int level = 0; level <= depth && !frontier.empty(); ++level) {
    std::vector<Node> retained;
    for (Node& node : frontier) {
      if (!outputs_match(node)) return false;
      if (retain(node)) retained.push_back(std::move(node));
    }
    frontier.clear();
    if (level == depth) break;
    for (const Node& node : retained) {
      for (Index i = 0; i < letters; ++i) {
        frontier.push_back({s1.A[static_cast<size_t>(i)] * node.top,
                            s2.A[static_cast<size_t>(i)] * node.bottom});
      }
    }
  }
  return true;
}

FalpvMinimality falpv_is_minimal(const FalpvModel& sys) {
  const Index letters = sys.npsi() + 1;

  Matrix reach(sys.nx, 0);
  {
    Index cols = 0;
    for (const Matrix& b : sys.B) cols += b.cols();
    Matrix seed(sys.nx, cols);
    Index at = 0;
    for (const Matrix& b : sys.B) {
      seed.middleCols(at, b.cols()) = b;
      at += b.cols();
    }
    reach = orth_basis(seed);
  }
  for (Index round = 0; round <= sys.nx; ++round) {
    Matrix stacked(sys.nx, reach.cols() * (letters + 1));
    stacked.leftCols(reach.cols()) = reach;
    for (Index i = 0; i < letters; ++i) {
      stacked.middleCols(reach.cols() * (i + 1), reach.cols()) =
          sys.A[static_cast<size_t>(i)] * reach;
    }
    Matrix grown = orth_basis(stacked);
    if (grown.cols() == reach.cols()) break;
    reach = std::move(grown);
  }

  Matrix unobs;
  {
    Index rows = 0;
    for (const Matrix& c : sys.C) rows += c.rows();
    Matrix seed(rows, sys.nx);
    Index at = 0;
    for (const Matrix& c : sys.C) {
      seed.middleRows(at, c.rows()) = c;
      at += c.rows();
    }
    unobs = nullspace_basis(seed);
  }
  for (Index round = 0; round <= sys.nx && unobs.cols() > 0; ++round) {
    Matrix stacked(sys.nx * letters, unobs.cols());
    for (Index i = 0; i < letters; ++i) {
      const Matrix mapped = sys.A[static_cast<size_t>(i)] * unobs;
      stacked.middleRows(sys.nx * i, sys.nx) =
          mapped - unobs * (unobs.transpose() * mapped);
    }
    Matrix keep = nullspace_basis(stacked);
    if (keep.cols() == unobs.cols()) break;
    unobs = unobs * keep;
  }

  FalpvMinimality out;
  out.reach_dim = reach.cols();
  out.obs_dim = sys.nx - unobs.cols();
  out.minimal = out.reach_dim == sys.nx && out.obs_dim == sys.nx;
  return out;
}

std::optional<std::vector<Matrix>> find_structured_isomorphism(
    const LftModel& m1, const LftModel& m2) {
  if (m1.p_out != m2.p_out || m1.m_in != m2.m_in ||
      !(m1.blocks == m2.blocks)) {
    throw ContractError(
        "find_structured_isomorphism: signatures or block structures differ");
  }
  if (!is_minimal(m1).minimal || !is_minimal(m2).minimal) {
    throw ContractError("find_structured_isomorphism: inputs must be minimal");
  }

  const Index d = m1.d();
  const CanonicalPartition p1 = canonical_partition(m1);
  const CanonicalPartition p2 = canonical_partition(m2);

  // Paired reachability columns per block, indexed by the same words.
  std::vector<Matrix> v1, v2;
  for (Index i = 0; i < d; ++i) {
    v1.emplace_back(m1.blocks.dim(i), 0);
    v2.emplace_back(m2.blocks.dim(i), 0);
  }
  struct Node {
    Index block = 0;
    Matrix top, bottom;
  };
  auto absorb = [&](const Node& node) {
    const auto b = static_cast<size_t>(node.block);
    bool grew = false;
    for (Index c = 0; c < node.top.cols(); ++c) {
      Matrix trial(v1[b].rows(), v1[b].cols() + 1);
      trial.leftCols(v1[b].cols()) = v1[b];
      trial.rightCols(1) = node.top.col(c);
      if (numeric_rank(trial) > v1[b].cols()) {
        v1[b] = std::move(trial);
        Matrix paired(v2[b].rows(), v2[b].cols() + 1);
        paired.leftCols(v2[b].cols()) = v2[b];
        paired.rightCols(1) = node.bottom.col(c);
        v2[b] = std::move(paired);
        grew = true;
      }
    }
    return grew;
  };

  std::vector<Node> frontier;
  for (Index j = 0; j < d; ++j) {
    frontier.push_back({j, p1.B[static_cast<size_t>(j)],
                        p2.B[static_cast<size_t>(j)]});
  }
  const Index max_levels = m1.dim() + m2.dim() + 1;
  for (Index level = 0; level < max_levels && !frontier.empty(); ++level) {
    std::vector<Node> retained;
    for (Node& node : frontier) {
      if (absorb(node)) retained.push_back(std::move(node));
    }
    frontier.clear();
    for (const Node& node : retained) {
      for (Index i = 0; i < d; ++i) {
        frontier.push_back({i,
                            p1.A[static_cast<size_t>(i)][static_cast<size_t>(
                                node.block)] *
                                node.top,
                            p2.A[static_cast<size_t>(i)][static_cast<size_t>(
                                node.block)] *
                                node.bottom});
      }
    }
  }

  std::vector<Matrix> maps;
  for (Index i = 0; i < d; ++i) {
    const auto b = static_cast<size_t>(i);
    if (v1[b].cols() != m1.blocks.dim(i)) return std::nullopt;
    if (m1.blocks.dim(i) == 0) {
      maps.emplace_back(0, 0);
      continue;
    }
    Matrix t = v2[b] * v1[b].inverse();
    if (numeric_rank(t) != m1.blocks.dim(i)) return std::nullopt;
    maps.push_back(std::move(t));
  }

  // Verify the three defining identities cellwise.
  for (Index i = 0; i < d; ++i) {
    const auto bi = static_cast<size_t>(i);
    if (max_abs(maps[bi] * p1.B[bi] - p2.B[bi]) > kIsoTol) return std::nullopt;
    if (max_abs(p1.C[bi] - p2.C[bi] * maps[bi]) > kIsoTol) return std::nullopt;
    for (Index j = 0; j < d; ++j) {
      const auto bj = static_cast<size_t>(j);
      if (max_abs(maps[bi] * p1.A[bi][bj] - p2.A[bi][bj] * maps[bj]) > kIsoTol) {
        return std::nullopt;
      }
    }
  }
  return maps;
}

AffineBasis affine_basis_coefficients(const PsiEvaluator& psi, Index npsi,
                                      Index np, std::uint64_t seed) {
  if (npsi < 1 || np < 1) {
    throw ContractError("affine_basis_coefficients: positive dims required");
  }
  Rng rng(seed);
  const Index k = npsi + 1;

  std::vector<Vector> best_points;
  Matrix best_phi;
  double best_cond = std::numeric_limits<double>::infinity();
  for (int candidate = 0; candidate < 200; ++candidate) {
    std::vector<Vector> points;
    Matrix phi(k, k);
    for (Index i = 0; i < k; ++i) {
      points.push_back(rng.vector(np, -1.0, 1.0));
      const Vector values = psi(points.back());
      if (values.size() != npsi) {
        throw ContractError(
            "affine_basis_coefficients: evaluator returned wrong size");
      }
      phi(i, 0) = 1.0;
      phi.row(i).tail(npsi) = values.transpose();
    }
    Eigen::JacobiSVD<Matrix> svd(phi);
    const double smin = svd.singularValues()(k - 1);
    const double cond = smin > 0.0 ? svd.singularValues()(0) / smin
                                   : std::numeric_limits<double>::infinity();
    if (cond < best_cond) {
      best_cond = cond;
      best_phi = phi;
      best_points = std::move(points);
    }
  }
  if (!(best_cond <= 1e8)) {
    throw DependenceError(
        "affine_basis_coefficients: no well-conditioned sample set found "
        "(condition " +
        format_double(best_cond) +
        "); the scheduling functions look affinely dependent");
  }

  AffineBasis out;
  out.points = std::move(best_points);
  out.condition = best_cond;
  out.coefficients.resize(k, npsi);
  Eigen::FullPivLU<Matrix> lu(best_phi.transpose());
  for (Index l = 0; l < npsi; ++l) {
    Vector rhs = Vector::Zero(k);
    rhs(0) = 1.0;
    rhs(l + 1) = 1.0;
    const Vector lambda = lu.solve(rhs);
    if (max_abs(best_phi.transpose() * lambda - rhs) > 1e-8) {
      throw DependenceError(
          "affine_basis_coefficients: residual of the affine system exceeds "
          "tolerance");
    }
    out.coefficients.col(l) = lambda;
  }
  return out;
}

}  // namespace lpvlft
