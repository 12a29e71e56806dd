#include "lpvlft/transform.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <limits>

namespace lpvlft {

Matrix coefficient_block(const FalpvModel& sys, int l) {
  if (l < 0 || l > sys.npsi()) {
    throw ContractError("coefficient_block: function index out of range");
  }
  const auto k = static_cast<size_t>(l);
  Matrix blk(sys.nx + sys.ny, sys.nx + sys.nu);
  blk.topLeftCorner(sys.nx, sys.nx) = sys.A[k];
  blk.topRightCorner(sys.nx, sys.nu) = sys.B[k];
  blk.bottomLeftCorner(sys.ny, sys.nx) = sys.C[k];
  blk.bottomRightCorner(sys.ny, sys.nu) = sys.D[k];
  return blk;
}

Matrix tilde_series(const FalpvModel& sys, const TruncatedSeries& psi_taylor,
                    const Word& w) {
  if (psi_taylor.rows() != sys.npsi() || psi_taylor.cols() != 1) {
    throw ContractError("tilde_series: series must have one column per value "
                        "and one row per scheduling function");
  }
  const Matrix coeff = psi_taylor.at(w);
  Matrix sum = Matrix::Zero(sys.nx + sys.ny, sys.nx + sys.nu);
  for (int l = 1; l <= sys.npsi(); ++l) {
    sum += coeff(l - 1, 0) * coefficient_block(sys, l);
  }
  return sum;
}

namespace {

void require_psi_match(const FalpvModel& sys, const PsiRealization& psi,
                       const char* where) {
  if (psi.npsi() != sys.npsi()) {
    throw ContractError(std::string(where) +
                        ": scheduling-function count mismatch");
  }
  if (psi.np() != sys.np) {
    throw ContractError(std::string(where) +
                        ": scheduling-parameter count mismatch");
  }
}

std::vector<Index> inflate_blocks(const BlockStructure& blocks, Index factor) {
  std::vector<Index> dims;
  for (Index i = 0; i < blocks.count(); ++i) dims.push_back(blocks.dim(i) * factor);
  return dims;
}

}  // namespace

LftModel lift_kron(const FalpvModel& sys, const PsiRealization& psi) {
  require_psi_match(sys, psi, "lift_kron");
  const Index m = sys.nx + sys.nu;
  const Index q = sys.nx + sys.ny;
  const Index n = psi.lft.dim();
  const Matrix eye_m = Matrix::Identity(m, m);

  Matrix big_f(n * m, n * m);
  Matrix big_g(n * m, m);
  Matrix big_h = Matrix::Zero(q, n * m);
  if (n > 0) {
    big_f = Eigen::kroneckerProduct(psi.F(), eye_m);
    big_g = Eigen::kroneckerProduct(psi.G(), eye_m);
    for (int l = 1; l <= sys.npsi(); ++l) {
      big_h += Eigen::kroneckerProduct(psi.H().row(l - 1),
                                       coefficient_block(sys, l));
    }
  } else {
    big_f.resize(0, 0);
    big_g.resize(0, m);
    big_h.resize(q, 0);
  }
  return LftModel(q, m, BlockStructure(inflate_blocks(psi.lft.blocks, m)),
                  std::move(big_f), std::move(big_g), std::move(big_h),
                  Matrix::Zero(q, m));
}

SigmaPsiLft minimal_sigma_psi(const FalpvModel& sys, const PsiRealization& psi) {
  SigmaPsiLft sigma;
  sigma.lft = minimize_lft(lift_kron(sys, psi)).model;
  sigma.nx = sys.nx;
  sigma.nu = sys.nu;
  sigma.ny = sys.ny;
  return sigma;
}

SigmaPsiLft fast_path_factor(const FalpvModel& sys, const PsiRealization& psi,
                             const Matrix& left, const Matrix& right) {
  if (sys.npsi() != 1) {
    throw InvalidFactorError(
        "fast_path_factor: exactly one scheduling function required");
  }
  require_psi_match(sys, psi, "fast_path_factor");
  const Matrix blk = coefficient_block(sys, 1);
  if (left.rows() != blk.rows() || right.cols() != blk.cols() ||
      left.cols() != right.rows()) {
    throw InvalidFactorError("fast_path_factor: factor shapes do not match the "
                             "coefficient block");
  }
  if (max_abs(blk - left * right) > 1e-10 * std::max(1.0, max_abs(blk))) {
    throw InvalidFactorError(
        "fast_path_factor: factorization residual exceeds tolerance");
  }
  if (numeric_rank(left) != left.cols()) {
    throw InvalidFactorError(
        "fast_path_factor: left factor must have full column rank");
  }

  const Index m = left.cols();
  const Index n = psi.lft.dim();
  Matrix big_f(n * m, n * m);
  Matrix big_g(n * m, right.cols());
  Matrix big_h(left.rows(), n * m);
  if (n > 0 && m > 0) {
    big_f = Eigen::kroneckerProduct(psi.F(), Matrix::Identity(m, m));
    big_g = Eigen::kroneckerProduct(psi.G(), right);
    big_h = Eigen::kroneckerProduct(psi.H(), left);
  } else {
    big_f = Matrix::Zero(n * m, n * m);
    big_g = Matrix::Zero(n * m, blk.cols());
    big_h = Matrix::Zero(blk.rows(), n * m);
  }
  SigmaPsiLft sigma;
  sigma.lft = LftModel(blk.rows(), blk.cols(),
                       BlockStructure(inflate_blocks(psi.lft.blocks, m)),
                       std::move(big_f), std::move(big_g), std::move(big_h),
                       Matrix::Zero(blk.rows(), blk.cols()));
  sigma.nx = sys.nx;
  sigma.nu = sys.nu;
  sigma.ny = sys.ny;
  return sigma;
}

std::pair<Matrix, Matrix> default_coefficient_factor(const FalpvModel& sys) {
  if (sys.npsi() != 1) {
    throw InvalidFactorError(
        "default_coefficient_factor: exactly one scheduling function required");
  }
  const Matrix blk = coefficient_block(sys, 1);
  const bool only_a = max_abs(sys.B[1]) == 0.0 && max_abs(sys.C[1]) == 0.0 &&
                      max_abs(sys.D[1]) == 0.0;
  if (only_a && sys.nx > 0 && numeric_rank(sys.A[1]) == sys.nx) {
    Matrix left = Matrix::Zero(sys.nx + sys.ny, sys.nx);
    left.topRows(sys.nx) = sys.A[1];
    Matrix right = Matrix::Zero(sys.nx, sys.nx + sys.nu);
    right.leftCols(sys.nx) = Matrix::Identity(sys.nx, sys.nx);
    return {left, right};
  }
  if (numeric_rank(blk) == blk.cols()) {
    return {blk, Matrix::Identity(blk.cols(), blk.cols())};
  }
  Eigen::BDCSVD<Matrix> svd(blk, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double tol = rank_threshold(blk.rows(), blk.cols(), sv);
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > tol) ++rank;
  Matrix left = svd.matrixU().leftCols(rank) * sv.head(rank).asDiagonal();
  Matrix right = svd.matrixV().leftCols(rank).transpose();
  return {left, right};
}

BlockStructure AssembledLft::psi_blocks() const {
  std::vector<Index> dims = lft.blocks.dims();
  dims.erase(dims.begin());
  if (dims.empty()) dims.push_back(0);
  return BlockStructure(dims);
}

AssembledLft assemble(const FalpvModel& sys, const SigmaPsiLft& sigma,
                      double lambda) {
  if (sigma.nx != sys.nx || sigma.nu != sys.nu || sigma.ny != sys.ny) {
    throw ContractError("assemble: lifted part does not match the plant dims");
  }
  if (sigma.lft.p_out != sys.nx + sys.ny || sigma.lft.m_in != sys.nx + sys.nu) {
    throw ContractError("assemble: lifted part has wrong external dimensions");
  }
  if (sigma.lft.d() != sys.np) {
    throw ContractError("assemble: lifted part must have one block per "
                        "scheduling parameter");
  }
  const Index nx = sys.nx, nq = sigma.lft.dim();

  Matrix big_a(nx + nq, nx + nq);
  big_a.topLeftCorner(nx, nx) = sys.A[0];
  big_a.topRightCorner(nx, nq) = sigma.hx();
  big_a.bottomLeftCorner(nq, nx) = sigma.gx();
  big_a.bottomRightCorner(nq, nq) = sigma.lft.A;

  Matrix big_b(nx + nq, sys.nu);
  big_b.topRows(nx) = sys.B[0];
  big_b.bottomRows(nq) = sigma.gu();

  Matrix big_c(sys.ny, nx + nq);
  big_c.leftCols(nx) = sys.C[0];
  big_c.rightCols(nq) = sigma.hy();

  std::vector<Index> dims{nx};
  for (Index i = 0; i < sigma.lft.d(); ++i) dims.push_back(sigma.lft.blocks.dim(i));

  AssembledLft out;
  out.lft = LftModel(sys.ny, sys.nu, BlockStructure(dims), std::move(big_a),
                     std::move(big_b), std::move(big_c), sys.D[0]);
  out.nx = sys.nx;
  out.nu = sys.nu;
  out.ny = sys.ny;
  out.np = sys.np;
  out.lambda = lambda;
  return out;
}

TransformResult transform(const FalpvModel& sys, const PsiSource& psi_source,
                          const TransformOptions& options) {
  TransformResult result;
  TransformReport& report = result.report;

  // Obtain a stable realization of the scheduling functions.
  if (sys.npsi() == 0) {
    // Constant coefficients: the scheduling channel is empty, whatever the
    // supplied source says.
    result.psi = PsiRealization(LftModel(
        0, 1, BlockStructure(std::vector<Index>(static_cast<std::size_t>(sys.np), 0)),
        Matrix::Zero(0, 0), Matrix::Zero(0, 1), Matrix::Zero(0, 0),
        Matrix::Zero(0, 1)));
    report.lambda = 1.0;
    report.psi_stability_margin = std::numeric_limits<double>::infinity();
  } else if (const auto* taylor = std::get_if<TaylorPsi>(&psi_source)) {
    if (taylor->series.alphabet() != sys.np) {
      throw ContractError("transform: series alphabet must match the number "
                          "of scheduling parameters");
    }
    PsiRealizeResult realized = realize_psi(taylor->series, taylor->order_bound);
    result.psi = std::move(realized.model);
    report.lambda = realized.lambda;
    report.psi_stability_margin = realized.stability_margin;
  } else {
    const auto& given = std::get<PsiRealization>(psi_source);
    require_psi_match(sys, given, "transform");
    if (auto cert = check_stability(given.lft)) {
      result.psi = given;
      report.lambda = 1.0;
      report.psi_stability_margin = cert->margin;
    } else {
      ScaledPsi scaled = stabilize_scale(given);
      auto rescued = check_stability(scaled.model.lft);
      if (!rescued) {
        throw RecognizabilityError(
            "transform: no stability certificate found for the supplied "
            "realization, even after argument scaling");
      }
      result.psi = std::move(scaled.model);
      report.lambda = scaled.lambda;
      report.psi_stability_margin = rescued->margin;
    }
  }
  require_psi_match(sys, result.psi, "transform");
  report.psi_dim = result.psi.lft.dim();

  // Lift the coefficient dependence, then reduce.
  LftModel lifted = [&] {
    if (!options.fast_path) return lift_kron(sys, result.psi);
    auto [left, right] = default_coefficient_factor(sys);
    return fast_path_factor(sys, result.psi, left, right).lft;
  }();
  report.fast_path = options.fast_path;
  report.lifted_dim = lifted.dim();

  SigmaPsiLft sigma;
  sigma.lft = minimize_lft(lifted).model;
  sigma.nx = sys.nx;
  sigma.nu = sys.nu;
  sigma.ny = sys.ny;
  report.sigma_psi_dim = sigma.lft.dim();
  report.sigma_psi_minimal = is_minimal(sigma.lft).minimal;
  report.psi_block_dims = sigma.lft.blocks.dims();
  if (auto cert = check_stability(sigma.lft)) {
    report.sigma_psi_stable = true;
    report.sigma_psi_margin = cert->margin;
  }

  // Formal-series check of the reduced parameter channel.
  report.check_depth =
      options.check_depth >= 0
          ? options.check_depth
          : static_cast<int>(
                std::min<Index>(5, report.lifted_dim + report.sigma_psi_dim));
  {
    const TruncatedSeries psi_series =
        series_of_lft(result.psi.lft, report.check_depth);
    const TruncatedSeries sigma_series =
        series_of_lft(sigma.lft, report.check_depth);
    double err = max_abs(sigma.lft.D);
    for_each_word(sys.np, 1, report.check_depth, [&](const Word& w) {
      err = std::max(err,
                     max_abs(sigma_series.at(w) - tilde_series(sys, psi_series, w)));
      return true;
    });
    report.max_series_error = err;
  }

  // Pointwise check of the parameter-block identity at random points.
  report.pointwise_trials = options.pointwise_trials;
  report.seed = options.seed;
  {
    Rng rng(options.seed);
    double err = 0.0;
    for (int trial = 0; trial < options.pointwise_trials; ++trial) {
      const Vector point = rng.vector(sys.np, -1.0, 1.0);
      const Vector values = result.psi.eval(point);
      Matrix expected = Matrix::Zero(sys.nx + sys.ny, sys.nx + sys.nu);
      for (int l = 1; l <= sys.npsi(); ++l) {
        expected += values(l - 1) * coefficient_block(sys, l);
      }
      const Matrix actual =
          star_product(sigma.lft, delta_of_point(point, sigma.lft.blocks));
      err = std::max(err, max_abs(actual - expected));
    }
    report.max_pointwise_error = err;
  }

  result.model = assemble(sys, sigma, report.lambda);
  report.assembled_minimal = is_minimal(result.model.lft).minimal;
  return result;
}

}  // namespace lpvlft
