#include "lpvlft/numeric.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace lpvlft {

double max_abs(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

double rank_threshold(Index rows, Index cols, const Vector& singular_values) {
  const double sigma_max = singular_values.size() > 0 ? singular_values(0) : 0.0;
  return static_cast<double>(std::max(rows, cols)) * sigma_max * kRankRelTol;
}

namespace {

Index rank_from_svd(const Matrix& m, const Eigen::JacobiSVD<Matrix>& svd) {
  const Vector& sv = svd.singularValues();
  const double tol = rank_threshold(m.rows(), m.cols(), sv);
  Index r = 0;
  while (r < sv.size() && sv(r) > tol) ++r;
  return r;
}

}  // namespace

Index numeric_rank(const Matrix& m) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return rank_from_svd(m, svd);
}

Matrix orth_basis(const Matrix& m) {
  if (m.size() == 0) return Matrix(m.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
  const Index r = rank_from_svd(m, svd);
  return svd.matrixU().leftCols(r);
}

Matrix nullspace_basis(const Matrix& m) {
  if (m.rows() == 0) return Matrix::Identity(m.cols(), m.cols());
  if (m.cols() == 0) return Matrix(0, 0);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const Index r = rank_from_svd(m, svd);
  return svd.matrixV().rightCols(m.cols() - r);
}

Matrix pseudo_inverse(const Matrix& m) {
  if (m.size() == 0) return Matrix(m.cols(), m.rows());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double tol = rank_threshold(m.rows(), m.cols(), sv);
  Vector inv = Vector::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

bool solve_discrete_lyapunov(const Matrix& a, const Matrix& q, Matrix& p) {
  const Index n = a.rows();
  if (a.cols() != n || q.rows() != n || q.cols() != n) return false;
  if (n == 0) {
    p = Matrix(0, 0);
    return true;
  }
  // P = sum_k (A^T)^k Q A^k.  Each pass doubles the number of summed terms.
  Matrix sum = q;
  Matrix power = a;
  for (int it = 0; it < 128; ++it) {
    Matrix delta = power.transpose() * sum * power;
    if (!delta.allFinite()) return false;
    sum += delta;
    if (max_abs(sum) > 1e14) return false;
    if (max_abs(delta) <= 1e-16 * std::max(1.0, max_abs(sum))) {
      p = 0.5 * (sum + sum.transpose());
      return true;
    }
    power = power * power;
    if (!power.allFinite()) return false;
  }
  return false;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v,
                           std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

bool parse_double(const std::string& text, double& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

Rng::Rng(std::uint64_t seed) : state_(seed + 0x9e3779b97f4a7c15ull) {}

std::uint64_t Rng::next_u64() {
  // splitmix64
  state_ += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double Rng::uniform(double lo, double hi) {
  const double unit = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  return lo + unit * (hi - lo);
}

int Rng::uniform_int(int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(next_u64() % span);
}

Matrix Rng::matrix(Index rows, Index cols, double lo, double hi) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = uniform(lo, hi);
  return m;
}

Vector Rng::vector(Index n, double lo, double hi) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = uniform(lo, hi);
  return v;
}

}  // namespace lpvlft
