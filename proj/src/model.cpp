#include "lpvlft/model.hpp"

#include <numeric>
#include <sstream>

namespace lpvlft {

namespace {

std::string shape_str(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractError(msg);
}

}  // namespace

// --- words ------------------------------------------------------------------

void validate_word(const Word& w, int alphabet) {
  for (int letter : w) {
    if (letter < 1 || letter > alphabet) {
      std::ostringstream os;
      os << "validate_word: letter " << letter << " outside alphabet {1.."
         << alphabet << "}";
      throw AlphabetError(os.str());
    }
  }
}

Word shift_letters(const Word& w, int offset) {
  Word out = w;
  for (int& letter : out) letter += offset;
  return out;
}

bool for_each_word(int alphabet, int min_len, int max_len,
                   const std::function<bool(const Word&)>& fn) {
  if (alphabet < 1) throw ContractError("for_each_word: alphabet must be >= 1");
  for (int len = min_len; len <= max_len; ++len) {
    Word w(static_cast<size_t>(len), 1);
    while (true) {
      if (!fn(w)) return false;
      int pos = len - 1;
      while (pos >= 0 && w[static_cast<size_t>(pos)] == alphabet) {
        w[static_cast<size_t>(pos)] = 1;
        --pos;
      }
      if (pos < 0) break;
      ++w[static_cast<size_t>(pos)];
    }
  }
  return true;
}

// --- block structures ---------------------------------------------------------

BlockStructure::BlockStructure(std::vector<Index> dims) : dims_(std::move(dims)) {
  require(!dims_.empty(), "BlockStructure: at least one block required");
  offsets_.reserve(dims_.size());
  for (Index n : dims_) {
    require(n >= 0, "BlockStructure: negative block size");
    offsets_.push_back(total_);
    total_ += n;
  }
}

Matrix delta_of_point(const Vector& point, const BlockStructure& blocks) {
  require(point.size() == blocks.count(),
          "delta_of_point: point length does not match block count");
  Matrix delta = Matrix::Zero(blocks.total(), blocks.total());
  for (Index i = 0; i < blocks.count(); ++i) {
    delta.block(blocks.offset(i), blocks.offset(i), blocks.dim(i), blocks.dim(i)) =
        point(i) * Matrix::Identity(blocks.dim(i), blocks.dim(i));
  }
  return delta;
}

// --- FALPV -------------------------------------------------------------------

FalpvModel::FalpvModel(Index nx_in, Index nu_in, Index ny_in, Index np_in,
                       std::vector<Matrix> a, std::vector<Matrix> b,
                       std::vector<Matrix> c, std::vector<Matrix> d)
    : nx(nx_in), nu(nu_in), ny(ny_in), np(np_in), A(std::move(a)),
      B(std::move(b)), C(std::move(c)), D(std::move(d)) {
  require(nx >= 1 && nu >= 1 && ny >= 1 && np >= 1,
          "FalpvModel: all dimensions must be >= 1");
  require(!A.empty() && A.size() == B.size() && A.size() == C.size() &&
              A.size() == D.size(),
          "FalpvModel: coefficient families must share one length >= 1");
  for (size_t l = 0; l < A.size(); ++l) {
    require(A[l].rows() == nx && A[l].cols() == nx,
            "FalpvModel: A[" + std::to_string(l) + "] is " + shape_str(A[l]));
    require(B[l].rows() == nx && B[l].cols() == nu,
            "FalpvModel: B[" + std::to_string(l) + "] is " + shape_str(B[l]));
    require(C[l].rows() == ny && C[l].cols() == nx,
            "FalpvModel: C[" + std::to_string(l) + "] is " + shape_str(C[l]));
    require(D[l].rows() == ny && D[l].cols() == nu,
            "FalpvModel: D[" + std::to_string(l) + "] is " + shape_str(D[l]));
  }
}

EvaluatedFalpv eval_falpv_matrices(const FalpvModel& model, const Vector& psi_values) {
  require(psi_values.size() == model.npsi(),
          "eval_falpv_matrices: psi value count does not match the model");
  EvaluatedFalpv out{model.A[0], model.B[0], model.C[0], model.D[0]};
  for (Index l = 1; l <= model.npsi(); ++l) {
    const double v = psi_values(l - 1);
    out.A += v * model.A[static_cast<size_t>(l)];
    out.B += v * model.B[static_cast<size_t>(l)];
    out.C += v * model.C[static_cast<size_t>(l)];
    out.D += v * model.D[static_cast<size_t>(l)];
  }
  return out;
}

// --- LFT ---------------------------------------------------------------------

LftModel::LftModel(Index p_out_in, Index m_in_in, BlockStructure blocks_in,
                   Matrix a, Matrix b, Matrix c, Matrix d)
    : p_out(p_out_in), m_in(m_in_in), blocks(std::move(blocks_in)),
      A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
  require(p_out >= 0 && m_in >= 0, "LftModel: negative signal dimension");
  const Index n = blocks.total();
  require(A.rows() == n && A.cols() == n, "LftModel: A is " + shape_str(A));
  require(B.rows() == n && B.cols() == m_in, "LftModel: B is " + shape_str(B));
  require(C.rows() == p_out && C.cols() == n, "LftModel: C is " + shape_str(C));
  require(D.rows() == p_out && D.cols() == m_in, "LftModel: D is " + shape_str(D));
}

namespace {

void check_block_index(const LftModel& m, Index i) {
  if (i < 1 || i > m.d()) {
    throw AlphabetError("LftModel: block index " + std::to_string(i) +
                        " outside {1.." + std::to_string(m.d()) + "}");
  }
}

}  // namespace

Matrix LftModel::a_cell(Index i, Index j) const {
  check_block_index(*this, i);
  check_block_index(*this, j);
  return A.block(blocks.offset(i - 1), blocks.offset(j - 1), blocks.dim(i - 1),
                 blocks.dim(j - 1));
}

Matrix LftModel::b_cell(Index j) const {
  check_block_index(*this, j);
  return B.middleRows(blocks.offset(j - 1), blocks.dim(j - 1));
}

Matrix LftModel::c_cell(Index i) const {
  check_block_index(*this, i);
  return C.middleCols(blocks.offset(i - 1), blocks.dim(i - 1));
}

CanonicalPartition canonical_partition(const LftModel& m) {
  CanonicalPartition part;
  const Index d = m.d();
  part.A.resize(static_cast<size_t>(d));
  for (Index i = 1; i <= d; ++i) {
    part.A[static_cast<size_t>(i - 1)].reserve(static_cast<size_t>(d));
    for (Index j = 1; j <= d; ++j) {
      part.A[static_cast<size_t>(i - 1)].push_back(m.a_cell(i, j));
    }
    part.B.push_back(m.b_cell(i));
    part.C.push_back(m.c_cell(i));
  }
  return part;
}

Matrix formal_io_map(const LftModel& m, const Word& nu) {
  validate_word(nu, static_cast<int>(m.d()));
  if (nu.empty()) return m.D;
  const Index first = nu.front();
  Matrix acc = m.b_cell(first);  // n_{i_1} x m_in
  for (size_t k = 1; k < nu.size(); ++k) {
    acc = m.a_cell(nu[k], nu[k - 1]) * acc;
  }
  return m.c_cell(nu.back()) * acc;
}

WordProducts word_products(const LftModel& m, const Word& nu) {
  validate_word(nu, static_cast<int>(m.d()));
  if (nu.empty()) throw ContractError("word_products: empty word");
  const Index n_first = m.blocks.dim(nu.front() - 1);
  Matrix a = Matrix::Identity(n_first, n_first);
  for (size_t k = 1; k < nu.size(); ++k) {
    a = m.a_cell(nu[k], nu[k - 1]) * a;
  }
  WordProducts out;
  out.a = a;
  out.ab = a * m.b_cell(nu.front());
  out.ca = m.c_cell(nu.back()) * a;
  out.cab = m.c_cell(nu.back()) * out.ab;
  return out;
}

TruncatedSeries series_of_lft(const LftModel& m, int depth) {
  if (depth < 0) throw ContractError("series_of_lft: negative depth");
  TruncatedSeries series(static_cast<int>(m.d()), depth, m.p_out, m.m_in);
  series.set(Word{}, m.D);
  // Breadth-first accumulation of A-products times B reuses the shared
  // prefixes instead of recomputing every word from scratch.
  struct Node {
    Word word;
    Matrix ab;  // [A # B]_word
  };
  std::vector<Node> level;
  for (Index j = 1; j <= m.d(); ++j) {
    level.push_back({Word{static_cast<int>(j)}, m.b_cell(j)});
  }
  for (int len = 1; len <= depth; ++len) {
    std::vector<Node> next;
    for (const Node& node : level) {
      series.set(node.word, m.c_cell(node.word.back()) * node.ab);
      if (len == depth) continue;
      for (Index i = 1; i <= m.d(); ++i) {
        Word w = node.word;
        w.push_back(static_cast<int>(i));
        next.push_back({std::move(w), m.a_cell(i, node.word.back()) * node.ab});
      }
    }
    level = std::move(next);
  }
  return series;
}

Matrix star_product(const LftModel& m, const Matrix& delta) {
  const Index n = m.dim();
  require(delta.rows() == n && delta.cols() == n,
          "star_product: Delta is " + shape_str(delta) + ", expected " +
              std::to_string(n) + "x" + std::to_string(n));
  if (n == 0) return m.D;
  const Matrix loop = Matrix::Identity(n, n) - m.A * delta;
  Eigen::FullPivLU<Matrix> lu(loop);
  const double rcond = lu.rcond();
  if (!(rcond > kRcondMin)) {
    throw WellPosednessError(
        "star_product: I - A*Delta is numerically singular (rcond " +
            format_double(rcond) + ")",
        rcond);
  }
  return m.D + m.C * delta * lu.solve(m.B);
}

// --- psi realizations ---------------------------------------------------------

PsiRealization::PsiRealization(LftModel m) : lft(std::move(m)) {
  require(lft.m_in == 1, "PsiRealization: G must have exactly one column");
  require(max_abs(lft.D) == 0.0, "PsiRealization: D must be zero");
}

Vector PsiRealization::eval(const Vector& point) const {
  return star_product(lft, delta_of_point(point, lft.blocks));
}

// --- truncated series ----------------------------------------------------------

TruncatedSeries::TruncatedSeries(int alphabet, int depth, Index rows, Index cols)
    : alphabet_(alphabet), depth_(depth), rows_(rows), cols_(cols) {
  require(alphabet_ >= 1, "TruncatedSeries: alphabet must be >= 1");
  require(depth_ >= 0, "TruncatedSeries: negative depth");
  require(rows_ >= 0 && cols_ >= 0, "TruncatedSeries: negative shape");
}

void TruncatedSeries::set(const Word& w, Matrix value) {
  validate_word(w, alphabet_);
  require(static_cast<int>(w.size()) <= depth_,
          "TruncatedSeries::set: word longer than the truncation depth");
  require(value.rows() == rows_ && value.cols() == cols_,
          "TruncatedSeries::set: coefficient is " + shape_str(value) +
              ", expected " + std::to_string(rows_) + "x" + std::to_string(cols_));
  coeffs_[w] = std::move(value);
}

Matrix TruncatedSeries::at(const Word& w) const {
  validate_word(w, alphabet_);
  require(static_cast<int>(w.size()) <= depth_,
          "TruncatedSeries::at: word longer than the truncation depth");
  auto it = coeffs_.find(w);
  if (it == coeffs_.end()) return Matrix::Zero(rows_, cols_);
  return it->second;
}

}  // namespace lpvlft
