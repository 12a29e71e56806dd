#include "lpvlft/model_io.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lpvlft/numeric.hpp"

namespace lpvlft {

namespace {

// ---- writing helpers ----

void emit_description(std::string& out, const std::string& description) {
  if (description.empty()) return;
  std::string line;
  std::istringstream in(description);
  while (std::getline(in, line)) out += "# " + line + "\n";
}

void emit_matrix(std::string& out, const std::string& name, const Matrix& m) {
  out += "matrix " + name + " " + std::to_string(m.rows()) + " " +
         std::to_string(m.cols()) + "\n";
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out += " ";
      out += format_double(m(r, c));
    }
    if (m.cols() > 0) out += "\n";
  }
}

Matrix rows_matrix(const std::vector<Vector>& rows, Index cols) {
  Matrix m(static_cast<Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    m.row(static_cast<Index>(i)) = rows[i].transpose();
  return m;
}

std::vector<Vector> unpack_rows(const Matrix& m) {
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(m.rows()));
  for (Index r = 0; r < m.rows(); ++r) out.push_back(m.row(r).transpose());
  return out;
}

std::string word_label(const Word& word) {
  if (word.empty()) return "eps";
  std::string out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(word[i]);
  }
  return out;
}

// ---- reading helpers ----

class Reader {
 public:
  explicit Reader(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
      ++number;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      std::istringstream fields(line);
      std::vector<std::string> tokens;
      std::string token;
      while (fields >> token) tokens.push_back(token);
      if (tokens.empty()) continue;
      lines_.push_back(std::move(tokens));
      numbers_.push_back(number);
    }
  }

  bool done() const { return cursor_ >= lines_.size(); }

  const std::vector<std::string>& peek() const {
    if (done()) fail("unexpected end of file");
    return lines_[cursor_];
  }

  std::vector<std::string> take() {
    auto tokens = peek();
    ++cursor_;
    return tokens;
  }

  [[noreturn]] void fail(const std::string& what) const {
    int line = cursor_ < numbers_.size() ? numbers_[cursor_]
               : numbers_.empty()        ? 0
                                         : numbers_.back();
    throw ParseError("line " + std::to_string(line) + ": " + what);
  }

  double number(const std::string& token) const {
    double value = 0.0;
    if (!parse_double(token, value)) fail("malformed number '" + token + "'");
    return value;
  }

  Index integer(const std::string& token) const {
    try {
      std::size_t used = 0;
      long long value = std::stoll(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      return static_cast<Index>(value);
    } catch (const std::exception&) {
      fail("malformed integer '" + token + "'");
    }
  }

  // Consumes `key v1 v2 ...` with exactly `count` integer values.
  std::vector<Index> keyword_ints(const std::string& key, std::size_t count) {
    auto tokens = take();
    if (tokens[0] != key || tokens.size() != count + 1)
      fail("expected '" + key + "' with " + std::to_string(count) +
           " value(s)");
    std::vector<Index> out;
    for (std::size_t i = 1; i < tokens.size(); ++i)
      out.push_back(integer(tokens[i]));
    return out;
  }

  bool next_is(const std::string& key) const {
    return !done() && peek()[0] == key;
  }

  Matrix matrix(const std::string& expected_name) {
    auto head = take();
    if (head.size() != 4 || head[0] != "matrix")
      fail("expected 'matrix NAME rows cols'");
    if (head[1] != expected_name)
      fail("expected matrix '" + expected_name + "', found '" + head[1] + "'");
    Index rows = integer(head[2]);
    Index cols = integer(head[3]);
    if (rows < 0 || cols < 0) fail("matrix dimensions must be nonnegative");
    Matrix m(rows, cols);
    if (cols == 0) return m;
    for (Index r = 0; r < rows; ++r) {
      auto row = take();
      if (static_cast<Index>(row.size()) != cols)
        fail("matrix row has " + std::to_string(row.size()) +
             " entries, expected " + std::to_string(cols));
      for (Index c = 0; c < cols; ++c) m(r, c) = number(row[c]);
    }
    return m;
  }

  void expect_end() {
    auto tokens = take();
    if (tokens.size() != 1 || tokens[0] != "end") fail("expected 'end'");
    if (!done()) fail("unexpected content after 'end'");
  }

  std::string header() {
    auto tokens = take();
    if (tokens.size() != 2 || tokens[0] != "lpvlft")
      fail("expected header 'lpvlft <kind>'");
    return tokens[1];
  }

  void expect_header(const std::string& kind) {
    std::string found = header();
    if (found != kind)
      fail("expected kind '" + kind + "', found '" + found + "'");
  }

 private:
  std::vector<std::vector<std::string>> lines_;
  std::vector<int> numbers_;
  std::size_t cursor_ = 0;
};

}  // namespace

std::string load_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void save_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw ParseError("failed writing '" + path + "'");
}

std::string model_kind(const std::string& text) {
  Reader reader(text);
  return reader.header();
}

// ---- falpv ----

std::string serialize_falpv(const FalpvModel& sys,
                            const std::string& description) {
  std::string out = "lpvlft falpv\n";
  emit_description(out, description);
  out += "dims " + std::to_string(sys.nx) + " " + std::to_string(sys.nu) +
         " " + std::to_string(sys.ny) + " " + std::to_string(sys.np) + " " +
         std::to_string(sys.npsi()) + "\n";
  for (std::size_t l = 0; l < sys.A.size(); ++l) {
    const std::string tag = std::to_string(l);
    emit_matrix(out, "A" + tag, sys.A[l]);
    emit_matrix(out, "B" + tag, sys.B[l]);
    emit_matrix(out, "C" + tag, sys.C[l]);
    emit_matrix(out, "D" + tag, sys.D[l]);
  }
  out += "end\n";
  return out;
}

FalpvModel parse_falpv(const std::string& text) {
  Reader reader(text);
  reader.expect_header("falpv");
  auto dims = reader.keyword_ints("dims", 5);
  Index nx = dims[0], nu = dims[1], ny = dims[2], np = dims[3],
        npsi = dims[4];
  if (nx < 0 || nu < 0 || ny < 0 || np < 0 || npsi < 0)
    reader.fail("dims must be nonnegative");
  std::vector<Matrix> a, b, c, d;
  for (Index l = 0; l <= npsi; ++l) {
    const std::string tag = std::to_string(l);
    a.push_back(reader.matrix("A" + tag));
    b.push_back(reader.matrix("B" + tag));
    c.push_back(reader.matrix("C" + tag));
    d.push_back(reader.matrix("D" + tag));
  }
  reader.expect_end();
  try {
    return FalpvModel(nx, nu, ny, np, std::move(a), std::move(b),
                      std::move(c), std::move(d));
  } catch (const ContractError& err) {
    throw ParseError(std::string("inconsistent model data: ") + err.what());
  }
}

// ---- lft ----

namespace {

std::string serialize_lft_body(const LftModel& model,
                               const AssembledLft* assembled,
                               const std::string& description) {
  std::string out = "lpvlft lft\n";
  emit_description(out, description);
  out += "dims " + std::to_string(model.p_out) + " " +
         std::to_string(model.m_in) + "\n";
  out += "blocks " + std::to_string(model.d());
  for (Index n : model.blocks.dims()) out += " " + std::to_string(n);
  out += "\n";
  if (assembled != nullptr) {
    out += "assembled " + std::to_string(assembled->nx) + " " +
           std::to_string(assembled->nu) + " " + std::to_string(assembled->ny) +
           " " + std::to_string(assembled->np) + "\n";
    out += "lambda " + format_double(assembled->lambda) + "\n";
  }
  emit_matrix(out, "A", model.A);
  emit_matrix(out, "B", model.B);
  emit_matrix(out, "C", model.C);
  emit_matrix(out, "D", model.D);
  out += "end\n";
  return out;
}

}  // namespace

std::string serialize_lft(const LftModel& model,
                          const std::string& description) {
  return serialize_lft_body(model, nullptr, description);
}

std::string serialize_assembled(const AssembledLft& model,
                                const std::string& description) {
  return serialize_lft_body(model.lft, &model, description);
}

LoadedLft parse_lft(const std::string& text) {
  Reader reader(text);
  reader.expect_header("lft");
  auto dims = reader.keyword_ints("dims", 2);
  auto block_head = reader.take();
  if (block_head.size() < 2 || block_head[0] != "blocks")
    reader.fail("expected 'blocks k n1 ... nk'");
  Index count = reader.integer(block_head[1]);
  if (static_cast<Index>(block_head.size()) != count + 2)
    reader.fail("block count does not match the number of sizes");
  std::vector<Index> sizes;
  for (Index i = 0; i < count; ++i)
    sizes.push_back(reader.integer(block_head[static_cast<std::size_t>(i) + 2]));

  bool has_assembled = false;
  Index nx = 0, nu = 0, ny = 0, np = 0;
  double lambda = 1.0;
  while (reader.next_is("assembled") || reader.next_is("lambda")) {
    auto tokens = reader.take();
    if (tokens[0] == "assembled") {
      if (tokens.size() != 5)
        reader.fail("expected 'assembled nx nu ny np'");
      has_assembled = true;
      nx = reader.integer(tokens[1]);
      nu = reader.integer(tokens[2]);
      ny = reader.integer(tokens[3]);
      np = reader.integer(tokens[4]);
    } else {
      if (tokens.size() != 2) reader.fail("expected 'lambda value'");
      lambda = reader.number(tokens[1]);
    }
  }

  Matrix a = reader.matrix("A");
  Matrix b = reader.matrix("B");
  Matrix c = reader.matrix("C");
  Matrix d = reader.matrix("D");
  reader.expect_end();

  LoadedLft out;
  try {
    out.model = LftModel(dims[0], dims[1], BlockStructure(sizes), std::move(a),
                         std::move(b), std::move(c), std::move(d));
    if (has_assembled)
      out.assembled = AssembledLft{out.model, nx, nu, ny, np, lambda};
  } catch (const ContractError& err) {
    throw ParseError(std::string("inconsistent model data: ") + err.what());
  }
  return out;
}

// ---- psi-realization ----

std::string serialize_psi_realization(const PsiRealization& psi,
                                      double lambda,
                                      const std::string& description) {
  std::string out = "lpvlft psi-realization\n";
  emit_description(out, description);
  out += "dims " + std::to_string(psi.npsi()) + " " + std::to_string(psi.np()) +
         "\n";
  out += "blocks " + std::to_string(psi.lft.d());
  for (Index n : psi.lft.blocks.dims()) out += " " + std::to_string(n);
  out += "\n";
  out += "lambda " + format_double(lambda) + "\n";
  emit_matrix(out, "F", psi.F());
  emit_matrix(out, "G", psi.G());
  emit_matrix(out, "H", psi.H());
  emit_matrix(out, "D", psi.lft.D);
  out += "end\n";
  return out;
}

LoadedPsiRealization parse_psi_realization(const std::string& text) {
  Reader reader(text);
  reader.expect_header("psi-realization");
  auto dims = reader.keyword_ints("dims", 2);
  Index npsi = dims[0], np = dims[1];
  auto block_head = reader.take();
  if (block_head.size() < 2 || block_head[0] != "blocks")
    reader.fail("expected 'blocks k n1 ... nk'");
  Index count = reader.integer(block_head[1]);
  if (static_cast<Index>(block_head.size()) != count + 2)
    reader.fail("block count does not match the number of sizes");
  if (count != np)
    reader.fail("a scheduling realization needs one block per parameter");
  std::vector<Index> sizes;
  for (Index i = 0; i < count; ++i)
    sizes.push_back(reader.integer(block_head[static_cast<std::size_t>(i) + 2]));

  double lambda = 1.0;
  if (reader.next_is("lambda")) {
    auto tokens = reader.take();
    if (tokens.size() != 2) reader.fail("expected 'lambda value'");
    lambda = reader.number(tokens[1]);
  }

  Matrix f = reader.matrix("F");
  Matrix g = reader.matrix("G");
  Matrix h = reader.matrix("H");
  Matrix d = reader.next_is("matrix") ? reader.matrix("D")
                                      : Matrix::Zero(npsi, 1);
  reader.expect_end();

  LoadedPsiRealization out;
  try {
    out.model = PsiRealization(LftModel(npsi, 1, BlockStructure(sizes),
                                        std::move(f), std::move(g),
                                        std::move(h), std::move(d)));
  } catch (const ContractError& err) {
    throw ParseError(std::string("inconsistent model data: ") + err.what());
  }
  out.lambda = lambda;
  return out;
}

// ---- psi-taylor ----

std::string serialize_psi_taylor(const TaylorPsi& taylor,
                                 const std::string& description) {
  std::string out = "lpvlft psi-taylor\n";
  emit_description(out, description);
  const TruncatedSeries& series = taylor.series;
  out += "dims " + std::to_string(series.rows()) + " " +
         std::to_string(series.alphabet()) + "\n";
  out += "depth " + std::to_string(series.depth()) + "\n";
  out += "order-bound " + std::to_string(taylor.order_bound) + "\n";
  for (const auto& [word, value] : series.stored()) {
    out += "coeff " + word_label(word);
    for (Index r = 0; r < value.rows(); ++r)
      out += " " + format_double(value(r, 0));
    out += "\n";
  }
  out += "end\n";
  return out;
}

TaylorPsi parse_psi_taylor(const std::string& text) {
  Reader reader(text);
  reader.expect_header("psi-taylor");
  auto dims = reader.keyword_ints("dims", 2);
  Index npsi = dims[0], np = dims[1];
  Index depth = reader.keyword_ints("depth", 1)[0];
  Index order_bound = reader.keyword_ints("order-bound", 1)[0];
  if (npsi < 1 || np < 1) reader.fail("dims must be positive");
  if (depth < 0 || order_bound < 0)
    reader.fail("depth and order-bound must be nonnegative");

  TaylorPsi out;
  out.series = TruncatedSeries(static_cast<int>(np), static_cast<int>(depth),
                               npsi, 1);
  out.order_bound = static_cast<int>(order_bound);
  while (reader.next_is("coeff")) {
    auto tokens = reader.take();
    if (tokens.size() != static_cast<std::size_t>(npsi) + 2)
      reader.fail("coeff line needs a word and " + std::to_string(npsi) +
                  " value(s)");
    Word word;
    if (tokens[1] != "eps") {
      std::istringstream letters(tokens[1]);
      std::string letter;
      while (std::getline(letters, letter, ','))
        word.push_back(static_cast<int>(reader.integer(letter)));
      if (word.empty()) reader.fail("malformed word '" + tokens[1] + "'");
    }
    if (static_cast<Index>(word.size()) > depth)
      reader.fail("word '" + tokens[1] + "' is longer than the stored depth");
    for (int letter : word)
      if (letter < 1 || letter > np)
        reader.fail("word letter out of range in '" + tokens[1] + "'");
    Matrix value(npsi, 1);
    for (Index r = 0; r < npsi; ++r)
      value(r, 0) = reader.number(tokens[static_cast<std::size_t>(r) + 2]);
    out.series.set(word, value);
  }
  reader.expect_end();
  return out;
}

// ---- signals ----

std::string serialize_signals(const Signals& signals,
                              const std::string& description) {
  std::string out = "lpvlft signals\n";
  emit_description(out, description);
  if (signals.u.size() != signals.p.size())
    throw ParseError("signal streams must have equal length");
  Index horizon = static_cast<Index>(signals.u.size());
  Index nu = signals.u.empty() ? 0 : signals.u.front().size();
  Index np = signals.p.empty() ? 0 : signals.p.front().size();
  out += "dims " + std::to_string(nu) + " " + std::to_string(np) + "\n";
  out += "horizon " + std::to_string(horizon) + "\n";
  emit_matrix(out, "u", rows_matrix(signals.u, nu));
  emit_matrix(out, "p", rows_matrix(signals.p, np));
  out += "end\n";
  return out;
}

Signals parse_signals(const std::string& text) {
  Reader reader(text);
  reader.expect_header("signals");
  auto dims = reader.keyword_ints("dims", 2);
  Index horizon = reader.keyword_ints("horizon", 1)[0];
  if (horizon < 0) reader.fail("horizon must be nonnegative");
  Matrix u = reader.matrix("u");
  Matrix p = reader.matrix("p");
  reader.expect_end();
  if (u.rows() != horizon || p.rows() != horizon)
    throw ParseError("signal rows do not match the horizon");
  if (u.cols() != dims[0] || p.cols() != dims[1])
    throw ParseError("signal columns do not match dims");
  Signals out;
  out.u = unpack_rows(u);
  out.p = unpack_rows(p);
  return out;
}

// ---- trajectory ----

std::string serialize_trajectory(const Trajectory& trajectory,
                                 const std::vector<Vector>* loop_signal,
                                 const std::string& description) {
  std::string out = "lpvlft trajectory\n";
  emit_description(out, description);
  Index horizon = trajectory.horizon;
  Index nu = trajectory.u.empty() ? 0 : trajectory.u.front().size();
  Index np = trajectory.p.empty() ? 0 : trajectory.p.front().size();
  Index nx = trajectory.x.empty() ? 0 : trajectory.x.front().size();
  Index ny = trajectory.y.empty() ? 0 : trajectory.y.front().size();
  out += "dims " + std::to_string(nu) + " " + std::to_string(np) + " " +
         std::to_string(nx) + " " + std::to_string(ny) + "\n";
  out += "horizon " + std::to_string(horizon) + "\n";
  emit_matrix(out, "u", rows_matrix(trajectory.u, nu));
  emit_matrix(out, "p", rows_matrix(trajectory.p, np));
  emit_matrix(out, "x", rows_matrix(trajectory.x, nx));
  emit_matrix(out, "y", rows_matrix(trajectory.y, ny));
  if (loop_signal != nullptr) {
    Index nq = loop_signal->empty() ? 0 : loop_signal->front().size();
    emit_matrix(out, "z", rows_matrix(*loop_signal, nq));
  }
  out += "end\n";
  return out;
}

Trajectory parse_trajectory(const std::string& text) {
  Reader reader(text);
  reader.expect_header("trajectory");
  auto dims = reader.keyword_ints("dims", 4);
  Index horizon = reader.keyword_ints("horizon", 1)[0];
  if (horizon < 0) reader.fail("horizon must be nonnegative");
  Matrix u = reader.matrix("u");
  Matrix p = reader.matrix("p");
  Matrix x = reader.matrix("x");
  Matrix y = reader.matrix("y");
  if (reader.next_is("matrix")) reader.matrix("z");
  reader.expect_end();
  if (u.rows() != horizon || p.rows() != horizon || y.rows() != horizon ||
      x.rows() != horizon + 1)
    throw ParseError("trajectory rows do not match the horizon");
  if (u.cols() != dims[0] || p.cols() != dims[1] || x.cols() != dims[2] ||
      y.cols() != dims[3])
    throw ParseError("trajectory columns do not match dims");
  Trajectory out;
  out.horizon = horizon;
  out.u = unpack_rows(u);
  out.p = unpack_rows(p);
  out.x = unpack_rows(x);
  out.y = unpack_rows(y);
  return out;
}

}  // namespace lpvlft
