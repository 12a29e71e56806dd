#include "lpvlft/psi_expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

namespace lpvlft {

namespace {

std::string position_message(const std::string& text, std::size_t pos,
                             const std::string& what) {
  return "expression error at position " + std::to_string(pos) + " in \"" +
         text + "\": " + what;
}

}  // namespace

class PsiExprParser {
 public:
  explicit PsiExprParser(const std::string& text) : text_(text) {}

  PsiExpr run() {
    PsiExpr expr;
    expr.text_ = text_;
    out_ = &expr;
    skip_space();
    if (at_end()) throw PsiExprError("empty expression");
    expr.root_ = parse_expr();
    skip_space();
    if (!at_end()) fail("unexpected trailing input");
    return expr;
  }

 private:
  using Node = PsiExpr::Node;
  using Kind = Node::Kind;

  [[noreturn]] void fail(const std::string& what) const {
    throw PsiExprError(position_message(text_, pos_, what));
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool consume(char c) {
    skip_space();
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int add_node(Node node) {
    out_->nodes_.push_back(node);
    return static_cast<int>(out_->nodes_.size()) - 1;
  }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      if (consume('+')) {
        Node node;
        node.kind = Kind::kAdd;
        node.lhs = lhs;
        node.rhs = parse_term();
        lhs = add_node(node);
      } else if (consume('-')) {
        Node node;
        node.kind = Kind::kSub;
        node.lhs = lhs;
        node.rhs = parse_term();
        lhs = add_node(node);
      } else {
        return lhs;
      }
    }
  }

  int parse_term() {
    int lhs = parse_factor();
    for (;;) {
      if (consume('*')) {
        Node node;
        node.kind = Kind::kMul;
        node.lhs = lhs;
        node.rhs = parse_factor();
        lhs = add_node(node);
      } else if (consume('/')) {
        Node node;
        node.kind = Kind::kDiv;
        node.lhs = lhs;
        node.rhs = parse_factor();
        lhs = add_node(node);
      } else {
        return lhs;
      }
    }
  }

  int parse_factor() {
    int base = parse_base();
    if (consume('^')) {
      skip_space();
      if (!std::isdigit(static_cast<unsigned char>(peek())))
        fail("exponent must be a nonnegative integer");
      int exponent = parse_unsigned();
      Node node;
      node.kind = Kind::kPow;
      node.lhs = base;
      node.exponent = exponent;
      return add_node(node);
    }
    return base;
  }

  int parse_base() {
    skip_space();
    if (at_end()) fail("expected a value");
    char c = peek();
    if (c == '(') {
      ++pos_;
      int inner = parse_expr();
      if (!consume(')')) fail("missing ')'");
      return inner;
    }
    if (c == '-') {
      ++pos_;
      Node node;
      node.kind = Kind::kNeg;
      node.lhs = parse_factor();
      return add_node(node);
    }
    if (c == 'p') {
      ++pos_;
      skip_space();
      if (!std::isdigit(static_cast<unsigned char>(peek())))
        fail("parameter name needs an index, e.g. p1");
      int index = parse_unsigned();
      if (index < 1) fail("parameter indices start at 1");
      Node node;
      node.kind = Kind::kVar;
      node.var = index;
      if (index > out_->max_variable_) out_->max_variable_ = index;
      return add_node(node);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = text_.c_str() + pos_;
      char* end = nullptr;
      double value = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      Node node;
      node.kind = Kind::kConst;
      node.value = value;
      return add_node(node);
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  int parse_unsigned() {
    skip_space();
    std::size_t start = pos_;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    if (start == pos_) fail("expected an integer");
    return std::stoi(text_.substr(start, pos_ - start));
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  PsiExpr* out_ = nullptr;
};

PsiExpr PsiExpr::parse(const std::string& text) {
  return PsiExprParser(text).run();
}

double PsiExpr::eval_node(int index, const Vector& point) const {
  const Node& node = nodes_.at(static_cast<std::size_t>(index));
  switch (node.kind) {
    case Node::Kind::kConst:
      return node.value;
    case Node::Kind::kVar:
      return point(node.var - 1);
    case Node::Kind::kAdd:
      return eval_node(node.lhs, point) + eval_node(node.rhs, point);
    case Node::Kind::kSub:
      return eval_node(node.lhs, point) - eval_node(node.rhs, point);
    case Node::Kind::kMul:
      return eval_node(node.lhs, point) * eval_node(node.rhs, point);
    case Node::Kind::kDiv:
      return eval_node(node.lhs, point) / eval_node(node.rhs, point);
    case Node::Kind::kNeg:
      return -eval_node(node.lhs, point);
    case Node::Kind::kPow: {
      double base = eval_node(node.lhs, point);
      double result = 1.0;
      for (int k = 0; k < node.exponent; ++k) result *= base;
      return result;
    }
  }
  throw PsiExprError("corrupt expression tree");
}

double PsiExpr::eval(const Vector& point) const {
  if (max_variable_ > point.size())
    throw PsiExprError("expression \"" + text_ + "\" uses p" +
                       std::to_string(max_variable_) + " but the point has " +
                       std::to_string(point.size()) + " entries");
  if (root_ < 0) throw PsiExprError("empty expression");
  return eval_node(root_, point);
}

std::vector<PsiExpr> parse_psi_exprs(const std::string& text) {
  std::vector<PsiExpr> out;
  std::string piece;
  auto flush = [&] {
    bool blank = true;
    for (char c : piece)
      if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    if (!blank) out.push_back(PsiExpr::parse(piece));
    piece.clear();
  };
  for (char c : text) {
    if (c == ';' || c == '\n')
      flush();
    else
      piece.push_back(c);
  }
  flush();
  if (out.empty()) throw PsiExprError("no expressions given");
  return out;
}

PsiEvaluator evaluator_of_exprs(std::vector<PsiExpr> exprs, Index np) {
  for (const PsiExpr& expr : exprs)
    if (expr.max_variable() > np)
      throw PsiExprError("expression \"" + expr.text() + "\" uses p" +
                         std::to_string(expr.max_variable()) + " but only " +
                         std::to_string(np) + " parameters exist");
  return [exprs = std::move(exprs)](const Vector& point) {
    Vector out(static_cast<Index>(exprs.size()));
    for (std::size_t i = 0; i < exprs.size(); ++i)
      out(static_cast<Index>(i)) = exprs[i].eval(point);
    return out;
  };
}

}  // namespace lpvlft
