#pragma once

// Closed-form expression mini-language for scheduling functions, used as an
// independent evaluator in verification: sums, differences, products,
// quotients, integer powers, unary minus, parentheses, decimal constants and
// variables p1..pk. Multiple functions are separated by ';' or newlines.

#include <string>
#include <vector>

#include "lpvlft/analysis.hpp"
#include "lpvlft/model.hpp"

namespace lpvlft {

class PsiExprError : public ContractError {
 public:
  using ContractError::ContractError;
};

class PsiExpr {
 public:
  // Parses a single expression; throws PsiExprError with position info.
  static PsiExpr parse(const std::string& text);

  double eval(const Vector& point) const;
  int max_variable() const { return max_variable_; }  // highest p-index used
  const std::string& text() const { return text_; }

 private:
  struct Node {
    enum class Kind { kConst, kVar, kAdd, kSub, kMul, kDiv, kNeg, kPow };
    Kind kind = Kind::kConst;
    double value = 0.0;  // kConst
    int var = 0;         // kVar: 1-based parameter index
    int exponent = 1;    // kPow
    int lhs = -1;
    int rhs = -1;
  };

  double eval_node(int index, const Vector& point) const;

  std::vector<Node> nodes_;
  int root_ = -1;
  int max_variable_ = 0;
  std::string text_;

  friend class PsiExprParser;
};

// Splits on ';' and newlines, parses each nonempty piece.
std::vector<PsiExpr> parse_psi_exprs(const std::string& text);

// Bundles parsed expressions into an evaluator returning one value per
// expression; every referenced variable must fit into np.
PsiEvaluator evaluator_of_exprs(std::vector<PsiExpr> exprs, Index np);

}  // namespace lpvlft
