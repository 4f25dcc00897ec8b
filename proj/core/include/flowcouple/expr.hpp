#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flowcouple/types.hpp"

namespace flowcouple {

/// Compiled rate expression.
///
/// Grammar (whitespace insignificant):
///
///     expr    := term (('+' | '-') term)*
///     term    := unary ('*' unary)*
///     unary   := '-' unary | primary
///     primary := number | ident | '(' expr ')'
///              | ('min' | 'max') '(' expr (',' expr)+ ')'
///              | 'ind' '(' cond (',' cond)* ')'
///     cond    := expr ('<' | '<=' | '=' | '==' | '>' | '>=') expr
///
/// Identifiers are state coordinates `x1`..`xn` or parameter names. `ind` returns 1 when
/// every comparison holds and 0 otherwise.
class RateExpr {
 public:
  RateExpr();  // the constant 0

  /// Compiles `text`, resolving identifiers against `nodes` coordinates and `params`.
  /// Throws ModelError on syntax errors or unknown identifiers.
  static RateExpr parse(std::string_view text, int nodes, const ParamMap& params);

  double evaluate(std::span<const int> x, const ParamMap& params) const;

  /// Canonical, fully parenthesized form. Parsing it again yields an equal expression.
  std::string to_string() const;

  friend bool operator==(const RateExpr& a, const RateExpr& b) {
    return a.to_string() == b.to_string();
  }

 private:
  enum class Kind { constant, coordinate, parameter, add, sub, mul, neg, min, max, indicator };
  enum class Relation { lt, le, eq, gt, ge };

  struct Node {
    Kind kind = Kind::constant;
    double value = 0.0;
    int coordinate = 0;  // 0-based
    std::string name;
    std::vector<int> children;
    std::vector<Relation> relations;  // indicator: one per child pair
  };

  class Parser;

  double eval_node(int id, std::span<const int> x, const ParamMap& params) const;
  void print_node(int id, std::string& out) const;

  std::vector<Node> nodes_;
  int root_ = 0;
};

/// eval_rate: pointwise evaluation of a compiled expression.
double eval_rate(const RateExpr& expr, const State& x, const ParamMap& params);

/// Builds an expression text equal to `values[k]` at `states[k]` and 0 elsewhere,
/// as a sum of `v*ind(x1=a,x2=b,...)` terms. Zero entries are omitted.
std::string table_expression(std::span<const State> states, std::span<const double> values);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);

}  // namespace flowcouple
