#include "flowcouple/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <system_error>

#include "flowcouple/error.hpp"

namespace flowcouple {

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw ModelError("cannot format number");
  return std::string(buf, end);
}

class RateExpr::Parser {
 public:
  Parser(std::string_view text, int nodes, const ParamMap& params, std::vector<Node>& out)
      : text_(text), nodes_(nodes), params_(params), out_(out) {}

  int parse_all() {
    int root = parse_expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ModelError("rate expression \"" + std::string(text_) + "\": " + what + " at offset " +
                     std::to_string(pos_));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(std::string_view token) {
    skip_space();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(std::string_view(&c, 1))) fail(std::string("expected '") + c + "'");
  }

  int push(Node node) {
    out_.push_back(std::move(node));
    return static_cast<int>(out_.size()) - 1;
  }

  int binary(Kind kind, int lhs, int rhs) {
    Node n;
    n.kind = kind;
    n.children = {lhs, rhs};
    return push(std::move(n));
  }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      if (accept("+")) {
        lhs = binary(Kind::add, lhs, parse_term());
      } else if (accept("-")) {
        lhs = binary(Kind::sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  int parse_term() {
    int lhs = parse_unary();
    while (accept("*")) lhs = binary(Kind::mul, lhs, parse_unary());
    return lhs;
  }

  int parse_unary() {
    if (accept("-")) {
      Node n;
      n.kind = Kind::neg;
      n.children = {parse_unary()};
      return push(std::move(n));
    }
    return parse_primary();
  }

  std::string identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  int parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      int inner = parse_expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      std::string name = identifier();
      skip_space();
      bool call = pos_ < text_.size() && text_[pos_] == '(';
      if (call && (name == "min" || name == "max")) return parse_extremum(name);
      if (call && name == "ind") return parse_indicator();
      if (call) {
        pos_ = start;
        fail("unknown function '" + name + "'");
      }
      return resolve(name, start);
    }
    fail(std::string("unexpected '") + c + "'");
  }

  int parse_number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    Node n;
    n.kind = Kind::constant;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, n.value);
    if (ec != std::errc{} || ptr != last) {
      pos_ = start;
      fail("malformed number");
    }
    return push(std::move(n));
  }

  int resolve(const std::string& name, std::size_t at) {
    Node n;
    if (params_.count(name)) {
      n.kind = Kind::parameter;
      n.name = name;
      return push(std::move(n));
    }
    if (name.size() > 1 && name[0] == 'x' &&
        std::all_of(name.begin() + 1, name.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      int index = std::stoi(name.substr(1));
      if (index >= 1 && index <= nodes_) {
        n.kind = Kind::coordinate;
        n.coordinate = index - 1;
        return push(std::move(n));
      }
    }
    pos_ = at;
    fail("unknown identifier '" + name + "'");
  }

  int parse_extremum(const std::string& name) {
    expect('(');
    Node n;
    n.kind = name == "min" ? Kind::min : Kind::max;
    n.children.push_back(parse_expr());
    while (accept(",")) n.children.push_back(parse_expr());
    expect(')');
    if (n.children.size() < 2) fail(name + " needs at least two arguments");
    return push(std::move(n));
  }

  Relation parse_relation() {
    if (accept("<=")) return Relation::le;
    if (accept(">=")) return Relation::ge;
    if (accept("==")) return Relation::eq;
    if (accept("<")) return Relation::lt;
    if (accept(">")) return Relation::gt;
    if (accept("=")) return Relation::eq;
    fail("expected comparison operator");
  }

  int parse_indicator() {
    expect('(');
    Node n;
    n.kind = Kind::indicator;
    do {
      int lhs = parse_expr();
      Relation rel = parse_relation();
      int rhs = parse_expr();
      n.children.push_back(lhs);
      n.children.push_back(rhs);
      n.relations.push_back(rel);
    } while (accept(","));
    expect(')');
    return push(std::move(n));
  }

  std::string_view text_;
  int nodes_;
  const ParamMap& params_;
  std::vector<Node>& out_;
  std::size_t pos_ = 0;
};

RateExpr::RateExpr() : nodes_(1), root_(0) {}

RateExpr RateExpr::parse(std::string_view text, int nodes, const ParamMap& params) {
  RateExpr e;
  e.nodes_.clear();
  Parser parser(text, nodes, params, e.nodes_);
  e.root_ = parser.parse_all();
  return e;
}

double RateExpr::evaluate(std::span<const int> x, const ParamMap& params) const {
  return eval_node(root_, x, params);
}

double RateExpr::eval_node(int id, std::span<const int> x, const ParamMap& params) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  auto child = [&](std::size_t k) { return eval_node(n.children[k], x, params); };
  switch (n.kind) {
    case Kind::constant:
      return n.value;
    case Kind::coordinate:
      return static_cast<double>(x[static_cast<std::size_t>(n.coordinate)]);
    case Kind::parameter:
      return params.at(n.name);
    case Kind::add:
      return child(0) + child(1);
    case Kind::sub:
      return child(0) - child(1);
    case Kind::mul:
      return child(0) * child(1);
    case Kind::neg:
      return -child(0);
    case Kind::min: {
      double v = child(0);
      for (std::size_t k = 1; k < n.children.size(); ++k) v = std::min(v, child(k));
      return v;
    }
    case Kind::max: {
      double v = child(0);
      for (std::size_t k = 1; k < n.children.size(); ++k) v = std::max(v, child(k));
      return v;
    }
    case Kind::indicator:
      for (std::size_t k = 0; k < n.relations.size(); ++k) {
        double a = child(2 * k);
        double b = child(2 * k + 1);
        bool holds = false;
        switch (n.relations[k]) {
          case Relation::lt: holds = a < b; break;
          case Relation::le: holds = a <= b; break;
          case Relation::eq: holds = a == b; break;
          case Relation::gt: holds = a > b; break;
          case Relation::ge: holds = a >= b; break;
        }
        if (!holds) return 0.0;
      }
      return 1.0;
  }
  return 0.0;
}

std::string RateExpr::to_string() const {
  std::string out;
  print_node(root_, out);
  return out;
}

void RateExpr::print_node(int id, std::string& out) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  auto infix = [&](const char* op) {
    out += '(';
    print_node(n.children[0], out);
    out += op;
    print_node(n.children[1], out);
    out += ')';
  };
  switch (n.kind) {
    case Kind::constant:
      out += format_number(n.value);
      return;
    case Kind::coordinate:
      out += 'x' + std::to_string(n.coordinate + 1);
      return;
    case Kind::parameter:
      out += n.name;
      return;
    case Kind::add: infix(" + "); return;
    case Kind::sub: infix(" - "); return;
    case Kind::mul: infix(" * "); return;
    case Kind::neg:
      out += "(-";
      print_node(n.children[0], out);
      out += ')';
      return;
    case Kind::min:
    case Kind::max:
      out += n.kind == Kind::min ? "min(" : "max(";
      for (std::size_t k = 0; k < n.children.size(); ++k) {
        if (k) out += ", ";
        print_node(n.children[k], out);
      }
      out += ')';
      return;
    case Kind::indicator:
      out += "ind(";
      for (std::size_t k = 0; k < n.relations.size(); ++k) {
        if (k) out += ", ";
        print_node(n.children[2 * k], out);
        switch (n.relations[k]) {
          case Relation::lt: out += " < "; break;
          case Relation::le: out += " <= "; break;
          case Relation::eq: out += " = "; break;
          case Relation::gt: out += " > "; break;
          case Relation::ge: out += " >= "; break;
        }
        print_node(n.children[2 * k + 1], out);
      }
      out += ')';
      return;
  }
}

double eval_rate(const RateExpr& expr, const State& x, const ParamMap& params) {
  return expr.evaluate(x, params);
}

std::string table_expression(std::span<const State> states, std::span<const double> values) {
  if (states.size() != values.size()) throw ModelError("table_expression: size mismatch");
  std::string out;
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (values[k] == 0.0) continue;
    if (!out.empty()) out += " + ";
    out += format_number(values[k]) + "*ind(";
    for (std::size_t i = 0; i < states[k].size(); ++i) {
      if (i) out += ", ";
      out += 'x' + std::to_string(i + 1) + " = " + std::to_string(states[k][i]);
    }
    out += ')';
  }
  return out.empty() ? "0" : out;
}

}  // namespace flowcouple
