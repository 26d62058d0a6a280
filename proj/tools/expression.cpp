#include "expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

namespace fwave::cli {

struct Expression::Node {
  enum class Kind { number, x, y, neg, add, sub, mul, div, pow, sin, cos, exp } kind;
  double value = 0.0;
  std::shared_ptr<const Node> lhs, rhs;

  double eval(double x, double y) const {
    switch (kind) {
      case Kind::number: return value;
      case Kind::x: return x;
      case Kind::y: return y;
      case Kind::neg: return -lhs->eval(x, y);
      case Kind::add: return lhs->eval(x, y) + rhs->eval(x, y);
      case Kind::sub: return lhs->eval(x, y) - rhs->eval(x, y);
      case Kind::mul: return lhs->eval(x, y) * rhs->eval(x, y);
      case Kind::div: return lhs->eval(x, y) / rhs->eval(x, y);
      case Kind::pow: return std::pow(lhs->eval(x, y), rhs->eval(x, y));
      case Kind::sin: return std::sin(lhs->eval(x, y));
      case Kind::cos: return std::cos(lhs->eval(x, y));
      case Kind::exp: return std::exp(lhs->eval(x, y));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  static NodePtr make(Kind k, NodePtr lhs = nullptr, NodePtr rhs = nullptr, double v = 0.0) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = k;
    n->value = v;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ExpressionError("expression '" + s_ + "': " + what + " at position " +
                          std::to_string(pos_ + 1));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr n = term();
    for (;;) {
      if (accept('+')) n = make(Kind::add, n, term());
      else if (accept('-')) n = make(Kind::sub, n, term());
      else return n;
    }
  }

  NodePtr term() {
    NodePtr n = factor();
    for (;;) {
      if (accept('*')) n = make(Kind::mul, n, factor());
      else if (accept('/')) n = make(Kind::div, n, factor());
      else return n;
    }
  }

  NodePtr factor() {
    if (accept('-')) return make(Kind::neg, factor());
    if (accept('+')) return factor();
    NodePtr base = atom();
    // Right-associative, binds tighter than unary minus on the left.
    if (accept('^')) return make(Kind::pow, base, factor());
    return base;
  }

  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    if (accept('(')) {
      NodePtr n = expr();
      if (!accept(')')) fail("missing ')'");
      return n;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      return make(Kind::number, nullptr, nullptr, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t end = pos_;
      while (end < s_.size() && std::isalpha(static_cast<unsigned char>(s_[end]))) ++end;
      const std::string name = s_.substr(pos_, end - pos_);
      pos_ = end;
      if (name == "x") return make(Kind::x);
      if (name == "y") return make(Kind::y);
      if (name == "pi") return make(Kind::number, nullptr, nullptr, std::numbers::pi);
      Kind fn;
      if (name == "sin") fn = Kind::sin;
      else if (name == "cos") fn = Kind::cos;
      else if (name == "exp") fn = Kind::exp;
      else fail("unknown name '" + name + "'");
      if (!accept('(')) fail("expected '(' after " + name);
      NodePtr arg = expr();
      if (!accept(')')) fail("missing ')'");
      return make(fn, arg);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(const std::string& text) : text_(text), root_(Parser(text_).parse()) {}

double Expression::operator()(double x, double y) const { return root_->eval(x, y); }

}  // namespace fwave::cli
