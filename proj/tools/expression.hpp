#pragma once

#include <memory>
#include <stdexcept>
#include <string>

namespace fwave::cli {

class ExpressionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Coefficient expression in x and y.
///
///   expr   := term (('+' | '-') term)*
///   term   := factor (('*' | '/') factor)*
///   factor := ('+' | '-') factor | power
///   power  := atom ('^' factor)?
///   atom   := number | 'x' | 'y' | 'pi' | fn '(' expr ')' | '(' expr ')'
///   fn     := sin | cos | exp
class Expression {
 public:
  explicit Expression(const std::string& text);  // throws ExpressionError
  double operator()(double x, double y = 0.0) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace fwave::cli
