#pragma once

#include "cutstefan/types.hpp"

#include <memory>
#include <string>

namespace cutstefan {

/// Arithmetic expression in x, y and t: + - * / ^, parentheses, pi, e and
/// the functions sin cos tan exp log sqrt abs tanh floor min max.
class Expression {
public:
  /// Throws ConfigError with the column of the first offending character.
  explicit Expression(const std::string& text);
  ~Expression();
  Expression(const Expression&);
  Expression& operator=(const Expression&);

  double operator()(const Vec2& x, double t = 0.0) const;
  const std::string& text() const { return text_; }

  struct Node;

private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

} // namespace cutstefan
