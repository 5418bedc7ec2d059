#include "cutstefan/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <vector>

namespace cutstefan {

struct Expression::Node {
  enum class Kind { Number, X, Y, T, Neg, Add, Sub, Mul, Div, Pow, Call };
  Kind kind = Kind::Number;
  double value = 0.0;
  std::string fn;
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Node::Kind k, std::vector<NodePtr> args = {}, double v = 0.0, std::string fn = {}) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->args = std::move(args);
  n->value = v;
  n->fn = std::move(fn);
  return n;
}

int arity(const std::string& fn) {
  if (fn == "min" || fn == "max") return 2;
  for (const char* f : {"sin", "cos", "tan", "exp", "log", "sqrt", "abs", "tanh", "floor"}) {
    if (fn == f) return 1;
  }
  return -1;
}

class Parser {
public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return n;
  }

private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression '" + s_ + "' column " + std::to_string(pos_ + 1) + ": " + what);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr sum() {
    NodePtr l = product();
    for (;;) {
      if (eat('+')) l = make(Node::Kind::Add, {l, product()});
      else if (eat('-')) l = make(Node::Kind::Sub, {l, product()});
      else return l;
    }
  }

  NodePtr product() {
    NodePtr l = unary();
    for (;;) {
      if (eat('*')) l = make(Node::Kind::Mul, {l, unary()});
      else if (eat('/')) l = make(Node::Kind::Div, {l, unary()});
      else return l;
    }
  }

  NodePtr unary() {
    if (eat('-')) return make(Node::Kind::Neg, {unary()});
    if (eat('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (eat('^')) return make(Node::Kind::Pow, {base, unary()});
    return base;
  }

  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (eat('(')) {
      NodePtr n = sum();
      if (!eat(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      return make(Node::Kind::Number, {}, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string id = s_.substr(start, pos_ - start);
      if (id == "x") return make(Node::Kind::X);
      if (id == "y") return make(Node::Kind::Y);
      if (id == "t") return make(Node::Kind::T);
      if (id == "pi") return make(Node::Kind::Number, {}, std::numbers::pi);
      if (id == "e") return make(Node::Kind::Number, {}, std::numbers::e);
      const int n = arity(id);
      if (n < 0) {
        pos_ = start;
        fail("unknown name '" + id + "'");
      }
      if (!eat('(')) fail("expected '(' after " + id);
      std::vector<NodePtr> args{sum()};
      for (int i = 1; i < n; ++i) {
        if (!eat(',')) fail(id + " takes " + std::to_string(n) + " arguments");
        args.push_back(sum());
      }
      if (!eat(')')) fail("expected ')'");
      return make(Node::Kind::Call, std::move(args), 0.0, id);
    }
    fail("unexpected character");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

double eval(const Node& n, const Vec2& x, double t) {
  auto a = [&](int i) { return eval(*n.args[i], x, t); };
  switch (n.kind) {
    case Node::Kind::Number: return n.value;
    case Node::Kind::X: return x.x();
    case Node::Kind::Y: return x.y();
    case Node::Kind::T: return t;
    case Node::Kind::Neg: return -a(0);
    case Node::Kind::Add: return a(0) + a(1);
    case Node::Kind::Sub: return a(0) - a(1);
    case Node::Kind::Mul: return a(0) * a(1);
    case Node::Kind::Div: return a(0) / a(1);
    case Node::Kind::Pow: return std::pow(a(0), a(1));
    case Node::Kind::Call: break;
  }
  const std::string& f = n.fn;
  if (f == "min") return std::min(a(0), a(1));
  if (f == "max") return std::max(a(0), a(1));
  const double v = a(0);
  if (f == "sin") return std::sin(v);
  if (f == "cos") return std::cos(v);
  if (f == "tan") return std::tan(v);
  if (f == "exp") return std::exp(v);
  if (f == "log") return std::log(v);
  if (f == "sqrt") return std::sqrt(v);
  if (f == "abs") return std::abs(v);
  if (f == "tanh") return std::tanh(v);
  return std::floor(v);
}

} // namespace

Expression::Expression(const std::string& text) : text_(text), root_(Parser(text_).parse()) {}
Expression::~Expression() = default;
Expression::Expression(const Expression&) = default;
Expression& Expression::operator=(const Expression&) = default;

double Expression::operator()(const Vec2& x, double t) const { return eval(*root_, x, t); }

} // namespace cutstefan
