#include "nlel/expression.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>

namespace nlel {

struct Expression::Node {
  char op = 'n';  // n number, x coordinate, + - * / ^, ~ negate, s c e functions
  double value = 0;
  int coord = 0;
  std::shared_ptr<const Node> a, b;
};

namespace {

using P = std::shared_ptr<const Expression::Node>;

P leaf(double v) {
  auto n = std::make_shared<Expression::Node>();
  n->value = v;
  return n;
}

P make(char op, P a, P b = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

// expr := term (('+'|'-') term)* ; term := unary (('*'|'/') unary)*
// unary := '-' unary | power ; power := atom ('^' unary)?
struct Parser {
  const std::string& s;
  std::size_t i = 0;
  int max_coord = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("expression: " + what + " at offset " + std::to_string(i) + " in '" + s + "'");
  }
  void skip() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool eat(char c) {
    skip();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }

  P expr() {
    P l = term();
    for (;;) {
      if (eat('+')) l = make('+', l, term());
      else if (eat('-')) l = make('-', l, term());
      else return l;
    }
  }
  P term() {
    P l = unary();
    for (;;) {
      if (eat('*')) l = make('*', l, unary());
      else if (eat('/')) l = make('/', l, unary());
      else return l;
    }
  }
  P unary() {
    if (eat('-')) return make('~', unary());
    if (eat('+')) return unary();
    return power();
  }
  P power() {
    P base = atom();
    if (eat('^')) return make('^', base, unary());  // right associative
    return base;
  }
  P atom() {
    skip();
    if (i >= s.size()) fail("unexpected end");
    if (eat('(')) {
      P e = expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    const char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s.c_str() + i;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      i += static_cast<std::size_t>(end - begin);
      return leaf(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isalnum(static_cast<unsigned char>(s[j]))) ++j;
      const std::string id = s.substr(i, j - i);
      i = j;
      if (id == "pi") return leaf(std::numbers::pi);
      if (id == "x1" || id == "x2") {
        auto n = std::make_shared<Expression::Node>();
        n->op = 'x';
        n->coord = id[1] - '1';
        max_coord = std::max(max_coord, n->coord + 1);
        return n;
      }
      char f = 0;
      if (id == "sin") f = 's';
      else if (id == "cos") f = 'c';
      else if (id == "exp") f = 'e';
      else fail("unknown name '" + id + "'");
      if (!eat('(')) fail("expected '(' after " + id);
      P arg = expr();
      if (!eat(')')) fail("expected ')'");
      return make(f, arg);
    }
    fail(std::string("unexpected '") + c + "'");
  }
};

double eval(const Expression::Node& n, const double* x) {
  switch (n.op) {
    case 'n': return n.value;
    case 'x': return x[n.coord];
    case '+': return eval(*n.a, x) + eval(*n.b, x);
    case '-': return eval(*n.a, x) - eval(*n.b, x);
    case '*': return eval(*n.a, x) * eval(*n.b, x);
    case '/': return eval(*n.a, x) / eval(*n.b, x);
    case '^': return std::pow(eval(*n.a, x), eval(*n.b, x));
    case '~': return -eval(*n.a, x);
    case 's': return std::sin(eval(*n.a, x));
    case 'c': return std::cos(eval(*n.a, x));
    case 'e': return std::exp(eval(*n.a, x));
  }
  return NAN;
}

}  // namespace

Expression::Expression(const std::string& src) : src_(src) {
  Parser p{src_};
  root_ = p.expr();
  p.skip();
  if (p.i != src_.size()) p.fail("trailing input");
  max_coord_ = p.max_coord;
}

double Expression::operator()(const double* x) const { return eval(*root_, x); }

}  // namespace nlel
