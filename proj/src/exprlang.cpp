#include "skewfib/exprlang.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace skewfib::expr {

namespace {
Dual binaryMap(const Dual& a, double value, double dfactor_a) {
  Dual r = a;
  r.value = value;
  for (int i = 0; i < a.nvars; ++i)
    r.partials[static_cast<std::size_t>(i)] = dfactor_a * a.partials[static_cast<std::size_t>(i)];
  return r;
}
}  // namespace

Dual operator+(const Dual& a, const Dual& b) {
  Dual r = a;
  r.value = a.value + b.value;
  for (int i = 0; i < a.nvars; ++i)
    r.partials[static_cast<std::size_t>(i)] += b.partials[static_cast<std::size_t>(i)];
  return r;
}

Dual operator-(const Dual& a, const Dual& b) {
  Dual r = a;
  r.value = a.value - b.value;
  for (int i = 0; i < a.nvars; ++i)
    r.partials[static_cast<std::size_t>(i)] -= b.partials[static_cast<std::size_t>(i)];
  return r;
}

Dual operator-(const Dual& a) { return binaryMap(a, -a.value, -1.0); }

Dual operator*(const Dual& a, const Dual& b) {
  Dual r = a;
  r.value = a.value * b.value;
  for (int i = 0; i < a.nvars; ++i) {
    auto k = static_cast<std::size_t>(i);
    r.partials[k] = a.partials[k] * b.value + a.value * b.partials[k];
  }
  return r;
}

Dual operator/(const Dual& a, const Dual& b) {
  if (b.value == 0.0) throw DomainError("division by zero");
  Dual r = a;
  r.value = a.value / b.value;
  for (int i = 0; i < a.nvars; ++i) {
    auto k = static_cast<std::size_t>(i);
    r.partials[k] = (a.partials[k] - r.value * b.partials[k]) / b.value;
  }
  return r;
}

Dual sin(const Dual& a) { return binaryMap(a, std::sin(a.value), std::cos(a.value)); }
Dual cos(const Dual& a) { return binaryMap(a, std::cos(a.value), -std::sin(a.value)); }
Dual tan(const Dual& a) {
  double c = std::cos(a.value);
  if (c == 0.0) throw DomainError("tan at a pole");
  return binaryMap(a, std::tan(a.value), 1.0 / (c * c));
}
Dual atan(const Dual& a) {
  return binaryMap(a, std::atan(a.value), 1.0 / (1.0 + a.value * a.value));
}
Dual sqrt(const Dual& a) {
  if (a.value < 0.0) throw DomainError("sqrt of negative value");
  if (a.value == 0.0) throw DomainError("sqrt derivative at zero");
  double s = std::sqrt(a.value);
  return binaryMap(a, s, 0.5 / s);
}
Dual abs(const Dual& a) {
  // sign(0) := +1, the right-branch convention
  double sgn = (a.value >= 0.0) ? 1.0 : -1.0;
  return binaryMap(a, std::abs(a.value), sgn);
}
Dual exp(const Dual& a) {
  double e = std::exp(a.value);
  return binaryMap(a, e, e);
}
Dual log(const Dual& a) {
  if (!(a.value > 0.0)) throw DomainError("log of nonpositive value");
  return binaryMap(a, std::log(a.value), 1.0 / a.value);
}

namespace {
bool isConstantDual(const Dual& d) {
  for (int i = 0; i < d.nvars; ++i)
    if (d.partials[static_cast<std::size_t>(i)] != 0.0) return false;
  return true;
}

Dual ipow(const Dual& a, long e) {
  Dual acc = Dual::constant(1.0, a.nvars);
  Dual base = a;
  bool neg = e < 0;
  unsigned long k = neg ? static_cast<unsigned long>(-e) : static_cast<unsigned long>(e);
  while (k > 0) {
    if (k & 1ul) acc = acc * base;
    base = base * base;
    k >>= 1;
  }
  if (neg) return Dual::constant(1.0, a.nvars) / acc;
  return acc;
}
}  // namespace

Dual pow(const Dual& a, const Dual& b) {
  if (isConstantDual(b)) {
    double e = b.value;
    if (std::abs(e - std::round(e)) < 1e-12 && std::abs(e) <= 64.0)
      return ipow(a, static_cast<long>(std::llround(e)));
  }
  if (!(a.value > 0.0))
    throw DomainError("non-integer exponent requires positive base");
  return exp(b * log(a));
}
}  // namespace skewfib::expr

namespace skewfib::expr {

enum class NodeKind { Number, Variable, Negate, Call1, Binary, Piecewise };
enum class BinOp { Add, Sub, Mul, Div, Pow };
enum class Fn { Sin, Cos, Tan, Atan, Sqrt, Abs, Exp, Log };

struct Node {
  NodeKind kind;
  double number = 0.0;
  int var_index = 0;
  std::string var_name;
  BinOp op = BinOp::Add;
  Fn fn = Fn::Sin;
  std::shared_ptr<const Node> a, b, c;
};

namespace {

constexpr int kMaxDepth = 64;

template <class T>
T evalNode(const Node& n, const std::vector<double>& point, int nvars);

template <class T>
T makeNumber(double v, int nvars);
template <>
double makeNumber<double>(double v, int) { return v; }
template <>
Dual makeNumber<Dual>(double v, int nvars) { return Dual::constant(v, nvars); }

template <class T>
T makeVariable(double v, int index, int nvars);
template <>
double makeVariable<double>(double v, int, int) { return v; }
template <>
Dual makeVariable<Dual>(double v, int index, int nvars) {
  return Dual::variable(v, index, nvars);
}

double applyFn(Fn fn, double x) {
  switch (fn) {
    case Fn::Sin: return std::sin(x);
    case Fn::Cos: return std::cos(x);
    case Fn::Tan: return std::tan(x);
    case Fn::Atan: return std::atan(x);
    case Fn::Sqrt:
      if (x < 0.0) throw DomainError("sqrt of negative value");
      return std::sqrt(x);
    case Fn::Abs: return std::abs(x);
    case Fn::Exp: return std::exp(x);
    case Fn::Log:
      if (!(x > 0.0)) throw DomainError("log of nonpositive value");
      return std::log(x);
  }
  throw UnknownFunction("?");
}

Dual applyFn(Fn fn, const Dual& x) {
  switch (fn) {
    case Fn::Sin: return sin(x);
    case Fn::Cos: return cos(x);
    case Fn::Tan: return tan(x);
    case Fn::Atan: return atan(x);
    case Fn::Sqrt: return sqrt(x);
    case Fn::Abs: return abs(x);
    case Fn::Exp: return exp(x);
    case Fn::Log: return log(x);
  }
  throw UnknownFunction("?");
}

double applyPow(double a, double b) {
  if (std::abs(b - std::round(b)) < 1e-12 && std::abs(b) <= 64.0) {
    long e = std::llround(b);
    double acc = 1.0, base = a;
    bool neg = e < 0;
    unsigned long k = neg ? static_cast<unsigned long>(-e) : static_cast<unsigned long>(e);
    while (k > 0) {
      if (k & 1ul) acc *= base;
      base *= base;
      k >>= 1;
    }
    if (neg) {
      if (acc == 0.0) throw DomainError("division by zero in negative power");
      return 1.0 / acc;
    }
    return acc;
  }
  if (!(a > 0.0)) throw DomainError("non-integer exponent requires positive base");
  return std::pow(a, b);
}

template <class T>
T evalNode(const Node& n, const std::vector<double>& point, int nvars) {
  switch (n.kind) {
    case NodeKind::Number:
      return makeNumber<T>(n.number, nvars);
    case NodeKind::Variable:
      return makeVariable<T>(point[static_cast<std::size_t>(n.var_index)], n.var_index, nvars);
    case NodeKind::Negate:
      return -evalNode<T>(*n.a, point, nvars);
    case NodeKind::Call1:
      return applyFn(n.fn, evalNode<T>(*n.a, point, nvars));
    case NodeKind::Binary: {
      if (n.op == BinOp::Pow) {
        T base = evalNode<T>(*n.a, point, nvars);
        T e = evalNode<T>(*n.b, point, nvars);
        if constexpr (std::is_same_v<T, double>)
          return applyPow(base, e);
        else
          return pow(base, e);
      }
      T lhs = evalNode<T>(*n.a, point, nvars);
      T rhs = evalNode<T>(*n.b, point, nvars);
      switch (n.op) {
        case BinOp::Add: return lhs + rhs;
        case BinOp::Sub: return lhs - rhs;
        case BinOp::Mul: return lhs * rhs;
        case BinOp::Div:
          if constexpr (std::is_same_v<T, double>) {
            if (rhs == 0.0) throw DomainError("division by zero");
            return lhs / rhs;
          } else {
            return lhs / rhs;
          }
        default: break;
      }
      throw DomainError("bad operator");
    }
    case NodeKind::Piecewise: {
      double cond;
      if constexpr (std::is_same_v<T, double>)
        cond = evalNode<double>(*n.a, point, nvars);
      else
        cond = evalNode<double>(*n.a, point, nvars);
      // cond >= 0 selects the first branch; only the active branch is
      // evaluated and differentiated
      return cond >= 0.0 ? evalNode<T>(*n.b, point, nvars)
                         : evalNode<T>(*n.c, point, nvars);
    }
  }
  throw DomainError("bad node");
}

class Parser {
 public:
  Parser(const std::string& src, const std::vector<std::string>& vars)
      : src_(src), vars_(vars) {}

  std::shared_ptr<const Node> run() {
    auto node = parseSum(0);
    skipSpace();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return node;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(pos_, msg); }

  void skipSpace() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skipSpace();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skipSpace();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  void checkDepth(int depth) const {
    if (depth > kMaxDepth) throw SyntaxError(pos_, "expression nests deeper than 64");
  }

  std::shared_ptr<const Node> parseSum(int depth) {
    checkDepth(depth);
    auto lhs = parseProduct(depth + 1);
    for (;;) {
      if (eat('+')) {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Binary;
        n->op = BinOp::Add;
        n->a = lhs;
        n->b = parseProduct(depth + 1);
        lhs = n;
      } else if (eat('-')) {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Binary;
        n->op = BinOp::Sub;
        n->a = lhs;
        n->b = parseProduct(depth + 1);
        lhs = n;
      } else {
        return lhs;
      }
    }
  }

  std::shared_ptr<const Node> parseProduct(int depth) {
    checkDepth(depth);
    auto lhs = parseUnary(depth + 1);
    for (;;) {
      if (eat('*')) {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Binary;
        n->op = BinOp::Mul;
        n->a = lhs;
        n->b = parseUnary(depth + 1);
        lhs = n;
      } else if (eat('/')) {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Binary;
        n->op = BinOp::Div;
        n->a = lhs;
        n->b = parseUnary(depth + 1);
        lhs = n;
      } else {
        return lhs;
      }
    }
  }

  std::shared_ptr<const Node> parseUnary(int depth) {
    checkDepth(depth);
    if (eat('-')) {
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::Negate;
      n->a = parseUnary(depth + 1);
      return n;
    }
    return parsePower(depth + 1);
  }

  std::shared_ptr<const Node> parsePower(int depth) {
    checkDepth(depth);
    auto base = parsePrimary(depth + 1);
    if (eat('^')) {
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::Binary;
      n->op = BinOp::Pow;
      n->a = base;
      n->b = parseUnary(depth + 1);  // right associative, allows 2^-3
      return n;
    }
    return base;
  }

  std::shared_ptr<const Node> parsePrimary(int depth) {
    checkDepth(depth);
    skipSpace();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parseNumber();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parseNameOrCall(depth);
    if (eat('(')) {
      auto inner = parseSum(depth + 1);
      if (!eat(')')) fail("expected ')'");
      return inner;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::shared_ptr<const Node> parseNumber() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
      ++pos_;
    // exponent suffix
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      } else {
        pos_ = mark;  // 'e' belongs to an identifier or is a stray letter
      }
    }
    std::string text = src_.substr(start, pos_ - start);
    try {
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::Number;
      n->number = std::stod(text);
      return n;
    } catch (const std::exception&) {
      pos_ = start;
      fail("malformed number '" + text + "'");
    }
  }

  std::shared_ptr<const Node> parseNameOrCall(int depth) {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    std::string name = src_.substr(start, pos_ - start);
    if (name == "pi") {
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::Number;
      n->number = 3.14159265358979323846;
      return n;
    }
    if (peek() == '(') {
      eat('(');
      if (name == "piecewise") {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Piecewise;
        n->a = parseSum(depth + 1);
        if (!eat(',')) fail("piecewise expects 3 arguments");
        n->b = parseSum(depth + 1);
        if (!eat(',')) fail("piecewise expects 3 arguments");
        n->c = parseSum(depth + 1);
        if (!eat(')')) fail("expected ')'");
        return n;
      }
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::Call1;
      if (name == "sin") n->fn = Fn::Sin;
      else if (name == "cos") n->fn = Fn::Cos;
      else if (name == "tan") n->fn = Fn::Tan;
      else if (name == "atan") n->fn = Fn::Atan;
      else if (name == "sqrt") n->fn = Fn::Sqrt;
      else if (name == "abs") n->fn = Fn::Abs;
      else if (name == "exp") n->fn = Fn::Exp;
      else if (name == "log") n->fn = Fn::Log;
      else throw UnknownFunction(name);
      n->a = parseSum(depth + 1);
      if (!eat(')')) fail("expected ')'");
      return n;
    }
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i] == name) {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Variable;
        n->var_index = static_cast<int>(i);
        n->var_name = name;
        return n;
      }
    }
    throw UnknownVariable(name);
  }

  const std::string& src_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

void printNode(const Node& n, std::ostringstream& out) {
  switch (n.kind) {
    case NodeKind::Number: {
      out.precision(17);
      out << n.number;
      return;
    }
    case NodeKind::Variable:
      out << n.var_name;
      return;
    case NodeKind::Negate:
      out << "(-";
      printNode(*n.a, out);
      out << ")";
      return;
    case NodeKind::Call1: {
      static const char* names[] = {"sin", "cos", "tan", "atan", "sqrt", "abs", "exp", "log"};
      out << names[static_cast<int>(n.fn)] << "(";
      printNode(*n.a, out);
      out << ")";
      return;
    }
    case NodeKind::Binary: {
      static const char* ops[] = {"+", "-", "*", "/", "^"};
      out << "(";
      printNode(*n.a, out);
      out << ops[static_cast<int>(n.op)];
      printNode(*n.b, out);
      out << ")";
      return;
    }
    case NodeKind::Piecewise:
      out << "piecewise(";
      printNode(*n.a, out);
      out << ",";
      printNode(*n.b, out);
      out << ",";
      printNode(*n.c, out);
      out << ")";
      return;
  }
}

}  // namespace

double Expr::eval(const std::vector<double>& point) const {
  if (!root_) throw DomainError("empty expression");
  return evalNode<double>(*root_, point, nvars_);
}

Dual Expr::evalDual(const std::vector<double>& point) const {
  if (!root_) throw DomainError("empty expression");
  return evalNode<Dual>(*root_, point, nvars_);
}

std::string Expr::print() const {
  if (!root_) return "";
  std::ostringstream out;
  printNode(*root_, out);
  return out.str();
}

Expr parse(const std::string& source, const std::vector<std::string>& variables) {
  if (source.empty()) throw SyntaxError(0, "empty expression");
  if (variables.size() > 3) throw ConfigError("at most 3 variables per expression context");
  Parser p(source, variables);
  Expr e;
  e.root_ = p.run();
  e.nvars_ = static_cast<int>(variables.size());
  return e;
}

}  // namespace skewfib::expr
