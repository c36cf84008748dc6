#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "skewfib/errors.hpp"

namespace skewfib::expr {

// Forward-mode dual number: a value plus one partial per declared variable.
// Expression contexts in this project never exceed three variables.
struct Dual {
  double value = 0.0;
  std::array<double, 3> partials{0.0, 0.0, 0.0};
  int nvars = 0;

  static Dual constant(double v, int nvars) {
    Dual d;
    d.value = v;
    d.nvars = nvars;
    return d;
  }
  static Dual variable(double v, int index, int nvars) {
    Dual d = constant(v, nvars);
    d.partials[static_cast<std::size_t>(index)] = 1.0;
    return d;
  }
};

Dual operator+(const Dual& a, const Dual& b);
Dual operator-(const Dual& a, const Dual& b);
Dual operator-(const Dual& a);
Dual operator*(const Dual& a, const Dual& b);
Dual operator/(const Dual& a, const Dual& b);
Dual sin(const Dual& a);
Dual cos(const Dual& a);
Dual tan(const Dual& a);
Dual atan(const Dual& a);
Dual sqrt(const Dual& a);
Dual abs(const Dual& a);  // right-branch derivative at the kink
Dual exp(const Dual& a);
Dual log(const Dual& a);
Dual pow(const Dual& a, const Dual& b);

struct Node;

// Immutable parsed expression over a fixed variable list.
class Expr {
 public:
  Expr() = default;

  double eval(const std::vector<double>& point) const;
  Dual evalDual(const std::vector<double>& point) const;
  std::string print() const;
  int variableCount() const { return nvars_; }
  bool empty() const { return !root_; }

 private:
  friend Expr parse(const std::string&, const std::vector<std::string>&);
  std::shared_ptr<const Node> root_;
  int nvars_ = 0;
};

// Standard precedence: ^ binds tightest (right associative), then unary
// minus, then * /, then + - (left associative). Whitespace insensitive.
// Functions: sin cos tan atan sqrt abs exp log, piecewise(c, a, b) meaning
// c >= 0 ? a : b.
Expr parse(const std::string& source, const std::vector<std::string>& variables);

}  // namespace skewfib::expr
