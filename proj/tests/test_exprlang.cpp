#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "skewfib/exprlang.hpp"
#include "skewfib/numeric.hpp"

using namespace skewfib;
using expr::Expr;
using expr::parse;

namespace {
constexpr double kPi = 3.14159265358979323846;
const std::vector<std::string> kP{"p1", "p2"};
}  // namespace

TEST_CASE("parse and eval hand examples") {
  CHECK(parse("-p2^3", kP).eval({1, 2}) == doctest::Approx(-8.0));
  CHECK(parse("atan(sqrt(p1^2+p2^2))", kP).eval({1, 0}) ==
        doctest::Approx(kPi / 4).epsilon(1e-12));
  CHECK(parse("2^3^2", kP).eval({0, 0}) == doctest::Approx(512.0));  // right assoc
  CHECK(parse("-2^2", kP).eval({0, 0}) == doctest::Approx(-4.0));    // ^ binds tighter
  CHECK(parse("6/3/2", kP).eval({0, 0}) == doctest::Approx(1.0));    // left assoc
  CHECK(parse("1 - 2 - 3", kP).eval({0, 0}) == doctest::Approx(-4.0));
  CHECK(parse("piecewise(p1, 1, 2)", kP).eval({0.5, 0}) == doctest::Approx(1.0));
  CHECK(parse("piecewise(p1, 1, 2)", kP).eval({-0.5, 0}) == doctest::Approx(2.0));
  CHECK(parse("piecewise(p1, 1, 2)", kP).eval({0, 0}) ==
        doctest::Approx(1.0));  // c >= 0 takes the first branch
  CHECK(parse("exp(log(p1))", kP).eval({3, 0}) == doctest::Approx(3.0));
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse("p1+", kP), SyntaxError);
  CHECK_THROWS_AS(parse("q1", kP), UnknownVariable);
  CHECK_THROWS_AS(parse("sinh(p1)", kP), UnknownFunction);
  CHECK_THROWS_AS(parse("", kP), SyntaxError);
  CHECK_THROWS_AS(parse("(p1", kP), SyntaxError);
  try {
    parse("p1+", kP);
    CHECK(false);
  } catch (const SyntaxError& e) {
    CHECK(e.position == 3);
  }
}

TEST_CASE("evalDual hand examples") {
  expr::Dual d = parse("p1*p2", kP).evalDual({3, 5});
  CHECK(d.value == doctest::Approx(15.0));
  CHECK(d.partials[0] == doctest::Approx(5.0));
  CHECK(d.partials[1] == doctest::Approx(3.0));

  d = parse("atan(sqrt(p1^2+p2^2))", kP).evalDual({1, 0});
  CHECK(d.partials[0] == doctest::Approx(0.5).epsilon(1e-12));

  // abs differentiates the right-hand branch at the kink
  d = parse("abs(p1)", kP).evalDual({0, 0});
  CHECK(d.value == doctest::Approx(0.0));
  CHECK(d.partials[0] == doctest::Approx(1.0));
}

TEST_CASE("evalDual domain errors") {
  CHECK_THROWS_AS(parse("sqrt(p1)", kP).evalDual({-1, 0}), DomainError);
  CHECK_THROWS_AS(parse("log(p1)", kP).evalDual({0, 0}), DomainError);
  CHECK_THROWS_AS(parse("1/p1", kP).evalDual({0, 0}), DomainError);
  CHECK_THROWS_AS(parse("p1^0.5", kP).evalDual({-2, 0}), DomainError);
}

TEST_CASE("integer exponents use repeated multiplication") {
  // exact for negative bases, where pow via exp/log is undefined
  CHECK(parse("p1^3", kP).eval({-2, 0}) == -8.0);
  CHECK(parse("p1^2", kP).eval({-3, 0}) == 9.0);
}

TEST_CASE("partials match finite differences on a grid") {
  const std::vector<std::string> sources{
      "-p2^3",
      "atan(sqrt(1+p1^2+p2^2))*p1",
      "sin(p1)*cos(p2)+exp(p1/4)",
      "p1*p2/(1+p1^2+p2^2)",
  };
  for (const std::string& s : sources) {
    Expr e = parse(s, kP);
    for (int i = 0; i < 21; ++i) {
      for (int j = 0; j < 21; ++j) {
        double x = -3.0 + 6.0 * i / 20.0;
        double y = -3.0 + 6.0 * j / 20.0;
        expr::Dual d = e.evalDual({x, y});
        std::vector<double> fd = fdJacobian(
            [&](const std::vector<double>& p) {
              return std::vector<double>{e.eval(p)};
            },
            {x, y}, 1e-5);
        CHECK(std::abs(d.partials[0] - fd[0]) <= 1e-5 * (1.0 + std::abs(fd[0])));
        CHECK(std::abs(d.partials[1] - fd[1]) <= 1e-5 * (1.0 + std::abs(fd[1])));
      }
    }
  }
}

TEST_CASE("print/parse round trip is bit-identical") {
  const std::vector<std::string> sources{
      "-p2^3",
      "atan(sqrt(p1^2+p2^2))",
      "piecewise(p1, sin(p1*p2), cos(p1)-p2/4)",
      "abs(p1)^3 + exp(-p2^2)",
      "p1^2*p2 - 2^p1 + log(1+p1^2)",
  };
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (const std::string& s : sources) {
    Expr e = parse(s, kP);
    Expr e2 = parse(e.print(), kP);
    for (int i = 0; i < 100; ++i) {
      std::vector<double> pt{dist(rng), dist(rng)};
      CHECK(e.eval(pt) == e2.eval(pt));
    }
  }
}

TEST_CASE("three-variable context") {
  Expr e = parse("x*y - z^2", {"x", "y", "z"});
  expr::Dual d = e.evalDual({2, 3, 4});
  CHECK(d.value == doctest::Approx(-10.0));
  CHECK(d.partials[0] == doctest::Approx(3.0));
  CHECK(d.partials[1] == doctest::Approx(2.0));
  CHECK(d.partials[2] == doctest::Approx(-8.0));
}
