#include <doctest.h>

#include <array>
#include <cmath>
#include <memory>
#include <random>

#include "expr_oracle.hpp"
#include "kk/expression.hpp"

using kk::Expression;
using kk::ParseError;

namespace {

double ev(const std::string& src, double t = 0, double x = 0, double y = 0, double z = 0,
          const std::map<std::string, double>& consts = {}) {
  return Expression::parse(src, consts).eval({t, x, y, z});
}

}  // namespace

TEST_CASE("precedence and associativity corpus") {
  CHECK(ev("1 + 2*x", 0, 3) == doctest::Approx(7).epsilon(1e-15));
  CHECK(ev("2^3^2") == doctest::Approx(512).epsilon(1e-15));  // right associative
  CHECK(ev("1+2*3") == 7);
  CHECK(ev("(1+2)*3") == 9);
  CHECK(ev("2*3+1") == 7);
  CHECK(ev("-2^2") == -4);        // ^ binds above unary minus
  CHECK(ev("(-2)^2") == 4);
  CHECK(ev("2^-1") == 0.5);       // unary minus allowed in the exponent
  CHECK(ev("8/4/2") == 1);        // left associative
  CHECK(ev("8-4-2") == 2);
  CHECK(ev("8-4+2") == 6);
  CHECK(ev("2*-3") == -6);
  CHECK(ev("1--1") == 2);
  CHECK(ev("6/2*3") == 9);
  CHECK(ev("2^2*3") == 12);       // ^ above *
  CHECK(ev("3*2^2") == 12);
  CHECK(ev("-2-2") == -4);
  CHECK(ev("--2") == 2);
  CHECK(ev("2^0.5") == doctest::Approx(std::sqrt(2)).epsilon(1e-15));
  CHECK(ev("pi") == doctest::Approx(3.14159265358979324).epsilon(1e-16));
  CHECK(ev("e") == doctest::Approx(2.71828182845904524).epsilon(1e-16));
  CHECK(ev("sin(pi/2)") == doctest::Approx(1).epsilon(1e-15));
  CHECK(ev("sqrt(2)^2") == doctest::Approx(2).epsilon(1e-15));
  CHECK(ev("log(e)") == doctest::Approx(1).epsilon(1e-15));
  CHECK(ev("tanh(0)") == 0);
  CHECK(ev("1e3") == 1000);
  CHECK(ev("1.5e-2") == 0.015);
  CHECK(ev("t - x*y + z", 10, 2, 3, 4) == 8);
}

TEST_CASE("bound constants") {
  std::map<std::string, double> consts{{"a0", 2.5}};
  CHECK(ev("a0*(1+0.2*sin(x))", 0, 0, 0, 0, consts) == doctest::Approx(2.5).epsilon(1e-15));
  double xv = 0.7;
  CHECK(ev("a0*(1+0.2*sin(x))", 0, xv, 0, 0, consts) ==
        doctest::Approx(2.5 * (1 + 0.2 * std::sin(xv))).epsilon(1e-15));
}

TEST_CASE("errors carry byte offsets") {
  CHECK_THROWS_AS(Expression::parse(""), ParseError);
  CHECK_THROWS_AS(Expression::parse("1 +"), ParseError);
  CHECK_THROWS_AS(Expression::parse("(1+2"), ParseError);
  CHECK_THROWS_AS(Expression::parse("bogus(3)"), ParseError);
  CHECK_THROWS_AS(Expression::parse("1 + w"), ParseError);
  CHECK_THROWS_AS(Expression::parse("sin 3"), ParseError);
  CHECK_THROWS_AS(Expression::parse("1 2"), ParseError);
  try {
    Expression::parse("1 + unknown_name");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset == 4);
    CHECK(std::string(e.what()).find("unknown_name") != std::string::npos);
  }
  try {
    Expression::parse("(1+2*x");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.expected.find(")") != std::string::npos);
  }
}

TEST_CASE("100 random expressions match the reference evaluator") {
  std::mt19937_64 rng(20240817);
  std::uniform_real_distribution<double> uv(-2.0, 2.0);
  int checked = 0;
  while (checked < 100) {
    auto tree = kkt::random_tree(rng, 4);
    std::string src = tree->print();
    Expression e = Expression::parse(src);
    bool ok_tree = true;
    for (int trial = 0; trial < 8; ++trial) {
      std::array<double, 4> v{uv(rng), uv(rng), uv(rng), uv(rng)};
      double expect = tree->eval(v);
      if (!std::isfinite(expect) || std::abs(expect) > 1e12) {
        ok_tree = false;  // division blow-ups: regenerate
        break;
      }
      double got = e.eval(v);
      CHECK(got == doctest::Approx(expect).epsilon(1e-15));
    }
    if (ok_tree) ++checked;
  }
}

TEST_CASE("parse-print-parse is idempotent") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 60; ++i) {
    auto tree = kkt::random_tree(rng, 4);
    Expression e1 = Expression::parse(tree->print());
    std::string p1 = e1.print();
    Expression e2 = Expression::parse(p1);
    std::string p2 = e2.print();
    CHECK(p1 == p2);
    std::array<double, 4> v{0.3, -0.7, 1.1, 0.2};
    double r1 = e1.eval(v), r2 = e2.eval(v);
    if (std::isfinite(r1)) CHECK(r1 == doctest::Approx(r2).epsilon(1e-15));
  }
  // symbolic constants survive printing
  std::map<std::string, double> consts{{"a0", 3.0}};
  Expression e = Expression::parse("a0*(1+x)", consts);
  CHECK(e.print() == "a0*(1+x)");
  CHECK(Expression::parse(e.print(), consts).eval({0, 1, 0, 0}) == 6.0);
}

TEST_CASE("constant detection") {
  CHECK(Expression::parse("3*pi").is_constant());
  CHECK(!Expression::parse("3*x").is_constant());
  CHECK(Expression::parse("sin(2)").is_constant());
  CHECK(Expression::parse("x+y").depends_on(1));
  CHECK(!Expression::parse("x+y").depends_on(0));
}
