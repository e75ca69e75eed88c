// Copyright 2026 The rswitch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "doctest.h"
#include "rswitch/error.hpp"
#include "rswitch/expr.hpp"

using namespace rswitch;

namespace {

double eval1(const char* src, double x) { return parse_expr(src).eval({x}); }

}  // namespace

TEST_CASE("numbers and arithmetic") {
  CHECK(eval1("1 + 2*3", 0) == 7.0);
  CHECK(eval1("(1 + 2)*3", 0) == 9.0);
  CHECK(eval1("8/4/2", 0) == 1.0);
  CHECK(eval1("10 - 3 - 2", 0) == 5.0);
  CHECK(eval1("1.5e2", 0) == 150.0);
  CHECK(eval1(".25", 0) == 0.25);
}

TEST_CASE("power is right-associative and unary minus binds tighter") {
  CHECK(eval1("2^3^2", 0) == 512.0);
  CHECK(eval1("-2^2", 0) == 4.0);
  CHECK(eval1("-(2^2)", 0) == -4.0);
  CHECK(eval1("2*-3", 0) == -6.0);
  CHECK(eval1("--3", 0) == 3.0);
}

TEST_CASE("functions") {
  const double x = 0.7;
  CHECK(eval1("sin(x)^2 + cos(x)^2", x) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(eval1("abs(-x)", x) == x);
  CHECK(eval1("sqrt(x*x)", x) == doctest::Approx(x));
  CHECK(eval1("pow(x, 3)", x) == doctest::Approx(x * x * x));
  CHECK(eval1("min(x, 0.5)", x) == 0.5);
  CHECK(eval1("max(x, 0.5)", x) == x);
  CHECK(eval1("x^2/(1 + x^2)", 2.0) == doctest::Approx(0.8));
}

TEST_CASE("variables and dimension checks") {
  const Expr e = parse_expr("x1*x2 - x3", {3});
  CHECK(e.arity() == 3);
  CHECK(e.eval({2.0, 3.0, 1.0}) == 5.0);
  CHECK(parse_expr("x", {1}).arity() == 1);
  CHECK_THROWS_AS(parse_expr("x", {2}), ParseError);
  CHECK_THROWS_AS(parse_expr("x4", {3}), ParseError);
  CHECK(parse_expr("3").is_constant());
}

TEST_CASE("malformed input reports a parse error with an offset") {
  for (const char* bad : {"", "1 +", "(1", "1)", "foo(1)", "sin(1, 2)", "max(1)", "y", "1 2", "x0", "2**3",
                          "sin", "1e"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_expr(bad), ParseError);
  }
  try {
    parse_expr("1 + $");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 4);
    CHECK(e.code() == ErrorCode::Parse);
  }
}

TEST_CASE("evaluation errors are numeric errors") {
  CHECK_THROWS_AS(eval1("1/x", 0.0), NumericError);
  CHECK_THROWS_AS(eval1("sqrt(x)", -1.0), NumericError);
  CHECK_THROWS_AS(eval1("x^(-1)", 0.0), NumericError);
  CHECK_THROWS_AS(eval1("(-8)^(1/3)", 0.0), NumericError);
  CHECK_THROWS_AS(eval1("10^400", 0.0), NumericError);
  CHECK(eval1("0^0", 0.0) == 1.0);
}

TEST_CASE("print then parse reproduces the tree") {
  const char* sources[] = {"2 - sin(x)^2",
                           "1 + abs(cos(x))",
                           "-x^2/(1 + x^2)",
                           "-(2^2) * -3",
                           "min(x, max(-1.5e-3, 2)) / sqrt(4)",
                           "1 + x^2/(1 + x^2)",
                           "x - -x",
                           "0.1 + 1e300*x"};
  for (const char* src : sources) {
    CAPTURE(src);
    const Expr a = parse_expr(src);
    const Expr b = parse_expr(a.print());
    CHECK(structurally_equal(a, b));
    CHECK(b.print() == a.print());
    for (double x : {-2.5, -0.1, 0.3, 1.7}) CHECK(a.eval({x}) == b.eval({x}));
  }
}

TEST_CASE("random trees survive a print/parse round trip") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> pick(0, 9);
  std::uniform_real_distribution<double> num(-3.0, 3.0);
  std::function<Expr(int)> grow = [&](int depth) -> Expr {
    const int k = depth == 0 ? pick(rng) % 2 : pick(rng);
    switch (k) {
      case 0: return Expr::constant(num(rng));
      case 1: return Expr::variable(0);
      case 2: return Expr::unary(Expr::Op::Neg, grow(depth - 1));
      case 3: return Expr::unary(Expr::Op::Sin, grow(depth - 1));
      case 4: return Expr::unary(Expr::Op::Abs, grow(depth - 1));
      case 5: return Expr::binary(Expr::Op::Add, grow(depth - 1), grow(depth - 1));
      case 6: return Expr::binary(Expr::Op::Sub, grow(depth - 1), grow(depth - 1));
      case 7: return Expr::binary(Expr::Op::Mul, grow(depth - 1), grow(depth - 1));
      case 8: return Expr::binary(Expr::Op::Max, grow(depth - 1), grow(depth - 1));
      default: return Expr::binary(Expr::Op::Pow, grow(depth - 1), Expr::constant(2.0));
    }
  };
  for (int k = 0; k < 300; ++k) {
    const Expr e = grow(4);
    const Expr back = parse_expr(e.print());
    CAPTURE(e.print());
    CHECK(structurally_equal(e, back));
  }
}

TEST_CASE("default expression is the constant zero") {
  const Expr e;
  CHECK(e.is_constant());
  CHECK(e.eval(std::span<const double>{}) == 0.0);
}
