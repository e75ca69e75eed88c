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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rswitch {

// Scalar expressions over x1..xd used for state-dependent rates and
// coefficients.
//
// Grammar (highest precedence first):
//
//   primary  := number | xN | x | fn '(' args ')' | '(' sum ')'
//   unary    := ('-' | '+') unary | primary
//   power    := unary ('^' power)?            right-associative
//   product  := power (('*' | '/') power)*
//   sum      := product (('+' | '-') product)*
//
//   fn: abs sin cos sqrt (one argument), pow min max (two arguments)
//
// `x` is accepted as an alias of `x1` unless the parse dimension is > 1.
// Unary minus binds tighter than `^`, so "-2^2" is 4.
// A minus sign directly before a numeric literal becomes part of the constant.
class Expr {
 public:
  enum class Op : std::uint8_t {
    Number,
    Var,
    Neg,
    Abs,
    Sin,
    Cos,
    Sqrt,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Min,
    Max,
  };

  struct Node {
    Op op = Op::Number;
    double value = 0.0;  // Number
    std::int32_t var = 0;  // Var: zero-based variable index
    std::int32_t lhs = -1;
    std::int32_t rhs = -1;
  };

  Expr() : nodes_{Node{}}, root_(0) {}  // the constant 0

  static Expr constant(double v);
  static Expr variable(int index);  // zero-based

  // Builders used by generators and tests.
  static Expr unary(Op op, const Expr& arg);
  static Expr binary(Op op, const Expr& lhs, const Expr& rhs);

  // Number of variables the expression needs (max index + 1).
  int arity() const noexcept { return arity_; }
  bool is_constant() const noexcept { return arity_ == 0; }

  // IEEE double evaluation. Throws NumericError on division by zero, sqrt
  // of a negative number, an undefined power, or a non-finite result.
  double eval(std::span<const double> x) const;
  double eval(std::initializer_list<double> x) const {
    return eval(std::span<const double>(x.begin(), x.size()));
  }

  // Canonical text; parse(print()) reproduces the same tree.
  std::string print() const;

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::int32_t root() const noexcept { return root_; }

  friend bool structurally_equal(const Expr& a, const Expr& b);

 private:
  friend class ExprParser;

  std::int32_t append(const Expr& other);
  void print_node(std::int32_t i, std::string& out) const;

  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
  int arity_ = 0;
};

struct ParseOptions {
  // 0 means "unknown"; otherwise variables beyond x<dimension> are rejected.
  int dimension = 0;
};

// Throws ParseError with the byte offset of the first problem.
Expr parse_expr(std::string_view source, ParseOptions options = {});

}  // namespace rswitch
