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

#include "rswitch/expr.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <string>

#include "rswitch/error.hpp"

namespace rswitch {

namespace {

bool is_unary_fn(Expr::Op op) {
  return op == Expr::Op::Neg || op == Expr::Op::Abs || op == Expr::Op::Sin ||
         op == Expr::Op::Cos || op == Expr::Op::Sqrt;
}

const char* fn_name(Expr::Op op) {
  switch (op) {
    case Expr::Op::Abs: return "abs";
    case Expr::Op::Sin: return "sin";
    case Expr::Op::Cos: return "cos";
    case Expr::Op::Sqrt: return "sqrt";
    case Expr::Op::Min: return "min";
    case Expr::Op::Max: return "max";
    default: return "?";
  }
}

const char* infix_symbol(Expr::Op op) {
  switch (op) {
    case Expr::Op::Add: return " + ";
    case Expr::Op::Sub: return " - ";
    case Expr::Op::Mul: return " * ";
    case Expr::Op::Div: return " / ";
    case Expr::Op::Pow: return " ^ ";
    default: return nullptr;
  }
}

void append_number(double v, std::string& out) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

}  // namespace

Expr Expr::constant(double v) {
  Expr e;
  e.nodes_.clear();
  e.nodes_.push_back(Node{Op::Number, v, 0, -1, -1});
  e.root_ = 0;
  e.arity_ = 0;
  return e;
}

Expr Expr::variable(int index) {
  if (index < 0) throw Error(ErrorCode::InvalidArgument, "negative variable index");
  Expr e;
  e.nodes_.clear();
  e.nodes_.push_back(Node{Op::Var, 0.0, index, -1, -1});
  e.root_ = 0;
  e.arity_ = index + 1;
  return e;
}

std::int32_t Expr::append(const Expr& other) {
  const auto offset = static_cast<std::int32_t>(nodes_.size());
  for (Node n : other.nodes_) {
    if (n.lhs >= 0) n.lhs += offset;
    if (n.rhs >= 0) n.rhs += offset;
    nodes_.push_back(n);
  }
  arity_ = std::max(arity_, other.arity_);
  return other.root_ + offset;
}

Expr Expr::unary(Op op, const Expr& arg) {
  if (!is_unary_fn(op)) throw Error(ErrorCode::InvalidArgument, "not a unary operator");
  Expr e;
  e.nodes_.clear();
  e.arity_ = 0;
  const auto a = e.append(arg);
  e.nodes_.push_back(Node{op, 0.0, 0, a, -1});
  e.root_ = static_cast<std::int32_t>(e.nodes_.size() - 1);
  return e;
}

Expr Expr::binary(Op op, const Expr& lhs, const Expr& rhs) {
  if (op < Op::Add) throw Error(ErrorCode::InvalidArgument, "not a binary operator");
  Expr e;
  e.nodes_.clear();
  e.arity_ = 0;
  const auto a = e.append(lhs);
  const auto b = e.append(rhs);
  e.nodes_.push_back(Node{op, 0.0, 0, a, b});
  e.root_ = static_cast<std::int32_t>(e.nodes_.size() - 1);
  return e;
}

double Expr::eval(std::span<const double> x) const {
  if (static_cast<int>(x.size()) < arity_) {
    throw Error(ErrorCode::InvalidArgument,
                "expression uses x" + std::to_string(arity_) + " but only " +
                    std::to_string(x.size()) + " values were supplied");
  }
  // Nodes are stored children-first with the root last, so one forward pass
  // evaluates the tree.
  constexpr std::size_t kInline = 64;
  double inline_values[kInline];
  std::vector<double> spill;
  double* v = inline_values;
  if (nodes_.size() > kInline) {
    spill.resize(nodes_.size());
    v = spill.data();
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    const double a = n.lhs >= 0 ? v[n.lhs] : 0.0;
    const double b = n.rhs >= 0 ? v[n.rhs] : 0.0;
    double r = 0.0;
    switch (n.op) {
      case Op::Number: r = n.value; break;
      case Op::Var: r = x[static_cast<std::size_t>(n.var)]; break;
      case Op::Neg: r = -a; break;
      case Op::Abs: r = std::abs(a); break;
      case Op::Sin: r = std::sin(a); break;
      case Op::Cos: r = std::cos(a); break;
      case Op::Sqrt:
        if (a < 0.0) throw NumericError("sqrt of negative value " + std::to_string(a));
        r = std::sqrt(a);
        break;
      case Op::Add: r = a + b; break;
      case Op::Sub: r = a - b; break;
      case Op::Mul: r = a * b; break;
      case Op::Div:
        if (b == 0.0) throw NumericError("division by zero");
        r = a / b;
        break;
      case Op::Pow:
        if (a == 0.0 && b < 0.0) throw NumericError("division by zero in power");
        r = b == 2.0 ? a * a : std::pow(a, b);
        if (std::isnan(r)) throw NumericError("power of negative base with non-integer exponent");
        break;
      case Op::Min: r = std::min(a, b); break;
      case Op::Max: r = std::max(a, b); break;
    }
    v[i] = r;
  }
  const double result = v[nodes_.size() - 1];
  if (!std::isfinite(result)) throw NumericError("expression overflowed to a non-finite value");
  return result;
}

std::string Expr::print() const {
  std::string out;
  print_node(root_, out);
  return out;
}

void Expr::print_node(std::int32_t i, std::string& out) const {
  const Node& n = nodes_[static_cast<std::size_t>(i)];
  switch (n.op) {
    case Op::Number:
      if (n.value < 0.0 || std::signbit(n.value)) {
        out += "(-";
        append_number(-n.value, out);
        out += ")";
      } else {
        append_number(n.value, out);
      }
      return;
    case Op::Var:
      out += "x" + std::to_string(n.var + 1);
      return;
    case Op::Neg: {
      // Keep the operand apart from the sign so it does not fold into a literal.
      const bool literal = nodes_[static_cast<std::size_t>(n.lhs)].op == Op::Number;
      out += literal ? "(-(" : "(-";
      print_node(n.lhs, out);
      out += literal ? "))" : ")";
      return;
    }
    case Op::Abs:
    case Op::Sin:
    case Op::Cos:
    case Op::Sqrt:
      out += fn_name(n.op);
      out += "(";
      print_node(n.lhs, out);
      out += ")";
      return;
    case Op::Min:
    case Op::Max:
      out += fn_name(n.op);
      out += "(";
      print_node(n.lhs, out);
      out += ", ";
      print_node(n.rhs, out);
      out += ")";
      return;
    default:
      out += "(";
      print_node(n.lhs, out);
      out += infix_symbol(n.op);
      print_node(n.rhs, out);
      out += ")";
      return;
  }
}

bool structurally_equal(const Expr& a, const Expr& b) {
  std::function<bool(std::int32_t, std::int32_t)> eq = [&](std::int32_t i, std::int32_t j) {
    const auto& na = a.nodes_[static_cast<std::size_t>(i)];
    const auto& nb = b.nodes_[static_cast<std::size_t>(j)];
    if (na.op != nb.op) return false;
    switch (na.op) {
      case Expr::Op::Number: return na.value == nb.value;
      case Expr::Op::Var: return na.var == nb.var;
      default: break;
    }
    if (!eq(na.lhs, nb.lhs)) return false;
    if (na.rhs >= 0 || nb.rhs >= 0) {
      if (na.rhs < 0 || nb.rhs < 0) return false;
      return eq(na.rhs, nb.rhs);
    }
    return true;
  };
  return eq(a.root_, b.root_);
}

// Recursive-descent parser. One token of lookahead over raw characters.
class ExprParser {
 public:
  ExprParser(std::string_view src, ParseOptions opt) : src_(src), opt_(opt) {}

  Expr run() {
    Expr e = sum();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' ||
                                  src_[pos_] == '\n' || src_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  Expr sum() {
    Expr lhs = product();
    for (;;) {
      if (accept('+')) {
        lhs = Expr::binary(Expr::Op::Add, lhs, product());
      } else if (accept('-')) {
        lhs = Expr::binary(Expr::Op::Sub, lhs, product());
      } else {
        return lhs;
      }
    }
  }

  Expr product() {
    Expr lhs = power();
    for (;;) {
      if (accept('*')) {
        lhs = Expr::binary(Expr::Op::Mul, lhs, power());
      } else if (accept('/')) {
        lhs = Expr::binary(Expr::Op::Div, lhs, power());
      } else {
        return lhs;
      }
    }
  }

  Expr power() {
    Expr base = unary();
    if (accept('^')) return Expr::binary(Expr::Op::Pow, base, power());
    return base;
  }

  Expr unary() {
    if (accept('-')) {
      // A sign directly on a literal is part of the constant.
      if (pos_ < src_.size() && ((src_[pos_] >= '0' && src_[pos_] <= '9') || src_[pos_] == '.')) {
        return number(true);
      }
      return Expr::unary(Expr::Op::Neg, unary());
    }
    if (accept('+')) return unary();
    return primary();
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (accept('(')) {
      Expr inner = sum();
      expect(')');
      return inner;
    }
    if ((c >= '0' && c <= '9') || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  Expr number(bool negative = false) {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9') ++pos_;
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9') {
        digits();
      } else {
        pos_ = save;
      }
    }
    double v = 0.0;
    auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != src_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    return Expr::constant(negative ? -v : v);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = src_.substr(start, pos_ - start);

    skip_ws();
    const bool call = pos_ < src_.size() && src_[pos_] == '(';
    if (!call) return variable(name, start);

    Expr::Op op;
    int want;
    if (name == "abs") { op = Expr::Op::Abs; want = 1; }
    else if (name == "sin") { op = Expr::Op::Sin; want = 1; }
    else if (name == "cos") { op = Expr::Op::Cos; want = 1; }
    else if (name == "sqrt") { op = Expr::Op::Sqrt; want = 1; }
    else if (name == "pow") { op = Expr::Op::Pow; want = 2; }
    else if (name == "min") { op = Expr::Op::Min; want = 2; }
    else if (name == "max") { op = Expr::Op::Max; want = 2; }
    else {
      pos_ = start;
      fail("unknown function '" + std::string(name) + "'");
    }

    expect('(');
    std::vector<Expr> args;
    if (!accept(')')) {
      do {
        args.push_back(sum());
      } while (accept(','));
      expect(')');
    }
    if (static_cast<int>(args.size()) != want) {
      pos_ = start;
      fail("function '" + std::string(name) + "' takes " + std::to_string(want) +
           " argument(s), got " + std::to_string(args.size()));
    }
    return want == 1 ? Expr::unary(op, args[0]) : Expr::binary(op, args[0], args[1]);
  }

  Expr variable(std::string_view name, std::size_t start) {
    if (name == "x") {
      if (opt_.dimension > 1) {
        pos_ = start;
        fail("'x' is ambiguous when the dimension is " + std::to_string(opt_.dimension) +
             "; use x1..x" + std::to_string(opt_.dimension));
      }
      return Expr::variable(0);
    }
    if (name.size() >= 2 && name[0] == 'x' && name[1] != '0') {
      int index = 0;
      auto res = std::from_chars(name.data() + 1, name.data() + name.size(), index);
      if (res.ec == std::errc() && res.ptr == name.data() + name.size() && index >= 1) {
        if (opt_.dimension > 0 && index > opt_.dimension) {
          pos_ = start;
          fail("variable " + std::string(name) + " exceeds dimension " +
               std::to_string(opt_.dimension));
        }
        return Expr::variable(index - 1);
      }
    }
    pos_ = start;
    fail("unknown identifier '" + std::string(name) + "'");
  }

  std::string_view src_;
  ParseOptions opt_;
  std::size_t pos_ = 0;
};

Expr parse_expr(std::string_view source, ParseOptions options) {
  return ExprParser(source, options).run();
}

}  // namespace rswitch
