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

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "rswitch/expr.hpp"
#include "rswitch/matrix.hpp"

namespace rswitch {

// Tensor-product sample grid with `n` points per axis on [lo, hi]^d.
class SampleGrid {
 public:
  SampleGrid() = default;
  SampleGrid(int dimension, double lo, double hi, std::size_t n);

  int dimension() const noexcept { return d_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  std::size_t per_axis() const noexcept { return n_; }
  std::size_t size() const noexcept;

  void point(std::size_t k, std::span<double> out) const;

  // Calls f(x) for every grid point in index order.
  void for_each(const std::function<void(std::span<const double>)>& f) const;

 private:
  int d_ = 1;
  double lo_ = 0.0;
  double hi_ = 0.0;
  std::size_t n_ = 1;
};

// Off-diagonal switching rates q_ij(x) given as expressions, with the
// declared uniform bound H on every row total.
class StateDependentGenerator {
 public:
  StateDependentGenerator() = default;
  StateDependentGenerator(int dimension, std::vector<std::vector<Expr>> rates, double bound);

  // Constant generator lifted to the state-dependent interface.
  static StateDependentGenerator constant(const Matrix& q, int dimension, double bound);

  int dimension() const noexcept { return d_; }
  int states() const noexcept { return static_cast<int>(rates_.size()); }
  double bound() const noexcept { return bound_; }
  const Expr& rate_expr(int i, int j) const { return rates_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }

  // Off-diagonal rates of row i at x; out[i] is set to 0.
  void row(int i, std::span<const double> x, std::span<double> out) const;

  // Full conservative generator at x.
  Matrix at(std::span<const double> x) const;

 private:
  int d_ = 1;
  std::vector<std::vector<Expr>> rates_;
  double bound_ = 0.0;
};

}  // namespace rswitch
