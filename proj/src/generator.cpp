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

#include "rswitch/generator.hpp"

#include <cmath>

#include "rswitch/error.hpp"

namespace rswitch {

SampleGrid::SampleGrid(int dimension, double lo, double hi, std::size_t n)
    : d_(dimension), lo_(lo), hi_(hi), n_(n) {
  if (dimension < 1) throw Error(ErrorCode::InvalidArgument, "grid dimension must be >= 1");
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "grid must contain at least one point");
  if (!(lo <= hi)) throw Error(ErrorCode::InvalidArgument, "grid requires lo <= hi");
}

std::size_t SampleGrid::size() const noexcept {
  std::size_t total = 1;
  for (int k = 0; k < d_; ++k) total *= n_;
  return total;
}

void SampleGrid::point(std::size_t k, std::span<double> out) const {
  for (int axis = 0; axis < d_; ++axis) {
    const std::size_t idx = k % n_;
    k /= n_;
    out[static_cast<std::size_t>(axis)] =
        n_ == 1 ? lo_ : lo_ + (hi_ - lo_) * static_cast<double>(idx) / static_cast<double>(n_ - 1);
  }
}

void SampleGrid::for_each(const std::function<void(std::span<const double>)>& f) const {
  std::vector<double> x(static_cast<std::size_t>(d_));
  const std::size_t total = size();
  for (std::size_t k = 0; k < total; ++k) {
    point(k, x);
    f(x);
  }
}

StateDependentGenerator::StateDependentGenerator(int dimension,
                                                 std::vector<std::vector<Expr>> rates,
                                                 double bound)
    : d_(dimension), rates_(std::move(rates)), bound_(bound) {
  const std::size_t m = rates_.size();
  if (m < 2) throw Error(ErrorCode::InvalidArgument, "generator needs at least two states");
  for (const auto& r : rates_) {
    if (r.size() != m) throw Error(ErrorCode::InvalidArgument, "rate table must be square");
    for (const auto& e : r) {
      if (e.arity() > d_) {
        throw Error(ErrorCode::InvalidArgument, "rate expression uses more variables than the dimension");
      }
    }
  }
  if (!(bound > 0.0) || !std::isfinite(bound)) {
    throw Error(ErrorCode::InvalidArgument, "rate bound H must be positive and finite");
  }
}

StateDependentGenerator StateDependentGenerator::constant(const Matrix& q, int dimension,
                                                          double bound) {
  const std::size_t m = q.rows();
  std::vector<std::vector<Expr>> rates(m, std::vector<Expr>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j) rates[i][j] = Expr::constant(q(i, j));
  return StateDependentGenerator(dimension, std::move(rates), bound);
}

void StateDependentGenerator::row(int i, std::span<const double> x, std::span<double> out) const {
  const auto& r = rates_[static_cast<std::size_t>(i)];
  for (std::size_t j = 0; j < r.size(); ++j) {
    out[j] = static_cast<int>(j) == i ? 0.0 : r[j].eval(x);
  }
}

Matrix StateDependentGenerator::at(std::span<const double> x) const {
  const std::size_t m = rates_.size();
  Matrix q(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    row(static_cast<int>(i), x, q.row(i));
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) total += q(i, j);
    q(i, i) = -total;
  }
  return q;
}

}  // namespace rswitch
