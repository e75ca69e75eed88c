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
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rswitch/coupling.hpp"
#include "rswitch/error.hpp"
#include "rswitch/expr.hpp"

using namespace rswitch;

namespace {

StateDependentGenerator two_state(const char* q12, const char* q21, double bound) {
  std::vector<std::vector<Expr>> r(2, std::vector<Expr>(2));
  r[0][1] = parse_expr(q12, {1});
  r[1][0] = parse_expr(q21, {1});
  return StateDependentGenerator(1, std::move(r), bound);
}

StateDependentGenerator example_two_state() { return two_state("2 - sin(x)^2", "1 + abs(cos(x))", 2.0); }

StateDependentGenerator example_three_state() {
  const char* src[3][3] = {{nullptr, "1 + abs(cos(x))", "2 - sin(x)^2"},
                           {"1 + x^2/(1 + x^2)", nullptr, "1"},
                           {"2 + abs(sin(x))", "1 + abs(x)/(1 + abs(x))", nullptr}};
  std::vector<std::vector<Expr>> r(3, std::vector<Expr>(3));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (src[i][j]) r[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = parse_expr(src[i][j], {1});
    }
  }
  return StateDependentGenerator(1, std::move(r), 5.0);
}

const Matrix kQbar2{{-2, 2}, {1, -1}};
const Matrix kQstar2{{-1, 1}, {2, -2}};
const Matrix kQbar3{{-4, 2, 2}, {1, -3, 2}, {2, 1, -3}};
const Matrix kQstar3{{-2, 1, 1}, {3, -3, 0}, {3, 2, -5}};

}  // namespace

TEST_CASE("two-state envelopes from a grid") {
  const SampleGrid grid(1, -10.0, 10.0, 20001);
  const auto env = two_state_envelopes(example_two_state(), grid);
  CHECK(env.source == EnvelopeSource::GridCertified);
  CHECK(env.qbar(0, 1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(env.qstar(0, 1) == doctest::Approx(1.0).epsilon(1e-6));
  // inf/sup of 1 + |cos x| are only approached on the grid.
  CHECK(std::abs(env.qbar(1, 0) - 1.0) < 1e-3);
  CHECK(env.qstar(1, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(env.qbar21_positive);
  CHECK(env.qstar12_positive);
  CHECK(env.qbar(0, 0) == -env.qbar(0, 1));

  const auto flat = two_state_envelopes(two_state("0.7", "1.3", 2.0), grid);
  CHECK(flat.qbar == flat.qstar);
  CHECK(flat.qbar(0, 1) == 0.7);
  CHECK(flat.qbar(1, 0) == 1.3);
}

TEST_CASE("refining a nested grid tightens the envelopes monotonically") {
  const auto g = example_two_state();
  double prev12 = -1.0, prev21 = 1e300;
  for (std::size_t n : {11u, 21u, 41u, 81u, 161u, 321u}) {
    const auto env = two_state_envelopes(g, SampleGrid(1, -3.0, 3.0, n));
    CHECK(env.qbar(0, 1) >= prev12);
    CHECK(env.qbar(1, 0) <= prev21);
    prev12 = env.qbar(0, 1);
    prev21 = env.qbar(1, 0);
  }
}

TEST_CASE("two-state conditions") {
  EnvelopePair env;
  env.qbar = kQbar2;
  env.qstar = kQstar2;
  const SampleGrid grid(1, -4.0, 4.0, 8001);
  const auto c = check_two_state_conditions(env, example_two_state(), grid);
  CHECK_FALSE(c.upper.holds);
  REQUIRE(c.upper.witness);
  // q12 + q21 bottoms out at 2 where sin^2 = 1 and cos = 0.
  const double w = (*c.upper.witness)[0];
  CHECK(std::abs(std::cos(w)) < 2e-3);
  // The grid spacing is 1e-3, so |cos| at the nearest node is below 5e-4.
  CHECK(c.upper.margin <= -1.0 + 5e-4);
  CHECK(c.upper.margin >= -1.0);

  EnvelopePair flat;
  flat.qbar = Matrix{{-0.7, 0.7}, {1.3, -1.3}};
  flat.qstar = flat.qbar;
  const auto fc = check_two_state_conditions(flat, two_state("0.7", "1.3", 2.0), grid);
  CHECK(fc.upper.holds);
  CHECK(fc.lower.holds);
  CHECK(fc.upper.margin == doctest::Approx(0.0));

  EnvelopePair eq;
  eq.qbar = Matrix{{-2, 2}, {1, -1}};
  eq.qstar = Matrix{{-1, 1}, {2, -2}};
  const auto ec = check_two_state_conditions(eq, two_state("1.5 + 0.5*sin(x)", "1.5 - 0.5*sin(x)", 2.0), grid);
  CHECK(ec.upper.holds);
  CHECK(ec.lower.holds);
}

TEST_CASE("domination for the examples") {
  const SampleGrid grid(1, -10.0, 10.0, 4001);
  CHECK(check_domination(example_two_state(), kQbar2, grid).holds);
  CHECK(check_lower(kQstar2, example_two_state(), grid).holds);

  CHECK(check_lower(kQstar3, example_three_state(), grid).holds);
  const auto up = check_domination(example_three_state(), kQbar3, grid);
  CHECK_FALSE(up.holds);
  REQUIRE_FALSE(up.violations.empty());
  const auto& v = up.violations.front();
  CHECK(v.i1 == 2);
  CHECK(v.i2 == 3);
  CHECK(v.m == 1);
  CHECK_FALSE(v.tail);
  CHECK(v.margin == doctest::Approx(-1.0));
  CHECK(v.x[0] == doctest::Approx(0.0).epsilon(1e-9));

  // The three-state upper envelope is not monotone itself: row 2 heads at 1,
  // row 3 at 2.
  const auto self = check_preorder(kQbar3, kQbar3);
  CHECK_FALSE(self.holds);
  CHECK(self.tightest_margin == doctest::Approx(-1.0));
  CHECK(check_preorder(kQstar2, kQstar2).holds);
  CHECK_FALSE(check_preorder(kQbar2, kQstar2).holds);
  CHECK(check_preorder(kQstar2, kQbar2).holds);
}

TEST_CASE("basic coupling") {
  const Matrix q1{{-1, 1}, {2, -2}};
  const Matrix q2{{-2, 2}, {1, -1}};
  const auto row = basic_coupling(q1.row(1), q2.row(0), 1, 0);
  const auto d = verify_coupling_row(row, q1, q2, 1, 0);
  CHECK(d.max_marginal_residual < 1e-15);
  CHECK(d.negative_rates == 0);
  // Lambda1 leaves 2 for 1 at rate 2, Lambda2 leaves 1 for 2 at rate 2; the
  // only common target is none, so the moves are separate.
  CHECK(row(0, 0) == 2.0);
  CHECK(row(1, 1) == 2.0);
  CHECK(row(1, 0) == -4.0);

  const auto same = basic_coupling(q2.row(1), q2.row(1), 1, 1);
  for (std::size_t m = 0; m < 2; ++m) {
    for (std::size_t n = 0; n < 2; ++n) {
      if (m != n) CHECK(same(m, n) == 0.0);
    }
  }

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  for (int k = 0; k < 200; ++k) {
    const std::size_t m = 2 + static_cast<std::size_t>(k % 4);
    const Matrix a = oracle::random_generator(rng, m, 0.0, 3.0);
    const Matrix b = oracle::random_generator(rng, m, 0.0, 3.0);
    const int i = static_cast<int>(m) - 1, j = 0;
    const auto r = basic_coupling(a.row(static_cast<std::size_t>(i)), b.row(0), i, j);
    const auto dd = verify_coupling_row(r, a, b, i, j);
    CHECK(dd.max_marginal_residual < 1e-12);
    CHECK(dd.negative_rates == 0);
    CHECK(dd.max_row_sum_residual < 1e-12);
  }
}

TEST_CASE("order-preserving recursion by hand") {
  const auto row = order_preserving_coupling(kQstar2, kQbar2, 0, 0);
  CHECK(row(1, 1) == doctest::Approx(1.0));
  CHECK(row(0, 1) == doctest::Approx(1.0));
  CHECK(row(1, 0) == 0.0);
  CHECK(row(0, 0) == doctest::Approx(-2.0));
  CHECK(verify_coupling_row(row, kQstar2, kQbar2, 0, 0).clean());

  const auto sync = order_preserving_coupling(kQbar3, kQbar3, 1, 1);
  for (std::size_t m = 0; m < 3; ++m) {
    for (std::size_t n = 0; n < 3; ++n) {
      if (m != n) CHECK(sync(m, n) == 0.0);
    }
  }
  CHECK_THROWS_AS(order_preserving_coupling(kQbar2, kQbar2, 1, 0), Error);
}

TEST_CASE("random dominated pairs couple cleanly") {
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 300; ++k) {
    const auto m = static_cast<std::size_t>(2 + k % 5);
    const auto pair = oracle::random_dominated_pair(rng, m);
    REQUIRE(check_preorder(pair.q1, pair.q2).holds);
    const auto d = verify_coupling_matrix(build_coupling_matrix(pair.q1, pair.q2), pair.q1, pair.q2);
    CAPTURE(k);
    CHECK(d.clean());
    CHECK(d.max_marginal_residual <= 1e-10);
    CHECK(d.order_violations == 0);
  }
}

TEST_CASE("verification catches a corrupted rate") {
  Matrix c = build_coupling_matrix(kQstar2, kQbar2);
  CHECK(verify_coupling_matrix(c, kQstar2, kQbar2).clean());
  c(0, 3) += 0.25;  // (1,1) -> (2,2)
  c(0, 0) -= 0.25;
  const auto d = verify_coupling_matrix(c, kQstar2, kQbar2);
  CHECK_FALSE(d.clean());
  CHECK(d.max_marginal_residual == doctest::Approx(0.25));

  Matrix crossing = build_coupling_matrix(kQstar2, kQbar2);
  crossing(1, 2) += 1.0;  // (1,2) -> (2,1)
  crossing(1, 1) -= 1.0;
  CHECK(verify_coupling_matrix(crossing, kQstar2, kQbar2).order_violations == 1);
}

TEST_CASE("Skorokhod partition") {
  const auto g = two_state("1.5", "0.5", 2.0);
  const std::vector<double> x{0.0};
  const auto p = skorokhod_partition(g, 0, x);
  CHECK(p.mark_space == 4.0);
  REQUIRE(p.intervals.size() == 1);
  CHECK(p.intervals[0].lo == 0.0);
  CHECK(p.intervals[0].hi == 1.5);
  CHECK(p.intervals[0].target == 1);
  CHECK(p.target(1.49) == 1);
  CHECK(p.target(1.5) == -1);
  CHECK(p.target(3.9) == -1);

  const auto p2 = skorokhod_partition(g, 1, x);
  REQUIRE(p2.intervals.size() == 1);
  CHECK(p2.intervals[0].lo == 1.5);  // after row 1's total
  CHECK(p2.intervals[0].hi == 2.0);
  CHECK(p2.target(1.0) == -1);

  const Matrix q{{-3, 0, 3}, {1, -2, 1}, {0.5, 0.5, -1}};
  const auto p3 = skorokhod_partition(q, 3.0, 1);
  double len = 0.0;
  double prev = p3.intervals.front().lo;
  for (const auto& iv : p3.intervals) {
    CHECK(iv.lo == prev);
    prev = iv.hi;
    len += iv.hi - iv.lo;
  }
  CHECK(len == doctest::Approx(2.0));
  CHECK(p3.total == doctest::Approx(2.0));
  CHECK(p3.intervals.size() == 2);  // the zero rate leaves no interval
  CHECK(p3.mark_space == mark_space_length(3, 3.0));
  CHECK(p3.intervals.back().hi <= p3.mark_space);

  CHECK_THROWS_AS(skorokhod_partition(q, 2.5, 0), Error);
}
