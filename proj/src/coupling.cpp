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

#include "rswitch/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include "rswitch/error.hpp"

namespace rswitch {

namespace {

double pos(double v) { return v > 0.0 ? v : 0.0; }

void require_two_states(const StateDependentGenerator& g, const char* who) {
  if (g.states() != 2) {
    throw Error(ErrorCode::InvalidArgument, std::string(who) + " requires exactly two states");
  }
}

void require_pair(const Matrix& q1, const Matrix& q2, int i, int j) {
  if (!q1.square() || q1.rows() != q2.rows() || q2.cols() != q1.cols()) {
    throw Error(ErrorCode::InvalidArgument, "coupling: generators must be square and the same size");
  }
  const int m = static_cast<int>(q1.rows());
  if (i < 0 || j < 0 || i >= m || j >= m) {
    throw Error(ErrorCode::InvalidArgument, "coupling: product state out of range");
  }
}

// Partial-sum inequalities of the preorder for one pair of matrices. Calls
// visit(tail, i1, i2, m, margin) with a nonnegative margin when satisfied.
template <typename Visit>
void preorder_margins(const Matrix& q1, const Matrix& q2, Visit&& visit) {
  const int n = static_cast<int>(q1.rows());
  auto off = [](const Matrix& q, int i, int l) { return i == l ? 0.0 : q(i, l); };
  for (int i1 = 0; i1 < n; ++i1) {
    for (int i2 = i1; i2 < n; ++i2) {
      for (int m = i2 + 1; m < n; ++m) {
        double s1 = 0.0, s2 = 0.0;
        for (int l = m; l < n; ++l) {
          s1 += off(q1, i1, l);
          s2 += off(q2, i2, l);
        }
        visit(true, i1, i2, m, s2 - s1);
      }
      for (int m = 0; m < i1; ++m) {
        double s1 = 0.0, s2 = 0.0;
        for (int l = 0; l <= m; ++l) {
          s1 += off(q1, i1, l);
          s2 += off(q2, i2, l);
        }
        visit(false, i1, i2, m, s1 - s2);
      }
    }
  }
}

DominationReport check_over_grid(const SampleGrid& grid, double tol,
                                 const std::function<std::pair<Matrix, Matrix>(std::span<const double>)>& pair_at) {
  DominationReport rep;
  rep.tightest_margin = std::numeric_limits<double>::infinity();
  std::map<std::tuple<bool, int, int, int>, DominationViolation> worst;
  grid.for_each([&](std::span<const double> x) {
    const auto [q1, q2] = pair_at(x);
    preorder_margins(q1, q2, [&](bool tail, int i1, int i2, int m, double margin) {
      rep.tightest_margin = std::min(rep.tightest_margin, margin);
      if (margin < -tol) {
        auto key = std::make_tuple(tail, i1, i2, m);
        auto it = worst.find(key);
        if (it == worst.end() || margin < it->second.margin) {
          worst[key] = DominationViolation{std::vector<double>(x.begin(), x.end()), i1 + 1, i2 + 1,
                                           m + 1, tail, margin};
        }
      }
    });
  });
  for (auto& [key, v] : worst) rep.violations.push_back(std::move(v));
  rep.holds = rep.violations.empty();
  if (!std::isfinite(rep.tightest_margin)) rep.tightest_margin = 0.0;
  return rep;
}

}  // namespace

EnvelopePair two_state_envelopes(const StateDependentGenerator& g, const SampleGrid& grid) {
  require_two_states(g, "two_state_envelopes");
  if (grid.size() == 0) throw Error(ErrorCode::InvalidArgument, "two_state_envelopes: empty grid");
  double sup12 = -std::numeric_limits<double>::infinity();
  double inf12 = std::numeric_limits<double>::infinity();
  double sup21 = -std::numeric_limits<double>::infinity();
  double inf21 = std::numeric_limits<double>::infinity();
  grid.for_each([&](std::span<const double> x) {
    const double q12 = g.rate_expr(0, 1).eval(x);
    const double q21 = g.rate_expr(1, 0).eval(x);
    sup12 = std::max(sup12, q12);
    inf12 = std::min(inf12, q12);
    sup21 = std::max(sup21, q21);
    inf21 = std::min(inf21, q21);
  });
  EnvelopePair env;
  env.qbar = Matrix{{-sup12, sup12}, {inf21, -inf21}};
  env.qstar = Matrix{{-inf12, inf12}, {sup21, -sup21}};
  env.source = EnvelopeSource::GridCertified;
  env.qbar21_positive = inf21 > 0.0;
  env.qstar12_positive = inf12 > 0.0;
  return env;
}

TwoStateConditions check_two_state_conditions(const EnvelopePair& env,
                                              const StateDependentGenerator& g,
                                              const SampleGrid& grid) {
  require_two_states(g, "check_two_state_conditions");
  const double upper_sum = env.qbar(0, 1) + env.qbar(1, 0);
  const double lower_sum = env.qstar(0, 1) + env.qstar(1, 0);
  TwoStateConditions out;
  out.upper.margin = std::numeric_limits<double>::infinity();
  out.lower.margin = std::numeric_limits<double>::infinity();
  grid.for_each([&](std::span<const double> x) {
    const double s = g.rate_expr(0, 1).eval(x) + g.rate_expr(1, 0).eval(x);
    const double up = s - upper_sum;
    const double lo = lower_sum - s;
    if (up < out.upper.margin) {
      out.upper.margin = up;
      out.upper.witness = std::vector<double>(x.begin(), x.end());
    }
    if (lo < out.lower.margin) {
      out.lower.margin = lo;
      out.lower.witness = std::vector<double>(x.begin(), x.end());
    }
  });
  constexpr double kTol = 1e-12;
  out.upper.holds = out.upper.margin >= -kTol;
  out.lower.holds = out.lower.margin >= -kTol;
  if (out.upper.holds) out.upper.witness.reset();
  if (out.lower.holds) out.lower.witness.reset();
  return out;
}

DominationReport check_preorder(const Matrix& q1, const Matrix& q2, double tol) {
  if (!q1.square() || q1.rows() != q2.rows()) {
    throw Error(ErrorCode::InvalidArgument, "check_preorder: size mismatch");
  }
  DominationReport rep;
  rep.tightest_margin = std::numeric_limits<double>::infinity();
  preorder_margins(q1, q2, [&](bool tail, int i1, int i2, int m, double margin) {
    rep.tightest_margin = std::min(rep.tightest_margin, margin);
    if (margin < -tol) rep.violations.push_back({{}, i1 + 1, i2 + 1, m + 1, tail, margin});
  });
  rep.holds = rep.violations.empty();
  if (!std::isfinite(rep.tightest_margin)) rep.tightest_margin = 0.0;
  return rep;
}

DominationReport check_domination(const StateDependentGenerator& g, const Matrix& qbar,
                                  const SampleGrid& grid, double tol) {
  return check_over_grid(grid, tol, [&](std::span<const double> x) {
    return std::make_pair(g.at(x), qbar);
  });
}

DominationReport check_lower(const Matrix& qstar, const StateDependentGenerator& g,
                             const SampleGrid& grid, double tol) {
  return check_over_grid(grid, tol, [&](std::span<const double> x) {
    return std::make_pair(qstar, g.at(x));
  });
}

CouplingRow basic_coupling(std::span<const double> row1, std::span<const double> row2, int i,
                           int j) {
  const std::size_t m = row1.size();
  if (row2.size() != m) throw Error(ErrorCode::InvalidArgument, "basic_coupling: row size mismatch");
  const auto ui = static_cast<std::size_t>(i);
  const auto uj = static_cast<std::size_t>(j);
  CouplingRow r(m, m);
  for (std::size_t k = 0; k < m; ++k) {
    const double a = k == ui ? 0.0 : row1[k];
    const double b = k == uj ? 0.0 : row2[k];
    if (k != ui) r(k, uj) += pos(a - b);
    if (k != uj) r(ui, k) += pos(b - a);
    if (k != ui || k != uj) r(k, k) += std::min(a, b);
  }
  r(ui, uj) = 0.0;
  double total = 0.0;
  for (double v : r.data()) total += v;
  r(ui, uj) = -total;
  return r;
}

CouplingRow order_preserving_coupling(const Matrix& q1, const Matrix& q2, int i, int j) {
  require_pair(q1, q2, i, j);
  if (i > j) throw Error(ErrorCode::InvalidArgument, "order_preserving_coupling requires i <= j");
  const int m = static_cast<int>(q1.rows());
  auto at = [m](int r, int c) { return static_cast<std::size_t>(r * m + c); };
  std::vector<double> a(static_cast<std::size_t>(m * m), 0.0);
  std::vector<double> b(static_cast<std::size_t>(m * m), 0.0);
  for (int n = 0; n < m; ++n) {
    a[at(n, n)] = n == i ? 0.0 : q1(i, n);
    b[at(n, n)] = n == j ? 0.0 : q2(j, n);
    for (int r = n - 1; r >= 0; --r) {
      a[at(r, n)] = pos(a[at(r, n - 1)]) - pos(b[at(r, n - 1)]);
      b[at(r, n)] = pos(b[at(r + 1, n)]) - pos(a[at(r + 1, n)]);
    }
  }

  CouplingRow rate(static_cast<std::size_t>(m), static_cast<std::size_t>(m));
  auto R = [&](int r, int c) -> double& {
    return rate(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
  };
  for (int n = 0; n < m; ++n) {
    for (int r = 0; r <= n; ++r) {
      if (r != i && n != j) R(r, n) = std::min(pos(a[at(r, n)]), pos(b[at(r, n)]));
    }
  }
  // Upper chain alone: fills the rest of q2(j, n).
  for (int n = i; n < m; ++n) {
    if (n == j) continue;
    double used = 0.0;
    for (int r = 0; r <= n; ++r)
      if (r != i) used += R(r, n);
    R(i, n) = q2(j, n) - used;
  }
  // Lower chain alone: fills the rest of q1(i, r).
  for (int r = 0; r <= j; ++r) {
    if (r == i) continue;
    double used = 0.0;
    for (int n = r; n < m; ++n)
      if (n != j) used += R(r, n);
    R(r, j) = q1(i, r) - used;
  }
  R(i, j) = 0.0;
  double total = 0.0;
  for (double v : rate.data()) total += v;
  R(i, j) = -total;
  return rate;
}

CouplingRow coupling_row(const Matrix& q1, const Matrix& q2, int i, int j) {
  require_pair(q1, q2, i, j);
  if (i <= j) return order_preserving_coupling(q1, q2, i, j);
  return basic_coupling(q1.row(static_cast<std::size_t>(i)), q2.row(static_cast<std::size_t>(j)),
                        i, j);
}

CouplingDiagnostics verify_coupling_row(const CouplingRow& row, const Matrix& q1, const Matrix& q2,
                                        int i, int j, double tol) {
  CouplingDiagnostics d;
  const int m = static_cast<int>(q1.rows());
  auto R = [&](int r, int c) { return row(static_cast<std::size_t>(r), static_cast<std::size_t>(c)); };
  auto label = [](int r, int c) {
    return "(" + std::to_string(r + 1) + "," + std::to_string(c + 1) + ")";
  };
  double sum = 0.0;
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) {
      sum += R(r, c);
      if (r == i && c == j) continue;
      if (R(r, c) < -tol) {
        ++d.negative_rates;
        std::ostringstream os;
        os << "negative rate " << R(r, c) << " from " << label(i, j) << " to " << label(r, c);
        d.issues.push_back(os.str());
      }
      if (i <= j && r > c && R(r, c) > tol) {
        ++d.order_violations;
        std::ostringstream os;
        os << "order-violating rate " << R(r, c) << " from " << label(i, j) << " to " << label(r, c);
        d.issues.push_back(os.str());
      }
    }
  }
  d.max_row_sum_residual = std::abs(sum);
  if (d.max_row_sum_residual > tol) {
    std::ostringstream os;
    os << "row " << label(i, j) << " sums to " << sum;
    d.issues.push_back(os.str());
  }
  for (int r = 0; r < m; ++r) {
    if (r != i) {
      double s = 0.0;
      for (int c = 0; c < m; ++c) s += R(r, c);
      const double res = std::abs(s - q1(static_cast<std::size_t>(i), static_cast<std::size_t>(r)));
      d.max_marginal_residual = std::max(d.max_marginal_residual, res);
      if (res > tol) {
        std::ostringstream os;
        os << "first marginal from " << label(i, j) << " to state " << r + 1 << " off by " << res;
        d.issues.push_back(os.str());
      }
    }
  }
  for (int c = 0; c < m; ++c) {
    if (c != j) {
      double s = 0.0;
      for (int r = 0; r < m; ++r) s += R(r, c);
      const double res = std::abs(s - q2(static_cast<std::size_t>(j), static_cast<std::size_t>(c)));
      d.max_marginal_residual = std::max(d.max_marginal_residual, res);
      if (res > tol) {
        std::ostringstream os;
        os << "second marginal from " << label(i, j) << " to state " << c + 1 << " off by " << res;
        d.issues.push_back(os.str());
      }
    }
  }
  return d;
}

Matrix build_coupling_matrix(const Matrix& q1, const Matrix& q2) {
  const std::size_t m = q1.rows();
  Matrix full(m * m, m * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const CouplingRow r = coupling_row(q1, q2, static_cast<int>(i), static_cast<int>(j));
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) full(i * m + j, a * m + b) = r(a, b);
    }
  }
  return full;
}

CouplingDiagnostics verify_coupling_matrix(const Matrix& coupling, const Matrix& q1,
                                           const Matrix& q2, double tol) {
  const std::size_t m = q1.rows();
  CouplingDiagnostics all;
  if (coupling.rows() != m * m || coupling.cols() != m * m) {
    all.issues.push_back("coupling matrix has the wrong shape");
    return all;
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      CouplingRow r(m, m);
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) r(a, b) = coupling(i * m + j, a * m + b);
      auto d = verify_coupling_row(r, q1, q2, static_cast<int>(i), static_cast<int>(j), tol);
      all.max_marginal_residual = std::max(all.max_marginal_residual, d.max_marginal_residual);
      all.max_row_sum_residual = std::max(all.max_row_sum_residual, d.max_row_sum_residual);
      all.negative_rates += d.negative_rates;
      all.order_violations += d.order_violations;
      for (auto& s : d.issues) all.issues.push_back(std::move(s));
    }
  }
  return all;
}

int IntervalPartition::target(double u) const noexcept {
  for (const auto& iv : intervals)
    if (iv.contains(u)) return iv.target;
  return -1;
}

double mark_space_length(int states, double bound) {
  return static_cast<double>(std::max(2, states)) * bound;
}

IntervalPartition skorokhod_partition(const Matrix& qx, double bound, int i) {
  const int m = static_cast<int>(qx.rows());
  if (i < 0 || i >= m) throw Error(ErrorCode::InvalidArgument, "skorokhod_partition: state out of range");
  double offset = 0.0;
  for (int k = 0; k < m; ++k) {
    const double qk = -qx(static_cast<std::size_t>(k), static_cast<std::size_t>(k));
    if (qk > bound * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "rate bound violated: q_" << k + 1 << " = " << qk << " exceeds H = " << bound;
      throw Error(ErrorCode::Validation, os.str());
    }
    if (k < i) offset += qk;
  }
  IntervalPartition p;
  p.state = i;
  p.mark_space = mark_space_length(m, bound);
  double lo = offset;
  for (int j = 0; j < m; ++j) {
    if (j == i) continue;
    const double len = qx(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    if (len > 0.0) p.intervals.push_back(Interval{lo, lo + len, j});
    lo += std::max(len, 0.0);
  }
  p.total = lo - offset;
  return p;
}

IntervalPartition skorokhod_partition(const StateDependentGenerator& g, int i,
                                      std::span<const double> x) {
  return skorokhod_partition(g.at(x), g.bound(), i);
}

}  // namespace rswitch
