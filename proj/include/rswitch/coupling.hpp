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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rswitch/generator.hpp"
#include "rswitch/matrix.hpp"

namespace rswitch {

enum class EnvelopeSource { GridCertified, UserSupplied };

struct EnvelopePair {
  Matrix qbar;   // upper
  Matrix qstar;  // lower
  EnvelopeSource source = EnvelopeSource::UserSupplied;
  bool qbar21_positive = false;
  bool qstar12_positive = false;
};

// Two-state envelopes from grid extrema: qbar12 = sup q12, qbar21 = inf q21,
// qstar12 = inf q12, qstar21 = sup q21.
EnvelopePair two_state_envelopes(const StateDependentGenerator& g, const SampleGrid& grid);

struct ConditionCheck {
  bool holds = true;
  double margin = 0.0;  // worst slack over the grid; negative when violated
  std::optional<std::vector<double>> witness;
};

struct TwoStateConditions {
  // qbar12 + qbar21 <= q12(x) + q21(x)
  ConditionCheck upper;
  // qstar12 + qstar21 >= q12(x) + q21(x)
  ConditionCheck lower;
};

TwoStateConditions check_two_state_conditions(const EnvelopePair& env,
                                              const StateDependentGenerator& g,
                                              const SampleGrid& grid);

struct DominationViolation {
  std::vector<double> x;  // empty for constant-vs-constant checks
  int i1 = 0;             // 1-based states
  int i2 = 0;
  int m = 0;
  bool tail = true;  // upper-tail inequality (true) or lower partial sums
  double margin = 0.0;
};

struct DominationReport {
  bool holds = true;
  double tightest_margin = 0.0;
  std::vector<DominationViolation> violations;  // worst point per inequality
};

// Q1 below Q2 in the partial-sum preorder:
//   sum_{l>=m} q1(i1,l) <= sum_{l>=m} q2(i2,l)  for i1 <= i2 < m
//   sum_{l<=m} q1(i1,l) >= sum_{l<=m} q2(i2,l)  for m < i1 <= i2
DominationReport check_preorder(const Matrix& q1, const Matrix& q2, double tol = 1e-12);

// Q_x below Qbar at every grid point.
DominationReport check_domination(const StateDependentGenerator& g, const Matrix& qbar,
                                  const SampleGrid& grid, double tol = 1e-12);

// Qstar below Q_x at every grid point.
DominationReport check_lower(const Matrix& qstar, const StateDependentGenerator& g,
                             const SampleGrid& grid, double tol = 1e-12);

// Rates out of one product state (i, j). Entry (m, n) is the rate to (m, n);
// entry (i, j) holds the diagonal. States are 0-based.
using CouplingRow = Matrix;

// Independent-excess coupling for i > j: synchronous moves at a_k ^ b_k,
// the excesses (a_k - b_k)+ and (b_k - a_k)+ as single-chain moves.
CouplingRow basic_coupling(std::span<const double> row1, std::span<const double> row2, int i,
                           int j);

// Order-preserving coupling of q1 (lower chain) and q2 (upper chain) at a
// product state with i <= j, built by the triangular a/b recursion.
CouplingRow order_preserving_coupling(const Matrix& q1, const Matrix& q2, int i, int j);

// Dispatches on i <= j.
CouplingRow coupling_row(const Matrix& q1, const Matrix& q2, int i, int j);

struct CouplingDiagnostics {
  std::vector<std::string> issues;
  double max_marginal_residual = 0.0;
  double max_row_sum_residual = 0.0;
  int negative_rates = 0;
  int order_violations = 0;

  bool clean() const noexcept { return issues.empty(); }
};

CouplingDiagnostics verify_coupling_row(const CouplingRow& row, const Matrix& q1, const Matrix& q2,
                                        int i, int j, double tol = 1e-10);

// Full generator on S x S, product state (i, j) at index i*M + j.
Matrix build_coupling_matrix(const Matrix& q1, const Matrix& q2);

CouplingDiagnostics verify_coupling_matrix(const Matrix& coupling, const Matrix& q1,
                                           const Matrix& q2, double tol = 1e-10);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  int target = 0;  // 0-based

  bool contains(double u) const noexcept { return lo <= u && u < hi; }
};

struct IntervalPartition {
  int state = 0;
  double mark_space = 0.0;  // L
  std::vector<Interval> intervals;  // only nonempty ones
  double total = 0.0;

  // Target of mark u, or -1 when u falls outside every interval.
  int target(double u) const noexcept;
};

// Mark-space length used by the thinning construction: max(2, M) * H.
double mark_space_length(int states, double bound);

// Consecutive intervals: row 1's targets first, then row 2's, and so on, so
// row i starts at the sum of the totals of rows before it.
IntervalPartition skorokhod_partition(const StateDependentGenerator& g, int i,
                                      std::span<const double> x);

// Same rule on a precomputed generator value.
IntervalPartition skorokhod_partition(const Matrix& qx, double bound, int i);

}  // namespace rswitch
