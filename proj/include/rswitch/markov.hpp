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

#include <span>
#include <string>
#include <vector>

#include "rswitch/matrix.hpp"

namespace rswitch {

inline constexpr double kGeneratorTol = 1e-12;
inline constexpr double kPerronTol = 1e-13;
inline constexpr int kPerronMaxIter = 100000;
inline constexpr double kPoissonTail = 1e-14;

struct GeneratorReport {
  std::vector<std::string> violations;
  bool nonnegative = true;
  bool conservative = true;
  bool irreducible = false;

  bool valid() const noexcept { return nonnegative && conservative; }
};

// Negative off-diagonal rates and row sums off zero by more than `tol` are
// violations. Reducibility is reported through the flag only.
GeneratorReport validate_generator(const Matrix& q, double tol = kGeneratorTol);

// Strong connectivity of the graph {i -> j : q(i,j) > 0, i != j}.
bool is_irreducible(const Matrix& q);

// q_i = -q(i,i); for a generator built from off-diagonal rates this is the
// row total.
Vector total_rates(const Matrix& q);

// Stationary law of an irreducible generator: mu Q = 0, sum(mu) = 1.
Vector invariant_measure(const Matrix& q);

// exp(tau Q) by uniformization. Intervals with max_i q_i * tau > 8 are split
// and squared back so the Poisson weights never underflow.
Matrix skeleton_transition(const Matrix& q, double tau, double tail_tol = kPoissonTail);

// Row i of P scaled by exp(theta(i)).
Matrix tilt(const Matrix& p, std::span<const double> theta);

struct PerronResult {
  double root = 0.0;
  Vector vector;  // right eigenvector, unit 1-norm
  int iterations = 0;
};

// Dominant eigenvalue of a nonnegative primitive matrix by power iteration.
// Stops when successive Rayleigh quotients agree to `tol` (relative).
PerronResult perron(const Matrix& a, double tol = kPerronTol, int max_iter = kPerronMaxIter);

inline double perron_root(const Matrix& a) { return perron(a).root; }

// E_mu[exp(sum_{k<n} theta(Y_k))] for the chain with transition matrix P,
// evaluated exactly as mu * tilt(P, theta)^n * 1.
double exp_functional(std::span<const double> mu, const Matrix& p,
                      std::span<const double> theta, int n);

// eta_{p,C} = -max Re spec(Qbar + p diag(C)).
double spectral_abscissa_eta(const Matrix& qbar, std::span<const double> c, double p);

}  // namespace rswitch
