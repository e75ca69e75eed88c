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
#include <vector>

#include "rswitch/matrix.hpp"
#include "rswitch/scenario.hpp"

namespace rswitch {

// Contraction factor of the observation lag:
//   K(tau) = 2 tau (2 Cmax + Ma + bmax) exp((2 Cmax + 3 Ma + bmax) tau)
double k_tau(double tau, const CoefficientBounds& b);

// First tau with K(tau) = 1 (bisection to 1e-12), or +infinity when K stays
// below one for every tau.
double max_tau_for_contraction(const CoefficientBounds& b);

struct StabilityCertificate {
  double tau = 0.0;
  double K = 0.0;
  double tilt_scale = 0.0;  // sqrt(K+ / (1 - K+))
  double eta = 0.0;         // spectral gap of Qbar + 3 diag(C)

  // Perron roots of the tilted skeletons, per observation period.
  double lower_root_step = 0.0;  // tilt -6 tau b on exp(tau Qstar)
  double upper_root_step = 0.0;  // tilt 6 tau scale b on exp(tau Qbar)
  // Same roots per unit time (step root to the power 1/tau).
  double lambda_lower = 0.0;
  double lambda_upper = 0.0;

  bool K_below_one = false;
  bool eta_positive = false;
  // Root decisions need a margin of 1e-12 below one; an untilted skeleton
  // has root exactly 1 and never passes on rounding.
  bool lambda_lower_below_one = false;
  bool lambda_upper_below_one = false;
  bool pass = false;
  bool pass_per_step = false;  // decision recomputed from the per-step roots

  // Exponential rate bound: E|X(t)|^2 <= const * exp(rho t).
  double rho = 0.0;
};

// Throws Error(Validation) when K(tau) >= 1 and NumericError when an
// envelope is reducible.
StabilityCertificate certify(const CoefficientBounds& b, const Matrix& qbar, const Matrix& qstar,
                             double tau);

struct TauSearch {
  double tau_max = 0.0;
  std::vector<StabilityCertificate> evaluated;  // increasing tau
  std::vector<StabilityCertificate> passing;
  std::optional<StabilityCertificate> best;  // smallest rho among passing
  bool lambda_upper_monotone = true;          // non-decreasing along the grid
};

// Log-spaced grid of `points` values in [1e-4, 0.999] * tau_max (tau_max
// capped at 10), plus `extra_tau` when it lies below tau_max.
TauSearch feasible_tau_search(const CoefficientBounds& b, const Matrix& qbar, const Matrix& qstar,
                              int points = 40, std::optional<double> extra_tau = std::nullopt);

}  // namespace rswitch
