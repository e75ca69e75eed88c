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

#include "rswitch/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rswitch/error.hpp"
#include "rswitch/markov.hpp"

namespace rswitch {

namespace {

// A root counts as below one only beyond the Perron solver's accuracy, so a
// stochastic matrix (exact root 1) never passes on rounding.
constexpr double kRootMargin = 1e-12;

}  // namespace

double k_tau(double tau, const CoefficientBounds& b) {
  const double cmax = b.C_max();
  const double bmax = b.b_max();
  return 2.0 * tau * (2.0 * cmax + b.Ma + bmax) * std::exp((2.0 * cmax + 3.0 * b.Ma + bmax) * tau);
}

double max_tau_for_contraction(const CoefficientBounds& b) {
  const double slope = 2.0 * b.C_max() + b.Ma + b.b_max();
  if (!(slope > 0.0)) return std::numeric_limits<double>::infinity();
  double hi = 1e-9;
  while (k_tau(hi, b) <= 1.0) {
    hi *= 2.0;
    if (hi > 1e12) return std::numeric_limits<double>::infinity();
  }
  double lo = hi * 0.5;
  if (k_tau(lo, b) > 1.0) lo = 0.0;
  while (hi - lo > 1e-12 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (k_tau(mid, b) > 1.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

StabilityCertificate certify(const CoefficientBounds& b, const Matrix& qbar, const Matrix& qstar,
                             double tau) {
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "certify: tau must be positive");
  if (!is_irreducible(qbar)) throw NumericError("certify: upper envelope is reducible");
  if (!is_irreducible(qstar)) throw NumericError("certify: lower envelope is reducible");

  StabilityCertificate c;
  c.tau = tau;
  c.K = k_tau(tau, b);
  c.K_below_one = c.K < 1.0;
  if (!c.K_below_one) {
    throw Error(ErrorCode::Validation,
                "certify: K(tau) = " + std::to_string(c.K) + " >= 1, certificate undefined at this tau");
  }
  const double kp = std::max(c.K, 0.0);
  c.tilt_scale = std::sqrt(kp / (1.0 - kp));
  c.eta = spectral_abscissa_eta(qbar, b.C, 3.0);

  const std::size_t m = qbar.rows();
  Vector theta_lower(m), theta_upper(m);
  for (std::size_t i = 0; i < m; ++i) {
    theta_lower[i] = -6.0 * tau * b.b[i];
    theta_upper[i] = 6.0 * tau * c.tilt_scale * b.b[i];
  }
  c.lower_root_step = perron_root(tilt(skeleton_transition(qstar, tau), theta_lower));
  c.upper_root_step = perron_root(tilt(skeleton_transition(qbar, tau), theta_upper));
  c.lambda_lower = std::pow(c.lower_root_step, 1.0 / tau);
  c.lambda_upper = std::pow(c.upper_root_step, 1.0 / tau);

  c.eta_positive = c.eta > 0.0;
  c.lambda_lower_below_one = c.lower_root_step < 1.0 - kRootMargin && c.lambda_lower < 1.0;
  c.lambda_upper_below_one = c.upper_root_step < 1.0 - kRootMargin && c.lambda_upper < 1.0;
  c.pass = c.K_below_one && c.eta_positive && c.lambda_lower_below_one && c.lambda_upper_below_one;
  c.pass_per_step = c.K_below_one && c.eta_positive && c.lower_root_step < 1.0 - kRootMargin &&
                     c.upper_root_step < 1.0 - kRootMargin;
  c.rho = (-c.eta + std::log(c.lower_root_step) / tau + std::log(c.upper_root_step) / tau) / 3.0;
  return c;
}

TauSearch feasible_tau_search(const CoefficientBounds& b, const Matrix& qbar, const Matrix& qstar,
                              int points, std::optional<double> extra_tau) {
  TauSearch out;
  out.tau_max = max_tau_for_contraction(b);
  const double top = std::min(out.tau_max, 10.0);
  std::vector<double> taus;
  const double lo = std::log(1e-4 * top);
  const double hi = std::log(0.999 * top);
  for (int k = 0; k < points; ++k) {
    const double w = points == 1 ? 1.0 : static_cast<double>(k) / (points - 1);
    taus.push_back(std::exp(lo + w * (hi - lo)));
  }
  if (extra_tau && *extra_tau > 0.0 && *extra_tau < out.tau_max) taus.push_back(*extra_tau);
  std::sort(taus.begin(), taus.end());
  taus.erase(std::unique(taus.begin(), taus.end()), taus.end());

  for (double tau : taus) {
    StabilityCertificate c;
    try {
      c = certify(b, qbar, qstar, tau);
    } catch (const Error&) {
      continue;
    }
    if (!out.evaluated.empty() && c.lambda_upper < out.evaluated.back().lambda_upper) {
      out.lambda_upper_monotone = false;
    }
    out.evaluated.push_back(c);
    if (c.pass) {
      out.passing.push_back(c);
      if (!out.best || c.rho < out.best->rho) out.best = c;
    }
  }
  return out;
}

}  // namespace rswitch
