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

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the library's numerical code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "rswitch/matrix.hpp"

namespace rswitch::oracle {

// exp(t Q) for Q = [[-a, a], [b, -b]].
inline Matrix two_state_skeleton(double a, double b, double t) {
  const double s = a + b;
  const double e = std::exp(-s * t);
  return Matrix{{(b + a * e) / s, (a - a * e) / s}, {(b - b * e) / s, (a + b * e) / s}};
}

// Larger root of lambda^2 - tr lambda + det for a positive 2x2 matrix.
inline double perron_2x2(const Matrix& a) {
  const double tr = a(0, 0) + a(1, 1);
  const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  const double disc = tr * tr - 4.0 * det;
  return 0.5 * (tr + std::sqrt(std::max(disc, 0.0)));
}

// E_mu[exp(sum_{k<n} theta(Y_k))] by summing over all M^n state sequences
// Y_0 .. Y_{n-1}.
inline double exp_functional_brute(const std::vector<double>& mu, const Matrix& p,
                                   const std::vector<double>& theta, int n) {
  if (n == 0) return 1.0;
  const std::size_t m = mu.size();
  std::vector<std::size_t> seq(static_cast<std::size_t>(n), 0);
  double total = 0.0;
  for (;;) {
    double w = mu[seq[0]];
    double s = theta[seq[0]];
    for (int k = 1; k < n; ++k) {
      w *= p(seq[k - 1], seq[k]);
      s += theta[seq[k]];
    }
    total += w * std::exp(s);
    int k = n - 1;
    while (k >= 0 && ++seq[static_cast<std::size_t>(k)] == m) seq[static_cast<std::size_t>(k--)] = 0;
    if (k < 0) break;
  }
  return total;
}

// Generator with off-diagonal rates uniform on [lo, hi] (all positive, so
// irreducible).
inline Matrix random_generator(std::mt19937_64& rng, std::size_t m, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix q(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    double out = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      q(i, j) = u(rng);
      out += q(i, j);
    }
    q(i, i) = -out;
  }
  return q;
}

inline std::vector<double> random_probability(std::mt19937_64& rng, std::size_t m) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(m);
  double s = 0.0;
  for (auto& x : v) s += (x = e(rng));
  for (auto& x : v) x /= s;
  return v;
}

// A pair q1, q2 with q1 below q2 in the partial-sum preorder. q2 is random
// with some zero rates; q1's upward tails are shrunk below the smallest
// competing tail of q2 and its downward heads inflated above the largest.
struct DominatedPair {
  Matrix q1;
  Matrix q2;
};

inline DominatedPair random_dominated_pair(std::mt19937_64& rng, std::size_t m) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix q2(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i != j && u(rng) > 0.2) q2(i, j) = 3.0 * u(rng);
    }
  }
  auto tail2 = [&](std::size_t i, std::size_t from) {
    double s = 0.0;
    for (std::size_t l = from; l < m; ++l) {
      if (l != i) s += q2(i, l);
    }
    return s;
  };
  auto head2 = [&](std::size_t i, std::size_t to) {
    double s = 0.0;
    for (std::size_t l = 0; l <= to; ++l) {
      if (l != i) s += q2(i, l);
    }
    return s;
  };

  Matrix q1(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    // Exact ties with q2's bound are kept a third of the time; they are the
    // boundary cases of the recursion.
    const double shrink = u(rng) < 0.33 ? 1.0 : u(rng);
    const double inflate = u(rng) < 0.33 ? 1.0 : 1.0 + u(rng);
    std::vector<double> up(m + 1, 0.0);  // up[k] = target tail over l >= k
    for (std::size_t k = i + 1; k < m; ++k) {
      double lo = tail2(i, k);
      for (std::size_t i2 = i; i2 < k; ++i2) lo = std::min(lo, tail2(i2, k));
      up[k] = shrink * lo;
    }
    for (std::size_t k = i + 1; k < m; ++k) q1(i, k) = up[k] - up[k + 1];
    std::vector<double> down(m, 0.0);  // down[k] = target head over l <= k
    for (std::size_t k = 0; k < i; ++k) {
      double hi = 0.0;
      for (std::size_t i2 = i; i2 < m; ++i2) hi = std::max(hi, head2(i2, k));
      down[k] = inflate * hi;
    }
    for (std::size_t k = 0; k < i; ++k) q1(i, k) = down[k] - (k == 0 ? 0.0 : down[k - 1]);
  }
  for (Matrix* q : {&q1, &q2}) {
    for (std::size_t i = 0; i < m; ++i) {
      double out = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        if (j != i) out += (*q)(i, j);
      }
      (*q)(i, i) = -out;
    }
  }
  return {q1, q2};
}

// Asymptotic two-sided Kolmogorov-Smirnov critical value at the 1% level.
inline double ks_critical_1pct(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

}  // namespace rswitch::oracle
