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

#include "rswitch/markov.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rswitch/error.hpp"

namespace rswitch {

namespace {

void require_square(const Matrix& m, const char* who) {
  if (!m.square() || m.rows() == 0) {
    throw Error(ErrorCode::InvalidArgument, std::string(who) + ": matrix must be square and non-empty");
  }
}

void renormalize_rows(Matrix& p) {
  for (std::size_t i = 0; i < p.rows(); ++i) {
    auto row = p.row(i);
    double s = 0.0;
    for (double& v : row) {
      if (v < 0.0) v = 0.0;  // rounding residue only
      s += v;
    }
    if (s > 0.0) {
      for (double& v : row) v /= s;
    }
  }
}

}  // namespace

GeneratorReport validate_generator(const Matrix& q, double tol) {
  GeneratorReport rep;
  if (!q.square()) {
    rep.nonnegative = false;
    rep.conservative = false;
    rep.violations.push_back("matrix is not square");
    return rep;
  }
  const std::size_t m = q.rows();
  for (std::size_t i = 0; i < m; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      sum += q(i, j);
      if (i != j && q(i, j) < 0.0) {
        rep.nonnegative = false;
        std::ostringstream os;
        os << "negative rate q(" << i + 1 << "," << j + 1 << ") = " << q(i, j);
        rep.violations.push_back(os.str());
      }
      if (!std::isfinite(q(i, j))) {
        rep.conservative = false;
        std::ostringstream os;
        os << "non-finite entry at (" << i + 1 << "," << j + 1 << ")";
        rep.violations.push_back(os.str());
      }
    }
    if (std::abs(sum) > tol) {
      rep.conservative = false;
      std::ostringstream os;
      os << "row " << i + 1 << " sums to " << sum;
      rep.violations.push_back(os.str());
    }
  }
  rep.irreducible = is_irreducible(q);
  return rep;
}

bool is_irreducible(const Matrix& q) {
  if (!q.square()) return false;
  const std::size_t m = q.rows();
  if (m == 1) return true;
  auto reach_all = [&](bool forward) {
    std::vector<char> seen(m, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < m; ++v) {
        const double rate = forward ? q(u, v) : q(v, u);
        if (v != u && rate > 0.0 && !seen[v]) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    return count == m;
  };
  return reach_all(true) && reach_all(false);
}

Vector total_rates(const Matrix& q) {
  Vector out(q.rows());
  for (std::size_t i = 0; i < q.rows(); ++i) out[i] = -q(i, i);
  return out;
}

Vector invariant_measure(const Matrix& q) {
  require_square(q, "invariant_measure");
  if (!validate_generator(q).valid()) {
    throw Error(ErrorCode::InvalidArgument, "invariant_measure: not a generator matrix");
  }
  if (!is_irreducible(q)) throw NumericError("invariant_measure: generator is reducible");
  const std::size_t m = q.rows();
  // Rows of Q^T are the balance equations; the last one is redundant and is
  // replaced by the normalization.
  Matrix a(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) a(i, j) = q(j, i);
  for (std::size_t j = 0; j < m; ++j) a(m - 1, j) = 1.0;
  Vector rhs(m, 0.0);
  rhs[m - 1] = 1.0;
  Vector mu = solve(std::move(a), std::move(rhs));
  double s = 0.0;
  for (double& v : mu) {
    if (v < 0.0) v = 0.0;
    s += v;
  }
  for (double& v : mu) v /= s;
  return mu;
}

Matrix skeleton_transition(const Matrix& q, double tau, double tail_tol) {
  require_square(q, "skeleton_transition");
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorCode::InvalidArgument, "skeleton_transition: tau must be positive");
  }
  const std::size_t m = q.rows();
  double lam = 0.0;
  for (std::size_t i = 0; i < m; ++i) lam = std::max(lam, -q(i, i));
  if (lam == 0.0) return Matrix::identity(m);

  int squarings = 0;
  double t = tau;
  while (lam * t > 8.0) {
    t *= 0.5;
    ++squarings;
  }

  // A = I + Q / lam is stochastic.
  Matrix a = Matrix::identity(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) a(i, j) += q(i, j) / lam;

  const double mean = lam * t;
  double weight = std::exp(-mean);
  double mass = weight;
  Matrix power = Matrix::identity(m);
  Matrix p = weight * power;
  const int kmax = static_cast<int>(mean + 60.0 * std::sqrt(mean + 1.0) + 60.0);
  for (int k = 1; k <= kmax && 1.0 - mass > tail_tol; ++k) {
    weight *= mean / k;
    mass += weight;
    power = power * a;
    p = p + weight * power;
  }
  renormalize_rows(p);
  for (int s = 0; s < squarings; ++s) {
    p = p * p;
    renormalize_rows(p);
  }
  return p;
}

Matrix tilt(const Matrix& p, std::span<const double> theta) {
  if (theta.size() != p.rows()) {
    throw Error(ErrorCode::InvalidArgument, "tilt: theta length does not match matrix");
  }
  Matrix out = p;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    const double f = std::exp(theta[i]);
    for (double& v : out.row(i)) v *= f;
  }
  return out;
}

PerronResult perron(const Matrix& a, double tol, int max_iter) {
  require_square(a, "perron_root");
  const std::size_t m = a.rows();
  bool any = false;
  for (double v : a.data()) {
    if (v < 0.0) throw Error(ErrorCode::InvalidArgument, "perron_root: matrix has negative entries");
    if (v > 0.0) any = true;
  }
  if (!any) throw NumericError("perron_root: zero matrix");

  Vector v(m, 1.0 / static_cast<double>(m));
  double prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    Vector w = multiply(a, v);
    double vw = 0.0, vv = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      vw += v[i] * w[i];
      vv += v[i] * v[i];
      norm += w[i];
    }
    const double rq = vw / vv;
    if (norm <= 0.0) throw NumericError("perron_root: iterate collapsed to zero");
    for (std::size_t i = 0; i < m; ++i) v[i] = w[i] / norm;
    if (it > 1 && std::abs(rq - prev) <= tol * std::abs(rq)) {
      return PerronResult{rq, std::move(v), it};
    }
    prev = rq;
  }
  throw NumericError("perron_root: no convergence after " + std::to_string(max_iter) +
                     " iterations");
}

double exp_functional(std::span<const double> mu, const Matrix& p,
                      std::span<const double> theta, int n) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "exp_functional: n must be >= 0");
  if (mu.size() != p.rows()) {
    throw Error(ErrorCode::InvalidArgument, "exp_functional: mu length does not match matrix");
  }
  const Matrix pt = tilt(p, theta);
  Vector v(mu.begin(), mu.end());
  for (int k = 0; k < n; ++k) v = multiply_left(v, pt);
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

double spectral_abscissa_eta(const Matrix& qbar, std::span<const double> c, double p) {
  require_square(qbar, "spectral_abscissa_eta");
  if (c.size() != qbar.rows()) {
    throw Error(ErrorCode::InvalidArgument, "spectral_abscissa_eta: C length does not match");
  }
  if (!is_irreducible(qbar)) throw NumericError("spectral_abscissa_eta: generator is reducible");
  const std::size_t m = qbar.rows();
  double shift = 0.0;
  for (std::size_t i = 0; i < m; ++i) shift = std::max(shift, -qbar(i, i) - p * c[i]);
  shift += 1.0;
  Matrix b = qbar;
  for (std::size_t i = 0; i < m; ++i) b(i, i) += p * c[i] + shift;
  return -(perron(b).root - shift);
}

}  // namespace rswitch
