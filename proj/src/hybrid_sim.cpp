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

#include "rswitch/hybrid_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "rswitch/error.hpp"
#include "rswitch/rng.hpp"

namespace rswitch {

const char* to_string(CouplingMode mode) noexcept {
  switch (mode) {
    case CouplingMode::None: return "none";
    case CouplingMode::Auto: return "auto";
    case CouplingMode::SharedMarks: return "shared-marks";
    case CouplingMode::OrderPreserving: return "order-preserving";
  }
  return "?";
}

namespace {

double max_total_rate(const Matrix& q) {
  double out = 0.0;
  for (std::size_t i = 0; i < q.rows(); ++i) out = std::max(out, -q(i, i));
  return out;
}

std::string point_text(std::span<const double> x) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
  return os.str();
}

struct JumpModel {
  CouplingMode mode = CouplingMode::None;
  double rate = 0.0;  // candidate intensity
  double bound = 0.0;
  std::vector<IntervalPartition> upper_parts;  // SharedMarks only
  std::vector<IntervalPartition> lower_parts;
};

JumpModel make_jump_model(const Scenario& s, CouplingMode mode) {
  JumpModel jm;
  jm.mode = mode;
  jm.bound = s.generator.bound();
  const Matrix& qbar = s.envelopes.qbar;
  const Matrix& qstar = s.envelopes.qstar;
  switch (mode) {
    case CouplingMode::None:
      jm.rate = mark_space_length(s.M, jm.bound);
      break;
    case CouplingMode::SharedMarks: {
      const double h = std::max({jm.bound, max_total_rate(qbar), max_total_rate(qstar)});
      jm.rate = mark_space_length(s.M, h);
      for (int i = 0; i < s.M; ++i) {
        jm.upper_parts.push_back(skorokhod_partition(qbar, h, i));
        jm.lower_parts.push_back(skorokhod_partition(qstar, h, i));
      }
      break;
    }
    case CouplingMode::OrderPreserving:
      jm.rate = jm.bound + max_total_rate(qbar) + max_total_rate(qstar);
      break;
    case CouplingMode::Auto:
      throw Error(ErrorCode::InvalidArgument, "coupling mode must be resolved before simulation");
  }
  return jm;
}

class Engine {
 public:
  Engine(const Scenario& s, const SimulationParams& p, std::uint64_t path, const JumpModel& jm,
         PathObserver& obs)
      : s_(s),
        p_(p),
        jm_(jm),
        obs_(obs),
        gauss_(p.seed, StreamTag::Gaussian, path),
        jumps_(p.seed, StreamTag::Jump, path) {}

  std::int64_t run() {
    const auto d = static_cast<std::size_t>(s_.d);
    const std::int64_t K = p_.steps();
    const std::int64_t spp = p_.steps_per_period();
    const double h = p_.step;
    const double sqrt_h = std::sqrt(h);
    const std::size_t npairs = (d + 1) / 2;

    std::vector<double> x(s_.x0.begin(), s_.x0.end());
    std::vector<double> xn(d), xobs(d), a(d), sigma(d * d), xi(2 * npairs), xc(d);
    state_[0] = state_[1] = state_[2] = s_.state0;
    const bool coupled = jm_.mode != CouplingMode::None;
    int lam_obs = state_[0];
    std::int64_t k_obs = 0;

    next_candidate_ = draw_gap();
    report_grid(0, 0.0, x, false);

    for (std::int64_t k = 0; k < K; ++k) {
      const double tk = static_cast<double>(k) * h;
      if (k % spp == 0) {
        xobs = x;
        lam_obs = state_[0];
        k_obs = k;
      }
      obs_.on_feedback(k, tk, static_cast<double>(k_obs) * h, xobs, lam_obs);

      const int lam = state_[0];
      eval_drift(s_, lam, x, a);
      eval_diffusion(s_, lam, x, sigma);
      for (std::size_t pr = 0; pr < npairs; ++pr) {
        const auto z = gauss_.normals(static_cast<std::uint64_t>(k) * npairs + pr);
        xi[2 * pr] = z[0];
        xi[2 * pr + 1] = z[1];
      }
      const double gain = s_.bounds.b[static_cast<std::size_t>(lam_obs)];
      for (std::size_t r = 0; r < d; ++r) {
        double noise = 0.0;
        for (std::size_t c = 0; c < d; ++c) noise += sigma[r * d + c] * xi[c];
        xn[r] = x[r] + (a[r] - gain * xobs[r]) * h + noise * sqrt_h;
        if (!std::isfinite(xn[r])) {
          throw NumericError("non-finite state at t = " + std::to_string(tk + h));
        }
      }

      const double t1 = static_cast<double>(k + 1) * h;
      bool jumped = false;
      while (next_candidate_ <= t1) {
        const double tc = next_candidate_;
        const double w = (tc - tk) / h;
        for (std::size_t r = 0; r < d; ++r) xc[r] = x[r] + w * (xn[r] - x[r]);
        jumped = candidate(tc, xc, coupled) || jumped;
        next_candidate_ += draw_gap();
      }
      x.swap(xn);
      report_grid(k + 1, t1, x, jumped);
    }
    return violations_;
  }

 private:
  double draw_gap() {
    const auto [u1, u2] = jumps_.uniforms(counter_++);
    mark_ = u2;
    return -std::log(u1) / jm_.rate;
  }

  void check_order() {
    if (jm_.mode == CouplingMode::None) return;
    if (state_[1] > state_[0] || state_[0] > state_[2]) ++violations_;
  }

  void report_grid(std::int64_t k, double t, std::span<const double> x, bool jumped) {
    check_order();
    obs_.on_grid(k, t, x, state_[0], state_[1], state_[2], jumped);
  }

  void move(Chain c, int to, double t) {
    auto& cur = state_[static_cast<int>(c)];
    if (cur == to) return;
    obs_.on_jump(JumpEvent{t, c, cur, to});
    cur = to;
  }

  [[noreturn]] void envelope_violation(double t, std::span<const double> x, const std::string& what) {
    std::ostringstream os;
    os << "envelope violation at t = " << t << ", x = (" << point_text(x) << "), states (lower, main, upper) = ("
       << state_[1] + 1 << ", " << state_[0] + 1 << ", " << state_[2] + 1 << "): " << what;
    throw Error(ErrorCode::Runtime, os.str());
  }

  // Returns whether any chain moved.
  bool candidate(double t, std::span<const double> x, bool coupled) {
    const int before[3] = {state_[0], state_[1], state_[2]};
    const double u = mark_ * jm_.rate;
    const Matrix qx = s_.generator.at(x);
    switch (jm_.mode) {
      case CouplingMode::None:
      case CouplingMode::SharedMarks: {
        const auto part = skorokhod_partition(qx, jm_.bound, state_[0]);
        const int main_to = part.target(u);
        int upper_to = -1, lower_to = -1;
        if (coupled) {
          upper_to = jm_.upper_parts[static_cast<std::size_t>(state_[2])].target(u);
          lower_to = jm_.lower_parts[static_cast<std::size_t>(state_[1])].target(u);
        }
        if (main_to >= 0) move(Chain::Main, main_to, t);
        if (lower_to >= 0) move(Chain::Lower, lower_to, t);
        if (upper_to >= 0) move(Chain::Upper, upper_to, t);
        break;
      }
      case CouplingMode::OrderPreserving:
        order_preserving_event(t, x, qx, u);
        break;
      case CouplingMode::Auto:
        break;
    }
    const bool moved = before[0] != state_[0] || before[1] != state_[1] || before[2] != state_[2];
    if (moved) check_order();
    return moved;
  }

  void order_preserving_event(double t, std::span<const double> x, const Matrix& qx, double u) {
    const int i = state_[0], lo = state_[1], up = state_[2];
    const int m = s_.M;
    if (-qx(static_cast<std::size_t>(i), static_cast<std::size_t>(i)) > jm_.bound * (1.0 + 1e-12)) {
      envelope_violation(t, x, "total rate exceeds the declared bound H");
    }
    // Pairs (main, upper) and (lower, main).
    const CouplingRow A = coupling_row(qx, s_.envelopes.qbar, i, up);
    const CouplingRow B = coupling_row(s_.envelopes.qstar, qx, lo, i);
    constexpr double kTol = 1e-9;
    auto idx = [](int v) { return static_cast<std::size_t>(v); };
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) {
        if (!(r == i && c == up) && A(idx(r), idx(c)) < -kTol) {
          envelope_violation(t, x, "upper coupling rate to (" + std::to_string(r + 1) + ", " +
                                       std::to_string(c + 1) + ") is " + std::to_string(A(idx(r), idx(c))));
        }
        if (!(r == lo && c == i) && B(idx(r), idx(c)) < -kTol) {
          envelope_violation(t, x, "lower coupling rate to (" + std::to_string(r + 1) + ", " +
                                       std::to_string(c + 1) + ") is " + std::to_string(B(idx(r), idx(c))));
        }
      }
    }
    double v = u;
    for (int mm = 0; mm < m; ++mm) {
      if (mm == i) continue;
      const double q = qx(idx(i), idx(mm));
      double sa = 0.0, sb = 0.0;
      for (int c = 0; c < m; ++c) sa += A(idx(mm), idx(c));
      for (int r = 0; r < m; ++r) sb += B(idx(r), idx(mm));
      if (std::abs(sa - q) > kTol * (1.0 + q) || std::abs(sb - q) > kTol * (1.0 + q)) {
        envelope_violation(t, x, "pair couplings disagree on the main chain's rate to state " +
                                     std::to_string(mm + 1));
      }
      if (q <= 0.0) continue;
      for (int n = 0; n < m; ++n) {
        const double an = std::max(A(idx(mm), idx(n)), 0.0);
        if (an == 0.0) continue;
        for (int k = 0; k < m; ++k) {
          const double bk = std::max(B(idx(k), idx(mm)), 0.0);
          if (bk == 0.0) continue;
          v -= an * bk / q;
          if (v < 0.0) {
            move(Chain::Main, mm, t);
            move(Chain::Lower, k, t);
            move(Chain::Upper, n, t);
            return;
          }
        }
      }
    }
    for (int n = 0; n < m; ++n) {
      if (n == up) continue;
      v -= std::max(A(idx(i), idx(n)), 0.0);
      if (v < 0.0) {
        move(Chain::Upper, n, t);
        return;
      }
    }
    for (int k = 0; k < m; ++k) {
      if (k == lo) continue;
      v -= std::max(B(idx(k), idx(i)), 0.0);
      if (v < 0.0) {
        move(Chain::Lower, k, t);
        return;
      }
    }
    // Remaining mass is the self-loop filling the gap up to the candidate rate.
  }

  const Scenario& s_;
  const SimulationParams& p_;
  const JumpModel& jm_;
  PathObserver& obs_;
  RandomStream gauss_;
  RandomStream jumps_;
  std::uint64_t counter_ = 0;
  double mark_ = 0.0;
  double next_candidate_ = 0.0;
  int state_[3] = {0, 0, 0};
  std::int64_t violations_ = 0;
};

void check_params(const Scenario& s, const SimulationParams& p) {
  if (!(p.step > 0.0) || !(p.tau >= p.step) || !(p.horizon >= p.tau)) {
    throw Error(ErrorCode::InvalidArgument, "simulation requires 0 < step <= tau <= horizon");
  }
  const double r = p.tau / p.step;
  if (std::abs(r - std::round(r)) > 1e-9 * r) {
    throw Error(ErrorCode::InvalidArgument, "tau must be an integer multiple of step");
  }
  const double n = p.horizon / p.step;
  if (std::abs(n - std::round(n)) > 1e-9 * n) {
    throw Error(ErrorCode::InvalidArgument, "horizon must be an integer multiple of step");
  }
  if (s.bounds.b.size() != static_cast<std::size_t>(s.M)) {
    throw Error(ErrorCode::InvalidArgument, "gain vector does not match the number of states");
  }
}

class Recorder : public PathObserver {
 public:
  explicit Recorder(HybridPath& out) : out_(out) {}

  void on_grid(std::int64_t, double t, std::span<const double> x, int lambda, int lower, int upper,
               bool jumped) override {
    out_.t.push_back(t);
    out_.x.insert(out_.x.end(), x.begin(), x.end());
    out_.lambda.push_back(lambda);
    if (out_.coupled) {
      out_.lambda_star.push_back(lower);
      out_.lambda_bar.push_back(upper);
    }
    out_.jump_flag.push_back(jumped ? 1 : 0);
  }

  void on_jump(const JumpEvent& e) override { out_.jumps.push_back(e); }

 private:
  HybridPath& out_;
};

HybridPath record(const Scenario& s, const SimulationParams& p, std::uint64_t path_index,
                  CouplingMode mode) {
  check_params(s, p);
  HybridPath out;
  out.d = s.d;
  out.step = p.step;
  out.horizon = static_cast<double>(p.steps()) * p.step;
  out.mode = mode;
  out.coupled = mode != CouplingMode::None;
  out.initial[0] = out.initial[1] = out.initial[2] = s.state0;
  const auto n = static_cast<std::size_t>(p.steps() + 1);
  out.t.reserve(n);
  out.x.reserve(n * static_cast<std::size_t>(s.d));
  out.lambda.reserve(n);
  out.jump_flag.reserve(n);
  Recorder rec(out);
  const JumpModel jm = make_jump_model(s, mode);
  out.ordering_violations = Engine(s, p, path_index, jm, rec).run();
  return out;
}

}  // namespace

CouplingMode resolve_coupling(const Scenario& s, CouplingMode requested) {
  if (requested == CouplingMode::None || requested == CouplingMode::SharedMarks) return requested;
  const auto qbar_ok = validate_generator(s.envelopes.qbar).valid();
  const auto qstar_ok = validate_generator(s.envelopes.qstar).valid();
  if (!qbar_ok || !qstar_ok) {
    throw Error(ErrorCode::Validation, "coupled simulation needs valid envelope generators");
  }
  if (requested == CouplingMode::Auto && s.M == 2 && s.envelopes.qbar(1, 0) > 0.0 &&
      s.envelopes.qstar(0, 1) > 0.0) {
    const auto cond = check_two_state_conditions(s.envelopes, s.generator, s.grid);
    if (cond.upper.holds && cond.lower.holds) return CouplingMode::SharedMarks;
  }
  const auto up = check_domination(s.generator, s.envelopes.qbar, s.grid);
  const auto low = check_lower(s.envelopes.qstar, s.generator, s.grid);
  if (!up.holds || !low.holds) {
    std::ostringstream os;
    os << "no order-preserving coupling:";
    auto describe = [&](const DominationReport& r, const char* what) {
      if (r.holds) return;
      const auto& w = r.violations.front();
      os << " " << what << " fails for (i1, i2, m) = (" << w.i1 << ", " << w.i2 << ", " << w.m
         << ") at x = (" << point_text(w.x) << ") by " << -w.margin << ";";
    };
    describe(up, "upper domination");
    describe(low, "lower domination");
    throw Error(ErrorCode::Validation, os.str());
  }
  return CouplingMode::OrderPreserving;
}

std::int64_t run_path(const Scenario& s, const SimulationParams& p, std::uint64_t path_index,
                      CouplingMode mode, PathObserver& observer) {
  check_params(s, p);
  if (mode == CouplingMode::Auto) mode = resolve_coupling(s, mode);
  const JumpModel jm = make_jump_model(s, mode);
  return Engine(s, p, path_index, jm, observer).run();
}

HybridPath simulate_hybrid(const Scenario& s, const SimulationParams& p, std::uint64_t path_index) {
  return record(s, p, path_index, CouplingMode::None);
}

HybridPath simulate_coupled(const Scenario& s, const SimulationParams& p, std::uint64_t path_index,
                            CouplingMode mode) {
  if (mode == CouplingMode::None) {
    throw Error(ErrorCode::InvalidArgument, "simulate_coupled needs a coupling mode");
  }
  return record(s, p, path_index, resolve_coupling(s, mode));
}

double occupation_time_average(const HybridPath& path, std::span<const double> h, Chain chain) {
  if (!(path.horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, "path has zero duration");
  int state = path.initial[static_cast<int>(chain)];
  double last = 0.0, acc = 0.0;
  for (const auto& e : path.jumps) {
    if (e.chain != chain) continue;
    acc += h[static_cast<std::size_t>(state)] * (e.t - last);
    last = e.t;
    state = e.to;
  }
  acc += h[static_cast<std::size_t>(state)] * (path.horizon - last);
  return acc / path.horizon;
}

std::string path_to_csv(const HybridPath& path, const std::string& scenario_hash, std::uint64_t seed) {
  std::string out;
  out.reserve(path.t.size() * 64);
  out += "# scenario_hash=" + scenario_hash + " seed=" + std::to_string(seed) +
         " coupling=" + to_string(path.mode) + "\n";
  out += "t";
  for (int k = 1; k <= path.d; ++k) out += ",x" + std::to_string(k);
  out += ",lambda,lambda_star,lambda_bar,jump_flag\n";
  char buf[64];
  const auto d = static_cast<std::size_t>(path.d);
  for (std::size_t r = 0; r < path.t.size(); ++r) {
    std::snprintf(buf, sizeof(buf), "%.17g", path.t[r]);
    out += buf;
    for (std::size_t c = 0; c < d; ++c) {
      std::snprintf(buf, sizeof(buf), ",%.17g", path.x[r * d + c]);
      out += buf;
    }
    const int lam = path.lambda[r] + 1;
    const int lo = path.coupled ? path.lambda_star[r] + 1 : lam;
    const int up = path.coupled ? path.lambda_bar[r] + 1 : lam;
    std::snprintf(buf, sizeof(buf), ",%d,%d,%d,%d\n", lam, lo, up, static_cast<int>(path.jump_flag[r]));
    out += buf;
  }
  return out;
}

namespace {

// Running mean and centered second moment, merged in a fixed order.
struct Moments {
  std::vector<double> mean;
  std::vector<double> m2;

  explicit Moments(std::size_t n = 0) : mean(n, 0.0), m2(n, 0.0) {}

  void add(double count_before, std::span<const double> values) {
    const double n = count_before + 1.0;
    for (std::size_t i = 0; i < mean.size(); ++i) {
      const double delta = values[i] - mean[i];
      mean[i] += delta / n;
      m2[i] += delta * (values[i] - mean[i]);
    }
  }

  void merge(double na, const Moments& b, double nb) {
    const double n = na + nb;
    for (std::size_t i = 0; i < mean.size(); ++i) {
      const double delta = b.mean[i] - mean[i];
      mean[i] += delta * nb / n;
      m2[i] += b.m2[i] + delta * delta * na * nb / n;
    }
  }
};

struct BlockResult {
  double count = 0.0;
  Moments sq;
  Moments lag;
  std::vector<std::vector<double>> occupation;  // summed fractions
  std::vector<double> tail_sup;                 // in path order
  std::int64_t violations = 0;
  std::int64_t jumps = 0;
};

class StatsObserver : public PathObserver {
 public:
  StatsObserver(const Scenario& s, const SimulationParams& p, std::span<const std::int64_t> rows)
      : d_(static_cast<std::size_t>(s.d)),
        spp_(p.steps_per_period()),
        K_(p.steps()),
        tail_from_((p.steps() + 1) / 2),
        horizon_(static_cast<double>(p.steps()) * p.step),
        rows_(rows),
        sq_(rows.size()),
        lag_(rows.size()),
        xobs_(d_),
        occupation_(3, std::vector<double>(static_cast<std::size_t>(s.M), 0.0)) {
    for (int c = 0; c < 3; ++c) current_[c] = s.state0;
  }

  void on_grid(std::int64_t k, double t, std::span<const double> x, int, int, int, bool) override {
    if (k % spp_ == 0) std::copy(x.begin(), x.end(), xobs_.begin());
    double n2 = 0.0, l2 = 0.0;
    for (std::size_t i = 0; i < d_; ++i) {
      n2 += x[i] * x[i];
      const double diff = x[i] - xobs_[i];
      l2 += diff * diff;
    }
    if (next_row_ < rows_.size() && rows_[next_row_] == k) {
      sq_[next_row_] = n2;
      lag_[next_row_] = l2;
      ++next_row_;
    }
    if (k >= tail_from_) tail_sup_ = std::max(tail_sup_, std::sqrt(n2));
    if (k == K_) {
      for (int c = 0; c < 3; ++c) {
        occupation_[static_cast<std::size_t>(c)][static_cast<std::size_t>(current_[c])] += t - since_[c];
      }
    }
  }

  void on_jump(const JumpEvent& e) override {
    const int c = static_cast<int>(e.chain);
    occupation_[static_cast<std::size_t>(c)][static_cast<std::size_t>(current_[c])] += e.t - since_[c];
    since_[c] = e.t;
    current_[c] = e.to;
    if (e.chain == Chain::Main) ++jumps_;
  }

  void fold_into(BlockResult& b) const {
    b.sq.add(b.count, sq_);
    b.lag.add(b.count, lag_);
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < occupation_[c].size(); ++i) b.occupation[c][i] += occupation_[c][i] / horizon_;
    b.tail_sup.push_back(tail_sup_);
    b.jumps += jumps_;
    b.count += 1.0;
  }

 private:
  std::size_t d_;
  std::int64_t spp_;
  std::int64_t K_;
  std::int64_t tail_from_;
  double horizon_;
  std::span<const std::int64_t> rows_;
  std::size_t next_row_ = 0;
  std::vector<double> sq_;
  std::vector<double> lag_;
  std::vector<double> xobs_;
  std::vector<std::vector<double>> occupation_;
  int current_[3] = {0, 0, 0};
  double since_[3] = {0.0, 0.0, 0.0};
  double tail_sup_ = 0.0;
  std::int64_t jumps_ = 0;
};

BlockResult run_block(const Scenario& s, const SimulationParams& p, const JumpModel& jm,
                      std::span<const std::int64_t> rows, std::int64_t first, std::int64_t last) {
  BlockResult b;
  b.sq = Moments(rows.size());
  b.lag = Moments(rows.size());
  b.occupation.assign(3, std::vector<double>(static_cast<std::size_t>(s.M), 0.0));
  for (std::int64_t path = first; path < last; ++path) {
    StatsObserver obs(s, p, rows);
    try {
      b.violations += Engine(s, p, static_cast<std::uint64_t>(path), jm, obs).run();
    } catch (const Error& e) {
      throw Error(e.code(), "path " + std::to_string(path) + ": " + e.what());
    }
    obs.fold_into(b);
  }
  return b;
}

}  // namespace

McSummary monte_carlo(const Scenario& s, const SimulationParams& p, const McOptions& options) {
  check_params(s, p);
  if (p.paths < 1) throw Error(ErrorCode::InvalidArgument, "monte_carlo needs at least one path");
  if (options.block_size < 1) throw Error(ErrorCode::InvalidArgument, "block size must be >= 1");
  const CouplingMode mode = resolve_coupling(s, options.coupling);
  const JumpModel jm = make_jump_model(s, mode);

  const std::int64_t K = p.steps();
  std::int64_t stride = options.stride;
  if (stride <= 0) stride = std::max<std::int64_t>(1, K / 1000);
  std::vector<std::int64_t> rows;
  for (std::int64_t k = 0; k <= K; k += stride) rows.push_back(k);
  if (rows.back() != K) rows.push_back(K);

  const std::int64_t nblocks = (p.paths + options.block_size - 1) / options.block_size;
  const unsigned threads = std::max(1u, options.threads);

  McSummary out;
  out.scenario_hash = scenario_hash(s);
  out.seed = p.seed;
  out.paths = p.paths;
  out.tau = p.tau;
  out.step = p.step;
  out.horizon = static_cast<double>(K) * p.step;
  out.stride = stride;
  out.coupling = mode;

  BlockResult total;
  total.sq = Moments(rows.size());
  total.lag = Moments(rows.size());
  total.occupation.assign(3, std::vector<double>(static_cast<std::size_t>(s.M), 0.0));

  auto merge = [&](BlockResult& b) {
    if (total.count == 0.0) {
      total.sq = std::move(b.sq);
      total.lag = std::move(b.lag);
    } else {
      total.sq.merge(total.count, b.sq, b.count);
      total.lag.merge(total.count, b.lag, b.count);
    }
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < total.occupation[c].size(); ++i) total.occupation[c][i] += b.occupation[c][i];
    total.tail_sup.insert(total.tail_sup.end(), b.tail_sup.begin(), b.tail_sup.end());
    total.violations += b.violations;
    total.jumps += b.jumps;
    total.count += b.count;
  };

  auto block_range = [&](std::int64_t blk) {
    const std::int64_t first = blk * options.block_size;
    return std::make_pair(first, std::min(p.paths, first + options.block_size));
  };

  // Blocks run in waves of `threads`; results merge strictly in block order,
  // so the summary does not depend on the thread count.
  for (std::int64_t wave = 0; wave < nblocks; wave += threads) {
    const std::int64_t end = std::min<std::int64_t>(nblocks, wave + threads);
    std::vector<BlockResult> results(static_cast<std::size_t>(end - wave));
    if (threads == 1) {
      const auto [first, last] = block_range(wave);
      results[0] = run_block(s, p, jm, rows, first, last);
    } else {
      std::vector<std::exception_ptr> errors(results.size());
      std::vector<std::thread> pool;
      for (std::int64_t blk = wave; blk < end; ++blk) {
        const auto slot = static_cast<std::size_t>(blk - wave);
        pool.emplace_back([&, blk, slot] {
          try {
            const auto [first, last] = block_range(blk);
            results[slot] = run_block(s, p, jm, rows, first, last);
          } catch (...) {
            errors[slot] = std::current_exception();
          }
        });
      }
      for (auto& th : pool) th.join();
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    }
    for (auto& r : results) merge(r);
  }

  const double n = total.count;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.t.push_back(static_cast<double>(rows[r]) * p.step);
    out.mean_sq.push_back(total.sq.mean[r]);
    out.mean_lag_sq.push_back(total.lag.mean[r]);
    out.se_sq.push_back(n > 1.0 ? std::sqrt(total.sq.m2[r] / (n - 1.0) / n) : 0.0);
    out.se_lag_sq.push_back(n > 1.0 ? std::sqrt(total.lag.m2[r] / (n - 1.0) / n) : 0.0);
  }
  const int chains = mode == CouplingMode::None ? 1 : 3;
  for (int c = 0; c < chains; ++c) {
    std::vector<double> occ = total.occupation[static_cast<std::size_t>(c)];
    for (double& v : occ) v /= n;
    out.occupation.push_back(std::move(occ));
  }
  out.tail_sup = std::move(total.tail_sup);
  double x0 = 0.0;
  for (double v : s.x0) x0 += v * v;
  x0 = std::sqrt(x0);
  double sum = 0.0;
  std::int64_t above = 0;
  for (double v : out.tail_sup) {
    sum += v;
    if (v > x0) ++above;
  }
  out.tail_sup_mean = sum / n;
  out.tail_fraction_above_x0 = static_cast<double>(above) / n;
  out.ordering_violations = total.violations;
  out.jumps = total.jumps;
  return out;
}

std::string summary_to_json(const McSummary& m) {
  nlohmann::ordered_json j;
  j["scenario_hash"] = m.scenario_hash;
  j["seed"] = m.seed;
  j["rng"] = "philox4x32-10";
  j["paths"] = m.paths;
  j["tau"] = m.tau;
  j["step"] = m.step;
  j["horizon"] = m.horizon;
  j["stride"] = m.stride;
  j["coupling"] = to_string(m.coupling);
  j["t"] = m.t;
  j["mean_sq"] = m.mean_sq;
  j["se_sq"] = m.se_sq;
  j["mean_lag_sq"] = m.mean_lag_sq;
  j["se_lag_sq"] = m.se_lag_sq;
  nlohmann::ordered_json occ;
  static const char* names[3] = {"lambda", "lambda_star", "lambda_bar"};
  for (std::size_t c = 0; c < m.occupation.size(); ++c) occ[names[c]] = m.occupation[c];
  j["occupation"] = occ;
  j["tail_sup_mean"] = m.tail_sup_mean;
  j["tail_fraction_above_x0"] = m.tail_fraction_above_x0;
  j["tail_sup"] = m.tail_sup;
  j["ordering_violations"] = m.ordering_violations;
  j["jumps"] = m.jumps;
  return j.dump(2) + "\n";
}

}  // namespace rswitch
