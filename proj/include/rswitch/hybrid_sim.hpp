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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rswitch/scenario.hpp"

namespace rswitch {

enum class Chain : std::uint8_t { Main = 0, Lower = 1, Upper = 2 };

enum class CouplingMode {
  None,             // the switching chain alone
  Auto,             // SharedMarks when the two-state conditions hold, else OrderPreserving
  SharedMarks,      // all three chains read the same Poisson marks
  OrderPreserving,  // chains move by the order-preserving coupling rates
};

const char* to_string(CouplingMode mode) noexcept;

struct JumpEvent {
  double t = 0.0;
  Chain chain = Chain::Main;
  int from = 0;  // 0-based
  int to = 0;
};

// Callbacks from the path engine. Grid points are reported after the jumps
// that occurred up to and including that time have been applied.
class PathObserver {
 public:
  virtual ~PathObserver() = default;
  virtual void on_grid(std::int64_t /*k*/, double /*t*/, std::span<const double> /*x*/,
                       int /*lambda*/, int /*lower*/, int /*upper*/, bool /*jumped*/) {}
  virtual void on_jump(const JumpEvent& /*e*/) {}
  // Fired once per Euler step with the observation the feedback term used.
  virtual void on_feedback(std::int64_t /*k*/, double /*t*/, double /*observed_at*/,
                           std::span<const double> /*x_observed*/, int /*lambda_observed*/) {}
};

struct HybridPath {
  int d = 1;
  double step = 0.0;
  double horizon = 0.0;
  bool coupled = false;
  CouplingMode mode = CouplingMode::None;
  int initial[3] = {0, 0, 0};  // Main, Lower, Upper

  std::vector<double> t;
  std::vector<double> x;  // row-major, d values per grid point
  std::vector<int> lambda;
  std::vector<int> lambda_star;  // empty unless coupled
  std::vector<int> lambda_bar;
  std::vector<std::uint8_t> jump_flag;
  std::vector<JumpEvent> jumps;
  std::int64_t ordering_violations = 0;  // grid and jump times with lower > main or main > upper
};

// Resolves Auto and checks that the requested coupling is constructible for
// the scenario. Throws Error(Validation) when it is not. SharedMarks is
// always accepted; when its conditions fail the run counts ordering
// violations instead.
CouplingMode resolve_coupling(const Scenario& s, CouplingMode requested);

// Runs one path through an observer. Returns the number of ordering
// violations (always 0 for uncoupled runs).
std::int64_t run_path(const Scenario& s, const SimulationParams& p, std::uint64_t path_index,
                      CouplingMode mode, PathObserver& observer);

HybridPath simulate_hybrid(const Scenario& s, const SimulationParams& p, std::uint64_t path_index);
HybridPath simulate_coupled(const Scenario& s, const SimulationParams& p, std::uint64_t path_index,
                            CouplingMode mode = CouplingMode::Auto);

// Exact time average of h over [0, horizon] for one chain, integrating the
// piecewise-constant path between recorded jumps.
double occupation_time_average(const HybridPath& path, std::span<const double> h,
                               Chain chain = Chain::Main);

// CSV with columns t, x1..xd, lambda, lambda_star, lambda_bar, jump_flag.
// States are written 1-based; uncoupled runs repeat lambda in the envelope
// columns.
std::string path_to_csv(const HybridPath& path, const std::string& scenario_hash,
                        std::uint64_t seed);

struct McOptions {
  CouplingMode coupling = CouplingMode::None;
  unsigned threads = 1;
  std::int64_t block_size = 64;
  std::int64_t stride = 0;  // grid points between summary rows; 0 picks one
};

struct McSummary {
  std::string scenario_hash;
  std::uint64_t seed = 0;
  std::int64_t paths = 0;
  double tau = 0.0;
  double step = 0.0;
  double horizon = 0.0;
  std::int64_t stride = 1;
  CouplingMode coupling = CouplingMode::None;

  std::vector<double> t;
  std::vector<double> mean_sq;      // E|X(t)|^2
  std::vector<double> se_sq;        // standard error of mean_sq
  std::vector<double> mean_lag_sq;  // E|X(t) - X(delta(t))|^2
  std::vector<double> se_lag_sq;

  // occupation[chain][state]: mean fraction of [0, T] spent in state.
  std::vector<std::vector<double>> occupation;

  std::vector<double> tail_sup;  // per path: max |X(t)| over grid t in [T/2, T]
  double tail_sup_mean = 0.0;
  double tail_fraction_above_x0 = 0.0;  // paths with tail sup > |x0|

  std::int64_t ordering_violations = 0;
  std::int64_t jumps = 0;
};

McSummary monte_carlo(const Scenario& s, const SimulationParams& p, const McOptions& options = {});

// JSON rendering of a summary; byte-identical for identical inputs.
std::string summary_to_json(const McSummary& m);

}  // namespace rswitch
