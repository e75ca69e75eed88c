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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "rswitch/error.hpp"
#include "rswitch/hybrid_sim.hpp"
#include "rswitch/scenario.hpp"

using namespace rswitch;

namespace {

std::string path_of(const char* name) { return std::string(RSWITCH_SCENARIO_DIR) + "/" + name; }

Scenario fixture(const char* name) { return load_scenario_file(path_of(name)); }

// Noise-free, switching-free linear scenario: the Euler recursion is known
// in closed form.
Scenario deterministic(double alpha, double gain, double tau, double step, double horizon) {
  std::ostringstream os;
  os.precision(17);
  os << R"({"dimensions":{"d":1,"M":2},"tau":)" << tau << R"(,"step":)" << step << R"(,"horizon":)" << horizon
     << R"(,"initial":{"x":[1.0],"state":1},"drift":[[")" << alpha << R"(*x"],[")" << alpha
     << R"(*x"]],"diffusion":[[["0"]],[["0"]]],"gains":[)" << gain << "," << gain
     << R"(],"rates":[[null,0],[0,null]],"rate_bound":1,"envelopes":{"qbar":[[0,0],[0,0]],"qstar":[[0,0],[0,0]]},)"
     << R"("coefficient_bounds":{"C":[)" << 2 * alpha << "," << 2 * alpha << R"(],"c":[)" << 2 * alpha << ","
     << 2 * alpha << R"(],"Ma":)" << std::abs(alpha) << R"(},"grid":{"lo":-1,"hi":1,"n":3}})";
  return load_scenario_text(os.str());
}

class FeedbackRecorder : public PathObserver {
 public:
  void on_feedback(std::int64_t k, double t, double observed_at, std::span<const double>, int) override {
    worst = std::max(worst, std::abs(observed_at - std::floor(t / tau + 1e-9) * tau));
    last_k = k;
  }
  double tau = 0.0;
  double worst = 0.0;
  std::int64_t last_k = -1;
};

}  // namespace

TEST_CASE("Euler recursion with sampled feedback matches the closed form") {
  const double alpha = 0.5, gain = 2.0, tau = 0.05, h = 0.01, T = 1.0;
  const Scenario s = deterministic(alpha, gain, tau, h, T);
  const HybridPath path = simulate_hybrid(s, s.params, 0);
  REQUIRE(path.t.size() == 101);
  double x = 1.0, held = 1.0;
  for (std::size_t k = 0; k + 1 < path.t.size(); ++k) {
    if (k % 5 == 0) held = x;
    x = x + (alpha * x - gain * held) * h;
    CHECK(path.x[k + 1] == doctest::Approx(x).epsilon(1e-14));
  }
  CHECK(path.jumps.empty());
}

TEST_CASE("feedback uses the last observation epoch") {
  const Scenario s = fixture("opc6.json");
  SimulationParams p = s.params;
  p.horizon = 2.0;
  FeedbackRecorder rec;
  rec.tau = p.tau;
  run_path(s, p, 0, CouplingMode::None, rec);
  CHECK(rec.worst < 1e-9);
  CHECK(rec.last_k == p.steps() - 1);
}

TEST_CASE("paths are reproducible and depend on the path index") {
  const Scenario s = fixture("opc6.json");
  SimulationParams p = s.params;
  p.horizon = 5.0;
  const auto a = simulate_hybrid(s, p, 3);
  const auto b = simulate_hybrid(s, p, 3);
  const auto c = simulate_hybrid(s, p, 4);
  CHECK(a.x == b.x);
  CHECK(a.lambda == b.lambda);
  CHECK(a.x != c.x);
  CHECK(path_to_csv(a, "h", 1) == path_to_csv(b, "h", 1));
}

TEST_CASE("CSV layout") {
  const Scenario s = fixture("opc6.json");
  SimulationParams p = s.params;
  p.horizon = 0.5;
  const auto path = simulate_coupled(s, p, 0);
  const std::string csv = path_to_csv(path, scenario_hash(s), p.seed);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("# scenario_hash=" + scenario_hash(s) + " seed=2024", 0) == 0);
  std::getline(in, line);
  CHECK(line == "t,x1,lambda,lambda_star,lambda_bar,jump_flag");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 5);
  }
  CHECK(rows == 501);
  // 17 significant digits survive a round trip.
  const std::string second = csv.substr(csv.find("\n0.001,") + 7);
  const double x1 = std::stod(second.substr(0, second.find(',')));
  CHECK(x1 == path.x[1]);
}

TEST_CASE("coupling mode resolution") {
  CHECK(resolve_coupling(fixture("opc6.json"), CouplingMode::Auto) == CouplingMode::OrderPreserving);
  CHECK(resolve_coupling(fixture("balanced2.json"), CouplingMode::Auto) == CouplingMode::SharedMarks);
  CHECK(resolve_coupling(fixture("opc6.json"), CouplingMode::None) == CouplingMode::None);
  try {
    resolve_coupling(fixture("opc7.json"), CouplingMode::Auto);
    FAIL("three-state example has no upper coupling");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Validation);
  }
  // Shared marks are always constructible; ordering is then only counted.
  CHECK(resolve_coupling(fixture("opc6.json"), CouplingMode::SharedMarks) == CouplingMode::SharedMarks);
}

TEST_CASE("coupled paths stay ordered") {
  for (const char* f : {"opc6.json", "balanced2.json"}) {
    CAPTURE(f);
    const Scenario s = fixture(f);
    SimulationParams p = s.params;
    p.horizon = 20.0;
    for (std::uint64_t k = 0; k < 5; ++k) {
      const auto path = simulate_coupled(s, p, k);
      CHECK(path.coupled);
      CHECK(path.ordering_violations == 0);
      for (std::size_t r = 0; r < path.t.size(); ++r) {
        CHECK_LE(path.lambda_star[r], path.lambda[r]);
        CHECK_LE(path.lambda[r], path.lambda_bar[r]);
      }
    }
  }
}

TEST_CASE("constant-rate switching has the right long-run occupation") {
  // linear2: q12 = 2, q21 = 1, so the chain spends 1/3 of the time in state 1.
  const Scenario s = fixture("linear2.json");
  SimulationParams p = s.params;
  p.horizon = 2000.0;
  const auto path = simulate_hybrid(s, p, 0);
  const std::vector<double> ind{1.0, 0.0};
  const double frac = occupation_time_average(path, ind);
  CHECK(frac == doctest::Approx(1.0 / 3).epsilon(0.05));
  // About one jump per 1/(2/3 + ... ) unit: mean rate 2*(1/3) + 1*(2/3) = 4/3.
  const double rate = static_cast<double>(path.jumps.size()) / p.horizon;
  CHECK(rate == doctest::Approx(4.0 / 3).epsilon(0.05));

  // The grid-sampled average agrees with the exact integral.
  double grid = 0.0;
  for (int l : path.lambda) grid += l == 0 ? 1.0 : 0.0;
  CHECK(grid / static_cast<double>(path.lambda.size()) == doctest::Approx(frac).epsilon(1e-3));
}

TEST_CASE("Monte Carlo summary") {
  const Scenario s = fixture("opc6.json");
  SimulationParams p = s.params;
  p.paths = 100;
  p.horizon = 3.0;
  McOptions o;
  o.coupling = CouplingMode::Auto;
  o.stride = 7;
  const McSummary m = monte_carlo(s, p, o);
  CHECK(m.paths == 100);
  CHECK(m.coupling == CouplingMode::OrderPreserving);
  CHECK(m.t.front() == 0.0);
  CHECK(m.t.back() == doctest::Approx(3.0));
  CHECK(m.mean_sq.front() == doctest::Approx(1.0));
  CHECK(m.se_sq.front() == doctest::Approx(0.0));
  CHECK(m.mean_lag_sq.front() == 0.0);
  CHECK(m.ordering_violations == 0);
  CHECK(m.tail_sup.size() == 100);
  for (const auto& occ : m.occupation) {
    double tot = 0.0;
    for (double v : occ) tot += v;
    CHECK(tot == doctest::Approx(1.0));
  }
  // Lag vanishes at observation epochs (every 100 steps, stride 7 hits 700).
  for (std::size_t k = 0; k < m.t.size(); ++k) {
    const double r = m.t[k] / p.tau;
    if (std::abs(r - std::round(r)) < 1e-9) CHECK(m.mean_lag_sq[k] == 0.0);
  }

  o.threads = 3;
  o.block_size = 16;
  const McSummary m3 = monte_carlo(s, p, o);
  o.block_size = 64;
  const McSummary m3b = monte_carlo(s, p, o);
  CHECK(summary_to_json(monte_carlo(s, p, McOptions{CouplingMode::Auto, 1, 64, 7})) == summary_to_json(m3b));
  CHECK(m3.mean_sq.back() == doctest::Approx(m.mean_sq.back()).epsilon(1e-12));

  const auto j = nlohmann::json::parse(summary_to_json(m));
  CHECK(j["scenario_hash"] == scenario_hash(s));
  CHECK(j["seed"] == 2024);
  CHECK(j["paths"] == 100);
}

TEST_CASE("order-preserving runs need dominating envelopes") {
  Scenario s = fixture("opc6.json");
  s.envelopes.qbar = Matrix{{-1.0, 1.0}, {1.5, -1.5}};
  try {
    resolve_coupling(s, CouplingMode::OrderPreserving);
    FAIL("accepted envelopes that do not dominate");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Validation);
  }
}

TEST_CASE("path failures name the path") {
  // The rate turns undefined once the state falls below 0.5.
  auto j = nlohmann::json::parse(std::ifstream(path_of("opc6.json")));
  j["rates"][0][1] = "1 + 0*sqrt(x - 0.5)";
  const Scenario s = load_scenario_text(j.dump());
  SimulationParams p = s.params;
  p.horizon = 20.0;
  p.paths = 2;
  try {
    monte_carlo(s, p);
    FAIL("expected a numeric failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Numeric);
    CHECK(std::string(e.what()).find("path 0") != std::string::npos);
  }
}
