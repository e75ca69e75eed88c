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

#include "rswitch/hybrid_sim.hpp"
#include "rswitch/scenario.hpp"

namespace rswitch {

// JSON reports behind the command-line subcommands. Each one embeds the
// scenario hash and seed.

struct ValidateOutcome {
  bool ok = false;
  std::string json;
};

ValidateOutcome validate_report(const Scenario& s, bool require_coupling);

std::string envelopes_report(const Scenario& s);

// Coupling rows at x. With `from` (0-based) only that product state is
// dumped; otherwise every product state.
std::string couple_report(const Scenario& s, std::span<const double> x,
                          std::optional<std::pair<int, int>> from);

struct SpectralRequest {
  std::optional<std::vector<double>> theta;  // defaults to zero tilt
  std::optional<double> tau;                 // defaults to the scenario's tau
  int n_max = 10;
  double p = 3.0;
};

std::string spectral_report(const Scenario& s, const SpectralRequest& req);

struct CertifyOutcome {
  bool pass = false;
  std::string json;
};

// K(tau) >= 1 is reported (certificate: null) rather than thrown.
CertifyOutcome certify_report(const Scenario& s, std::optional<double> tau, bool sweep);

struct RunRequest {
  SimulationParams params;
  CouplingMode coupling = CouplingMode::None;
  std::uint64_t path_index = 0;
  unsigned threads = 1;
  std::int64_t stride = 0;
};

std::string simulate_report(const Scenario& s, const RunRequest& req);  // CSV text
std::string mc_report(const Scenario& s, const RunRequest& req);        // JSON text

}  // namespace rswitch
