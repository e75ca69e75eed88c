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

// Command-line front end. Talks to the library only through the C interface.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rswitch/rswitch.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

// Bad input documents count as validation failures; everything else the
// library reports is a runtime error.
int exit_code_for(rsw_status st) {
  switch (st) {
    case RSW_OK: return kExitOk;
    case RSW_PARSE:
    case RSW_SCHEMA:
    case RSW_VALIDATION: return kExitValidation;
    default: return kExitRuntime;
  }
}

struct CFailure {
  rsw_status status;
};

void check(rsw_status st) {
  if (st != RSW_OK) throw CFailure{st};
}

struct StringDeleter {
  void operator()(char* p) const { rsw_string_free(p); }
};
using CString = std::unique_ptr<char, StringDeleter>;

struct ScenarioDeleter {
  void operator()(rsw_scenario* p) const { rsw_scenario_free(p); }
};
using ScenarioHandle = std::unique_ptr<rsw_scenario, ScenarioDeleter>;

ScenarioHandle load(const std::string& path) {
  rsw_scenario* raw = nullptr;
  check(rsw_scenario_load_file(path.c_str(), &raw));
  return ScenarioHandle(raw);
}

template <class F>
CString call(F&& f) {
  char* raw = nullptr;
  check(f(&raw));
  return CString(raw);
}

void emit(const char* text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::fputs(text, stdout);
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + out + " for writing");
  f << text;
  if (!f.flush()) throw std::runtime_error("write failed: " + out);
}

const std::map<std::string, rsw_coupling> kCouplings{
    {"none", RSW_COUPLING_NONE},
    {"auto", RSW_COUPLING_AUTO},
    {"shared", RSW_COUPLING_SHARED_MARKS},
    {"order", RSW_COUPLING_ORDER_PRESERVING},
};

struct RunFlags {
  std::optional<std::uint64_t> seed;
  std::int64_t paths = 0;
  double horizon = 0.0;
  std::string coupling = "none";
  std::uint64_t path_index = 0;
  unsigned threads = 1;
  std::int64_t stride = 0;
  std::string out;

  rsw_sim_options options() const {
    rsw_sim_options o;
    rsw_sim_options_init(&o);
    o.paths = paths;
    o.horizon = horizon;
    if (seed) {
      o.has_seed = 1;
      o.seed = *seed;
    }
    o.coupling = kCouplings.at(coupling);
    o.path_index = path_index;
    o.threads = threads;
    o.stride = stride;
    return o;
  }
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool monte_carlo) {
  cmd->add_option("--seed", f.seed, "Override the scenario seed");
  cmd->add_option("--horizon", f.horizon, "Override the horizon T (multiple of step)")->check(CLI::PositiveNumber);
  cmd->add_option("--coupling", f.coupling, "Chains to run: none, auto, shared, order")
      ->check(CLI::IsMember({"none", "auto", "shared", "order"}))
      ->capture_default_str();
  if (monte_carlo) {
    cmd->add_option("--paths", f.paths, "Override the number of paths")->check(CLI::PositiveNumber);
    cmd->add_option("--threads", f.threads, "Worker threads (results do not depend on this)")
        ->check(CLI::Range(1u, 1024u));
    cmd->add_option("--stride", f.stride, "Grid points between summary rows (0 = automatic)")
        ->check(CLI::NonNegativeNumber);
  } else {
    cmd->add_option("--path", f.path_index, "Path index within the seed's stream family");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regime-switching diffusions under sampled feedback: coupling, certification, simulation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", rsw_version());

  std::string file;

  auto* validate = app.add_subcommand("validate", "Check generator, coefficient bounds, monotonicity and couplings");
  bool echo = false, require_coupling = false;
  validate->add_option("file", file, "Scenario JSON")->required();
  validate->add_flag("--echo", echo, "Print the normalized scenario instead of the report");
  validate->add_flag("--require-coupling", require_coupling,
                     "Fail unless both domination conditions hold");

  auto* envelopes = app.add_subcommand("envelopes", "Two-state envelopes from the grid and their conditions");
  envelopes->add_option("file", file, "Scenario JSON")->required();

  auto* couple = app.add_subcommand("couple", "Dump coupling rates at a point");
  std::vector<double> x;
  std::vector<int> from;
  couple->add_option("file", file, "Scenario JSON")->required();
  couple->add_option("--x", x, "Point x (comma separated, d values)")->required()->delimiter(',');
  couple->add_option("--from", from, "Product state i,j (1-based); all when omitted")
      ->delimiter(',')
      ->expected(2);

  auto* spectral = app.add_subcommand("spectral", "Perron roots, eta and the exponential functional table");
  std::vector<double> theta;
  double spectral_tau = 0.0;
  int n_max = 10;
  spectral->add_option("file", file, "Scenario JSON")->required();
  spectral->add_option("--theta", theta, "Tilt vector (comma separated, M values; default 0)")->delimiter(',');
  spectral->add_option("--tau", spectral_tau, "Skeleton step (default: scenario tau)")->check(CLI::PositiveNumber);
  spectral->add_option("--n-max", n_max, "Largest n in the functional table")->check(CLI::Range(0, 10000));

  auto* certify = app.add_subcommand("certify", "Stability certificate (exit 1 when it does not pass)");
  double certify_tau = 0.0;
  bool sweep = false;
  certify->add_option("file", file, "Scenario JSON")->required();
  certify->add_option("--tau", certify_tau, "Observation period (default: scenario tau)")->check(CLI::PositiveNumber);
  certify->add_flag("--tau-sweep", sweep, "Also evaluate a log-spaced tau grid");

  auto* simulate = app.add_subcommand("simulate", "Simulate one path to CSV");
  RunFlags sim_flags;
  simulate->add_option("file", file, "Scenario JSON")->required();
  simulate->add_option("--out", sim_flags.out, "Output CSV (default stdout)");
  add_run_flags(simulate, sim_flags, false);

  auto* mc = app.add_subcommand("mc", "Monte Carlo summary to JSON");
  RunFlags mc_flags;
  mc->add_option("file", file, "Scenario JSON")->required();
  mc->add_option("--out", mc_flags.out, "Output JSON (default stdout)");
  add_run_flags(mc, mc_flags, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitRuntime;
  }

  try {
    ScenarioHandle s = load(file);
    if (validate->parsed()) {
      if (echo) {
        emit(call([&](char** o) { return rsw_echo(s.get(), o); }).get(), "");
        return kExitOk;
      }
      int ok = 0;
      auto text = call([&](char** o) { return rsw_validate(s.get(), require_coupling, &ok, o); });
      emit(text.get(), "");
      return ok ? kExitOk : kExitValidation;
    }
    if (envelopes->parsed()) {
      emit(call([&](char** o) { return rsw_envelopes(s.get(), o); }).get(), "");
    } else if (couple->parsed()) {
      const int i = from.empty() ? 0 : from[0];
      const int j = from.empty() ? 0 : from[1];
      if (!from.empty() && (i < 1 || j < 1)) {
        std::cerr << "error: --from states are 1-based\n";
        return kExitRuntime;
      }
      emit(call([&](char** o) { return rsw_couple(s.get(), x.data(), x.size(), i, j, o); }).get(), "");
    } else if (spectral->parsed()) {
      const double* th = theta.empty() ? nullptr : theta.data();
      emit(call([&](char** o) { return rsw_spectral(s.get(), th, theta.size(), spectral_tau, n_max, o); }).get(),
           "");
    } else if (certify->parsed()) {
      int pass = 0;
      emit(call([&](char** o) { return rsw_certify(s.get(), certify_tau, sweep, &pass, o); }).get(), "");
      return pass ? kExitOk : kExitValidation;
    } else if (simulate->parsed()) {
      const rsw_sim_options o = sim_flags.options();
      emit(call([&](char** out) { return rsw_simulate_csv(s.get(), &o, out); }).get(), sim_flags.out);
    } else if (mc->parsed()) {
      const rsw_sim_options o = mc_flags.options();
      emit(call([&](char** out) { return rsw_monte_carlo(s.get(), &o, out); }).get(), mc_flags.out);
    }
    return kExitOk;
  } catch (const CFailure& f) {
    std::cerr << "error: " << rsw_last_error() << "\n";
    return exit_code_for(f.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
