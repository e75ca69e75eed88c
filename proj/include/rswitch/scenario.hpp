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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rswitch/coupling.hpp"
#include "rswitch/error.hpp"
#include "rswitch/expr.hpp"
#include "rswitch/generator.hpp"
#include "rswitch/markov.hpp"
#include "rswitch/matrix.hpp"

namespace rswitch {

// Thrown for documents that do not match the scenario schema; `pointer` is
// the JSON pointer of the offending value.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& pointer, const std::string& what)
      : Error(ErrorCode::Schema, pointer + ": " + what), pointer_(pointer) {}

  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

struct SimulationParams {
  double tau = 0.1;
  double step = 1e-3;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  std::int64_t paths = 1;

  std::int64_t steps() const;            // horizon / step
  std::int64_t steps_per_period() const;  // tau / step
};

struct CoefficientBounds {
  Vector C;  // upper growth rate per state
  Vector c;  // lower growth rate per state
  double Ma = 0.0;
  Vector b;  // feedback gains

  double C_max() const;
  double b_max() const;
};

struct Scenario {
  std::string name;
  int d = 1;
  int M = 2;
  SimulationParams params;
  Vector x0;
  int state0 = 0;  // 0-based

  std::vector<std::vector<Expr>> drift;      // [state][component]
  std::vector<std::vector<Expr>> diffusion;  // [state][row * d + col]
  CoefficientBounds bounds;
  StateDependentGenerator generator;

  EnvelopePair envelopes;
  bool envelopes_declared = false;
  SampleGrid grid;

  // Normalized JSON text, stable under load/emit round trips.
  std::string canonical;

  const Vector& gains() const noexcept { return bounds.b; }
};

// Throws SchemaError (with JSON pointer) or ParseError on malformed input.
Scenario load_scenario_text(std::string_view json_text);
Scenario load_scenario_file(const std::string& path);

// Canonical JSON document; load_scenario_text(emit_scenario(s)) reproduces it.
std::string emit_scenario(const Scenario& s);

// FNV-1a 64 over the canonical text, as 16 hex digits.
std::string scenario_hash(const Scenario& s);
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

struct BoundWitness {
  std::vector<double> x;
  int state = 0;  // 1-based
  double excess = 0.0;
};

struct MonotonicityReport {
  bool gains = true;
  bool upper_rates = true;
  bool lower_rates = true;
  // When some vector is not non-decreasing: a state order (1-based labels)
  // making all of them non-decreasing, if one exists.
  std::optional<std::vector<int>> suggested_order;
  bool permuted_envelope_irreducible = false;
};

struct ScenarioValidation {
  std::vector<std::string> errors;    // structural problems: validation fails
  std::vector<std::string> warnings;  // coupling hypotheses that do not hold

  double max_total_rate = 0.0;  // max over grid and states of q_i(x)
  std::optional<BoundWitness> rate_bound_violation;
  std::optional<BoundWitness> growth_upper_violation;  // 2<a,x> + |sigma|^2 <= C|x|^2
  std::optional<BoundWitness> growth_lower_violation;  // ... >= c|x|^2
  std::optional<BoundWitness> linear_growth_violation;  // |a| <= Ma|x|
  std::vector<std::string> generator_violations;

  GeneratorReport qbar_report;
  GeneratorReport qstar_report;
  MonotonicityReport monotonicity;

  std::optional<DominationReport> upper_domination;
  std::optional<DominationReport> lower_domination;
  std::optional<TwoStateConditions> two_state;

  bool ok() const noexcept { return errors.empty(); }
};

ScenarioValidation validate_scenario(const Scenario& s);

// Drift a(x, i) and diffusion sigma(x, i) evaluated at a point.
void eval_drift(const Scenario& s, int state, std::span<const double> x, std::span<double> out);
void eval_diffusion(const Scenario& s, int state, std::span<const double> x, std::span<double> out);

}  // namespace rswitch
