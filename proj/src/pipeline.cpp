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

#include "rswitch/pipeline.hpp"

#include <cmath>
#include <limits>

#include "json.hpp"
#include "rswitch/certify.hpp"
#include "rswitch/coupling.hpp"
#include "rswitch/error.hpp"
#include "rswitch/markov.hpp"

namespace rswitch {

namespace {

using Json = nlohmann::ordered_json;

Json matrix_json(const Matrix& m) { return Json(to_rows(m)); }

// +inf and NaN have no JSON spelling; they are written as strings.
Json number_json(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

Json header(const Scenario& s, const char* report) {
  Json j;
  j["report"] = report;
  j["scenario"] = s.name;
  j["scenario_hash"] = scenario_hash(s);
  j["seed"] = s.params.seed;
  return j;
}

Json witness_json(const std::optional<BoundWitness>& w) {
  if (!w) return nullptr;
  return Json{{"x", w->x}, {"state", w->state}, {"excess", w->excess}};
}

Json domination_json(const DominationReport& r) {
  Json v = Json::array();
  for (const auto& w : r.violations) {
    v.push_back(Json{{"x", w.x},
                     {"i1", w.i1},
                     {"i2", w.i2},
                     {"m", w.m},
                     {"inequality", w.tail ? "tail" : "head"},
                     {"margin", w.margin}});
  }
  return Json{{"holds", r.holds}, {"tightest_margin", r.tightest_margin}, {"violations", v}};
}

Json condition_json(const ConditionCheck& c) {
  Json j{{"holds", c.holds}, {"margin", c.margin}};
  j["witness"] = c.witness ? Json(*c.witness) : Json(nullptr);
  return j;
}

Json generator_json(const GeneratorReport& r) {
  return Json{{"valid", r.valid()},
              {"nonnegative", r.nonnegative},
              {"conservative", r.conservative},
              {"irreducible", r.irreducible},
              {"violations", r.violations}};
}

const char* source_name(EnvelopeSource s) {
  return s == EnvelopeSource::GridCertified ? "grid-certified" : "user-asserted";
}

Json certificate_json(const StabilityCertificate& c) {
  return Json{{"tau", c.tau},
              {"K", c.K},
              {"K_below_one", c.K_below_one},
              {"tilt_scale", c.tilt_scale},
              {"eta_3C", c.eta},
              {"eta_positive", c.eta_positive},
              {"lower_root_per_step", c.lower_root_step},
              {"upper_root_per_step", c.upper_root_step},
              {"lambda_star", c.lambda_lower},
              {"lambda_bar", c.lambda_upper},
              {"lambda_star_below_one", c.lambda_lower_below_one},
              {"lambda_bar_below_one", c.lambda_upper_below_one},
              {"pass", c.pass},
              {"pass_per_step_roots", c.pass_per_step},
              {"rho", c.rho}};
}

Json coupling_row_json(const Matrix& q1, const Matrix& q2, int i, int j) {
  const CouplingRow row = coupling_row(q1, q2, i, j);
  const auto diag = verify_coupling_row(row, q1, q2, i, j);
  Json targets = Json::array();
  for (std::size_t m = 0; m < row.rows(); ++m) {
    for (std::size_t n = 0; n < row.cols(); ++n) {
      if (static_cast<int>(m) == i && static_cast<int>(n) == j) continue;
      if (row(m, n) == 0.0) continue;
      targets.push_back(Json{{"to", {m + 1, n + 1}}, {"rate", row(m, n)}});
    }
  }
  return Json{{"from", {i + 1, j + 1}},
              {"construction", i <= j ? "order-preserving" : "basic"},
              {"diagonal", row(static_cast<std::size_t>(i), static_cast<std::size_t>(j))},
              {"targets", targets},
              {"clean", diag.clean()},
              {"max_marginal_residual", diag.max_marginal_residual},
              {"issues", diag.issues}};
}

}  // namespace

ValidateOutcome validate_report(const Scenario& s, bool require_coupling) {
  const ScenarioValidation v = validate_scenario(s);
  Json j = header(s, "validate");
  bool ok = v.ok();
  if (require_coupling) {
    const bool coupling_ok = v.upper_domination && v.upper_domination->holds && v.lower_domination &&
                             v.lower_domination->holds;
    ok = ok && coupling_ok;
  }
  j["ok"] = ok;
  j["errors"] = v.errors;
  j["warnings"] = v.warnings;
  j["dimensions"] = {{"d", s.d}, {"M", s.M}};
  j["rates"] = {{"declared_bound", s.generator.bound()},
                {"max_total_rate_on_grid", v.max_total_rate},
                {"bound_violation", witness_json(v.rate_bound_violation)}};
  j["growth_bounds"] = {{"upper", witness_json(v.growth_upper_violation)},
                        {"lower", witness_json(v.growth_lower_violation)},
                        {"linear", witness_json(v.linear_growth_violation)}};
  j["envelopes"] = {{"source", source_name(s.envelopes.source)},
                    {"qbar", matrix_json(s.envelopes.qbar)},
                    {"qstar", matrix_json(s.envelopes.qstar)},
                    {"qbar_report", generator_json(v.qbar_report)},
                    {"qstar_report", generator_json(v.qstar_report)}};
  Json mono{{"gains", v.monotonicity.gains},
            {"C", v.monotonicity.upper_rates},
            {"c", v.monotonicity.lower_rates}};
  mono["suggested_order"] =
      v.monotonicity.suggested_order ? Json(*v.monotonicity.suggested_order) : Json(nullptr);
  mono["permuted_envelope_irreducible"] = v.monotonicity.permuted_envelope_irreducible;
  j["monotonicity"] = mono;
  j["upper_domination"] = v.upper_domination ? domination_json(*v.upper_domination) : Json(nullptr);
  j["lower_domination"] = v.lower_domination ? domination_json(*v.lower_domination) : Json(nullptr);
  if (v.two_state) {
    j["two_state_conditions"] = {{"upper_sum", condition_json(v.two_state->upper)},
                                 {"lower_sum", condition_json(v.two_state->lower)}};
  } else {
    j["two_state_conditions"] = nullptr;
  }
  j["grid"] = {{"lo", s.grid.lo()}, {"hi", s.grid.hi()}, {"points", s.grid.size()}};
  return ValidateOutcome{ok, j.dump(2) + "\n"};
}

std::string envelopes_report(const Scenario& s) {
  Json j = header(s, "envelopes");
  j["declared"] = {{"source", source_name(s.envelopes.source)},
                   {"qbar", matrix_json(s.envelopes.qbar)},
                   {"qstar", matrix_json(s.envelopes.qstar)}};
  if (s.M == 2) {
    const EnvelopePair grid_env = two_state_envelopes(s.generator, s.grid);
    const auto cond = check_two_state_conditions(s.envelopes, s.generator, s.grid);
    j["grid"] = {{"source", source_name(grid_env.source)},
                 {"qbar", matrix_json(grid_env.qbar)},
                 {"qstar", matrix_json(grid_env.qstar)},
                 {"qbar21_positive", grid_env.qbar21_positive},
                 {"qstar12_positive", grid_env.qstar12_positive}};
    j["conditions"] = {{"upper_sum", condition_json(cond.upper)},
                       {"lower_sum", condition_json(cond.lower)}};
  } else {
    j["grid"] = nullptr;
    j["conditions"] = nullptr;
  }
  j["upper_domination"] = domination_json(check_domination(s.generator, s.envelopes.qbar, s.grid));
  j["lower_domination"] = domination_json(check_lower(s.envelopes.qstar, s.generator, s.grid));
  Json inv;
  for (const auto& [name, q] : {std::pair<const char*, const Matrix*>{"qbar", &s.envelopes.qbar},
                                {"qstar", &s.envelopes.qstar}}) {
    inv[name] = is_irreducible(*q) ? Json(invariant_measure(*q)) : Json(nullptr);
  }
  j["invariant_measures"] = inv;
  return j.dump(2) + "\n";
}

std::string couple_report(const Scenario& s, std::span<const double> x,
                          std::optional<std::pair<int, int>> from) {
  if (static_cast<int>(x.size()) != s.d) {
    throw Error(ErrorCode::InvalidArgument, "couple: point has " + std::to_string(x.size()) +
                                                " coordinates, scenario dimension is " + std::to_string(s.d));
  }
  if (from && (from->first < 0 || from->second < 0 || from->first >= s.M || from->second >= s.M)) {
    throw Error(ErrorCode::InvalidArgument, "couple: product state out of range");
  }
  const Matrix qx = s.generator.at(x);
  Json j = header(s, "couple");
  j["x"] = std::vector<double>(x.begin(), x.end());
  j["qx"] = matrix_json(qx);
  j["qbar"] = matrix_json(s.envelopes.qbar);
  j["qstar"] = matrix_json(s.envelopes.qstar);
  Json upper = Json::array(), lower = Json::array();
  for (int i = 0; i < s.M; ++i) {
    for (int k = 0; k < s.M; ++k) {
      if (from && (from->first != i || from->second != k)) continue;
      upper.push_back(coupling_row_json(qx, s.envelopes.qbar, i, k));
      lower.push_back(coupling_row_json(s.envelopes.qstar, qx, i, k));
    }
  }
  j["upper_pair"] = {{"description", "(main, upper) chains: Q(x) against Qbar"}, {"rows", upper}};
  j["lower_pair"] = {{"description", "(lower, main) chains: Qstar against Q(x)"}, {"rows", lower}};
  return j.dump(2) + "\n";
}

std::string spectral_report(const Scenario& s, const SpectralRequest& req) {
  const auto m = static_cast<std::size_t>(s.M);
  const Vector theta = req.theta.value_or(Vector(m, 0.0));
  if (theta.size() != m) {
    throw Error(ErrorCode::InvalidArgument, "spectral: theta needs " + std::to_string(m) + " entries");
  }
  if (req.n_max < 0) throw Error(ErrorCode::InvalidArgument, "spectral: n_max must be >= 0");
  const double tau = req.tau.value_or(s.params.tau);
  Json j = header(s, "spectral");
  j["tau"] = tau;
  j["theta"] = theta;
  for (const auto& [name, q] : {std::pair<const char*, const Matrix*>{"qbar", &s.envelopes.qbar},
                                {"qstar", &s.envelopes.qstar}}) {
    Json e;
    const Matrix p = skeleton_transition(*q, tau);
    e["generator"] = matrix_json(*q);
    e["skeleton"] = matrix_json(p);
    const bool irr = is_irreducible(*q);
    e["irreducible"] = irr;
    if (irr) {
      const Vector mu = invariant_measure(*q);
      const auto pr = perron(tilt(p, theta));
      e["invariant_measure"] = mu;
      e["perron_root"] = pr.root;
      e["perron_iterations"] = pr.iterations;
      Json table = Json::array();
      for (int n = 0; n <= req.n_max; ++n) {
        const double f = exp_functional(mu, p, theta, n);
        table.push_back(Json{{"n", n}, {"value", f}, {"ratio_to_root_power", f / std::pow(pr.root, n)}});
      }
      e["exp_functional"] = table;
    }
    j[name] = e;
  }
  if (is_irreducible(s.envelopes.qbar)) {
    j["eta"] = {{"p", req.p}, {"C", s.bounds.C}, {"value", spectral_abscissa_eta(s.envelopes.qbar, s.bounds.C, req.p)}};
  } else {
    j["eta"] = nullptr;
  }
  return j.dump(2) + "\n";
}

CertifyOutcome certify_report(const Scenario& s, std::optional<double> tau, bool sweep) {
  const double t = tau.value_or(s.params.tau);
  Json j = header(s, "certify");
  j["bounds"] = {{"C", s.bounds.C},
                 {"c", s.bounds.c},
                 {"Ma", s.bounds.Ma},
                 {"b", s.bounds.b},
                 {"C_max", s.bounds.C_max()},
                 {"b_max", s.bounds.b_max()}};
  j["tau_max"] = number_json(max_tau_for_contraction(s.bounds));
  j["K"] = k_tau(t, s.bounds);
  bool pass = false;
  if (k_tau(t, s.bounds) < 1.0) {
    const auto c = certify(s.bounds, s.envelopes.qbar, s.envelopes.qstar, t);
    pass = c.pass;
    j["pass"] = pass;
    j["certificate"] = certificate_json(c);
  } else {
    j["pass"] = false;
    j["certificate"] = nullptr;
    j["reason"] = "K(tau) >= 1: the observation lag does not contract at this tau";
  }
  if (sweep) {
    const TauSearch search = feasible_tau_search(s.bounds, s.envelopes.qbar, s.envelopes.qstar, 40, t);
    Json ev = Json::array(), pass = Json::array();
    for (const auto& c : search.evaluated) ev.push_back(certificate_json(c));
    for (const auto& c : search.passing) pass.push_back(c.tau);
    j["sweep"] = {{"tau_max", number_json(search.tau_max)},
                  {"evaluated", ev},
                  {"passing_tau", pass},
                  {"best", search.best ? certificate_json(*search.best) : Json(nullptr)},
                  {"lambda_bar_non_decreasing", search.lambda_upper_monotone}};
  }
  return CertifyOutcome{pass, j.dump(2) + "\n"};
}

std::string simulate_report(const Scenario& s, const RunRequest& req) {
  const HybridPath path = req.coupling == CouplingMode::None
                              ? simulate_hybrid(s, req.params, req.path_index)
                              : simulate_coupled(s, req.params, req.path_index, req.coupling);
  return path_to_csv(path, scenario_hash(s), req.params.seed);
}

std::string mc_report(const Scenario& s, const RunRequest& req) {
  McOptions opt;
  opt.coupling = req.coupling;
  opt.threads = req.threads;
  opt.stride = req.stride;
  return summary_to_json(monte_carlo(s, req.params, opt));
}

}  // namespace rswitch
