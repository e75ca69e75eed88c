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

#include "rswitch/rswitch.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "rswitch/error.hpp"
#include "rswitch/expr.hpp"
#include "rswitch/markov.hpp"
#include "rswitch/pipeline.hpp"
#include "rswitch/scenario.hpp"

struct rsw_scenario {
  rswitch::Scenario s;
};

struct rsw_expr {
  rswitch::Expr e;
};

namespace {

thread_local std::string g_last_error;

// Every entry point funnels through here so no exception crosses the C
// boundary.
template <class F>
rsw_status guarded(F&& f) noexcept {
  try {
    g_last_error.clear();
    f();
    return RSW_OK;
  } catch (const rswitch::Error& e) {
    g_last_error = e.what();
    return static_cast<rsw_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return RSW_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RSW_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return RSW_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void require(const void* p, const char* what) {
  if (!p) throw rswitch::Error(rswitch::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

rswitch::Matrix dense(const double* q, size_t m) {
  require(q, "matrix");
  rswitch::Matrix out(m, m);
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < m; ++j) out(i, j) = q[i * m + j];
  }
  return out;
}

rswitch::CouplingMode mode_of(rsw_coupling c) {
  switch (c) {
    case RSW_COUPLING_NONE: return rswitch::CouplingMode::None;
    case RSW_COUPLING_AUTO: return rswitch::CouplingMode::Auto;
    case RSW_COUPLING_SHARED_MARKS: return rswitch::CouplingMode::SharedMarks;
    case RSW_COUPLING_ORDER_PRESERVING: return rswitch::CouplingMode::OrderPreserving;
  }
  throw rswitch::Error(rswitch::ErrorCode::InvalidArgument, "unknown coupling mode");
}

rswitch::RunRequest run_request(const rsw_scenario* s, const rsw_sim_options* o) {
  require(s, "scenario");
  rsw_sim_options defaults;
  rsw_sim_options_init(&defaults);
  if (!o) o = &defaults;
  rswitch::RunRequest r;
  r.params = s->s.params;
  if (o->paths > 0) r.params.paths = o->paths;
  if (o->horizon > 0.0) {
    rswitch::SimulationParams p = r.params;
    p.horizon = o->horizon;
    const double ratio = p.horizon / p.step;
    if (p.horizon < p.tau || std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
      throw rswitch::Error(rswitch::ErrorCode::InvalidArgument,
                           "horizon must be a multiple of step and at least tau");
    }
    r.params = p;
  }
  if (o->has_seed) r.params.seed = o->seed;
  r.coupling = mode_of(o->coupling);
  r.path_index = o->path_index;
  r.threads = o->threads == 0 ? 1 : o->threads;
  if (o->stride < 0) throw rswitch::Error(rswitch::ErrorCode::InvalidArgument, "stride must be >= 0");
  r.stride = o->stride;
  return r;
}

}  // namespace

extern "C" {

const char* rsw_last_error(void) { return g_last_error.c_str(); }

void rsw_string_free(char* s) { std::free(s); }

const char* rsw_version(void) { return "0.1.0"; }

rsw_status rsw_scenario_load_file(const char* path, rsw_scenario** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new rsw_scenario{rswitch::load_scenario_file(path)};
  });
}

rsw_status rsw_scenario_load_json(const char* text, rsw_scenario** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = new rsw_scenario{rswitch::load_scenario_text(text)};
  });
}

void rsw_scenario_free(rsw_scenario* s) { delete s; }

rsw_status rsw_scenario_hash(const rsw_scenario* s, char** out) {
  return guarded([&] {
    require(s, "scenario");
    require(out, "out");
    *out = dup_string(rswitch::scenario_hash(s->s));
  });
}

rsw_status rsw_scenario_dimensions(const rsw_scenario* s, int* d, int* m) {
  return guarded([&] {
    require(s, "scenario");
    if (d) *d = s->s.d;
    if (m) *m = s->s.M;
  });
}

rsw_status rsw_validate(const rsw_scenario* s, int require_coupling, int* ok, char** json) {
  return guarded([&] {
    require(s, "scenario");
    require(json, "json");
    const auto r = rswitch::validate_report(s->s, require_coupling != 0);
    if (ok) *ok = r.ok ? 1 : 0;
    *json = dup_string(r.json);
  });
}

rsw_status rsw_echo(const rsw_scenario* s, char** json) {
  return guarded([&] {
    require(s, "scenario");
    require(json, "json");
    *json = dup_string(rswitch::emit_scenario(s->s));
  });
}

rsw_status rsw_envelopes(const rsw_scenario* s, char** json) {
  return guarded([&] {
    require(s, "scenario");
    require(json, "json");
    *json = dup_string(rswitch::envelopes_report(s->s));
  });
}

rsw_status rsw_couple(const rsw_scenario* s, const double* x, size_t d, int from_i, int from_j,
                      char** json) {
  return guarded([&] {
    require(s, "scenario");
    require(x, "x");
    require(json, "json");
    std::optional<std::pair<int, int>> from;
    if (from_i != 0 || from_j != 0) from = std::pair{from_i - 1, from_j - 1};
    *json = dup_string(rswitch::couple_report(s->s, std::span<const double>(x, d), from));
  });
}

rsw_status rsw_spectral(const rsw_scenario* s, const double* theta, size_t m, double tau, int n_max,
                        char** json) {
  return guarded([&] {
    require(s, "scenario");
    require(json, "json");
    rswitch::SpectralRequest req;
    if (theta) req.theta = std::vector<double>(theta, theta + m);
    if (tau > 0.0) req.tau = tau;
    req.n_max = n_max;
    *json = dup_string(rswitch::spectral_report(s->s, req));
  });
}

rsw_status rsw_certify(const rsw_scenario* s, double tau, int sweep, int* pass, char** json) {
  return guarded([&] {
    require(s, "scenario");
    require(json, "json");
    std::optional<double> t;
    if (tau > 0.0) t = tau;
    const auto r = rswitch::certify_report(s->s, t, sweep != 0);
    if (pass) *pass = r.pass ? 1 : 0;
    *json = dup_string(r.json);
  });
}

void rsw_sim_options_init(rsw_sim_options* o) {
  if (!o) return;
  *o = rsw_sim_options{};
  o->paths = 0;
  o->horizon = 0.0;
  o->has_seed = 0;
  o->seed = 0;
  o->coupling = RSW_COUPLING_NONE;
  o->path_index = 0;
  o->threads = 1;
  o->stride = 0;
}

rsw_status rsw_simulate_csv(const rsw_scenario* s, const rsw_sim_options* o, char** csv) {
  return guarded([&] {
    require(csv, "csv");
    const auto req = run_request(s, o);
    *csv = dup_string(rswitch::simulate_report(s->s, req));
  });
}

rsw_status rsw_monte_carlo(const rsw_scenario* s, const rsw_sim_options* o, char** json) {
  return guarded([&] {
    require(json, "json");
    const auto req = run_request(s, o);
    *json = dup_string(rswitch::mc_report(s->s, req));
  });
}

rsw_status rsw_invariant_measure(const double* q, size_t m, double* mu) {
  return guarded([&] {
    require(mu, "mu");
    const auto v = rswitch::invariant_measure(dense(q, m));
    std::copy(v.begin(), v.end(), mu);
  });
}

rsw_status rsw_skeleton_transition(const double* q, size_t m, double tau, double* p) {
  return guarded([&] {
    require(p, "p");
    const auto r = rswitch::skeleton_transition(dense(q, m), tau);
    std::copy(r.data().begin(), r.data().end(), p);
  });
}

rsw_status rsw_perron_root(const double* a, size_t m, double* root) {
  return guarded([&] {
    require(root, "root");
    *root = rswitch::perron_root(dense(a, m));
  });
}

rsw_status rsw_eta(const double* qbar, size_t m, const double* c, double p, double* eta) {
  return guarded([&] {
    require(c, "c");
    require(eta, "eta");
    *eta = rswitch::spectral_abscissa_eta(dense(qbar, m), std::span<const double>(c, m), p);
  });
}

rsw_status rsw_expr_parse(const char* source, int dimension, rsw_expr** out) {
  return guarded([&] {
    require(source, "source");
    require(out, "out");
    if (dimension < 0) throw rswitch::Error(rswitch::ErrorCode::InvalidArgument, "dimension must be >= 0");
    rswitch::ParseOptions opt;
    opt.dimension = dimension;
    *out = new rsw_expr{rswitch::parse_expr(source, opt)};
  });
}

rsw_status rsw_expr_eval(const rsw_expr* e, const double* x, size_t n, double* value) {
  return guarded([&] {
    require(e, "expr");
    require(value, "value");
    if (n > 0) require(x, "x");
    *value = e->e.eval(std::span<const double>(x, n));
  });
}

rsw_status rsw_expr_print(const rsw_expr* e, char** out) {
  return guarded([&] {
    require(e, "expr");
    require(out, "out");
    *out = dup_string(e->e.print());
  });
}

void rsw_expr_free(rsw_expr* e) { delete e; }

}  // extern "C"
