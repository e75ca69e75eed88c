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

#include <cmath>
#include <cstring>
#include <string>

#include "doctest.h"
#include "rswitch/rswitch.h"

namespace {

std::string fixture(const char* name) { return std::string(RSWITCH_SCENARIO_DIR) + "/" + name; }

// Owns a string returned by the library.
struct Owned {
  char* p = nullptr;
  ~Owned() { rsw_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct Loaded {
  rsw_scenario* s = nullptr;
  explicit Loaded(const char* name) { REQUIRE(rsw_scenario_load_file(fixture(name).c_str(), &s) == RSW_OK); }
  ~Loaded() { rsw_scenario_free(s); }
};

}  // namespace

TEST_CASE("loading and status codes") {
  rsw_scenario* s = nullptr;
  CHECK(rsw_scenario_load_file(fixture("missing.json").c_str(), &s) == RSW_IO);
  CHECK(s == nullptr);
  CHECK(std::strlen(rsw_last_error()) > 0);
  CHECK(rsw_scenario_load_json("{oops", &s) == RSW_PARSE);
  CHECK(rsw_scenario_load_json("{}", &s) == RSW_SCHEMA);
  CHECK(rsw_scenario_load_file(nullptr, &s) == RSW_INVALID_ARGUMENT);
  CHECK(std::strlen(rsw_version()) > 0);

  Loaded l("opc7.json");
  int d = 0, m = 0;
  CHECK(rsw_scenario_dimensions(l.s, &d, &m) == RSW_OK);
  CHECK(d == 1);
  CHECK(m == 3);
  Owned h;
  CHECK(rsw_scenario_hash(l.s, &h.p) == RSW_OK);
  CHECK(h.str().size() == 16);
}

TEST_CASE("reports") {
  Loaded l("opc7.json");
  int ok = -1;
  Owned v;
  CHECK(rsw_validate(l.s, 1, &ok, &v.p) == RSW_OK);
  CHECK(ok == 0);
  CHECK(v.str().find("\"scenario_hash\"") != std::string::npos);

  Owned e;
  CHECK(rsw_echo(l.s, &e.p) == RSW_OK);
  rsw_scenario* again = nullptr;
  REQUIRE(rsw_scenario_load_json(e.p, &again) == RSW_OK);
  Owned h1, h2;
  rsw_scenario_hash(l.s, &h1.p);
  rsw_scenario_hash(again, &h2.p);
  CHECK(h1.str() == h2.str());
  rsw_scenario_free(again);

  const double x[2] = {0.0, 1.0};
  Owned c;
  CHECK(rsw_couple(l.s, x, 2, 0, 0, &c.p) == RSW_INVALID_ARGUMENT);
  CHECK(rsw_couple(l.s, x, 1, 1, 2, &c.p) == RSW_OK);

  Owned sp;
  CHECK(rsw_spectral(l.s, nullptr, 0, 0.0, 3, &sp.p) == RSW_OK);

  Owned ce;
  int pass = -1;
  CHECK(rsw_certify(l.s, 0.0, 0, &pass, &ce.p) == RSW_OK);
  CHECK((pass == 0 || pass == 1));
}

TEST_CASE("simulation") {
  Loaded l("opc6.json");
  rsw_sim_options o;
  rsw_sim_options_init(&o);
  o.horizon = 0.5;
  o.paths = 4;
  o.coupling = RSW_COUPLING_AUTO;
  Owned a, b, mc;
  CHECK(rsw_simulate_csv(l.s, &o, &a.p) == RSW_OK);
  CHECK(rsw_simulate_csv(l.s, &o, &b.p) == RSW_OK);
  CHECK(a.str() == b.str());
  CHECK(rsw_monte_carlo(l.s, &o, &mc.p) == RSW_OK);
  CHECK(mc.str().find("\"paths\"") != std::string::npos);

  o.horizon = 0.0105;  // not a multiple of the step
  Owned bad;
  CHECK(rsw_simulate_csv(l.s, &o, &bad.p) != RSW_OK);

  Loaded l7("opc7.json");
  rsw_sim_options_init(&o);
  o.horizon = 1.0;
  o.coupling = RSW_COUPLING_ORDER_PRESERVING;
  CHECK(rsw_simulate_csv(l7.s, &o, &bad.p) == RSW_VALIDATION);
  CHECK(rsw_simulate_csv(nullptr, &o, &bad.p) == RSW_INVALID_ARGUMENT);
}

TEST_CASE("numeric helpers") {
  const double q[4] = {-2, 2, 1, -1};
  double mu[2];
  CHECK(rsw_invariant_measure(q, 2, mu) == RSW_OK);
  CHECK(mu[0] == doctest::Approx(1.0 / 3));
  double p[4];
  CHECK(rsw_skeleton_transition(q, 2, 0.5, p) == RSW_OK);
  CHECK(p[0] + p[1] == doctest::Approx(1.0));
  double root = 0.0;
  CHECK(rsw_perron_root(p, 2, &root) == RSW_OK);
  CHECK(root == doctest::Approx(1.0));
  const double c[2] = {0.0, 0.0};
  double eta = 1.0;
  CHECK(rsw_eta(q, 2, c, 3.0, &eta) == RSW_OK);
  CHECK(std::abs(eta) < 1e-10);
  const double bad[4] = {-1, 2, 1, -1};
  CHECK(rsw_invariant_measure(bad, 2, mu) != RSW_OK);
}

TEST_CASE("expression handle") {
  rsw_expr* e = nullptr;
  REQUIRE(rsw_expr_parse("x1^2 + sin(x2)", 2, &e) == RSW_OK);
  const double x[2] = {3.0, 0.0};
  double v = 0.0;
  CHECK(rsw_expr_eval(e, x, 2, &v) == RSW_OK);
  CHECK(v == 9.0);
  CHECK(rsw_expr_eval(e, x, 1, &v) == RSW_INVALID_ARGUMENT);
  Owned printed;
  CHECK(rsw_expr_print(e, &printed.p) == RSW_OK);
  CHECK_FALSE(printed.str().empty());
  rsw_expr_free(e);

  rsw_expr* bad = nullptr;
  CHECK(rsw_expr_parse("x1 +", 1, &bad) == RSW_PARSE);
  CHECK(bad == nullptr);
  rsw_expr* div = nullptr;
  REQUIRE(rsw_expr_parse("1/x", 1, &div) == RSW_OK);
  const double zero = 0.0;
  CHECK(rsw_expr_eval(div, &zero, 1, &v) == RSW_NUMERIC);
  rsw_expr_free(div);
}
