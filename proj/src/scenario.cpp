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

#include "rswitch/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace rswitch {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

std::int64_t SimulationParams::steps() const {
  return static_cast<std::int64_t>(std::llround(horizon / step));
}

std::int64_t SimulationParams::steps_per_period() const {
  return static_cast<std::int64_t>(std::llround(tau / step));
}

double CoefficientBounds::C_max() const {
  return C.empty() ? 0.0 : *std::max_element(C.begin(), C.end());
}

double CoefficientBounds::b_max() const {
  return b.empty() ? 0.0 : *std::max_element(b.begin(), b.end());
}

namespace {

std::string join_pointer(const std::string& base, const std::string& key) {
  return base + "/" + key;
}

std::string join_pointer(const std::string& base, std::size_t index) {
  return base + "/" + std::to_string(index);
}

std::string format_point(std::span<const double> x) {
  std::ostringstream os;
  os.precision(17);
  if (x.size() == 1) {
    os << x[0];
    return os.str();
  }
  os << "(";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

// Schema-checking reader. Every accessor validates type and range and
// records the value in the canonical document.
class Reader {
 public:
  explicit Reader(const Json& root) : root_(root) {}

  const Json& object(const Json& parent, const std::string& ptr, const char* key,
                     bool required = true) const {
    const std::string p = join_pointer(ptr, key);
    if (!parent.contains(key)) {
      if (required) throw SchemaError(p, "required property is missing");
      return null_;
    }
    const Json& v = parent.at(key);
    if (!v.is_object()) throw SchemaError(p, "expected an object");
    return v;
  }

  static void only_keys(const Json& obj, const std::string& ptr,
                        std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool known = false;
      for (const char* a : allowed) known = known || it.key() == a;
      if (!known) throw SchemaError(join_pointer(ptr, it.key()), "unknown property");
    }
  }

  static double number(const Json& v, const std::string& ptr) {
    if (!v.is_number()) throw SchemaError(ptr, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw SchemaError(ptr, "expected a finite number");
    return x;
  }

  static double positive(const Json& v, const std::string& ptr) {
    const double x = number(v, ptr);
    if (!(x > 0.0)) throw SchemaError(ptr, "expected a positive number");
    return x;
  }

  static std::int64_t integer(const Json& v, const std::string& ptr, std::int64_t lo,
                              std::int64_t hi) {
    if (!v.is_number_integer()) throw SchemaError(ptr, "expected an integer");
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(hi)) {
      throw SchemaError(ptr, "integer out of range");
    }
    const auto x = v.get<std::int64_t>();
    if (x < lo || x > hi) {
      throw SchemaError(ptr, "expected an integer in [" + std::to_string(lo) + ", " +
                                 std::to_string(hi) + "]");
    }
    return x;
  }

  static const Json& array(const Json& v, const std::string& ptr, std::size_t size) {
    if (!v.is_array()) throw SchemaError(ptr, "expected an array");
    if (v.size() != size) {
      throw SchemaError(ptr, "expected " + std::to_string(size) + " elements, found " +
                                 std::to_string(v.size()));
    }
    return v;
  }

  static Vector numbers(const Json& v, const std::string& ptr, std::size_t size) {
    array(v, ptr, size);
    Vector out(size);
    for (std::size_t i = 0; i < size; ++i) out[i] = number(v[i], join_pointer(ptr, i));
    return out;
  }

  static Matrix matrix(const Json& v, const std::string& ptr, std::size_t m) {
    array(v, ptr, m);
    Matrix out(m, m);
    for (std::size_t i = 0; i < m; ++i) {
      const Vector row = numbers(v[i], join_pointer(ptr, i), m);
      for (std::size_t j = 0; j < m; ++j) out(i, j) = row[j];
    }
    return out;
  }

  // Expression given either as a string in the expression grammar or as a
  // plain number.
  static Expr expression(const Json& v, const std::string& ptr, int dimension, OrderedJson& echo) {
    if (v.is_number()) {
      const double x = number(v, ptr);
      echo = v;
      return Expr::constant(x);
    }
    if (!v.is_string()) throw SchemaError(ptr, "expected an expression string or a number");
    const auto& src = v.get_ref<const std::string&>();
    echo = src;
    try {
      return parse_expr(src, ParseOptions{dimension});
    } catch (const ParseError& e) {
      throw SchemaError(ptr, std::string("invalid expression: ") + e.what());
    }
  }

 private:
  const Json& root_;
  Json null_;
};

bool non_decreasing(const Vector& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < v[i - 1]) return false;
  return true;
}

Scenario build(const Json& doc) {
  if (!doc.is_object()) throw SchemaError("", "scenario must be a JSON object");
  Reader::only_keys(doc, "",
                    {"name", "dimensions", "tau", "step", "horizon", "seed", "paths", "initial",
                     "drift", "diffusion", "gains", "rates", "rate_bound", "envelopes",
                     "coefficient_bounds", "grid"});
  Reader rd(doc);
  Scenario s;
  OrderedJson out;

  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw SchemaError("/name", "expected a string");
    s.name = doc["name"].get<std::string>();
  }
  out["name"] = s.name;

  const Json& dims = rd.object(doc, "", "dimensions");
  Reader::only_keys(dims, "/dimensions", {"d", "M"});
  if (!dims.contains("d")) throw SchemaError("/dimensions/d", "required property is missing");
  if (!dims.contains("M")) throw SchemaError("/dimensions/M", "required property is missing");
  s.d = static_cast<int>(Reader::integer(dims["d"], "/dimensions/d", 1, 64));
  s.M = static_cast<int>(Reader::integer(dims["M"], "/dimensions/M", 2, 64));
  out["dimensions"] = {{"d", s.d}, {"M", s.M}};
  const auto d = static_cast<std::size_t>(s.d);
  const auto m = static_cast<std::size_t>(s.M);

  auto req = [&](const char* key) -> const Json& {
    if (!doc.contains(key)) throw SchemaError(std::string("/") + key, "required property is missing");
    return doc[key];
  };

  s.params.tau = Reader::positive(req("tau"), "/tau");
  s.params.step = Reader::positive(req("step"), "/step");
  s.params.horizon = Reader::positive(req("horizon"), "/horizon");
  if (doc.contains("seed")) {
    const Json& v = doc["seed"];
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw SchemaError("/seed", "expected a non-negative integer");
    }
    s.params.seed = v.get<std::uint64_t>();
  }
  if (doc.contains("paths")) {
    s.params.paths = Reader::integer(doc["paths"], "/paths", 1, std::numeric_limits<std::int32_t>::max());
  }
  if (s.params.step > s.params.tau) throw SchemaError("/step", "step must not exceed tau");
  if (s.params.tau > s.params.horizon) throw SchemaError("/tau", "tau must not exceed horizon");
  const double ratio = s.params.tau / s.params.step;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
    throw SchemaError("/step", "tau must be an integer multiple of step");
  }
  const double nsteps = s.params.horizon / s.params.step;
  if (std::abs(nsteps - std::round(nsteps)) > 1e-9 * nsteps) {
    throw SchemaError("/horizon", "horizon must be an integer multiple of step");
  }
  out["tau"] = s.params.tau;
  out["step"] = s.params.step;
  out["horizon"] = s.params.horizon;
  out["seed"] = s.params.seed;
  out["paths"] = s.params.paths;

  const Json& init = rd.object(doc, "", "initial");
  Reader::only_keys(init, "/initial", {"x", "state"});
  if (!init.contains("x")) throw SchemaError("/initial/x", "required property is missing");
  if (!init.contains("state")) throw SchemaError("/initial/state", "required property is missing");
  s.x0 = Reader::numbers(init["x"], "/initial/x", d);
  s.state0 = static_cast<int>(Reader::integer(init["state"], "/initial/state", 1, s.M)) - 1;
  out["initial"] = {{"x", s.x0}, {"state", s.state0 + 1}};

  const Json& drift = Reader::array(req("drift"), "/drift", m);
  OrderedJson drift_out = OrderedJson::array();
  s.drift.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::string p = join_pointer("/drift", i);
    Reader::array(drift[i], p, d);
    OrderedJson row = OrderedJson::array();
    for (std::size_t k = 0; k < d; ++k) {
      OrderedJson e;
      s.drift[i].push_back(Reader::expression(drift[i][k], join_pointer(p, k), s.d, e));
      row.push_back(e);
    }
    drift_out.push_back(row);
  }
  out["drift"] = drift_out;

  const Json& diff = Reader::array(req("diffusion"), "/diffusion", m);
  OrderedJson diff_out = OrderedJson::array();
  s.diffusion.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::string p = join_pointer("/diffusion", i);
    Reader::array(diff[i], p, d);
    OrderedJson mat = OrderedJson::array();
    for (std::size_t r = 0; r < d; ++r) {
      const std::string pr = join_pointer(p, r);
      Reader::array(diff[i][r], pr, d);
      OrderedJson row = OrderedJson::array();
      for (std::size_t c = 0; c < d; ++c) {
        OrderedJson e;
        s.diffusion[i].push_back(Reader::expression(diff[i][r][c], join_pointer(pr, c), s.d, e));
        row.push_back(e);
      }
      mat.push_back(row);
    }
    diff_out.push_back(mat);
  }
  out["diffusion"] = diff_out;

  s.bounds.b = Reader::numbers(req("gains"), "/gains", m);
  out["gains"] = s.bounds.b;

  const Json& rates = Reader::array(req("rates"), "/rates", m);
  OrderedJson rates_out = OrderedJson::array();
  std::vector<std::vector<Expr>> rate_exprs(m, std::vector<Expr>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const std::string p = join_pointer("/rates", i);
    Reader::array(rates[i], p, m);
    OrderedJson row = OrderedJson::array();
    for (std::size_t j = 0; j < m; ++j) {
      const std::string pj = join_pointer(p, j);
      if (i == j) {
        if (!rates[i][j].is_null()) throw SchemaError(pj, "diagonal rate must be null");
        row.push_back(nullptr);
        continue;
      }
      OrderedJson e;
      rate_exprs[i][j] = Reader::expression(rates[i][j], pj, s.d, e);
      row.push_back(e);
    }
    rates_out.push_back(row);
  }
  out["rates"] = rates_out;

  const double bound = Reader::positive(req("rate_bound"), "/rate_bound");
  out["rate_bound"] = bound;
  s.generator = StateDependentGenerator(s.d, std::move(rate_exprs), bound);

  const Json& cb = rd.object(doc, "", "coefficient_bounds");
  Reader::only_keys(cb, "/coefficient_bounds", {"C", "c", "Ma"});
  if (!cb.contains("C")) throw SchemaError("/coefficient_bounds/C", "required property is missing");
  if (!cb.contains("c")) throw SchemaError("/coefficient_bounds/c", "required property is missing");
  if (!cb.contains("Ma")) throw SchemaError("/coefficient_bounds/Ma", "required property is missing");
  s.bounds.C = Reader::numbers(cb["C"], "/coefficient_bounds/C", m);
  s.bounds.c = Reader::numbers(cb["c"], "/coefficient_bounds/c", m);
  s.bounds.Ma = Reader::number(cb["Ma"], "/coefficient_bounds/Ma");
  if (s.bounds.Ma < 0.0) throw SchemaError("/coefficient_bounds/Ma", "expected a non-negative number");
  out["coefficient_bounds"] = {{"C", s.bounds.C}, {"c", s.bounds.c}, {"Ma", s.bounds.Ma}};

  const Json& grid = rd.object(doc, "", "grid");
  Reader::only_keys(grid, "/grid", {"lo", "hi", "n"});
  for (const char* k : {"lo", "hi", "n"}) {
    if (!grid.contains(k)) throw SchemaError(std::string("/grid/") + k, "required property is missing");
  }
  const double lo = Reader::number(grid["lo"], "/grid/lo");
  const double hi = Reader::number(grid["hi"], "/grid/hi");
  const auto n = Reader::integer(grid["n"], "/grid/n", 1, 10'000'000);
  if (lo > hi) throw SchemaError("/grid/hi", "hi must not be below lo");
  double total = 1.0;
  for (int k = 0; k < s.d; ++k) total *= static_cast<double>(n);
  if (total > 1e7) throw SchemaError("/grid/n", "grid has more than 1e7 points");
  s.grid = SampleGrid(s.d, lo, hi, static_cast<std::size_t>(n));
  out["grid"] = {{"lo", lo}, {"hi", hi}, {"n", n}};

  const Json& env = rd.object(doc, "", "envelopes", false);
  if (!env.is_null()) {
    Reader::only_keys(env, "/envelopes", {"qbar", "qstar"});
    if (!env.contains("qbar")) throw SchemaError("/envelopes/qbar", "required property is missing");
    if (!env.contains("qstar")) throw SchemaError("/envelopes/qstar", "required property is missing");
    s.envelopes.qbar = Reader::matrix(env["qbar"], "/envelopes/qbar", m);
    s.envelopes.qstar = Reader::matrix(env["qstar"], "/envelopes/qstar", m);
    s.envelopes.source = EnvelopeSource::UserSupplied;
    s.envelopes.qbar21_positive = s.envelopes.qbar(1, 0) > 0.0;
    s.envelopes.qstar12_positive = s.envelopes.qstar(0, 1) > 0.0;
    s.envelopes_declared = true;
    out["envelopes"] = {{"qbar", to_rows(s.envelopes.qbar)}, {"qstar", to_rows(s.envelopes.qstar)}};
  } else if (s.M == 2) {
    s.envelopes = two_state_envelopes(s.generator, s.grid);
  } else {
    throw SchemaError("/envelopes", "envelopes are required when M > 2");
  }

  s.canonical = out.dump(2) + "\n";
  return s;
}

}  // namespace

Scenario load_scenario_text(std::string_view json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text.begin(), json_text.end());
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), e.byte);
  }
  return build(doc);
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_scenario_text(ss.str());
}

std::string emit_scenario(const Scenario& s) { return s.canonical; }

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string scenario_hash(const Scenario& s) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(s.canonical)));
  return buf;
}

void eval_drift(const Scenario& s, int state, std::span<const double> x, std::span<double> out) {
  const auto& row = s.drift[static_cast<std::size_t>(state)];
  for (std::size_t k = 0; k < row.size(); ++k) out[k] = row[k].eval(x);
}

void eval_diffusion(const Scenario& s, int state, std::span<const double> x, std::span<double> out) {
  const auto& row = s.diffusion[static_cast<std::size_t>(state)];
  for (std::size_t k = 0; k < row.size(); ++k) out[k] = row[k].eval(x);
}

namespace {

void keep_worst(std::optional<BoundWitness>& slot, std::span<const double> x, int state,
                double excess) {
  if (!slot || excess > slot->excess) {
    slot = BoundWitness{std::vector<double>(x.begin(), x.end()), state + 1, excess};
  }
}

std::string describe(const BoundWitness& w) {
  std::ostringstream os;
  os.precision(6);
  os << "state " << w.state << " at x = " << format_point(w.x) << " (excess " << w.excess << ")";
  return os.str();
}

MonotonicityReport check_monotonicity(const Scenario& s) {
  MonotonicityReport r;
  r.gains = non_decreasing(s.bounds.b);
  r.upper_rates = non_decreasing(s.bounds.C);
  r.lower_rates = non_decreasing(s.bounds.c);
  if (r.gains && r.upper_rates && r.lower_rates) return r;

  const auto m = static_cast<std::size_t>(s.M);
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
    if (s.bounds.C[ua] != s.bounds.C[ub]) return s.bounds.C[ua] < s.bounds.C[ub];
    if (s.bounds.b[ua] != s.bounds.b[ub]) return s.bounds.b[ua] < s.bounds.b[ub];
    return s.bounds.c[ua] < s.bounds.c[ub];
  });
  auto permuted = [&](const Vector& v) {
    Vector p(m);
    for (std::size_t k = 0; k < m; ++k) p[k] = v[static_cast<std::size_t>(order[k])];
    return p;
  };
  if (non_decreasing(permuted(s.bounds.b)) && non_decreasing(permuted(s.bounds.C)) &&
      non_decreasing(permuted(s.bounds.c))) {
    std::vector<int> labels;
    for (int o : order) labels.push_back(o + 1);
    r.suggested_order = labels;
    Matrix q(m, m);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b)
        q(a, b) = s.envelopes.qbar(static_cast<std::size_t>(order[a]), static_cast<std::size_t>(order[b]));
    r.permuted_envelope_irreducible = is_irreducible(q);
  }
  return r;
}

}  // namespace

ScenarioValidation validate_scenario(const Scenario& s) {
  ScenarioValidation v;
  const auto d = static_cast<std::size_t>(s.d);
  const auto m = static_cast<std::size_t>(s.M);
  const double bound = s.generator.bound();
  std::vector<double> a(d), sigma(d * d);
  std::optional<BoundWitness> negative_rate;
  std::size_t eval_failures = 0;
  std::string first_eval_failure;

  s.grid.for_each([&](std::span<const double> x) {
    double norm2 = 0.0;
    for (double xi : x) norm2 += xi * xi;
    const double tol = 1e-9 * std::max(1.0, norm2);
    try {
      const Matrix q = s.generator.at(x);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          if (i != j && q(i, j) < 0.0) keep_worst(negative_rate, x, static_cast<int>(i), -q(i, j));
        }
        const double qi = -q(i, i);
        v.max_total_rate = std::max(v.max_total_rate, qi);
        if (qi > bound * (1.0 + 1e-12)) keep_worst(v.rate_bound_violation, x, static_cast<int>(i), qi - bound);
      }
      for (std::size_t i = 0; i < m; ++i) {
        const int st = static_cast<int>(i);
        eval_drift(s, st, x, a);
        eval_diffusion(s, st, x, sigma);
        double ax = 0.0, a2 = 0.0, hs = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          ax += a[k] * x[k];
          a2 += a[k] * a[k];
        }
        for (double sv : sigma) hs += sv * sv;
        const double lhs = 2.0 * ax + hs;
        const double up = lhs - s.bounds.C[i] * norm2;
        const double low = s.bounds.c[i] * norm2 - lhs;
        if (up > tol) keep_worst(v.growth_upper_violation, x, st, up);
        if (low > tol) keep_worst(v.growth_lower_violation, x, st, low);
        const double lin = std::sqrt(a2) - s.bounds.Ma * std::sqrt(norm2);
        if (lin > 1e-9 * std::max(1.0, std::sqrt(norm2))) keep_worst(v.linear_growth_violation, x, st, lin);
      }
    } catch (const NumericError& e) {
      if (eval_failures++ == 0) first_eval_failure = "at x = " + format_point(x) + ": " + e.what();
    }
  });

  if (eval_failures > 0) {
    v.errors.push_back("expression evaluation failed at " + std::to_string(eval_failures) +
                       " grid point(s), first " + first_eval_failure);
  }
  if (negative_rate) {
    v.errors.push_back("/rates: negative switching rate from " + describe(*negative_rate));
    v.generator_violations.push_back("negative rate from " + describe(*negative_rate));
  }
  if (v.rate_bound_violation) {
    v.errors.push_back("/rate_bound: total rate exceeds H for " + describe(*v.rate_bound_violation));
  }
  if (v.growth_upper_violation) {
    v.errors.push_back("/coefficient_bounds/C: 2<a,x> + |sigma|^2 <= C|x|^2 fails for " +
                       describe(*v.growth_upper_violation));
  }
  if (v.growth_lower_violation) {
    v.errors.push_back("/coefficient_bounds/c: 2<a,x> + |sigma|^2 >= c|x|^2 fails for " +
                       describe(*v.growth_lower_violation));
  }
  if (v.linear_growth_violation) {
    v.errors.push_back("/coefficient_bounds/Ma: |a(x,i)| <= Ma|x| fails for " +
                       describe(*v.linear_growth_violation));
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (s.bounds.C[i] < s.bounds.c[i]) {
      v.errors.push_back("/coefficient_bounds/c/" + std::to_string(i) + ": c exceeds C for state " +
                         std::to_string(i + 1));
    }
  }

  v.qbar_report = validate_generator(s.envelopes.qbar);
  v.qstar_report = validate_generator(s.envelopes.qstar);
  for (const auto& msg : v.qbar_report.violations) v.errors.push_back("/envelopes/qbar: " + msg);
  for (const auto& msg : v.qstar_report.violations) v.errors.push_back("/envelopes/qstar: " + msg);
  if (!v.qbar_report.irreducible) v.warnings.push_back("upper envelope generator is reducible");
  if (!v.qstar_report.irreducible) v.warnings.push_back("lower envelope generator is reducible");

  v.monotonicity = check_monotonicity(s);
  const auto& mono = v.monotonicity;
  if (!mono.gains || !mono.upper_rates || !mono.lower_rates) {
    std::string which;
    if (!mono.gains) which += " gains";
    if (!mono.upper_rates) which += " C";
    if (!mono.lower_rates) which += " c";
    std::string msg = "state labels must make gains, C and c non-decreasing; not satisfied by:" + which;
    if (mono.suggested_order) {
      msg += "; relabel states in the order";
      for (int k : *mono.suggested_order) msg += " " + std::to_string(k);
      msg += mono.permuted_envelope_irreducible ? " (upper envelope stays irreducible)"
                                                : " (upper envelope becomes reducible)";
    } else {
      msg += "; no single relabelling orders all three";
    }
    v.errors.push_back(msg);
  }

  if (v.qbar_report.valid() && v.qstar_report.valid() && eval_failures == 0) {
    v.upper_domination = check_domination(s.generator, s.envelopes.qbar, s.grid);
    v.lower_domination = check_lower(s.envelopes.qstar, s.generator, s.grid);
    auto note = [&](const DominationReport& r, const char* what) {
      if (r.holds) return;
      const auto& w = r.violations.front();
      std::ostringstream os;
      os.precision(6);
      os << what << " fails: " << (w.tail ? "tail" : "head") << " sum inequality (i1, i2, m) = ("
         << w.i1 << ", " << w.i2 << ", " << w.m << ") at x = " << format_point(w.x) << " by "
         << -w.margin << " (" << r.violations.size() << " violated inequalities)";
      v.warnings.push_back(os.str());
    };
    note(*v.upper_domination, "upper domination Q(x) <= Qbar");
    note(*v.lower_domination, "lower domination Qstar <= Q(x)");
    if (s.M == 2) {
      v.two_state = check_two_state_conditions(s.envelopes, s.generator, s.grid);
      if (!v.two_state->upper.holds) {
        v.warnings.push_back("two-state condition qbar12 + qbar21 <= q12(x) + q21(x) fails at x = " +
                             format_point(*v.two_state->upper.witness));
      }
      if (!v.two_state->lower.holds) {
        v.warnings.push_back("two-state condition qstar12 + qstar21 >= q12(x) + q21(x) fails at x = " +
                             format_point(*v.two_state->lower.witness));
      }
    }
  }
  return v;
}

}  // namespace rswitch
