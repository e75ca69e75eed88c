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

#ifndef RSWITCH_RSWITCH_H
#define RSWITCH_RSWITCH_H

/* C interface to the rswitch library. Strings returned through char** out
   parameters are owned by the caller and released with rsw_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(RSWITCH_BUILDING_LIBRARY)
#define RSW_API __attribute__((visibility("default")))
#else
#define RSW_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rsw_status {
  RSW_OK = 0,
  RSW_INVALID_ARGUMENT = 1,
  RSW_PARSE = 2,
  RSW_SCHEMA = 3,
  RSW_VALIDATION = 4,
  RSW_NUMERIC = 5,
  RSW_RUNTIME = 6,
  RSW_IO = 7,
  RSW_INTERNAL = 99
} rsw_status;

typedef enum rsw_coupling {
  RSW_COUPLING_NONE = 0,
  RSW_COUPLING_AUTO = 1,
  RSW_COUPLING_SHARED_MARKS = 2,
  RSW_COUPLING_ORDER_PRESERVING = 3
} rsw_coupling;

typedef struct rsw_scenario rsw_scenario;
typedef struct rsw_expr rsw_expr;

/* Message of the last failed call on this thread; empty after success. */
RSW_API const char* rsw_last_error(void);
RSW_API void rsw_string_free(char* s);
RSW_API const char* rsw_version(void);

RSW_API rsw_status rsw_scenario_load_file(const char* path, rsw_scenario** out);
RSW_API rsw_status rsw_scenario_load_json(const char* text, rsw_scenario** out);
RSW_API void rsw_scenario_free(rsw_scenario* s);
RSW_API rsw_status rsw_scenario_hash(const rsw_scenario* s, char** out);
RSW_API rsw_status rsw_scenario_dimensions(const rsw_scenario* s, int* d, int* m);

/* JSON reports. rsw_validate sets *ok to 1 when the scenario passes. */
RSW_API rsw_status rsw_validate(const rsw_scenario* s, int require_coupling, int* ok, char** json);
RSW_API rsw_status rsw_echo(const rsw_scenario* s, char** json);
RSW_API rsw_status rsw_envelopes(const rsw_scenario* s, char** json);
/* from_i/from_j are 1-based; pass 0 for both to dump every product state. */
RSW_API rsw_status rsw_couple(const rsw_scenario* s, const double* x, size_t d, int from_i,
                              int from_j, char** json);
/* theta may be NULL (zero tilt); tau <= 0 selects the scenario tau. */
RSW_API rsw_status rsw_spectral(const rsw_scenario* s, const double* theta, size_t m, double tau,
                                int n_max, char** json);
RSW_API rsw_status rsw_certify(const rsw_scenario* s, double tau, int sweep, int* pass, char** json);

typedef struct rsw_sim_options {
  /* Negative or zero values keep the scenario's own setting. */
  int64_t paths;
  double horizon;
  int has_seed;
  uint64_t seed;
  rsw_coupling coupling;
  uint64_t path_index;
  unsigned threads;
  int64_t stride;
} rsw_sim_options;

RSW_API void rsw_sim_options_init(rsw_sim_options* o);
RSW_API rsw_status rsw_simulate_csv(const rsw_scenario* s, const rsw_sim_options* o, char** csv);
RSW_API rsw_status rsw_monte_carlo(const rsw_scenario* s, const rsw_sim_options* o, char** json);

/* Dense row-major m x m generators. */
RSW_API rsw_status rsw_invariant_measure(const double* q, size_t m, double* mu);
RSW_API rsw_status rsw_skeleton_transition(const double* q, size_t m, double tau, double* p);
RSW_API rsw_status rsw_perron_root(const double* a, size_t m, double* root);
RSW_API rsw_status rsw_eta(const double* qbar, size_t m, const double* c, double p, double* eta);

/* dimension 0 accepts x, x1, x2, ... without a range check. */
RSW_API rsw_status rsw_expr_parse(const char* source, int dimension, rsw_expr** out);
RSW_API rsw_status rsw_expr_eval(const rsw_expr* e, const double* x, size_t n, double* value);
RSW_API rsw_status rsw_expr_print(const rsw_expr* e, char** out);
RSW_API void rsw_expr_free(rsw_expr* e);

#ifdef __cplusplus
}
#endif

#endif
