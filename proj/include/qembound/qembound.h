// Copyright 2026 The qembound Authors
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

#ifndef QEMBOUND_QEMBOUND_H
#define QEMBOUND_QEMBOUND_H

#include <stddef.h>
#include <stdint.h>

#if defined(QEMBOUND_BUILDING)
#define QEB_API __attribute__((visibility("default")))
#else
#define QEB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qeb_status {
  QEB_OK = 0,
  QEB_INVALID_ARGUMENT = 1,
  QEB_INVALID_MATRIX = 2,
  QEB_NOT_PSD = 3,
  QEB_NOT_COMPLETELY_POSITIVE = 4,
  QEB_SINGULAR_REFERENCE = 5,
  QEB_SINGULAR_STATE = 6,
  QEB_NOT_A_FIXED_POINT = 7,
  QEB_NONINVERTIBLE = 8,
  QEB_FIT_DEGENERATE = 9,
  QEB_UNACHIEVABLE = 10,
  QEB_CONFIG_ERROR = 11,
  /* A check performed by the command did not hold. */
  QEB_FAILED = 12,
  QEB_INTERNAL = 13
} qeb_status;

typedef struct qeb_state qeb_state;
typedef struct qeb_channel qeb_channel;
typedef struct qeb_result qeb_result;

QEB_API const char* qeb_version(void);
QEB_API const char* qeb_status_name(qeb_status status);
/* Message of the last failing call on this thread; "" after a success. */
QEB_API const char* qeb_last_error(void);

/* Matrices are row-major arrays of dim*dim interleaved (re, im) pairs. */
QEB_API qeb_status qeb_state_create(const double* entries, size_t dim, qeb_state** out);
QEB_API qeb_status qeb_state_dim(const qeb_state* state, size_t* dim);
/* Writes dim*dim*2 doubles. */
QEB_API qeb_status qeb_state_entries(const qeb_state* state, double* entries);
QEB_API void qeb_state_destroy(qeb_state* state);

/* JSON channel spec, e.g. {"type":"depolarizing","p":0.1}. */
QEB_API qeb_status qeb_channel_from_json(const char* spec_json, qeb_channel** out);
QEB_API qeb_status qeb_channel_dim(const qeb_channel* channel, size_t* dim);
QEB_API qeb_status qeb_channel_apply(const qeb_channel* channel, const qeb_state* in,
                                     qeb_state** out);
QEB_API void qeb_channel_destroy(qeb_channel* channel);

QEB_API qeb_status qeb_trace_distance(const qeb_state* rho, const qeb_state* sigma, double* out);
QEB_API qeb_status qeb_fidelity(const qeb_state* rho, const qeb_state* sigma, double* out);
/* Bits; +inf when the support condition fails. */
QEB_API qeb_status qeb_relative_entropy(const qeb_state* rho, const qeb_state* sigma,
                                        double* out);

/* Scalar bounds. A formula whose domain condition fails yields NaN. */
QEB_API qeb_status qeb_bound_thm1_fidelity(double fidelity, double epsilon, double* out);
QEB_API qeb_status qeb_bound_thm1_relative_entropy(double s_bits, double epsilon, double* out);
QEB_API qeb_status qeb_bound_prop2(double eta, double delta, double epsilon, double* out);
QEB_API qeb_status qeb_bound_thm4(int qubits, int layers, double gamma, double delta,
                                  double epsilon, double* out);
QEB_API qeb_status qeb_bound_thm6_prob(int qubits, int layers, double xi, double delta,
                                       double epsilon, double* out);

/* Runs a driver command. config_json and overrides_json may be NULL.
   Overrides use dotted keys for nested fields. On QEB_OK, QEB_FAILED and
   QEB_UNACHIEVABLE a result is stored in *out and must be destroyed. */
QEB_API qeb_status qeb_experiment_run(const char* command, const char* config_json,
                                      const char* overrides_json, int threads,
                                      qeb_result** out);
/* One JSON record per line. Owned by the result. */
QEB_API const char* qeb_result_json(const qeb_result* result);
/* Empty string when the command has no table. */
QEB_API const char* qeb_result_csv(const qeb_result* result);
QEB_API qeb_status qeb_result_status(const qeb_result* result);
QEB_API void qeb_result_destroy(qeb_result* result);

#ifdef __cplusplus
}
#endif

#endif
