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

#include "qembound/qembound.h"

#include <cmath>
#include <limits>
#include <string>

#include "driver.hpp"
#include "qembound/bounds.hpp"
#include "qembound/channels.hpp"
#include "qembound/divergences.hpp"
#include "qembound/error.hpp"

struct qeb_state {
  qembound::numkit::DensityMatrix rho;
};

struct qeb_channel {
  qembound::channels::KrausChannel channel;
};

struct qeb_result {
  std::string json;
  std::string csv;
  qeb_status status = QEB_OK;
};

namespace {

using qembound::Error;
using qembound::ErrorCode;

thread_local std::string last_error;

qeb_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return QEB_INVALID_ARGUMENT;
    case ErrorCode::InvalidMatrix: return QEB_INVALID_MATRIX;
    case ErrorCode::NotPSD: return QEB_NOT_PSD;
    case ErrorCode::NotCompletelyPositive: return QEB_NOT_COMPLETELY_POSITIVE;
    case ErrorCode::SingularReference: return QEB_SINGULAR_REFERENCE;
    case ErrorCode::SingularState: return QEB_SINGULAR_STATE;
    case ErrorCode::NotAFixedPoint: return QEB_NOT_A_FIXED_POINT;
    case ErrorCode::Noninvertible: return QEB_NONINVERTIBLE;
    case ErrorCode::FitDegenerate: return QEB_FIT_DEGENERATE;
    case ErrorCode::Unachievable: return QEB_UNACHIEVABLE;
    case ErrorCode::ConfigError: return QEB_CONFIG_ERROR;
  }
  return QEB_INTERNAL;
}

template <typename F>
qeb_status guarded(F&& f) {
  try {
    last_error.clear();
    f();
    return QEB_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    last_error = e.what();
    return QEB_INTERNAL;
  } catch (...) {
    last_error = "unknown exception";
    return QEB_INTERNAL;
  }
}

void need(const void* p, const char* name) {
  qembound::require(p != nullptr, ErrorCode::InvalidArgument, std::string(name) + " is null");
}

double value_or_nan(const qembound::bounds::BoundReport& r) {
  return r.value.value_or(std::numeric_limits<double>::quiet_NaN());
}

qembound::driver::Json parse_json(const char* text, const char* what) {
  if (!text) return nullptr;
  try {
    return qembound::driver::Json::parse(text);
  } catch (const std::exception& e) {
    qembound::fail(ErrorCode::ConfigError, std::string(what) + " is not valid JSON: " + e.what());
  }
}

}  // namespace

extern "C" {

const char* qeb_version(void) { return qembound::driver::version(); }

const char* qeb_status_name(qeb_status status) {
  switch (status) {
    case QEB_OK: return "ok";
    case QEB_INVALID_ARGUMENT: return "invalid_argument";
    case QEB_INVALID_MATRIX: return "invalid_matrix";
    case QEB_NOT_PSD: return "not_psd";
    case QEB_NOT_COMPLETELY_POSITIVE: return "not_completely_positive";
    case QEB_SINGULAR_REFERENCE: return "singular_reference";
    case QEB_SINGULAR_STATE: return "singular_state";
    case QEB_NOT_A_FIXED_POINT: return "not_a_fixed_point";
    case QEB_NONINVERTIBLE: return "noninvertible";
    case QEB_FIT_DEGENERATE: return "fit_degenerate";
    case QEB_UNACHIEVABLE: return "unachievable";
    case QEB_CONFIG_ERROR: return "config_error";
    case QEB_FAILED: return "failed";
    case QEB_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* qeb_last_error(void) { return last_error.c_str(); }

qeb_status qeb_state_create(const double* entries, size_t dim, qeb_state** out) {
  return guarded([&] {
    need(entries, "entries");
    need(out, "out");
    qembound::require(dim >= 1, ErrorCode::InvalidArgument, "dim must be >= 1");
    const auto d = static_cast<Eigen::Index>(dim);
    qembound::numkit::Matrix m(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) {
        const size_t k = 2 * static_cast<size_t>(r * d + c);
        m(r, c) = qembound::numkit::Complex(entries[k], entries[k + 1]);
      }
    }
    *out = new qeb_state{qembound::numkit::DensityMatrix(std::move(m))};
  });
}

qeb_status qeb_state_dim(const qeb_state* state, size_t* dim) {
  return guarded([&] {
    need(state, "state");
    need(dim, "dim");
    *dim = static_cast<size_t>(state->rho.dim());
  });
}

qeb_status qeb_state_entries(const qeb_state* state, double* entries) {
  return guarded([&] {
    need(state, "state");
    need(entries, "entries");
    const auto& m = state->rho.mat();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const size_t k = 2 * static_cast<size_t>(r * m.cols() + c);
        entries[k] = m(r, c).real();
        entries[k + 1] = m(r, c).imag();
      }
    }
  });
}

void qeb_state_destroy(qeb_state* state) { delete state; }

qeb_status qeb_channel_from_json(const char* spec_json, qeb_channel** out) {
  return guarded([&] {
    need(spec_json, "spec_json");
    need(out, "out");
    const auto spec = parse_json(spec_json, "channel spec");
    *out = new qeb_channel{qembound::driver::parse_channel_spec(spec)};
  });
}

qeb_status qeb_channel_dim(const qeb_channel* channel, size_t* dim) {
  return guarded([&] {
    need(channel, "channel");
    need(dim, "dim");
    *dim = static_cast<size_t>(channel->channel.dim());
  });
}

qeb_status qeb_channel_apply(const qeb_channel* channel, const qeb_state* in, qeb_state** out) {
  return guarded([&] {
    need(channel, "channel");
    need(in, "in");
    need(out, "out");
    qembound::require(channel->channel.dim() == in->rho.dim(), ErrorCode::InvalidArgument,
                      "channel and state dimensions differ");
    *out = new qeb_state{qembound::channels::apply(channel->channel, in->rho)};
  });
}

void qeb_channel_destroy(qeb_channel* channel) { delete channel; }

qeb_status qeb_trace_distance(const qeb_state* rho, const qeb_state* sigma, double* out) {
  return guarded([&] {
    need(rho, "rho");
    need(sigma, "sigma");
    need(out, "out");
    *out = qembound::divergences::trace_distance(rho->rho, sigma->rho);
  });
}

qeb_status qeb_fidelity(const qeb_state* rho, const qeb_state* sigma, double* out) {
  return guarded([&] {
    need(rho, "rho");
    need(sigma, "sigma");
    need(out, "out");
    *out = qembound::divergences::fidelity(rho->rho, sigma->rho);
  });
}

qeb_status qeb_relative_entropy(const qeb_state* rho, const qeb_state* sigma, double* out) {
  return guarded([&] {
    need(rho, "rho");
    need(sigma, "sigma");
    need(out, "out");
    *out = qembound::divergences::relative_entropy(rho->rho, sigma->rho);
  });
}

qeb_status qeb_bound_thm1_fidelity(double fidelity, double epsilon, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = value_or_nan(qembound::bounds::thm1_fidelity_scalar(fidelity, epsilon));
  });
}

qeb_status qeb_bound_thm1_relative_entropy(double s_bits, double epsilon, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = value_or_nan(qembound::bounds::thm1_relative_entropy_scalar(s_bits, epsilon));
  });
}

qeb_status qeb_bound_prop2(double eta, double delta, double epsilon, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = value_or_nan(qembound::bounds::prop2_bound(eta, {delta, epsilon}));
  });
}

qeb_status qeb_bound_thm4(int qubits, int layers, double gamma, double delta, double epsilon,
                          double* out) {
  return guarded([&] {
    need(out, "out");
    qembound::bounds::LayeredSpec spec;
    spec.qubits = qubits;
    spec.layers = layers;
    spec.gamma = gamma;
    *out = value_or_nan(qembound::bounds::thm4_bound(spec, {delta, epsilon}));
  });
}

qeb_status qeb_bound_thm6_prob(int qubits, int layers, double xi, double delta, double epsilon,
                               double* out) {
  return guarded([&] {
    need(out, "out");
    *out = value_or_nan(qembound::bounds::thm6_prob_bound(qubits, layers, xi, {delta, epsilon}));
  });
}

qeb_status qeb_experiment_run(const char* command, const char* config_json,
                              const char* overrides_json, int threads, qeb_result** out) {
  qeb_status status = guarded([&] {
    need(command, "command");
    need(out, "out");
    *out = nullptr;
    const auto config = parse_json(config_json, "config");
    const auto overrides = parse_json(overrides_json, "overrides");
    auto result = qembound::driver::run(command, config, overrides, threads);
    auto* r = new qeb_result{std::move(result.jsonl), std::move(result.csv), QEB_OK};
    if (result.outcome == qembound::driver::Outcome::Failed) r->status = QEB_FAILED;
    if (result.outcome == qembound::driver::Outcome::Unachievable) r->status = QEB_UNACHIEVABLE;
    *out = r;
  });
  if (status == QEB_OK && *out) {
    status = (*out)->status;
    if (status == QEB_FAILED) last_error = "a check performed by the command did not hold";
    if (status == QEB_UNACHIEVABLE) last_error = "the accuracy target was not reached within n_max";
  }
  return status;
}

const char* qeb_result_json(const qeb_result* result) { return result ? result->json.c_str() : ""; }

const char* qeb_result_csv(const qeb_result* result) { return result ? result->csv.c_str() : ""; }

qeb_status qeb_result_status(const qeb_result* result) {
  return result ? result->status : QEB_INVALID_ARGUMENT;
}

void qeb_result_destroy(qeb_result* result) { delete result; }

}  // extern "C"
