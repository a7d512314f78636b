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

#include "driver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <algorithm>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

#include "qembound/bounds.hpp"
#include "qembound/contraction.hpp"
#include "qembound/mitigation.hpp"
#include "qembound/suites.hpp"

#ifndef QEMBOUND_VERSION
#define QEMBOUND_VERSION "0.0.0"
#endif

namespace qembound::driver {

using bounds::AccuracyTarget;
using bounds::BoundReport;
using bounds::FormulaId;
using bounds::MomentTarget;
using channels::KrausChannel;
using channels::LiouvillianSpec;
using channels::NoiseEnsemble;
using divergences::ObservableSet;
using numkit::Complex;
using numkit::DensityMatrix;
using numkit::Matrix;
using numkit::Observable;
using numkit::Rng;

namespace {

[[noreturn]] void config_fail(const std::string& what) { fail(ErrorCode::ConfigError, what); }

Json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

Json opt_num(const std::optional<double>& v) { return v ? num(*v) : Json(nullptr); }

std::string csv_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_number(const Json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  config_fail(where + " must be a number");
}

// Reads one JSON object and remembers which keys were consumed.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) config_fail((path_.empty() ? "config" : path_) + " must be an object");
  }

  bool has(const std::string& k) const { return j_.contains(k); }
  std::string where(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  void allow(const std::string& k) { used_.insert(k); }

  const Json& raw(const std::string& k) {
    used_.insert(k);
    if (!has(k)) config_fail(where(k) + " is required");
    return j_.at(k);
  }

  double number(const std::string& k) { return to_number(raw(k), where(k)); }
  double number(const std::string& k, double def) {
    allow(k);
    return has(k) ? number(k) : def;
  }

  long long integer(const std::string& k) {
    const Json& v = raw(k);
    if (!v.is_number_integer()) config_fail(where(k) + " must be an integer");
    return v.get<long long>();
  }
  long long integer(const std::string& k, long long def) {
    allow(k);
    return has(k) ? integer(k) : def;
  }
  int bounded_int(const std::string& k, long long def, long long lo, long long hi) {
    const long long v = integer(k, def);
    if (v < lo || v > hi) {
      config_fail(where(k) + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                  "]");
    }
    return static_cast<int>(v);
  }

  bool boolean(const std::string& k, bool def) {
    allow(k);
    if (!has(k)) return def;
    const Json& v = raw(k);
    if (!v.is_boolean()) config_fail(where(k) + " must be true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& k) {
    const Json& v = raw(k);
    if (!v.is_string()) config_fail(where(k) + " must be a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& k, const std::string& def) {
    allow(k);
    return has(k) ? string(k) : def;
  }

  std::uint64_t seed() {
    if (!has("seed")) config_fail("seed is required for this command");
    const Json& v = raw("seed");
    if (!v.is_number_unsigned()) config_fail("seed must be a non-negative integer");
    return v.get<std::uint64_t>();
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!used_.count(k)) config_fail("unknown key '" + where(k) + "'");
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

Matrix parse_matrix(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    config_fail(where + " must be a matrix (array of rows)");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      config_fail(where + " has rows of different lengths");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Json& e = row[static_cast<std::size_t>(c)];
      const std::string at = where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]";
      if (e.is_array()) {
        if (e.size() != 2) config_fail(at + " must be a number or [re, im]");
        m(r, c) = Complex(to_number(e[0], at), to_number(e[1], at));
      } else {
        m(r, c) = to_number(e, at);
      }
    }
  }
  return m;
}

Matrix parse_square(const Json& j, const std::string& where) {
  Matrix m = parse_matrix(j, where);
  if (m.rows() != m.cols()) config_fail(where + " must be square");
  return m;
}

numkit::Vector parse_vector(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) config_fail(where + " must be a nonempty array");
  numkit::Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = where + "[" + std::to_string(i) + "]";
    if (j[i].is_array()) {
      if (j[i].size() != 2) config_fail(at + " must be a number or [re, im]");
      v(static_cast<Eigen::Index>(i)) = Complex(to_number(j[i][0], at), to_number(j[i][1], at));
    } else {
      v(static_cast<Eigen::Index>(i)) = to_number(j[i], at);
    }
  }
  return v;
}

DensityMatrix parse_state(const Json& j, const std::string& where,
                          std::optional<Eigen::Index> dim) {
  DensityMatrix out = DensityMatrix::maximally_mixed(2);
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "maximally_mixed") {
      if (!dim) config_fail(where + ": maximally_mixed needs a known dimension");
      out = DensityMatrix::maximally_mixed(*dim);
    } else if (s == "plus" || s == "minus") {
      numkit::Vector v(2);
      v << 1.0, (s == "plus" ? 1.0 : -1.0);
      out = DensityMatrix::pure(v);
    } else {
      config_fail(where + ": unknown state '" + s + "' (maximally_mixed, plus, minus)");
    }
  } else if (j.is_object()) {
    Reader r(j, where);
    if (r.has("basis")) {
      const long long d = r.integer("dim", dim ? *dim : 2);
      const long long k = r.integer("basis");
      if (d < 1 || k < 0 || k >= d) config_fail(where + ": basis index out of range");
      out = DensityMatrix::basis(d, k);
    } else if (r.has("ket")) {
      numkit::Vector v = parse_vector(r.raw("ket"), r.where("ket"));
      if (v.norm() == 0.0) config_fail(where + ".ket must be nonzero");
      out = DensityMatrix::pure(v);
    } else {
      config_fail(where + " needs 'basis' or 'ket'");
    }
    r.finish();
  } else {
    out = DensityMatrix(parse_square(j, where));
  }
  if (dim && out.dim() != *dim) config_fail(where + " has the wrong dimension");
  return out;
}

Observable parse_observable(const Json& j, const std::string& where) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s.empty() || s.find_first_not_of("IXYZ") != std::string::npos) {
      config_fail(where + " must be a Pauli string such as \"ZI\" or a matrix");
    }
    return Observable(numkit::pauli_string(s));
  }
  return Observable(parse_square(j, where));
}

ObservableSet parse_observable_set(Reader& r, const std::string& key, Eigen::Index dim) {
  r.allow(key);
  if (!r.has(key)) return ObservableSet::all_effects(dim);
  const Json& j = r.raw(key);
  if (j.is_string() && j.get<std::string>() == "all_effects") {
    return ObservableSet::all_effects(dim);
  }
  if (!j.is_array()) config_fail(r.where(key) + " must be \"all_effects\" or an array");
  std::vector<Observable> obs;
  for (std::size_t i = 0; i < j.size(); ++i) {
    obs.push_back(parse_observable(j[i], r.where(key) + "[" + std::to_string(i) + "]"));
    if (obs.back().dim() != dim) config_fail(r.where(key) + " has the wrong dimension");
  }
  return ObservableSet::explicit_set(std::move(obs));
}

KrausChannel tensor_power(KrausChannel c, int n) {
  KrausChannel out = c;
  for (int i = 1; i < n; ++i) out = channels::tensor_channels(out, c);
  return out;
}

LiouvillianSpec parse_liouvillian(Reader& r, double beta) {
  const Observable h = r.has("hamiltonian")
                           ? Observable(parse_square(r.raw("hamiltonian"), r.where("hamiltonian")))
                           : Observable(numkit::pauli('Z'));
  r.allow("hamiltonian");
  if (!(std::isfinite(beta) && beta > 0.0)) config_fail(r.where("beta") + " must be > 0");
  if (r.has("superop")) {
    return LiouvillianSpec(parse_square(r.raw("superop"), r.where("superop")), h, beta);
  }
  const double kappa = r.number("kappa", 1.0);
  if (!(std::isfinite(kappa) && kappa > 0.0)) config_fail(r.where("kappa") + " must be > 0");
  return channels::make_davies_generator(h, beta, kappa);
}

KrausChannel parse_channel(const Json& j, const std::string& where) {
  Reader r(j, where);
  const std::string type = r.string("type");
  KrausChannel out = channels::make_identity(2);
  if (type == "depolarizing") {
    out = tensor_power(channels::make_depolarizing(r.number("p")),
                       r.bounded_int("qubits", 1, 1, 5));
  } else if (type == "pauli") {
    const Json& q = r.raw("q");
    if (!q.is_array() || q.size() != 3) config_fail(r.where("q") + " must be [qx, qy, qz]");
    out = tensor_power(channels::make_stochastic_pauli(to_number(q[0], r.where("q")),
                                                       to_number(q[1], r.where("q")),
                                                       to_number(q[2], r.where("q"))),
                       r.bounded_int("qubits", 1, 1, 5));
  } else if (type == "global_depolarizing") {
    const double gamma = r.number("gamma");
    const Json& f = r.raw("fixed");
    if (f.is_string() && f.get<std::string>() == "gibbs") {
      const Observable h(parse_square(r.raw("hamiltonian"), r.where("hamiltonian")));
      out = channels::make_global_depolarizing(gamma, channels::gibbs_state(h, r.number("beta")));
    } else {
      std::optional<Eigen::Index> dim;
      if (r.has("dim")) dim = r.bounded_int("dim", 2, 1, 1024);
      out = channels::make_global_depolarizing(gamma, parse_state(f, r.where("fixed"), dim));
    }
  } else if (type == "unitary") {
    out = channels::make_unitary_channel(parse_square(r.raw("matrix"), r.where("matrix")));
  } else if (type == "kraus") {
    const Json& ops = r.raw("operators");
    if (!ops.is_array() || ops.empty()) config_fail(r.where("operators") + " must be an array");
    std::vector<Matrix> ks;
    for (std::size_t i = 0; i < ops.size(); ++i) {
      ks.push_back(parse_square(ops[i], r.where("operators") + "[" + std::to_string(i) + "]"));
    }
    out = KrausChannel(std::move(ks));
  } else if (type == "identity") {
    out = channels::make_identity(r.bounded_int("dim", 2, 1, 1024));
  } else if (type == "thermal") {
    const double beta = r.number("beta");
    Reader lr(r.raw("liouvillian"), r.where("liouvillian"));
    const LiouvillianSpec l = parse_liouvillian(lr, beta);
    lr.finish();
    const double t = r.number("t");
    if (!(std::isfinite(t) && t >= 0.0)) config_fail(r.where("t") + " must be >= 0");
    out = channels::semigroup_step(l, t);
  } else {
    config_fail(where + ": unknown channel type '" + type +
                "' (depolarizing, pauli, global_depolarizing, unitary, kraus, identity, thermal)");
  }
  r.finish();
  return out;
}

std::vector<KrausChannel> parse_channels(Reader& r, const std::string& key) {
  const Json& j = r.raw(key);
  if (!j.is_array() || j.empty()) config_fail(r.where(key) + " must be a nonempty array");
  std::vector<KrausChannel> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(parse_channel(j[i], r.where(key) + "[" + std::to_string(i) + "]"));
  }
  return out;
}

AccuracyTarget parse_target(Reader& r, bool delta_required) {
  AccuracyTarget t;
  t.delta = delta_required ? r.number("delta") : r.number("delta", 0.0);
  t.epsilon = r.number("epsilon");
  t.validate();
  return t;
}

MomentTarget parse_moments(Reader& r) {
  MomentTarget m;
  m.sigma_max = r.number("sigma_max");
  m.b_max = r.number("b_max");
  m.validate();
  return m;
}

bounds::LayeredSpec parse_layered_spec(Reader& r) {
  bounds::LayeredSpec s;
  s.qubits = r.bounded_int("M", 1, 1, 10);
  s.layers = r.bounded_int("L", 1, 1, 100000);
  s.gamma = r.number("gamma");
  s.validate();
  return s;
}

mitigation::ProtocolSpec parse_protocol(Reader& parent, const std::string& key,
                                        std::optional<std::pair<int, int>> shape) {
  mitigation::ProtocolSpec p;
  parent.allow(key);
  if (!parent.has(key)) {
    p.kind = mitigation::ProtocolKind::Pec;
    return p;
  }
  const Json& j = parent.raw(key);
  const std::string where = parent.where(key);
  auto kind_of = [&](const std::string& s) {
    if (s == "none") return mitigation::ProtocolKind::None;
    if (s == "pec") return mitigation::ProtocolKind::Pec;
    if (s == "zne") return mitigation::ProtocolKind::Zne;
    config_fail(where + ": unknown protocol '" + s + "' (none, pec, zne)");
  };
  if (j.is_string()) {
    p.kind = kind_of(j.get<std::string>());
    return p;
  }
  Reader r(j, where);
  p.kind = kind_of(r.string("kind"));
  if (r.has("assumed_gamma")) {
    if (p.kind != mitigation::ProtocolKind::Pec) config_fail(r.where("assumed_gamma") + " is PEC only");
    if (!shape) config_fail(r.where("assumed_gamma") + " is not supported by this command");
    const Json& g = r.raw("assumed_gamma");
    if (g.is_array()) {
      p.assumed_gamma = parse_matrix(g, r.where("assumed_gamma")).real();
    } else {
      p.assumed_gamma = Eigen::MatrixXd::Constant(shape->first, shape->second,
                                                  to_number(g, r.where("assumed_gamma")));
    }
  }
  if (r.has("scale_factors")) {
    const Json& s = r.raw("scale_factors");
    if (!s.is_array() || s.empty()) config_fail(r.where("scale_factors") + " must be an array");
    p.scale_factors.clear();
    for (const auto& v : s) p.scale_factors.push_back(to_number(v, r.where("scale_factors")));
  }
  const std::string fit = r.string("fit", "richardson");
  if (fit == "richardson") {
    p.fit = mitigation::FitModel::Richardson;
  } else if (fit == "linear") {
    p.fit = mitigation::FitModel::Linear;
  } else if (fit == "exponential") {
    p.fit = mitigation::FitModel::Exponential;
  } else {
    config_fail(r.where("fit") + ": unknown fit '" + fit + "' (richardson, linear, exponential)");
  }
  r.finish();
  return p;
}

Json protocol_json(const mitigation::ProtocolSpec& p) {
  Json j;
  j["kind"] = mitigation::to_string(p.kind);
  if (p.kind == mitigation::ProtocolKind::Zne) {
    Json s = Json::array();
    for (double v : p.scale_factors) s.push_back(num(v));
    j["scale_factors"] = s;
    j["fit"] = mitigation::to_string(p.fit);
  }
  return j;
}

Json report_json(const BoundReport& r) {
  Json j;
  j["formula"] = bounds::to_string(r.formula);
  j["value"] = opt_num(r.value);
  Json inputs = Json::object();
  for (const auto& [k, v] : r.inputs) inputs[k] = num(v);
  j["inputs"] = inputs;
  Json flags = Json::array();
  for (auto f : r.flags) flags.push_back(bounds::to_string(f));
  j["flags"] = flags;
  Json extras = Json::object();
  for (const auto& [k, v] : r.extras) extras[k] = num(v);
  j["extras"] = extras;
  if (r.witness) {
    j["witness"] = {{"first", r.witness->first},
                    {"second", r.witness->second},
                    {"first_hash", r.witness->first_hash},
                    {"second_hash", r.witness->second_hash},
                    {"channel_index", r.witness->channel_index}};
  }
  return j;
}

Json curve_json(const std::vector<mitigation::CurvePoint>& curve) {
  Json a = Json::array();
  for (const auto& p : curve) {
    a.push_back({{"n", p.n},
                 {"success_prob", num(p.success_prob)},
                 {"wilson_lb", num(p.wilson_lb)},
                 {"bias", num(p.bias)},
                 {"std_dev", num(p.std_dev)}});
  }
  return a;
}

std::string curve_csv(const std::vector<mitigation::CurvePoint>& curve) {
  std::string out = "n,success_prob,wilson_lb,bias,std_dev\n";
  for (const auto& p : curve) {
    out += std::to_string(p.n) + "," + csv_num(p.success_prob) + "," + csv_num(p.wilson_lb) +
           "," + csv_num(p.bias) + "," + csv_num(p.std_dev) + "\n";
  }
  return out;
}

Json requirement_json(const mitigation::SampleRequirement& s) {
  Json j;
  j["achieved"] = s.achieved;
  j["n_hat"] = s.achieved ? Json(s.n_hat) : Json(nullptr);
  j["plateau"] = num(s.plateau);
  j["worst_point"] = s.worst_point;
  j["per_point"] = s.per_point;
  j["curve"] = curve_json(s.curve);
  return j;
}

struct Context {
  std::string command;
  std::vector<Json> records;
  std::string csv;
  Outcome outcome = Outcome::Ok;
  int threads = 1;

  Json& emit(const std::string& kind) {
    Json r;
    r["command"] = command;
    r["record"] = kind;
    records.push_back(std::move(r));
    return records.back();
  }
};

using Job = std::function<void(Context&)>;

// verify

Job parse_verify(Reader& r) {
  suites::SuiteOptions o;
  o.seed = r.seed();
  o.samples = r.bounded_int("samples", o.samples, 1, 1000000);
  o.contraction_samples = r.bounded_int("contraction_samples", o.contraction_samples, 1, 1000000);
  o.circuit_samples = r.bounded_int("circuit_samples", o.circuit_samples, 1, 1000000);
  o.thermal_samples = r.bounded_int("thermal_samples", o.thermal_samples, 1, 1000000);
  if (r.has("dims")) {
    const Json& d = r.raw("dims");
    if (!d.is_array() || d.empty()) config_fail("dims must be a nonempty array");
    o.dims.clear();
    for (const auto& v : d) {
      if (!v.is_number_integer() || v.get<long long>() < 2 || v.get<long long>() > 64) {
        config_fail("dims entries must be integers in [2, 64]");
      }
      o.dims.push_back(v.get<Eigen::Index>());
    }
  }
  std::vector<std::string> names = suites::suite_names();
  if (r.has("suites")) {
    const Json& s = r.raw("suites");
    if (!s.is_array() || s.empty()) config_fail("suites must be a nonempty array");
    const auto valid = suites::suite_names();
    names.clear();
    for (const auto& v : s) {
      const std::string n = v.is_string() ? v.get<std::string>() : "";
      if (std::find(valid.begin(), valid.end(), n) == valid.end()) {
        std::string list;
        for (const auto& x : valid) list += (list.empty() ? "" : ", ") + x;
        config_fail("unknown suite '" + n + "'; valid suites: " + list);
      }
      names.push_back(n);
    }
  }
  return [o, names](Context& ctx) {
    suites::SuiteOptions opts = o;
    opts.threads = ctx.threads;
    bool all = true;
    for (const auto& n : names) {
      const auto rep = suites::run_suite(n, opts);
      Json& j = ctx.emit("suite");
      j["suite"] = rep.name;
      j["instances"] = rep.instances;
      j["violations"] = rep.violations;
      j["max_excess"] = num(rep.max_excess);
      j["slack"] = num(rep.slack);
      j["passed"] = rep.passed();
      all = all && rep.passed();
    }
    Json& s = ctx.emit("summary");
    s["suites"] = names.size();
    s["passed"] = all;
    if (!all) ctx.outcome = Outcome::Failed;
  };
}

// bound

bounds::StateSet parse_state_set(Reader& r, Eigen::Index dim, bool& needs_seed) {
  const Json& j = r.raw("states");
  if (j.is_object()) {
    Reader sr(j, r.where("states"));
    Reader ap(sr.raw("all_pure"), sr.where("all_pure"));
    if (ap.integer("dim", dim) != dim) config_fail(ap.where("dim") + " must match the channels");
    const int pairs = ap.bounded_int("pairs", 256, 1, 10000000);
    ap.finish();
    sr.finish();
    needs_seed = true;
    return bounds::StateSet::all_pure(dim, pairs);
  }
  if (!j.is_array() || j.size() < 2) config_fail(r.where("states") + " needs at least two states");
  std::vector<DensityMatrix> states;
  for (std::size_t i = 0; i < j.size(); ++i) {
    states.push_back(parse_state(j[i], r.where("states") + "[" + std::to_string(i) + "]", dim));
  }
  return bounds::StateSet::explicit_set(std::move(states));
}

Job emit_report(BoundReport report) {
  return [report](Context& ctx) { ctx.emit("bound")["report"] = report_json(report); };
}

Job parse_bound(Reader& r) {
  const FormulaId id = bounds::formula_from_string(r.string("formula_id"));
  const bool search = r.has("states") || r.has("channels");
  auto seed_or = [&](bool needed) -> std::uint64_t {
    if (needed || r.has("seed")) return r.seed();
    return 0;
  };

  switch (id) {
    case FormulaId::Thm1Fid:
    case FormulaId::Thm1Rel:
    case FormulaId::Thm3: {
      if (!search) {
        if (id == FormulaId::Thm1Fid) {
          const double f = r.number("fidelity");
          return emit_report(bounds::thm1_fidelity_scalar(f, r.number("epsilon")));
        }
        if (id == FormulaId::Thm1Rel) {
          const double s = r.number("relative_entropy");
          return emit_report(bounds::thm1_relative_entropy_scalar(s, r.number("epsilon")));
        }
        const double d_o = r.number("d_o");
        const MomentTarget m = parse_moments(r);
        return emit_report(bounds::thm3_scalar(d_o, m, r.number("fidelity")));
      }
      auto chans = parse_channels(r, "channels");
      const Eigen::Index dim = chans.front().dim();
      NoiseEnsemble ensemble(std::move(chans));
      bool needs_seed = false;
      auto states = parse_state_set(r, dim, needs_seed);
      auto oset = parse_observable_set(r, "observables", dim);
      const std::uint64_t seed = seed_or(needs_seed);
      if (id == FormulaId::Thm3) {
        const MomentTarget m = parse_moments(r);
        return [=](Context& ctx) {
          const auto rep = bounds::thm3_bound(states, ensemble, oset, m, {seed, ctx.threads});
          ctx.emit("bound")["report"] = report_json(rep);
        };
      }
      const AccuracyTarget t = parse_target(r, true);
      return [=](Context& ctx) {
        const auto res = bounds::thm1_bound(states, ensemble, oset, t, {seed, ctx.threads});
        ctx.emit("bound")["report"] =
            report_json(id == FormulaId::Thm1Fid ? res.fidelity : res.relative_entropy);
      };
    }
    case FormulaId::Prop2: {
      const AccuracyTarget t = parse_target(r, true);
      if (!r.has("channels")) return emit_report(bounds::prop2_bound(r.number("eta"), t));
      auto chans = parse_channels(r, "channels");
      const Eigen::Index dim = chans.front().dim();
      NoiseEnsemble ensemble(std::move(chans));
      auto oset = parse_observable_set(r, "observables", dim);
      contraction::SearchBudget budget;
      r.allow("budget");
      if (r.has("budget")) {
        Reader b(r.raw("budget"), r.where("budget"));
        budget.restarts = b.bounded_int("restarts", budget.restarts, 1, 1000000);
        budget.refine_steps = b.bounded_int("refine_steps", budget.refine_steps, 0, 1000000);
        b.finish();
      }
      const std::uint64_t seed = seed_or(true);
      return [=](Context& ctx) {
        const auto eta = contraction::estimate_eta(ensemble, oset, budget, Rng(seed), ctx.threads);
        BoundReport rep = bounds::prop2_bound(eta.value, t);
        rep.flags.push_back(bounds::Flag::Sampled);
        ctx.emit("bound")["report"] = report_json(rep);
      };
    }
    case FormulaId::Thm4: {
      const auto spec = parse_layered_spec(r);
      return emit_report(bounds::thm4_bound(spec, parse_target(r, false)));
    }
    case FormulaId::Thm5: {
      const auto spec = parse_layered_spec(r);
      const MomentTarget m = parse_moments(r);
      return emit_report(bounds::thm5_bound(spec, m, r.number("d_o")));
    }
    case FormulaId::AppE1:
    case FormulaId::AppE2: {
      const auto spec = parse_layered_spec(r);
      const auto reps = bounds::variant_bounds(spec, parse_target(r, false), std::nullopt, 0.0);
      return emit_report(reps[id == FormulaId::AppE1 ? 0 : 1]);
    }
    case FormulaId::AppE3:
    case FormulaId::AppE4: {
      const auto spec = parse_layered_spec(r);
      const MomentTarget m = parse_moments(r);
      const auto reps = bounds::variant_bounds(spec, std::nullopt, m, r.number("d_o"));
      return emit_report(reps[id == FormulaId::AppE3 ? 0 : 1]);
    }
    case FormulaId::Thm6Prob: {
      const int m = r.bounded_int("M", 1, 1, 10);
      const int l = r.bounded_int("L", 1, 1, 100000);
      const double xi = r.number("xi");
      return emit_report(bounds::thm6_prob_bound(m, l, xi, parse_target(r, false)));
    }
    case FormulaId::Thm6Moment: {
      const int m = r.bounded_int("M", 1, 1, 10);
      const int l = r.bounded_int("L", 1, 1, 100000);
      const double xi = r.number("xi");
      const MomentTarget mt = parse_moments(r);
      return emit_report(bounds::thm6_moment_bound(m, l, xi, mt, r.number("d_o")));
    }
    case FormulaId::Thermal: {
      const LiouvillianSpec l = parse_liouvillian(r, r.number("beta"));
      r.allow("rho0");
      const DensityMatrix rho0 =
          r.has("rho0") ? parse_state(r.raw("rho0"), "rho0", l.dim()) : DensityMatrix::basis(l.dim(), 0);
      const double t = r.number("t");
      return emit_report(bounds::thermal_sample_bound(rho0, l, t, parse_target(r, true)));
    }
  }
  config_fail("unsupported formula");
}

// contraction

Job parse_contraction(Reader& r) {
  const std::uint64_t seed = r.seed();
  auto chans = parse_channels(r, "channels");
  const Eigen::Index dim = chans.front().dim();
  std::vector<KrausChannel> list = chans;
  NoiseEnsemble ensemble(std::move(chans));
  auto oset = parse_observable_set(r, "observables", dim);
  contraction::SearchBudget budget;
  r.allow("budget");
  if (r.has("budget")) {
    Reader b(r.raw("budget"), r.where("budget"));
    budget.restarts = b.bounded_int("restarts", budget.restarts, 1, 1000000);
    budget.refine_steps = b.bounded_int("refine_steps", budget.refine_steps, 0, 1000000);
    b.finish();
  }
  const bool estimate = r.boolean("estimate_eta", true);

  struct VerifyPlan {
    std::size_t channel = 0;
    DensityMatrix fixed = DensityMatrix::maximally_mixed(2);
    double xi = 0.0;
    contraction::Divergence divergence = contraction::Divergence::RelativeEntropy;
    int samples = 300;
  };
  std::optional<VerifyPlan> verify;
  r.allow("verify");
  if (r.has("verify")) {
    Reader v(r.raw("verify"), r.where("verify"));
    VerifyPlan p;
    p.channel = static_cast<std::size_t>(
        v.bounded_int("channel_index", 0, 0, static_cast<long long>(list.size()) - 1));
    v.allow("fixed");
    p.fixed = v.has("fixed") ? parse_state(v.raw("fixed"), v.where("fixed"), dim)
                             : DensityMatrix::maximally_mixed(dim);
    p.xi = v.number("xi");
    const std::string div = v.string("divergence", "relative_entropy");
    if (div == "renyi2") {
      p.divergence = contraction::Divergence::Renyi2;
    } else if (div != "relative_entropy") {
      config_fail(v.where("divergence") + " must be relative_entropy or renyi2");
    }
    p.samples = v.bounded_int("samples", 300, 1, 10000000);
    v.finish();
    verify = p;
  }
  return [=](Context& ctx) {
    const Rng rng(seed);
    if (estimate) {
      const auto e = contraction::estimate_eta(ensemble, oset, budget, rng.derive(0), ctx.threads);
      Json& j = ctx.emit("eta");
      j["value"] = num(e.value);
      j["channel_index"] = e.channel_index;
      j["method"] = e.method == contraction::EstimateMethod::Analytic ? "analytic" : "search";
      j["iterations"] = e.iterations;
      j["restarts"] = e.budget.restarts;
      j["refine_steps"] = e.budget.refine_steps;
      if (e.witness) {
        j["witness"] = {{"first_hash", numkit::fingerprint(e.witness->first.mat())},
                        {"second_hash", numkit::fingerprint(e.witness->second.mat())}};
      } else {
        j["witness"] = nullptr;
      }
    }
    if (verify) {
      const auto rep = contraction::verify_contraction(list[verify->channel], verify->fixed,
                                                       verify->xi, verify->divergence,
                                                       verify->samples, rng.derive(1), ctx.threads);
      Json& j = ctx.emit("verification");
      j["channel_index"] = verify->channel;
      j["xi"] = num(verify->xi);
      j["divergence"] =
          verify->divergence == contraction::Divergence::Renyi2 ? "renyi2" : "relative_entropy";
      j["max_ratio"] = num(rep.max_ratio);
      j["violation_count"] = rep.violation_count;
      j["evaluated"] = rep.evaluated;
      j["skipped"] = rep.skipped;
      if (rep.violation_count > 0) ctx.outcome = Outcome::Failed;
    }
  };
}

// layered-scan

Job parse_layered_scan(Reader& r) {
  const std::uint64_t seed = r.seed();
  mitigation::ScanOptions o;
  o.qubits = r.bounded_int("M", 1, 1, 6);
  if (r.has("L_range")) {
    const Json& lr = r.raw("L_range");
    if (!lr.is_array() || lr.size() != 2 || !lr[0].is_number_integer() ||
        !lr[1].is_number_integer()) {
      config_fail("L_range must be [first, last]");
    }
    o.first_layer = lr[0].get<int>();
    o.last_layer = lr[1].get<int>();
  } else {
    r.allow("L_range");
  }
  if (o.first_layer < 1 || o.last_layer < o.first_layer || o.last_layer > 64) {
    config_fail("L_range must satisfy 1 <= first <= last <= 64");
  }
  o.gamma = r.number("gamma");
  if (!(std::isfinite(o.gamma) && o.gamma >= 0.0 && o.gamma < 1.0)) {
    config_fail("gamma must lie in [0, 1)");
  }
  o.target = parse_target(r, true);
  o.protocol = parse_protocol(r, "protocol", std::nullopt);
  o.random_unitaries = r.boolean("random_unitaries", true);
  o.requirement.trials = r.bounded_int("trials", 400, 1, 1000000);
  o.requirement.n_max = r.integer("n_max", o.requirement.n_max);
  if (o.requirement.n_max < 1) config_fail("n_max must be >= 1");
  // Probe a one-layer circuit so protocol problems surface before any work.
  {
    bounds::LayeredSpec probe;
    probe.qubits = o.qubits;
    probe.layers = 1;
    probe.gamma = o.gamma;
    o.protocol.validate(mitigation::LayeredCircuit::identity_layers(probe));
  }

  return [o, seed](Context& ctx) {
    mitigation::ScanOptions opts = o;
    opts.requirement.threads = ctx.threads;
    const auto scan = mitigation::layered_scan(opts, Rng(seed));
    const double slope = scan.slope.value_or(std::numeric_limits<double>::quiet_NaN());
    const double required = 0.75 * 2.0 * std::log(1.0 / (1.0 - o.gamma));
    std::string csv =
        "L,bound_thm4,bound_E1,n_hat,slope_fit,bound_E2,bound_thm1_fid,bound_thm1_rel,achieved,"
        "dominated\n";
    bool all_dominated = true;
    bool all_achieved = true;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto value_or_nan = [nan](const BoundReport& b) { return b.value.value_or(nan); };
    auto opt_value = [&](const std::optional<BoundReport>& b) {
      return b ? value_or_nan(*b) : nan;
    };
    for (const auto& row : scan.rows) {
      Json& j = ctx.emit("layer");
      j["L"] = row.layers;
      j["thm4"] = report_json(row.thm4);
      j["appE1"] = report_json(row.e1);
      j["appE2"] = report_json(row.e2);
      j["thm1_fid"] = row.thm1_fidelity ? report_json(*row.thm1_fidelity) : Json(nullptr);
      j["thm1_rel"] =
          row.thm1_relative_entropy ? report_json(*row.thm1_relative_entropy) : Json(nullptr);
      j["requirement"] = requirement_json(row.requirement);
      j["dominated"] = row.dominated;
      all_dominated = all_dominated && row.dominated;
      all_achieved = all_achieved && row.requirement.achieved;
      csv += std::to_string(row.layers) + "," + csv_num(*row.thm4.value) + "," +
             csv_num(*row.e1.value) + "," +
             (row.requirement.achieved ? std::to_string(row.requirement.n_hat) : "nan") + "," +
             csv_num(slope) + "," + csv_num(value_or_nan(row.e2)) + "," +
             csv_num(opt_value(row.thm1_fidelity)) + "," +
             csv_num(opt_value(row.thm1_relative_entropy)) + "," +
             (row.requirement.achieved ? "1" : "0") + "," + (row.dominated ? "1" : "0") + "\n";
    }
    Json& s = ctx.emit("summary");
    s["protocol"] = protocol_json(o.protocol);
    s["slope_fit"] = num(slope);
    s["required_slope"] = num(required);
    s["slope_ok"] = scan.slope.has_value() && slope >= required;
    s["all_achieved"] = all_achieved;
    s["all_dominated"] = all_dominated;
    ctx.csv = csv;
    if (!all_achieved) {
      ctx.outcome = Outcome::Unachievable;
    } else if (!all_dominated) {
      ctx.outcome = Outcome::Failed;
    }
  };
}

// mitigate

Job parse_mitigate(Reader& r) {
  const std::uint64_t seed = r.seed();
  bounds::LayeredSpec spec = parse_layered_spec(r);
  const Eigen::Index d = spec.dim();
  if (spec.qubits > 6) config_fail("mitigate supports at most 6 qubits");

  std::optional<mitigation::LayeredCircuit> circuit;
  r.allow("unitaries");
  const Json* us = r.has("unitaries") ? &r.raw("unitaries") : nullptr;
  std::vector<Matrix> unitaries;
  if (us && us->is_array()) {
    if (us->size() != static_cast<std::size_t>(spec.layers)) config_fail("need one unitary per layer");
    for (std::size_t i = 0; i < us->size(); ++i) {
      unitaries.push_back(parse_square((*us)[i], "unitaries[" + std::to_string(i) + "]"));
    }
  } else {
    const std::string mode = us ? (us->is_string() ? us->get<std::string>() : "") : "random";
    if (mode == "identity") {
      unitaries.assign(static_cast<std::size_t>(spec.layers), Matrix::Identity(d, d));
    } else if (mode == "random") {
      unitaries = mitigation::LayeredCircuit::build(spec, Rng(seed).derive(0)).unitaries();
    } else {
      config_fail("unitaries must be \"random\", \"identity\" or a list of matrices");
    }
  }
  Eigen::MatrixXd strengths = Eigen::MatrixXd::Constant(spec.layers, spec.qubits, spec.gamma);
  r.allow("strengths");
  if (r.has("strengths")) strengths = parse_matrix(r.raw("strengths"), "strengths").real();
  circuit.emplace(spec, unitaries, strengths);

  r.allow("input");
  const DensityMatrix input = r.has("input") ? parse_state(r.raw("input"), "input", d)
                                             : DensityMatrix::basis(d, 0);
  r.allow("observable");
  const Observable obs = r.has("observable")
                             ? parse_observable(r.raw("observable"), "observable")
                             : Observable(numkit::pauli_string(
                                   "Z" + std::string(static_cast<std::size_t>(spec.qubits - 1), 'I')));
  if (obs.dim() != d) config_fail("observable has the wrong dimension");
  const auto protocol =
      parse_protocol(r, "protocol", std::make_pair(spec.layers, spec.qubits));
  protocol.validate(*circuit);
  const long long n = r.integer("n");
  if (n < 1) config_fail("n must be >= 1");
  const int trials = r.bounded_int("trials", 400, 1, 10000000);
  const double delta = r.number("delta");
  if (!(std::isfinite(delta) && delta >= 0.0)) config_fail("delta must be >= 0");
  std::optional<AccuracyTarget> target;
  r.allow("epsilon");
  if (r.has("epsilon")) {
    target = AccuracyTarget{delta, r.number("epsilon")};
    target->validate();
  }
  mitigation::RequirementOptions ro;
  ro.trials = trials;
  ro.n_max = r.integer("n_max", ro.n_max);
  if (ro.n_max < 1) config_fail("n_max must be >= 1");

  const mitigation::LayeredCircuit c = *circuit;
  return [=](Context& ctx) {
    const Rng rng(seed);
    const auto s = mitigation::estimator_stats(c, input, obs, protocol, n, trials, delta,
                                               rng.derive(1), ctx.threads);
    Json& j = ctx.emit("stats");
    j["protocol"] = protocol_json(protocol);
    j["mean"] = num(s.mean);
    j["ideal"] = num(s.ideal);
    j["bias"] = num(s.bias);
    j["std_dev"] = num(s.std_dev);
    j["success_prob"] = num(s.success_prob);
    j["trials"] = s.trials;
    j["n_per_trial"] = s.n_per_trial;
    Json flags = Json::array();
    if (s.low_trials) flags.push_back("low_trials");
    if (s.assumed_gamma_mismatch) flags.push_back("assumed_gamma_mismatch");
    if (s.fit_fallbacks > 0) flags.push_back("fit_fallback");
    j["flags"] = flags;
    j["fit_fallbacks"] = s.fit_fallbacks;
    if (target) {
      mitigation::RequirementOptions opts = ro;
      opts.threads = ctx.threads;
      const auto req = mitigation::empirical_sample_requirement(c, {{input, obs}}, protocol,
                                                                *target, opts, rng.derive(2));
      ctx.emit("requirement")["requirement"] = requirement_json(req);
      ctx.csv = curve_csv(req.curve);
      if (!req.achieved) ctx.outcome = Outcome::Unachievable;
    }
  };
}

// thermal

Job parse_thermal(Reader& r) {
  const std::uint64_t seed = r.seed();
  const LiouvillianSpec l = parse_liouvillian(r, r.number("beta"));
  r.allow("rho0");
  const DensityMatrix rho0 =
      r.has("rho0") ? parse_state(r.raw("rho0"), "rho0", l.dim()) : DensityMatrix::basis(l.dim(), 0);
  const Json& grid = r.raw("t_grid");
  if (!grid.is_array() || grid.empty()) config_fail("t_grid must be a nonempty array");
  std::vector<double> ts;
  for (const auto& v : grid) {
    const double t = to_number(v, "t_grid");
    if (!(std::isfinite(t) && t >= 0.0)) config_fail("t_grid entries must be >= 0");
    ts.push_back(t);
  }
  const AccuracyTarget target = parse_target(r, true);
  const int samples = r.bounded_int("samples", 64, 1, 1000000);
  const int refine = r.bounded_int("refine_steps", 40, 0, 1000000);

  return [=](Context& ctx) {
    const auto alpha = bounds::alpha_ent_estimate(l, samples, Rng(seed), refine, ctx.threads);
    Json& a = ctx.emit("alpha_ent");
    a["value"] = num(alpha.value);
    a["evaluated"] = alpha.evaluated;
    a["witness_hash"] = alpha.witness ? Json(numkit::fingerprint(alpha.witness->mat())) : Json(nullptr);
    std::string csv = "t,bound,free_energy_gap,relative_entropy_bits\n";
    std::vector<double> xs;
    std::vector<double> ys;
    for (double t : ts) {
      const auto rep = bounds::thermal_sample_bound(rho0, l, t, target);
      Json& j = ctx.emit("point");
      j["t"] = num(t);
      j["report"] = report_json(rep);
      double gap = std::numeric_limits<double>::quiet_NaN();
      double rel = gap;
      for (const auto& [k, v] : rep.extras) {
        if (k == "free_energy_gap") gap = v;
        if (k == "relative_entropy_bits") rel = v;
      }
      const double value = rep.value.value_or(std::numeric_limits<double>::quiet_NaN());
      csv += csv_num(t) + "," + csv_num(value) + "," + csv_num(gap) + "," + csv_num(rel) + "\n";
      if (std::isfinite(value) && value > 0.0) {
        xs.push_back(t);
        ys.push_back(std::log(value));
      }
    }
    Json& s = ctx.emit("summary");
    s["alpha_ent"] = num(alpha.value);
    if (xs.size() >= 2 && xs.front() != xs.back()) {
      const double slope = mitigation::fit_slope(xs, ys);
      s["fit_slope"] = num(slope);
      s["relative_error"] = num(std::abs(slope / alpha.value - 1.0));
    } else {
      s["fit_slope"] = nullptr;
      s["relative_error"] = nullptr;
    }
    s["fit_points"] = xs.size();
    ctx.csv = csv;
  };
}

void set_dotted(Json& target, const std::string& key, const Json& value) {
  Json* node = &target;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (part.empty()) config_fail("bad override key '" + key + "'");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    Json& child = (*node)[part];
    if (child.is_null()) child = Json::object();
    if (!child.is_object()) config_fail("override '" + key + "' descends into a non-object");
    node = &child;
    start = dot + 1;
  }
}

const std::vector<std::pair<std::string, Job (*)(Reader&)>>& command_table() {
  static const std::vector<std::pair<std::string, Job (*)(Reader&)>> table{
      {"verify", parse_verify},
      {"bound", parse_bound},
      {"contraction", parse_contraction},
      {"layered-scan", parse_layered_scan},
      {"mitigate", parse_mitigate},
      {"thermal", parse_thermal},
  };
  return table;
}

}  // namespace

std::vector<std::string> commands() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : command_table()) out.push_back(name);
  return out;
}

channels::KrausChannel parse_channel_spec(const Json& spec) {
  return parse_channel(spec, "channel");
}

const char* version() { return QEMBOUND_VERSION; }

Output run(const std::string& command, const Json& config, const Json& overrides, int threads) {
  Job (*parse)(Reader&) = nullptr;
  for (const auto& [name, fn] : command_table()) {
    if (name == command) parse = fn;
  }
  if (!parse) {
    std::string list;
    for (const auto& n : commands()) list += (list.empty() ? "" : ", ") + n;
    config_fail("unknown command '" + command + "'; valid commands: " + list);
  }
  if (threads < 1) config_fail("threads must be >= 1");

  Json effective = config.is_null() ? Json::object() : config;
  if (!effective.is_object()) config_fail("config must be a JSON object");
  if (!overrides.is_null()) {
    if (!overrides.is_object()) config_fail("overrides must be a JSON object");
    for (const auto& [k, v] : overrides.items()) set_dotted(effective, k, v);
  }

  Job job;
  bool record_timing = false;
  try {
    Reader r(effective, "");
    r.allow("output");
    if (effective.contains("output")) {
      Reader o(effective["output"], "output");
      o.string("path", "");
      const std::string format = o.string("format", "both");
      if (format != "json" && format != "csv" && format != "both") {
        config_fail("output.format must be json, csv or both");
      }
      o.finish();
    }
    record_timing = r.boolean("record_timing", false);
    job = parse(r);
    r.finish();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    config_fail(e.what());
  } catch (const nlohmann::json::exception& e) {
    config_fail(e.what());
  }

  Context ctx;
  ctx.command = command;
  ctx.threads = threads;
  const auto start = std::chrono::steady_clock::now();
  job(ctx);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Json provenance;
  provenance["tool"] = "qembound";
  provenance["version"] = QEMBOUND_VERSION;
  provenance["seed"] = effective.contains("seed") ? effective["seed"] : Json(nullptr);
  if (record_timing) provenance["wall_time_s"] = wall;

  Output out;
  out.outcome = ctx.outcome;
  out.csv = std::move(ctx.csv);
  for (auto& rec : ctx.records) {
    rec["config"] = effective;
    rec["provenance"] = provenance;
    out.jsonl += rec.dump() + "\n";
  }
  return out;
}

}  // namespace qembound::driver
