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

#include "qembound/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "parallel.hpp"

namespace qembound::bounds {

using numkit::Complex;
using numkit::Rng;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = std::numbers::ln2;
// Slack on the D_O >= 2 delta admissibility test.
constexpr double kAdmissibleSlack = 1e-12;

void require_finite_nonneg(double x, const char* what) {
  require(std::isfinite(x) && x >= 0.0, ErrorCode::InvalidArgument,
          std::string(what) + " must be finite and nonnegative");
}

void validate_epsilon(double epsilon) {
  require(std::isfinite(epsilon) && epsilon >= 0.0 && epsilon <= 0.5,
          ErrorCode::InvalidArgument, "epsilon must lie in [0, 1/2]");
}

/// log2[1/(4 eps (1-eps))].
double failure_numerator(double epsilon) {
  if (epsilon == 0.0) return kInf;
  return std::max(-std::log2(4.0 * epsilon * (1.0 - epsilon)), 0.0);
}

/// log2[1 - 1/(1 + 2 sigma/(D - 2b))^2]^{-1}; 0 when D = 2b.
double moment_numerator(double d_o, const MomentTarget& m) {
  const double gap = d_o - 2.0 * m.b_max;
  require(gap >= -kAdmissibleSlack, ErrorCode::InvalidArgument,
          "distinguishability must be at least twice the maximum bias");
  if (gap <= 0.0) return 0.0;
  const double x = 1.0 + 2.0 * m.sigma_max / gap;
  const double inner = 1.0 - 1.0 / (x * x);
  if (inner <= 0.0) return kInf;
  return -std::log2(inner);
}

/// (1/(2 sigma/(D - 2b) + 1))^2; 0 when D = 2b.
double moment_bracket(double d_o, const MomentTarget& m) {
  const double gap = d_o - 2.0 * m.b_max;
  require(gap >= -kAdmissibleSlack, ErrorCode::InvalidArgument,
          "distinguishability must be at least twice the maximum bias");
  if (gap <= 0.0) return 0.0;
  const double b = 1.0 / (2.0 * m.sigma_max / gap + 1.0);
  return b * b;
}

/// num / den with 0 numerators winning over 0 denominators.
double safe_ratio(double num, double den) {
  if (num == 0.0) return 0.0;
  if (den == 0.0) return kInf;
  return num / den;
}

void validate_spec_scalars(int qubits, int layers) {
  require(qubits >= 1, ErrorCode::InvalidArgument, "qubit count must be >= 1");
  require(layers >= 1, ErrorCode::InvalidArgument, "layer count must be >= 1");
}

double fidelity_denominator(double fidelity) {
  return fidelity >= 1.0 ? 0.0 : -std::log2(fidelity);
}

BoundReport thm6_prob_core(FormulaId id, int qubits, int layers, double xi,
                           const AccuracyTarget& target) {
  const double coef = (1.0 - 2.0 * target.epsilon) * (1.0 - 2.0 * target.epsilon);
  BoundReport r;
  r.formula = id;
  r.value = safe_ratio(coef, 2.0 * kLn2 * qubits * std::pow(xi, layers));
  return r;
}

BoundReport thm6_moment_core(FormulaId id, int qubits, int layers, double xi,
                             const MomentTarget& moments, double d_o) {
  BoundReport r;
  r.formula = id;
  r.value = safe_ratio(moment_bracket(d_o, moments), 4.0 * qubits * std::pow(xi, layers));
  return r;
}

void validate_xi(double xi) {
  require(std::isfinite(xi) && xi > 0.0 && xi <= 1.0, ErrorCode::InvalidArgument,
          "xi must lie in (0, 1]");
}

}  // namespace

void AccuracyTarget::validate() const {
  require_finite_nonneg(delta, "delta");
  validate_epsilon(epsilon);
}

void MomentTarget::validate() const {
  require_finite_nonneg(sigma_max, "sigma_max");
  require_finite_nonneg(b_max, "b_max");
}

void LayeredSpec::validate() const {
  validate_spec_scalars(qubits, layers);
  require(qubits <= 10, ErrorCode::InvalidArgument, "at most 10 qubits are supported");
  require(std::isfinite(gamma) && gamma >= 0.0 && gamma < 1.0, ErrorCode::InvalidArgument,
          "gamma must lie in [0, 1)");
  const Eigen::Index d = dim();
  require(unitaries.empty() || unitaries.size() == static_cast<std::size_t>(layers),
          ErrorCode::InvalidArgument, "need one unitary per layer");
  for (const auto& u : unitaries) {
    require(u.rows() == d && u.cols() == d, ErrorCode::InvalidArgument,
            "layer unitary has the wrong dimension");
    require(numkit::max_abs_entry(u.adjoint() * u - Matrix::Identity(d, d)) <= 1e-8,
            ErrorCode::InvalidArgument, "layer matrix is not unitary");
  }
  require(sandwiches.empty() || sandwiches.size() == static_cast<std::size_t>(layers),
          ErrorCode::InvalidArgument, "need one sandwich entry per layer");
  for (const auto& s : sandwiches) {
    if (!s) continue;
    for (const KrausChannel* c : {&s->before, &s->after}) {
      require(c->dim() == d, ErrorCode::InvalidArgument,
              "sandwich channel has the wrong dimension");
      require(channels::is_unital(*c), ErrorCode::InvalidArgument,
              "sandwich channels must be unital");
    }
  }
}

StateSet StateSet::explicit_set(std::vector<DensityMatrix> members) {
  require(!members.empty(), ErrorCode::InvalidArgument, "empty state set");
  const Eigen::Index d = members.front().dim();
  for (const auto& m : members) {
    require(m.dim() == d, ErrorCode::InvalidArgument, "states in a set must share a dimension");
  }
  return StateSet(Kind::Explicit, d, std::move(members), 0);
}

StateSet StateSet::all_pure(Eigen::Index dim, int pair_budget) {
  require(dim >= 2, ErrorCode::InvalidArgument, "dimension must be >= 2");
  require(pair_budget >= 1, ErrorCode::InvalidArgument, "pair budget must be >= 1");
  return StateSet(Kind::AllPure, dim, {}, pair_budget);
}

const char* to_string(FormulaId id) {
  switch (id) {
    case FormulaId::Thm1Fid: return "thm1_fid";
    case FormulaId::Thm1Rel: return "thm1_rel";
    case FormulaId::Prop2: return "prop2";
    case FormulaId::Thm3: return "thm3";
    case FormulaId::Thm4: return "thm4";
    case FormulaId::Thm5: return "thm5";
    case FormulaId::AppE1: return "appE1";
    case FormulaId::AppE2: return "appE2";
    case FormulaId::AppE3: return "appE3";
    case FormulaId::AppE4: return "appE4";
    case FormulaId::Thm6Prob: return "thm6_prob";
    case FormulaId::Thm6Moment: return "thm6_moment";
    case FormulaId::Thermal: return "thermal";
  }
  return "unknown";
}

const char* to_string(Flag flag) {
  switch (flag) {
    case Flag::PerfectlyDistinguishable: return "PerfectlyDistinguishable";
    case Flag::EmptyFeasibleSet: return "EmptyFeasibleSet";
    case Flag::DomainViolated: return "DomainViolated";
    case Flag::Sampled: return "Sampled";
  }
  return "unknown";
}

std::vector<std::string> formula_names() {
  std::vector<std::string> out;
  for (int i = 0; i <= static_cast<int>(FormulaId::Thermal); ++i) {
    out.emplace_back(to_string(static_cast<FormulaId>(i)));
  }
  return out;
}

FormulaId formula_from_string(const std::string& name) {
  for (int i = 0; i <= static_cast<int>(FormulaId::Thermal); ++i) {
    const auto id = static_cast<FormulaId>(i);
    if (name == to_string(id)) return id;
  }
  std::ostringstream os;
  os << "unknown formula_id '" << name << "'; valid ids:";
  for (const auto& n : formula_names()) os << ' ' << n;
  fail(ErrorCode::ConfigError, os.str());
}

bool BoundReport::has_flag(Flag f) const {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

BoundReport thm1_fidelity_scalar(double fidelity, double epsilon) {
  require(std::isfinite(fidelity) && fidelity >= 0.0 && fidelity <= 1.0 + 1e-12,
          ErrorCode::InvalidArgument, "fidelity must lie in [0, 1]");
  validate_epsilon(epsilon);
  BoundReport r;
  r.formula = FormulaId::Thm1Fid;
  r.inputs = {{"fidelity", fidelity}, {"epsilon", epsilon}};
  if (fidelity <= 0.0) {
    r.value = 0.0;
    r.flags.push_back(Flag::PerfectlyDistinguishable);
    return r;
  }
  r.value = safe_ratio(failure_numerator(epsilon), fidelity_denominator(fidelity));
  return r;
}

BoundReport thm1_relative_entropy_scalar(double s_bits, double epsilon) {
  require(!std::isnan(s_bits) && s_bits >= 0.0, ErrorCode::InvalidArgument,
          "relative entropy must be nonnegative");
  validate_epsilon(epsilon);
  BoundReport r;
  r.formula = FormulaId::Thm1Rel;
  r.inputs = {{"relative_entropy", s_bits}, {"epsilon", epsilon}};
  if (std::isinf(s_bits)) {
    r.value = 0.0;
    r.flags.push_back(Flag::PerfectlyDistinguishable);
    return r;
  }
  const double coef = 2.0 * (1.0 - 2.0 * epsilon) * (1.0 - 2.0 * epsilon);
  r.value = safe_ratio(coef, kLn2 * s_bits);
  return r;
}

BoundReport thm3_scalar(double d_o, const MomentTarget& moments, double fidelity) {
  moments.validate();
  require_finite_nonneg(d_o, "distinguishability");
  require(std::isfinite(fidelity) && fidelity >= 0.0 && fidelity <= 1.0 + 1e-12,
          ErrorCode::InvalidArgument, "fidelity must lie in [0, 1]");
  BoundReport r;
  r.formula = FormulaId::Thm3;
  r.inputs = {{"d_o", d_o},
              {"sigma_max", moments.sigma_max},
              {"b_max", moments.b_max},
              {"fidelity", fidelity}};
  const double num = moment_numerator(d_o, moments);
  if (fidelity <= 0.0) {
    r.value = 0.0;
    r.flags.push_back(Flag::PerfectlyDistinguishable);
    return r;
  }
  r.value = safe_ratio(num, fidelity_denominator(fidelity));
  return r;
}

BoundReport prop2_bound(double eta, const AccuracyTarget& target) {
  require_finite_nonneg(eta, "eta");
  target.validate();
  const double x = 2.0 * eta * target.delta;
  require(x < 1.0, ErrorCode::InvalidArgument,
          "prop2 needs 2 eta delta < 1 (formula domain)");
  BoundReport r;
  r.formula = FormulaId::Prop2;
  r.inputs = {{"eta", eta}, {"delta", target.delta}, {"epsilon", target.epsilon}};
  const double den = -2.0 * std::log1p(-x) / kLn2;
  r.value = safe_ratio(failure_numerator(target.epsilon), den);
  const double approx_num =
      target.epsilon == 0.0 ? kInf : std::max(std::log(1.0 / (4.0 * target.epsilon)), 0.0);
  r.extras = {{"approximation", safe_ratio(approx_num, 4.0 * eta * target.delta)}};
  return r;
}

BoundReport thm6_prob_bound(int qubits, int layers, double xi, const AccuracyTarget& target) {
  validate_spec_scalars(qubits, layers);
  validate_xi(xi);
  target.validate();
  BoundReport r = thm6_prob_core(FormulaId::Thm6Prob, qubits, layers, xi, target);
  r.inputs = {{"M", qubits}, {"L", layers}, {"xi", xi}, {"epsilon", target.epsilon}};
  return r;
}

BoundReport thm6_moment_bound(int qubits, int layers, double xi, const MomentTarget& moments,
                              double d_o) {
  validate_spec_scalars(qubits, layers);
  validate_xi(xi);
  moments.validate();
  require_finite_nonneg(d_o, "d_o");
  BoundReport r = thm6_moment_core(FormulaId::Thm6Moment, qubits, layers, xi, moments, d_o);
  r.inputs = {{"M", qubits},
              {"L", layers},
              {"xi", xi},
              {"sigma_max", moments.sigma_max},
              {"b_max", moments.b_max},
              {"d_o", d_o}};
  return r;
}

BoundReport thm4_bound(const LayeredSpec& spec, const AccuracyTarget& target) {
  spec.validate();
  target.validate();
  const double xi = (1.0 - spec.gamma) * (1.0 - spec.gamma);
  BoundReport r = thm6_prob_core(FormulaId::Thm4, spec.qubits, spec.layers, xi, target);
  r.inputs = {{"M", spec.qubits},
              {"L", spec.layers},
              {"gamma", spec.gamma},
              {"delta", target.delta},
              {"epsilon", target.epsilon}};
  return r;
}

BoundReport thm5_bound(const LayeredSpec& spec, const MomentTarget& moments, double d_o) {
  spec.validate();
  moments.validate();
  require_finite_nonneg(d_o, "d_o");
  const double xi = (1.0 - spec.gamma) * (1.0 - spec.gamma);
  BoundReport r = thm6_moment_core(FormulaId::Thm5, spec.qubits, spec.layers, xi, moments, d_o);
  r.inputs = {{"M", spec.qubits},     {"L", spec.layers},
              {"gamma", spec.gamma},  {"sigma_max", moments.sigma_max},
              {"b_max", moments.b_max}, {"d_o", d_o}};
  return r;
}

std::vector<BoundReport> variant_bounds(const LayeredSpec& spec,
                                           const std::optional<AccuracyTarget>& target,
                                           const std::optional<MomentTarget>& moments,
                                           double d_o) {
  spec.validate();
  const double m = spec.qubits;
  const double l = spec.layers;
  const double g = spec.gamma;
  const double decay = std::pow(1.0 - g, l);
  const double e1_factor = safe_ratio(std::pow(g / 2.0, m), 8.0 * kLn2 * m * decay * decay);
  const double validity = std::sqrt(2.0 * kLn2) * std::sqrt(m) * decay;
  const bool e2_valid = validity <= 0.5;
  const double bracket = l * std::log2(2.0 / (1.0 - g)) + m - 0.5 * std::log2(m * kLn2 / 2.0) +
                         (g == 0.0 ? kInf : 0.5 * m * std::log2(2.0 / g));
  const double e2_factor = safe_ratio(std::sqrt(kLn2), std::sqrt(8.0 * m) * decay * bracket);

  auto make = [&](FormulaId id, double numerator, double factor, bool needs_validity,
                  std::vector<NamedValue> inputs) {
    BoundReport r;
    r.formula = id;
    inputs.insert(inputs.begin(), {{"M", m}, {"L", l}, {"gamma", g}});
    r.inputs = std::move(inputs);
    if (needs_validity) {
      r.extras = {{"validity_lhs", validity}};
      if (!e2_valid) {
        r.flags.push_back(Flag::DomainViolated);
        return r;
      }
    }
    r.value = (numerator == 0.0 || factor == 0.0) ? 0.0 : numerator * factor;
    return r;
  };

  std::vector<BoundReport> out;
  if (target) {
    target->validate();
    const double num = failure_numerator(target->epsilon);
    const std::vector<NamedValue> in = {{"delta", target->delta}, {"epsilon", target->epsilon}};
    out.push_back(make(FormulaId::AppE1, num, e1_factor, false, in));
    out.push_back(make(FormulaId::AppE2, num, e2_factor, true, in));
  }
  if (moments) {
    moments->validate();
    require_finite_nonneg(d_o, "d_o");
    const double num = moment_numerator(d_o, *moments);
    const std::vector<NamedValue> in = {
        {"sigma_max", moments->sigma_max}, {"b_max", moments->b_max}, {"d_o", d_o}};
    out.push_back(make(FormulaId::AppE3, num, e1_factor, false, in));
    out.push_back(make(FormulaId::AppE4, num, e2_factor, true, in));
  }
  return out;
}

namespace {

struct PairCandidate {
  std::size_t first = 0;
  std::size_t second = 0;
  const DensityMatrix* rho = nullptr;
  const DensityMatrix* sigma = nullptr;
};

struct PairOutcome {
  bool admissible = false;
  double d_o = 0.0;
  // Per route: min over the ensemble, its channel and whether it was a
  // perfectly distinguishable output pair.
  double value[2] = {0.0, 0.0};
  std::size_t channel[2] = {0, 0};
  bool distinguishable[2] = {false, false};
};

/// Random pure pairs for all_pure sets; pair k uses seed-derived stream k.
std::vector<DensityMatrix> sample_pure_states(const StateSet& states, std::uint64_t seed) {
  std::vector<DensityMatrix> out;
  const Rng master(seed);
  for (int k = 0; k < states.pair_budget(); ++k) {
    Rng r = master.derive(static_cast<std::uint64_t>(k));
    out.push_back(numkit::random_state(states.dim(), numkit::StateKind::Pure, r));
    out.push_back(numkit::random_state(states.dim(), numkit::StateKind::Pure, r));
  }
  return out;
}

std::vector<PairCandidate> make_pairs(const StateSet& states,
                                      const std::vector<DensityMatrix>& pool) {
  std::vector<PairCandidate> pairs;
  if (states.kind() == StateSet::Kind::Explicit) {
    const auto& m = states.members();
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (std::size_t j = i + 1; j < m.size(); ++j) pairs.push_back({i, j, &m[i], &m[j]});
    }
  } else {
    for (std::size_t k = 0; k + 1 < pool.size(); k += 2) {
      pairs.push_back({k, k + 1, &pool[k], &pool[k + 1]});
    }
  }
  return pairs;
}

void check_dims(const StateSet& states, const NoiseEnsemble& ensemble,
                const ObservableSet& oset) {
  require(states.dim() == ensemble.dim() && oset.dim() == ensemble.dim(),
          ErrorCode::InvalidArgument, "state set, ensemble and observable set dimensions differ");
}

/// Runs `route(pair, channel outputs, d_o) -> {value, distinguishable}` for
/// both routes and reduces min over channels, max over pairs.
template <typename Route>
std::vector<BoundReport> pair_search(const StateSet& states, const NoiseEnsemble& ensemble,
                                     const ObservableSet& oset, double threshold,
                                     const SearchOptions& options, int routes,
                                     const FormulaId* ids, Route route) {
  check_dims(states, ensemble, oset);
  const auto pool = states.kind() == StateSet::Kind::AllPure
                        ? sample_pure_states(states, options.seed)
                        : std::vector<DensityMatrix>{};
  const auto pairs = make_pairs(states, pool);
  const auto outcomes =
      detail::parallel_map<PairOutcome>(pairs.size(), options.threads, [&](std::size_t p) {
        PairOutcome o;
        const auto& c = pairs[p];
        o.d_o = divergences::observable_distinguishability(*c.rho, *c.sigma, oset);
        if (o.d_o < threshold - kAdmissibleSlack) return o;
        o.admissible = true;
        for (int k = 0; k < routes; ++k) o.value[k] = kInf;
        for (std::size_t n = 0; n < ensemble.size(); ++n) {
          const auto er = channels::apply(ensemble[n], *c.rho);
          const auto es = channels::apply(ensemble[n], *c.sigma);
          for (int k = 0; k < routes; ++k) {
            const BoundReport s = route(k, er, es, o.d_o);
            if (*s.value < o.value[k]) {
              o.value[k] = *s.value;
              o.channel[k] = n;
              o.distinguishable[k] = s.has_flag(Flag::PerfectlyDistinguishable);
            }
          }
        }
        return o;
      });

  std::vector<BoundReport> reports(static_cast<std::size_t>(routes));
  int admissible = 0;
  for (const auto& o : outcomes) admissible += o.admissible ? 1 : 0;
  for (int k = 0; k < routes; ++k) {
    BoundReport& r = reports[static_cast<std::size_t>(k)];
    r.formula = ids[k];
    r.inputs = {{"pairs_evaluated", static_cast<double>(pairs.size())},
                {"admissible_pairs", static_cast<double>(admissible)},
                {"ensemble_size", static_cast<double>(ensemble.size())}};
    if (states.kind() == StateSet::Kind::AllPure) r.flags.push_back(Flag::Sampled);
    std::ptrdiff_t best = -1;
    for (std::size_t p = 0; p < outcomes.size(); ++p) {
      if (!outcomes[p].admissible) continue;
      if (best < 0 || outcomes[p].value[k] > outcomes[static_cast<std::size_t>(best)].value[k]) {
        best = static_cast<std::ptrdiff_t>(p);
      }
    }
    if (best < 0) {
      r.value = 0.0;
      r.flags.push_back(Flag::EmptyFeasibleSet);
      continue;
    }
    const auto& o = outcomes[static_cast<std::size_t>(best)];
    const auto& c = pairs[static_cast<std::size_t>(best)];
    r.value = o.value[k];
    r.witness = Witness{c.first, c.second, numkit::fingerprint(c.rho->mat()),
                        numkit::fingerprint(c.sigma->mat()), o.channel[k]};
    r.extras = {{"witness_d_o", o.d_o}};
    if (o.distinguishable[k]) r.flags.push_back(Flag::PerfectlyDistinguishable);
  }
  return reports;
}

}  // namespace

Thm1Result thm1_bound(const StateSet& states, const NoiseEnsemble& ensemble,
                      const ObservableSet& oset, const AccuracyTarget& target,
                      const SearchOptions& options) {
  target.validate();
  static constexpr FormulaId kIds[] = {FormulaId::Thm1Fid, FormulaId::Thm1Rel};
  auto reports = pair_search(
      states, ensemble, oset, 2.0 * target.delta, options, 2, kIds,
      [&](int route, const DensityMatrix& a, const DensityMatrix& b, double) {
        return route == 0
                   ? thm1_fidelity_scalar(divergences::fidelity(a, b), target.epsilon)
                   : thm1_relative_entropy_scalar(divergences::relative_entropy(a, b),
                                                  target.epsilon);
      });
  for (auto& r : reports) {
    r.inputs.insert(r.inputs.begin(), {{"delta", target.delta}, {"epsilon", target.epsilon}});
  }
  return {std::move(reports[0]), std::move(reports[1])};
}

BoundReport thm3_bound(const StateSet& states, const NoiseEnsemble& ensemble,
                       const ObservableSet& oset, const MomentTarget& moments,
                       const SearchOptions& options) {
  moments.validate();
  static constexpr FormulaId kIds[] = {FormulaId::Thm3};
  auto reports = pair_search(
      states, ensemble, oset, 2.0 * moments.b_max, options, 1, kIds,
      [&](int, const DensityMatrix& a, const DensityMatrix& b, double d_o) {
        return thm3_scalar(std::max(d_o, 2.0 * moments.b_max), moments,
                           divergences::fidelity(a, b));
      });
  reports[0].inputs.insert(reports[0].inputs.begin(),
                           {{"sigma_max", moments.sigma_max}, {"b_max", moments.b_max}});
  return std::move(reports[0]);
}

double free_energy(const DensityMatrix& rho, const Observable& h, double beta) {
  require(rho.dim() == h.dim(), ErrorCode::InvalidArgument, "state/Hamiltonian dimension mismatch");
  require(std::isfinite(beta) && beta > 0.0, ErrorCode::InvalidArgument, "beta must be positive");
  return divergences::expectation(h, rho) - divergences::von_neumann_entropy_nats(rho) / beta;
}

double equilibrium_free_energy(const Observable& h, double beta) {
  require(std::isfinite(beta) && beta > 0.0, ErrorCode::InvalidArgument, "beta must be positive");
  const auto eig = numkit::eig_hermitian(h.mat());
  const double emin = eig.values(0);
  double z = 0.0;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    z += std::exp(-beta * (eig.values(i) - emin));
  }
  return emin - std::log(z) / beta;
}

double entropy_production_rate(const DensityMatrix& tau, const LiouvillianSpec& l) {
  require(tau.dim() == l.dim(), ErrorCode::InvalidArgument,
          "state/Liouvillian dimension mismatch");
  require(divergences::min_eigenvalue(tau) > 1e-12, ErrorCode::SingularState,
          "entropy production needs a full-rank state");
  const Matrix lt = l.apply(tau.mat());
  const Matrix log_tau = numkit::matrix_fn_psd(tau.mat(), numkit::MatrixFunction::Ln);
  return -(lt * log_tau).trace().real() - l.beta() * (lt * l.hamiltonian().mat()).trace().real();
}

namespace {

struct AlphaSample {
  double ratio = kInf;
  std::optional<DensityMatrix> state;
};

std::optional<double> alpha_ratio(const DensityMatrix& tau, const LiouvillianSpec& l,
                                  double f_eq) {
  if (divergences::min_eigenvalue(tau) <= 1e-12) return std::nullopt;
  const double den = l.beta() * (free_energy(tau, l.hamiltonian(), l.beta()) - f_eq);
  if (!(den >= 1e-10)) return std::nullopt;
  return entropy_production_rate(tau, l) / den;
}

DensityMatrix from_factor(const Matrix& g) {
  const Matrix p = g * g.adjoint();
  return DensityMatrix::from_numeric(p / p.trace().real());
}

}  // namespace

AlphaEntEstimate alpha_ent_estimate(const LiouvillianSpec& l, int samples, const Rng& rng,
                                    int refine_steps, int threads) {
  require(samples >= 1, ErrorCode::InvalidArgument, "need at least one sample");
  require(refine_steps >= 0, ErrorCode::InvalidArgument, "refine_steps must be >= 0");
  const double f_eq = equilibrium_free_energy(l.hamiltonian(), l.beta());
  const Eigen::Index d = l.dim();
  const auto results = detail::parallel_map<AlphaSample>(
      static_cast<std::size_t>(samples), threads, [&](std::size_t i) {
        Rng r = rng.derive(i);
        Matrix g(d, d);
        for (Eigen::Index a = 0; a < d; ++a) {
          for (Eigen::Index b = 0; b < d; ++b) g(a, b) = r.complex_normal();
        }
        AlphaSample best;
        DensityMatrix tau = from_factor(g);
        if (auto v = alpha_ratio(tau, l, f_eq)) best = {*v, tau};
        double step = 0.3;
        for (int k = 0; k < refine_steps; ++k) {
          Matrix trial = g;
          for (Eigen::Index a = 0; a < d; ++a) {
            for (Eigen::Index b = 0; b < d; ++b) trial(a, b) += step * r.complex_normal();
          }
          DensityMatrix t = from_factor(trial);
          const auto v = alpha_ratio(t, l, f_eq);
          if (v && *v < best.ratio) {
            best = {*v, std::move(t)};
            g = trial;
            step = std::min(1.0, step * 1.2);
          } else {
            step = std::max(1e-3, step * 0.9);
          }
        }
        return best;
      });

  AlphaEntEstimate out;
  out.value = kInf;
  for (const auto& s : results) {
    if (!s.state) continue;
    ++out.evaluated;
    if (s.ratio < out.value) {
      out.value = s.ratio;
      out.witness = s.state;
    }
  }
  return out;
}

BoundReport thermal_sample_bound(const DensityMatrix& rho0, const LiouvillianSpec& l, double t,
                                 const AccuracyTarget& target) {
  target.validate();
  require(rho0.dim() == l.dim(), ErrorCode::InvalidArgument,
          "state/Liouvillian dimension mismatch");
  const auto phi = channels::semigroup_step(l, t);
  const auto rho_t = channels::apply(phi, rho0);
  const double s_bits = divergences::relative_entropy(rho_t, l.gibbs());
  BoundReport r = thm1_relative_entropy_scalar(s_bits, target.epsilon);
  r.formula = FormulaId::Thermal;
  r.inputs = {{"t", t}, {"beta", l.beta()}, {"delta", target.delta}, {"epsilon", target.epsilon}};
  const double gap = free_energy(rho_t, l.hamiltonian(), l.beta()) -
                     equilibrium_free_energy(l.hamiltonian(), l.beta());
  r.extras = {{"free_energy_gap", gap}, {"relative_entropy_bits", s_bits}};
  return r;
}

}  // namespace qembound::bounds
