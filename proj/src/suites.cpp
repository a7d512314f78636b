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

#include "qembound/suites.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "qembound/bounds.hpp"
#include "qembound/contraction.hpp"
#include "qembound/mitigation.hpp"

namespace qembound::suites {

using channels::KrausChannel;
using numkit::DensityMatrix;
using numkit::Matrix;
using numkit::Observable;
using numkit::Rng;
using numkit::StateKind;

namespace {

constexpr double kInequalitySlack = 1e-8;
constexpr double kContractionSlack = 1e-7;
constexpr double kEigenSlack = 1e-9;
constexpr double kThermalSlack = 1e-8;
constexpr double kMonotoneSlack = 1e-10;
constexpr double kFitTolerance = 0.1;

class Tally {
 public:
  Tally(std::string name, double slack) {
    report_.name = std::move(name);
    report_.slack = slack;
    report_.max_excess = -std::numeric_limits<double>::infinity();
  }

  // Records lhs <= rhs + slack.
  void le(double lhs, double rhs) { excess(lhs - rhs); }

  void excess(double e) {
    ++report_.instances;
    report_.max_excess = std::max(report_.max_excess, e);
    if (!(e <= report_.slack)) ++report_.violations;
  }

  void merge(const contraction::VerificationReport& v, double claim) {
    report_.instances += v.evaluated;
    report_.violations += v.violation_count;
    if (v.evaluated > 0) report_.max_excess = std::max(report_.max_excess, v.max_ratio - claim);
  }

  SuiteReport done() const { return report_; }

 private:
  SuiteReport report_;
};

DensityMatrix random_state(Eigen::Index d, int variant, Rng& rng) {
  switch (variant % 4) {
    case 0: return numkit::random_state(d, StateKind::Pure, rng);
    case 1: return numkit::random_state(d, StateKind::FullRank, rng);
    case 2: return numkit::random_state(d, StateKind::RankK, rng, std::min<Eigen::Index>(2, d));
    default: {
      // Nearly pure, full rank.
      const auto p = numkit::random_state(d, StateKind::Pure, rng);
      const auto f = numkit::random_state(d, StateKind::FullRank, rng);
      return DensityMatrix::from_numeric(0.999 * p.mat() + 0.001 * f.mat());
    }
  }
}

// With `full_rank_sigma` the second state is full rank, keeping S finite.
template <typename Fn>
void for_pairs(const SuiteOptions& o, Rng& rng, Fn fn, bool full_rank_sigma = false) {
  for (Eigen::Index d : o.dims) {
    for (int i = 0; i < o.samples; ++i) {
      const auto rho = random_state(d, i, rng);
      const int variant = full_rank_sigma ? 1 + 2 * (i % 2) : i / 4 + 1;
      const auto sigma = random_state(d, variant, rng);
      fn(d, rho, sigma, rng);
    }
  }
}

using divergences::fidelity;
using divergences::purified_distance;
using divergences::relative_entropy;
using divergences::trace_distance;

SuiteReport fuchs_van_de_graaf(const SuiteOptions& o, Rng rng) {
  Tally t("fuchs_van_de_graaf", kInequalitySlack);
  for_pairs(o, rng, [&](Eigen::Index, const DensityMatrix& r, const DensityMatrix& s, Rng&) {
    const double f = fidelity(r, s);
    const double d = trace_distance(r, s);
    t.le(1.0 - std::sqrt(f), d);
    t.le(d, std::sqrt(1.0 - f));
  });
  return t.done();
}

SuiteReport pinsker(const SuiteOptions& o, Rng rng) {
  Tally t("pinsker", kInequalitySlack);
  for_pairs(o, rng, [&](Eigen::Index, const DensityMatrix& r, const DensityMatrix& s, Rng&) {
    const double rel = relative_entropy(r, s);
    if (std::isfinite(rel)) t.le(trace_distance(r, s), std::sqrt(std::numbers::ln2 / 2.0 * rel));
  }, true);
  return t.done();
}

// Product states split d as 2 x max(d/2, 2).
template <typename Check>
SuiteReport product_suite(const char* name, const SuiteOptions& o, Rng rng, Check check) {
  Tally t(name, kInequalitySlack);
  for (Eigen::Index d : o.dims) {
    const Eigen::Index b = std::max<Eigen::Index>(d / 2, 2);
    for (int i = 0; i < o.samples; ++i) {
      const auto r1 = random_state(2, i, rng);
      const auto s1 = random_state(2, i + 1, rng);
      const auto r2 = random_state(b, i + 2, rng);
      const auto s2 = random_state(b, i + 3, rng);
      const DensityMatrix r = DensityMatrix::from_numeric(numkit::tensor(r1.mat(), r2.mat()));
      const DensityMatrix s = DensityMatrix::from_numeric(numkit::tensor(s1.mat(), s2.mat()));
      check(t, r1, s1, r2, s2, r, s);
    }
  }
  return t.done();
}

SuiteReport fidelity_multiplicativity(const SuiteOptions& o, Rng rng) {
  return product_suite("fidelity_multiplicativity", o, rng,
                       [](Tally& t, const auto& r1, const auto& s1, const auto& r2,
                          const auto& s2, const auto& r, const auto& s) {
                         t.excess(std::abs(fidelity(r, s) - fidelity(r1, s1) * fidelity(r2, s2)));
                       });
}

SuiteReport relative_entropy_additivity(const SuiteOptions& o, Rng rng) {
  return product_suite(
      "relative_entropy_additivity", o, rng,
      [](Tally& t, const auto& r1, const auto& s1, const auto& r2, const auto& s2,
         const auto& r, const auto& s) {
        const double joint = relative_entropy(r, s);
        const double sum = relative_entropy(r1, s1) + relative_entropy(r2, s2);
        if (std::isinf(joint) || std::isinf(sum)) {
          t.excess(std::isinf(joint) && std::isinf(sum) ? 0.0 : 1.0);
        } else {
          t.excess(std::abs(joint - sum));
        }
      });
}

SuiteReport data_processing(const SuiteOptions& o, Rng rng) {
  Tally t("data_processing", kInequalitySlack);
  for_pairs(o, rng, [&](Eigen::Index d, const DensityMatrix& r, const DensityMatrix& s, Rng& g) {
    const KrausChannel e = channels::make_random_channel(d, 3, g);
    const auto er = channels::apply(e, r);
    const auto es = channels::apply(e, s);
    t.le(trace_distance(er, es), trace_distance(r, s));
    t.le(fidelity(r, s), fidelity(er, es));
    const double before = relative_entropy(r, s);
    if (std::isfinite(before)) t.le(relative_entropy(er, es), before);
  });
  return t.done();
}

SuiteReport distance_fluctuation(const SuiteOptions& o, Rng rng) {
  Tally t("distance_fluctuation", kInequalitySlack);
  for_pairs(o, rng, [&](Eigen::Index d, const DensityMatrix& eta, const DensityMatrix& tau, Rng& g) {
    const Observable obs(numkit::random_hermitian(d, g));
    const double gap = std::abs((obs.mat() * (eta.mat() - tau.mat())).trace().real());
    const double rhs = purified_distance(eta, tau) *
                       (divergences::observable_std_dev(obs, eta) +
                        divergences::observable_std_dev(obs, tau) + gap);
    t.le(gap, rhs);
  });
  return t.done();
}

SuiteReport fidelity_trace_lower(const SuiteOptions& o, Rng rng) {
  Tally t("fidelity_trace_lower", kInequalitySlack);
  for_pairs(o, rng, [&](Eigen::Index, const DensityMatrix& r, const DensityMatrix& s, Rng&) {
    const double d = trace_distance(r, s);
    t.le((1.0 - d) * (1.0 - d), fidelity(r, s));
  });
  return t.done();
}

SuiteReport purified_relative_entropy(const SuiteOptions& o, Rng rng) {
  Tally t("purified_relative_entropy", kInequalitySlack);
  for_pairs(o, rng, [&](Eigen::Index, const DensityMatrix& r, const DensityMatrix& s, Rng&) {
    const double rel = relative_entropy(r, s);
    if (std::isfinite(rel)) t.le(purified_distance(r, s), std::sqrt(rel));
  }, true);
  return t.done();
}

SuiteReport renyi2_dominates(const SuiteOptions& o, Rng rng) {
  Tally t("renyi2_dominates", kInequalitySlack);
  for (Eigen::Index d : o.dims) {
    for (int i = 0; i < o.samples; ++i) {
      const auto r = random_state(d, i, rng);
      const auto s = numkit::random_state(d, StateKind::FullRank, rng);
      t.le(relative_entropy(r, s), divergences::renyi2_sandwiched(r, s));
    }
  }
  return t.done();
}

KrausChannel local_depolarizing(int qubits, double gamma) {
  KrausChannel c = channels::make_depolarizing(gamma);
  for (int m = 1; m < qubits; ++m) {
    c = channels::tensor_channels(c, channels::make_depolarizing(gamma));
  }
  return c;
}

const double kGammas[] = {0.05, 0.1, 0.2, 0.5};

SuiteReport depolarizing_contraction(const SuiteOptions& o, Rng rng) {
  Tally t("depolarizing_contraction", kContractionSlack);
  std::uint64_t k = 0;
  for (int m = 1; m <= 3; ++m) {
    const auto fixed = DensityMatrix::maximally_mixed(Eigen::Index{1} << m);
    for (double g : kGammas) {
      const double xi = contraction::depolarizing_rel_ent_contraction(g);
      t.merge(contraction::verify_contraction(local_depolarizing(m, g), fixed, xi,
                                              contraction::Divergence::RelativeEntropy,
                                              o.contraction_samples, rng.derive(k++), o.threads),
              xi);
    }
  }
  return t.done();
}

SuiteReport sandwich_contraction(const SuiteOptions& o, Rng rng) {
  Tally t("sandwich_contraction", kContractionSlack);
  std::uint64_t k = 0;
  for (int m = 1; m <= 3; ++m) {
    const Eigen::Index d = Eigen::Index{1} << m;
    const auto fixed = DensityMatrix::maximally_mixed(d);
    for (double g : kGammas) {
      Rng r = rng.derive(k++);
      const KrausChannel before = channels::make_random_unital(d, 2, r);
      const KrausChannel after = channels::make_random_unital(d, 2, r);
      const KrausChannel u = channels::make_unitary_channel(numkit::random_unitary(d, r));
      const KrausChannel layer = channels::compose(
          local_depolarizing(m, g), channels::compose(after, channels::compose(u, before)));
      const double xi = contraction::depolarizing_rel_ent_contraction(g);
      t.merge(contraction::verify_contraction(layer, fixed, xi,
                                              contraction::Divergence::RelativeEntropy,
                                              o.contraction_samples, r.derive(1), o.threads),
              xi);
    }
  }
  return t.done();
}

SuiteReport pauli_renyi2_contraction(const SuiteOptions& o, Rng rng) {
  Tally t("pauli_renyi2_contraction", kContractionSlack);
  const double qs[3][3] = {{0.1, 0.1, 0.1}, {0.1, 0.1, 0.0}, {0.05, 0.02, 0.15}};
  std::uint64_t k = 0;
  for (int n = 1; n <= 2; ++n) {
    for (const auto& q : qs) {
      KrausChannel c = channels::make_stochastic_pauli(q[0], q[1], q[2]);
      if (n == 2) c = channels::tensor_channels(c, c);
      const double xi = contraction::pauli_renyi2_contraction(q[0], q[1], q[2]);
      t.merge(contraction::verify_contraction(c, DensityMatrix::maximally_mixed(c.dim()), xi,
                                              contraction::Divergence::Renyi2,
                                              o.contraction_samples, rng.derive(k++), o.threads),
              xi);
    }
  }
  return t.done();
}

SuiteReport min_eigenvalue(const SuiteOptions& o, Rng rng) {
  Tally t("min_eigenvalue", kEigenSlack);
  std::uint64_t k = 0;
  for (int m = 1; m <= 2; ++m) {
    for (int l = 1; l <= 4; ++l) {
      for (double g : {0.05, 0.2}) {
        Rng r = rng.derive(k++);
        bounds::LayeredSpec spec;
        spec.qubits = m;
        spec.layers = l;
        spec.gamma = g;
        const Eigen::Index d = spec.dim();
        if (k % 2 == 0) {
          for (int i = 0; i < l; ++i) {
            spec.sandwiches.emplace_back(bounds::Sandwich{channels::make_random_unital(d, 2, r),
                                                          channels::make_random_unital(d, 2, r)});
          }
        }
        const auto c = mitigation::LayeredCircuit::build(spec, r.derive(1));
        const Matrix u = c.total_unitary();
        const double floor = std::pow(g / 2.0, m);
        for (int i = 0; i < o.circuit_samples; ++i) {
          const auto sigma = random_state(d, i, r);
          const auto pre = DensityMatrix::from_numeric(u.adjoint() * sigma.mat() * u);
          t.le(floor, divergences::min_eigenvalue(mitigation::noisy_state(c, pre)));
        }
      }
    }
  }
  return t.done();
}

channels::LiouvillianSpec thermal_generator(Rng& rng, double beta) {
  return channels::make_davies_generator(Observable(numkit::random_hermitian(2, rng)), beta, 1.0);
}

const double kBetas[] = {0.3, 1.0, 2.0};

SuiteReport entropy_production(const SuiteOptions& o, Rng rng) {
  Tally t("entropy_production", kThermalSlack);
  for (double beta : kBetas) {
    const auto l = thermal_generator(rng, beta);
    for (int i = 0; i < o.thermal_samples; ++i) {
      const auto tau = numkit::random_state(2, StateKind::FullRank, rng);
      t.le(0.0, bounds::entropy_production_rate(tau, l));
    }
  }
  return t.done();
}

SuiteReport free_energy_identity(const SuiteOptions& o, Rng rng) {
  Tally t("free_energy_identity", kThermalSlack);
  for (double beta : kBetas) {
    const auto l = thermal_generator(rng, beta);
    const double feq = bounds::equilibrium_free_energy(l.hamiltonian(), beta);
    for (int i = 0; i < o.thermal_samples; ++i) {
      const auto tau = random_state(2, i, rng);
      const double lhs = beta * (bounds::free_energy(tau, l.hamiltonian(), beta) - feq);
      t.excess(std::abs(lhs - divergences::relative_entropy_nats(tau, l.gibbs())));
    }
  }
  return t.done();
}

SuiteReport free_energy_monotone(const SuiteOptions& o, Rng rng) {
  Tally t("free_energy_monotone", kMonotoneSlack);
  for (double beta : kBetas) {
    const auto l = thermal_generator(rng, beta);
    const KrausChannel step = channels::semigroup_step(l, 0.25);
    const int trajectories = std::max(1, o.thermal_samples / 10);
    for (int i = 0; i < trajectories; ++i) {
      DensityMatrix rho = random_state(2, i, rng);
      double f = bounds::free_energy(rho, l.hamiltonian(), beta);
      for (int s = 0; s < 20; ++s) {
        rho = channels::apply(step, rho);
        const double next = bounds::free_energy(rho, l.hamiltonian(), beta);
        t.le(next, f);
        f = next;
      }
    }
  }
  return t.done();
}

SuiteReport thermal_rate_fit(const SuiteOptions& o, Rng rng) {
  Tally t("thermal_rate_fit", kFitTolerance);
  const auto l = channels::make_davies_generator(Observable(numkit::pauli('Z')), 0.8, 1.0);
  const double alpha = bounds::alpha_ent_estimate(l, 64, rng, 60, o.threads).value;
  numkit::Vector plus(2);
  plus << 1.0, 1.0;
  const auto rho0 = DensityMatrix::pure(plus);
  std::vector<double> ts;
  std::vector<double> logs;
  for (int k = 1; k <= 8; ++k) {
    const double time = 0.5 * k;
    const auto b = bounds::thermal_sample_bound(rho0, l, time, {0.1, 0.1});
    if (b.value && std::isfinite(*b.value) && *b.value > 0.0) {
      ts.push_back(time);
      logs.push_back(std::log(*b.value));
    }
  }
  const double slope = ts.size() >= 2 ? mitigation::fit_slope(ts, logs) : 0.0;
  t.excess(std::abs(slope / alpha - 1.0));
  return t.done();
}

using SuiteFn = SuiteReport (*)(const SuiteOptions&, Rng);

struct Entry {
  const char* name;
  SuiteFn fn;
};

const Entry kSuites[] = {
    {"fuchs_van_de_graaf", fuchs_van_de_graaf},
    {"pinsker", pinsker},
    {"fidelity_multiplicativity", fidelity_multiplicativity},
    {"relative_entropy_additivity", relative_entropy_additivity},
    {"data_processing", data_processing},
    {"distance_fluctuation", distance_fluctuation},
    {"fidelity_trace_lower", fidelity_trace_lower},
    {"purified_relative_entropy", purified_relative_entropy},
    {"renyi2_dominates", renyi2_dominates},
    {"depolarizing_contraction", depolarizing_contraction},
    {"sandwich_contraction", sandwich_contraction},
    {"pauli_renyi2_contraction", pauli_renyi2_contraction},
    {"min_eigenvalue", min_eigenvalue},
    {"entropy_production", entropy_production},
    {"free_energy_identity", free_energy_identity},
    {"free_energy_monotone", free_energy_monotone},
    {"thermal_rate_fit", thermal_rate_fit},
};

}  // namespace

std::vector<std::string> suite_names() {
  std::vector<std::string> out;
  for (const auto& e : kSuites) out.emplace_back(e.name);
  return out;
}

SuiteReport run_suite(const std::string& name, const SuiteOptions& options) {
  require(options.samples >= 1 && options.contraction_samples >= 1 &&
              options.circuit_samples >= 1 && options.thermal_samples >= 1,
          ErrorCode::InvalidArgument, "suite sample counts must be >= 1");
  for (Eigen::Index d : options.dims) {
    require(d >= 2 && d <= 64, ErrorCode::InvalidArgument, "suite dimensions must lie in [2, 64]");
  }
  const Rng master(options.seed);
  for (std::size_t k = 0; k < std::size(kSuites); ++k) {
    if (name == kSuites[k].name) return kSuites[k].fn(options, master.derive(k));
  }
  std::string valid;
  for (const auto& e : kSuites) valid += std::string(valid.empty() ? "" : ", ") + e.name;
  fail(ErrorCode::InvalidArgument, "unknown suite '" + name + "'; valid suites: " + valid);
}

std::vector<SuiteReport> run_all(const SuiteOptions& options) {
  std::vector<SuiteReport> out;
  for (const auto& e : kSuites) out.push_back(run_suite(e.name, options));
  return out;
}

}  // namespace qembound::suites
