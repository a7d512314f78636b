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

#include <cmath>
#include <numbers>

#include "qembound/contraction.hpp"
#include "testing.hpp"

using namespace qembound;
using namespace qembound::channels;
using namespace qembound::contraction;
using namespace qembound::numkit;
using namespace qembound::testing;

namespace {

KrausChannel depolarizing_power(double gamma, int qubits) {
  KrausChannel out = make_depolarizing(gamma);
  for (int m = 1; m < qubits; ++m) out = tensor_channels(out, make_depolarizing(gamma));
  return out;
}

}  // namespace

TEST_CASE("estimate_eta on named channels") {
  const Rng rng(1);
  const auto all = divergences::ObservableSet::all_effects(2);

  const auto id = estimate_eta(NoiseEnsemble({make_identity(2)}), all, {8, 50}, rng);
  CHECK(id.value == doctest::Approx(1.0).epsilon(1e-9));
  REQUIRE(id.witness.has_value());

  const auto full = estimate_eta(NoiseEnsemble({make_depolarizing(1.0)}), all, {8, 50}, rng);
  CHECK(full.value == doctest::Approx(0.0).epsilon(1e-12));

  for (double p : {0.1, 0.3, 0.7}) {
    const auto e = estimate_eta(NoiseEnsemble({make_depolarizing(p)}), all, {16, 100}, rng);
    CHECK(std::abs(e.value - (1.0 - p)) < 2e-3);
    CHECK(e.value <= 1.0 - p + 1e-9);
  }

  CHECK_THROWS_CODE(estimate_eta(NoiseEnsemble({make_identity(2)}), all, {0, 10}, rng),
                    ErrorCode::InvalidArgument);
}

TEST_CASE("estimate_eta witness certifies the value") {
  const Rng rng(2);
  Rng gen(3);
  const NoiseEnsemble ens({make_random_channel(2, 2, gen), make_random_channel(2, 3, gen)});
  const auto oset = divergences::ObservableSet::explicit_set(
      {Observable(pauli('Z')), Observable(pauli('X'))});
  const auto e = estimate_eta(ens, oset, {10, 60}, rng);
  REQUIRE(e.witness.has_value());
  const double again = eta_ratio(ens[e.channel_index], e.witness->first, e.witness->second, oset);
  CHECK(std::abs(again - e.value) < 1e-8);
  CHECK(e.method == EstimateMethod::Search);
  CHECK(e.iterations == 10 * 61);
}

TEST_CASE("estimate_eta is bounded, monotone in budget and thread independent") {
  const Rng rng(4);
  Rng gen(5);
  const NoiseEnsemble ens({make_random_channel(4, 2, gen)});
  const auto all = divergences::ObservableSet::all_effects(4);
  double previous = 0.0;
  for (int restarts : {1, 2, 4, 8, 16}) {
    const auto e = estimate_eta(ens, all, {restarts, 30}, rng);
    CHECK(e.value <= 1.0 + 1e-8);
    CHECK(e.value >= previous);
    previous = e.value;
  }
  const auto serial = estimate_eta(ens, all, {6, 20}, rng, 1);
  const auto threaded = estimate_eta(ens, all, {6, 20}, rng, 3);
  CHECK(serial.value == threaded.value);
}

TEST_CASE("estimate_eta skips indistinguishable pairs") {
  const auto oset = divergences::ObservableSet::explicit_set({Observable(identity(2))});
  const auto e = estimate_eta(NoiseEnsemble({make_identity(2)}), oset, {4, 5}, Rng(6));
  CHECK(e.value == 0.0);
  CHECK_FALSE(e.witness.has_value());
}

TEST_CASE("depolarizing_rel_ent_contraction") {
  CHECK(depolarizing_rel_ent_contraction(0.0) == 1.0);
  CHECK(depolarizing_rel_ent_contraction(1.0) == 0.0);
  CHECK(depolarizing_rel_ent_contraction(0.1) == doctest::Approx(0.81).epsilon(1e-15));
  CHECK_THROWS_CODE(depolarizing_rel_ent_contraction(1.5), ErrorCode::InvalidArgument);
}

TEST_CASE("global_depolarizing_alpha1") {
  CHECK(global_depolarizing_alpha1(0.5) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(global_depolarizing_alpha1(0.4999) > 0.9999);
  CHECK(global_depolarizing_alpha1(1e-9) < 0.55);
  // Independent 40-digit grid scan with golden-section refinement.
  CHECK(std::abs(global_depolarizing_alpha1(0.25) - 0.954706390023385) < 1e-6);
  CHECK(std::abs(global_depolarizing_alpha1(0.1) - 0.860121677952354) < 1e-6);
  CHECK(std::abs(global_depolarizing_alpha1(0.01) - 0.695232326318238) < 1e-6);

  double previous = 0.5;
  for (double lam = 0.02; lam <= 0.5; lam += 0.04) {
    const double a = global_depolarizing_alpha1(lam);
    CHECK(a >= previous);
    CHECK(a <= 1.0);
    previous = a;
  }
  CHECK_THROWS_CODE(global_depolarizing_alpha1(0.0), ErrorCode::InvalidArgument);
  CHECK_THROWS_CODE(global_depolarizing_alpha1(0.6), ErrorCode::InvalidArgument);
}

TEST_CASE("pauli_renyi2_contraction") {
  CHECK(pauli_renyi2_contraction(0, 0, 0) == 1.0);
  CHECK(pauli_renyi2_contraction(0.25, 0.25, 0.25) == 0.0);
  CHECK(pauli_contraction_q(0.1, 0.1, 0.1) == doctest::Approx(0.6));
  CHECK(pauli_renyi2_contraction(0.1, 0.1, 0.1) ==
        doctest::Approx(0.478563871534615).epsilon(1e-9));
  // Smallest pair sum is qx+qz = qy+qz = 0.1.
  CHECK(pauli_contraction_q(0.1, 0.1, 0.0) == doctest::Approx(0.8));
  CHECK(pauli_renyi2_contraction(0.1, 0.1, 0.0) ==
        doctest::Approx(std::pow(0.8, 1 / std::numbers::ln2)));
  CHECK_THROWS_CODE(pauli_renyi2_contraction(0.6, 0.6, 0.0), ErrorCode::InvalidArgument);
}

TEST_CASE("verify_contraction on local depolarizing noise") {
  const auto d2 = depolarizing_power(0.2, 2);
  const auto report =
      verify_contraction(d2, mixed(4), 0.64, Divergence::RelativeEntropy, 400, Rng(7));
  CHECK(report.violation_count == 0);
  CHECK(report.evaluated > 350);
  CHECK(report.max_ratio <= 0.64 + 1e-7);
  CHECK(report.max_ratio > 0.3);

  const auto id =
      verify_contraction(make_identity(2), mixed(2), 1.0, Divergence::RelativeEntropy, 50, Rng(8));
  CHECK(std::abs(id.max_ratio - 1.0) < 1e-8);
  CHECK(id.violation_count == 0);
}

TEST_CASE("verify_contraction detects violations and bad fixed points") {
  const auto d1 = make_depolarizing(0.2);
  const auto tight =
      verify_contraction(d1, mixed(2), 0.5, Divergence::RelativeEntropy, 100, Rng(9));
  CHECK(tight.violation_count > 0);
  CHECK_THROWS_CODE(
      verify_contraction(d1, DensityMatrix(diag({0.7, 0.3})), 0.64,
                         Divergence::RelativeEntropy, 10, Rng(9)),
      ErrorCode::NotAFixedPoint);
}

TEST_CASE("Renyi-2 contraction of stochastic Pauli noise") {
  for (const auto& q : std::vector<std::array<double, 3>>{
           {0.1, 0.1, 0.1}, {0.05, 0.0, 0.2}, {0.1, 0.1, 0.0}}) {
    const auto t = make_stochastic_pauli(q[0], q[1], q[2]);
    const double xi = pauli_renyi2_contraction(q[0], q[1], q[2]);
    for (int n : {1, 2}) {
      const auto tn = n == 1 ? t : tensor_channels(t, t);
      const auto r = verify_contraction(tn, mixed(Eigen::Index{1} << n), xi, Divergence::Renyi2,
                                        300, Rng(10));
      CHECK(r.violation_count == 0);
    }
  }
}

TEST_CASE("unital sandwiches do not increase relative entropy to the maximally mixed state") {
  Rng gen(11);
  for (int qubits : {1, 2}) {
    const Eigen::Index d = Eigen::Index{1} << qubits;
    const auto lambda = make_random_unital(d, 3, gen);
    const auto xi = make_random_unital(d, 2, gen);
    const auto u = make_unitary_channel(random_unitary(d, gen));
    const auto sandwich = compose(xi, compose(u, lambda));
    const auto r =
        verify_contraction(sandwich, mixed(d), 1.0, Divergence::RelativeEntropy, 200, Rng(12));
    CHECK(r.violation_count == 0);
    CHECK(r.max_ratio <= 1.0 + 1e-8);

    const auto layer = compose(depolarizing_power(0.1, qubits), sandwich);
    const auto rl =
        verify_contraction(layer, mixed(d), 0.81, Divergence::RelativeEntropy, 200, Rng(13));
    CHECK(rl.violation_count == 0);
  }
}

TEST_CASE("global depolarizing contraction with a full-rank fixed point") {
  const DensityMatrix sigma(diag({0.75, 0.25}));
  const double gamma = 0.3;
  const double xi = std::pow(1.0 - gamma, 2.0 * global_depolarizing_alpha1(0.25));
  const auto r = verify_contraction(make_global_depolarizing(gamma, sigma), sigma, xi,
                                    Divergence::RelativeEntropy, 300, Rng(14));
  CHECK(r.violation_count == 0);
}
