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

#include "qembound/channels.hpp"
#include "qembound/divergences.hpp"
#include "testing.hpp"

using namespace qembound;
using namespace qembound::divergences;
using namespace qembound::numkit;
using namespace qembound::testing;

namespace {

// Random pair with mixed ranks, d cycling through {2, 4, 8}.
std::pair<DensityMatrix, DensityMatrix> random_pair(Rng& rng, int trial) {
  const Eigen::Index d = Eigen::Index{2} << (trial % 3);
  const auto kind_a = static_cast<StateKind>(trial % 3);
  const auto kind_b = static_cast<StateKind>((trial / 3) % 3);
  const Eigen::Index rank = 1 + trial % static_cast<int>(d);
  return {random_state(d, kind_a, rng, rank), random_state(d, kind_b, rng, rank)};
}

}  // namespace

TEST_CASE("trace_distance") {
  CHECK(trace_distance(zero(), one()) == doctest::Approx(1.0));
  CHECK(trace_distance(plus(), plus()) == doctest::Approx(0.0));
  CHECK(trace_distance(zero(), mixed(2)) == doctest::Approx(0.5));
  CHECK_THROWS_CODE(trace_distance(zero(), mixed(3)), ErrorCode::InvalidArgument);
}

TEST_CASE("fidelity and purified distance") {
  CHECK(fidelity(plus(), plus()) == doctest::Approx(1.0));
  CHECK(fidelity(zero(), one()) == doctest::Approx(0.0));
  CHECK(fidelity(zero(), mixed(2)) == doctest::Approx(0.5));
  CHECK(purified_distance(plus(), plus()) == doctest::Approx(0.0));
  CHECK(purified_distance(zero(), one()) == doctest::Approx(1.0));
  CHECK(purified_distance(zero(), mixed(2)) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK_THROWS_CODE(fidelity(zero(), mixed(3)), ErrorCode::InvalidArgument);

  Rng rng(1);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto [r, s] = random_pair(rng, i);
    worst = std::max(worst, std::abs(fidelity(r, s) - fidelity(s, r)));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("relative_entropy") {
  CHECK(relative_entropy(plus(), plus()) == doctest::Approx(0.0));
  CHECK(relative_entropy(mixed(4), mixed(4)) == doctest::Approx(0.0));
  CHECK(relative_entropy(zero(), mixed(2)) == doctest::Approx(1.0));
  CHECK(relative_entropy_nats(zero(), mixed(2)) == doctest::Approx(std::numbers::ln2));
  CHECK(std::isinf(relative_entropy(mixed(2), zero())));
  CHECK(relative_entropy(zero(), DensityMatrix(diag({0.5, 0.5}))) == doctest::Approx(1.0));
  CHECK_THROWS_CODE(relative_entropy(zero(), mixed(3)), ErrorCode::InvalidArgument);
}

TEST_CASE("renyi2_sandwiched") {
  CHECK(renyi2_sandwiched(mixed(2), mixed(2)) == doctest::Approx(0.0));
  CHECK(renyi2_sandwiched(zero(), mixed(2)) == doctest::Approx(1.0));
  CHECK_THROWS_CODE(renyi2_sandwiched(mixed(2), zero()), ErrorCode::SingularReference);

  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Index d = 2 + i % 3;
    const auto r = random_state(d, StateKind::FullRank, rng);
    const auto s = random_state(d, StateKind::FullRank, rng);
    CHECK(renyi2_sandwiched(r, s) >= relative_entropy(r, s) - 1e-8);
  }
}

TEST_CASE("binary_relative_entropy") {
  CHECK(binary_relative_entropy(0.5, 0.5) == doctest::Approx(0.0));
  CHECK(binary_relative_entropy(0.5, 0.25) == doctest::Approx(0.2075187496394219).epsilon(1e-12));
  for (int i = 1; i < 20; ++i) {
    for (int j = 1; j < 20; ++j) {
      if (i != j) CHECK(binary_relative_entropy(i / 20.0, j / 20.0) > 0.0);
    }
  }
  CHECK_THROWS_CODE(binary_relative_entropy(0.0, 0.5), ErrorCode::InvalidArgument);
  CHECK_THROWS_CODE(binary_relative_entropy(0.5, 1.0), ErrorCode::InvalidArgument);
}

TEST_CASE("von_neumann_entropy") {
  CHECK(von_neumann_entropy(mixed(4)) == doctest::Approx(2.0));
  CHECK(von_neumann_entropy(zero()) == doctest::Approx(0.0));
  CHECK(von_neumann_entropy_nats(mixed(2)) == doctest::Approx(std::numbers::ln2));
}

TEST_CASE("observable_distinguishability") {
  const auto z = ObservableSet::explicit_set({Observable(pauli('Z'))});
  CHECK(observable_distinguishability(zero(), one(), z) == doctest::Approx(2.0));
  CHECK(observable_distinguishability(plus(), plus(), z) == doctest::Approx(0.0));
  const auto all = ObservableSet::all_effects(2);
  CHECK(observable_distinguishability(zero(), mixed(2), all) == doctest::Approx(0.5));
  CHECK(observable_distinguishability(plus(), plus(), all) == doctest::Approx(0.0));

  const auto xz = ObservableSet::explicit_set({Observable(pauli('Z')), Observable(pauli('X'))});
  CHECK(observable_distinguishability(plus(), zero(), xz) == doctest::Approx(1.0));

  CHECK_THROWS_CODE(observable_distinguishability(mixed(4), mixed(4), z),
                    ErrorCode::InvalidArgument);
  CHECK_THROWS_CODE(ObservableSet::explicit_set({}), ErrorCode::InvalidArgument);
  CHECK_THROWS_CODE(
      ObservableSet::explicit_set({Observable(pauli('Z')), Observable(identity(4))}),
      ErrorCode::InvalidArgument);
}

TEST_CASE("observable_std_dev and min_eigenvalue") {
  const Observable z(pauli('Z'));
  CHECK(observable_std_dev(z, zero()) == doctest::Approx(0.0));
  CHECK(observable_std_dev(z, mixed(2)) == doctest::Approx(1.0));
  CHECK(observable_std_dev(z, plus()) == doctest::Approx(1.0));
  CHECK(expectation(z, one()) == doctest::Approx(-1.0));
  CHECK_THROWS_CODE(observable_std_dev(z, mixed(3)), ErrorCode::InvalidArgument);

  CHECK(min_eigenvalue(mixed(2)) == doctest::Approx(0.5));
  CHECK(std::abs(min_eigenvalue(plus())) < 1e-10);
  const auto out = channels::apply(channels::make_depolarizing(0.4), zero());
  CHECK(min_eigenvalue(out) == doctest::Approx(0.2));
}

TEST_CASE("Fuchs-van de Graaf, Pinsker and related inequalities") {
  Rng rng(3);
  const double pinsker = std::sqrt(std::numbers::ln2 / 2.0);
  int finite = 0;
  for (int i = 0; i < 600; ++i) {
    const auto [r, s] = random_pair(rng, i);
    const double dtr = trace_distance(r, s);
    const double f = fidelity(r, s);
    const double rel = relative_entropy(r, s);
    CHECK(1.0 - std::sqrt(f) <= dtr + 1e-9);
    CHECK(dtr <= std::sqrt(1.0 - f) + 1e-9);
    CHECK(f >= (1.0 - dtr) * (1.0 - dtr) - 1e-9);
    if (std::isfinite(rel)) {
      ++finite;
      CHECK(dtr <= pinsker * std::sqrt(rel) + 1e-9);
      CHECK(purified_distance(r, s) <= std::sqrt(rel) + 1e-8);
    }
  }
  CHECK(finite > 100);
}

TEST_CASE("multiplicativity and additivity on product states") {
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    const auto r1 = random_state(2, StateKind::FullRank, rng);
    const auto r2 = random_state(3, StateKind::FullRank, rng);
    const auto s1 = random_state(2, StateKind::FullRank, rng);
    const auto s2 = random_state(3, StateKind::FullRank, rng);
    const DensityMatrix r(tensor(r1.mat(), r2.mat()));
    const DensityMatrix s(tensor(s1.mat(), s2.mat()));
    CHECK(std::abs(fidelity(r, s) - fidelity(r1, s1) * fidelity(r2, s2)) < 1e-8);
    CHECK(std::abs(relative_entropy(r, s) - relative_entropy(r1, s1) -
                   relative_entropy(r2, s2)) < 1e-8);
  }
}

TEST_CASE("data processing") {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Index d = 2 + i % 3;
    const auto e = channels::make_random_channel(d, 1 + i % 3, rng);
    const auto r = random_state(d, StateKind::FullRank, rng);
    const auto s = random_state(d, i % 2 ? StateKind::FullRank : StateKind::Pure, rng);
    const auto er = channels::apply(e, r);
    const auto es = channels::apply(e, s);
    CHECK(trace_distance(er, es) <= trace_distance(r, s) + 1e-9);
    CHECK(fidelity(er, es) >= fidelity(r, s) - 1e-9);
    const double before = relative_entropy(r, s);
    if (std::isfinite(before)) CHECK(relative_entropy(er, es) <= before + 1e-8);
  }
}

TEST_CASE("distance-fluctuation inequality") {
  Rng rng(6);
  for (int i = 0; i < 300; ++i) {
    const auto [eta, tau] = random_pair(rng, i);
    const Observable o(random_hermitian(eta.dim(), rng));
    const double gap = std::abs(expectation(o, eta) - expectation(o, tau));
    const double rhs = purified_distance(eta, tau) *
                       (observable_std_dev(o, eta) + observable_std_dev(o, tau) + gap);
    CHECK(gap <= rhs + 1e-9);
  }
}
