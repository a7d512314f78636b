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

#include "qembound/channels.hpp"
#include "testing.hpp"

using namespace qembound;
using namespace qembound::channels;
using namespace qembound::numkit;
using namespace qembound::testing;

namespace {

double choi_diff(const KrausChannel& a, const KrausChannel& b) {
  return max_diff(choi(a), choi(b));
}

double ptm_diff(const KrausChannel& e, const Eigen::MatrixXd& expected) {
  return (pauli_transfer_matrix(e) - expected).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd ptm_diag(double a, double b, double c, double d) {
  return Eigen::Vector4d(a, b, c, d).asDiagonal();
}

}  // namespace

TEST_CASE("make_depolarizing") {
  Rng rng(10);
  const auto id = make_depolarizing(0.0);
  for (int i = 0; i < 20; ++i) {
    const auto rho = random_state(2, StateKind::FullRank, rng);
    CHECK(max_diff(id.apply(rho.mat()), rho.mat()) < 1e-12);
  }
  const auto full = make_depolarizing(1.0);
  for (int i = 0; i < 20; ++i) {
    const auto rho = random_state(2, StateKind::Pure, rng);
    CHECK(max_diff(full.apply(rho.mat()), identity(2) / 2.0) < 1e-12);
  }
  CHECK(ptm_diff(make_depolarizing(0.3), ptm_diag(1, 0.7, 0.7, 0.7)) < 1e-12);
  CHECK(std::abs(make_depolarizing(0.3).kraus()[0](0, 0) - Complex(std::sqrt(1 - 0.225))) <
        1e-15);

  CHECK_THROWS_CODE(make_depolarizing(-0.1), ErrorCode::InvalidArgument);
  CHECK_THROWS_CODE(make_depolarizing(1.1), ErrorCode::InvalidArgument);
}

TEST_CASE("make_stochastic_pauli") {
  CHECK(choi_diff(make_stochastic_pauli(0, 0, 0), make_identity(2)) < 1e-15);
  Rng rng(12);
  const auto dep = make_stochastic_pauli(0.25, 0.25, 0.25);
  for (int i = 0; i < 20; ++i) {
    const auto rho = random_state(2, StateKind::FullRank, rng);
    CHECK(max_diff(dep.apply(rho.mat()), identity(2) / 2.0) < 1e-12);
  }
  CHECK(ptm_diff(make_stochastic_pauli(0.1, 0, 0), ptm_diag(1, 1, 0.8, 0.8)) < 1e-12);
  CHECK_THROWS_CODE(make_stochastic_pauli(0.5, 0.4, 0.2), ErrorCode::InvalidArgument);
  CHECK_THROWS_CODE(make_stochastic_pauli(-0.1, 0, 0), ErrorCode::InvalidArgument);
}

TEST_CASE("make_global_depolarizing") {
  const DensityMatrix sigma(diag({0.7, 0.3}));
  CHECK(choi_diff(make_global_depolarizing(0.0, sigma), make_identity(2)) < 1e-12);

  const auto constant = make_global_depolarizing(1.0, sigma);
  Rng rng(2);
  for (int i = 0; i < 10; ++i) {
    const auto rho = random_state(2, StateKind::Pure, rng);
    CHECK(max_diff(constant.apply(rho.mat()), sigma.mat()) < 1e-12);
  }

  CHECK(choi_diff(make_global_depolarizing(0.5, mixed(2)), make_depolarizing(0.5)) < 1e-10);

  const auto g = make_global_depolarizing(0.3, sigma);
  CHECK_FALSE(is_unital(g));
  CHECK(fixed_point_residual(g, sigma) < 1e-10);

  // Acts as (1 - gamma) tau + gamma sigma on a random 3-level state.
  Rng rng3(3);
  const auto sig3 = random_state(3, StateKind::FullRank, rng3);
  const auto tau = random_state(3, StateKind::FullRank, rng3);
  const auto g3 = make_global_depolarizing(0.4, sig3);
  CHECK(max_diff(g3.apply(tau.mat()), 0.6 * tau.mat() + 0.4 * sig3.mat()) < 1e-12);

  CHECK_THROWS_CODE(make_global_depolarizing(0.3, zero()), ErrorCode::InvalidArgument);
}

TEST_CASE("make_unitary_channel") {
  CHECK(choi_diff(make_unitary_channel(identity(2)), make_identity(2)) < 1e-15);
  const auto x = make_unitary_channel(pauli('X'));
  CHECK(max_diff(x.apply(zero().mat()), one().mat()) < 1e-15);

  Rng rng(5);
  const Matrix u = random_unitary(4, rng);
  const auto fwd = make_unitary_channel(u);
  const auto back = make_unitary_channel(u.adjoint());
  const auto rho = random_state(4, StateKind::FullRank, rng);
  CHECK(max_diff(back.apply(fwd.apply(rho.mat())), rho.mat()) < 1e-10);

  CHECK_THROWS_CODE(make_unitary_channel(2.0 * identity(2)), ErrorCode::InvalidArgument);
}

TEST_CASE("compose") {
  Rng rng(6);
  const auto e = make_random_channel(2, 3, rng);
  CHECK(choi_diff(compose(make_identity(2), e), e) < 1e-10);

  const auto d12 = compose(make_depolarizing(0.2), make_depolarizing(0.3));
  CHECK(choi_diff(d12, make_depolarizing(1 - 0.8 * 0.7)) < 1e-12);

  const auto x = make_unitary_channel(pauli('X'));
  CHECK(choi_diff(compose(x, x), make_identity(2)) < 1e-12);

  const auto a = make_random_channel(3, 2, rng);
  const auto b = make_random_channel(3, 2, rng);
  const auto rho = random_state(3, StateKind::FullRank, rng);
  CHECK(max_diff(compose(b, a).apply(rho.mat()), b.apply(a.apply(rho.mat()))) < 1e-10);
  CHECK(compose(b, a).kraus().size() == 4);

  CHECK_THROWS_CODE(compose(make_identity(2), make_identity(3)), ErrorCode::InvalidArgument);
}

TEST_CASE("tensor_channels") {
  CHECK(choi_diff(tensor_channels(make_identity(2), make_identity(2)), make_identity(4)) <
        1e-15);

  const double gamma = 0.3;
  const auto d2 = tensor_channels(make_depolarizing(gamma), make_depolarizing(gamma));
  const auto out = apply(d2, DensityMatrix::basis(4, 0));
  CHECK(eig_hermitian(out.mat()).values(0) >= (gamma / 2) * (gamma / 2) * (1 - 1e-9));

  Rng rng(8);
  const auto a = make_random_channel(2, 2, rng);
  const auto b = make_random_channel(3, 3, rng);
  const auto ab = tensor_channels(a, b);
  CHECK(ab.dim() == 6);
  for (int i = 0; i < 10; ++i) {
    const auto r = random_state(2, StateKind::FullRank, rng);
    const auto s = random_state(3, StateKind::FullRank, rng);
    CHECK(max_diff(ab.apply(tensor(r.mat(), s.mat())), tensor(a.apply(r.mat()), b.apply(s.mat()))) <
          1e-10);
  }
}

TEST_CASE("apply") {
  Rng rng(9);
  const auto rho = random_state(2, StateKind::FullRank, rng);
  CHECK(max_diff(apply(make_identity(2), rho).mat(), rho.mat()) < 1e-12);
  CHECK(max_diff(apply(make_depolarizing(1.0), rho).mat(), identity(2) / 2.0) < 1e-12);
  CHECK(max_diff(apply(make_depolarizing(0.4), zero()).mat(), diag({0.8, 0.2})) < 1e-12);
  CHECK_THROWS_CODE(apply(make_identity(2), mixed(3)), ErrorCode::InvalidArgument);
}

TEST_CASE("adjoint") {
  Rng rng(10);
  const Matrix u = random_unitary(2, rng);
  const auto adj = adjoint(make_unitary_channel(u));
  CHECK(max_diff(choi(adj), choi(make_unitary_channel(u.adjoint()))) < 1e-12);

  const auto unital = make_random_unital(3, 4, rng);
  CHECK(adjoint(unital).trace_preservation_residual() < 1e-10);

  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto e = make_random_channel(2, 3, rng);
    const Matrix x = Matrix::Random(2, 2), y = Matrix::Random(2, 2);
    const Complex lhs = (x * e.apply(y)).trace();
    const Complex rhs = (adjoint(e).apply(x) * y).trace();
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("choi, unitality and fixed points") {
  const Matrix j = choi(make_identity(2));
  Matrix omega = Matrix::Zero(4, 4);
  for (int a : {0, 3}) {
    for (int b : {0, 3}) omega(a, b) = 1.0;
  }
  CHECK(max_diff(j, omega) < 1e-15);
  CHECK(is_unital(make_identity(2)));

  for (double g : {0.0, 0.1, 0.5, 0.9, 1.0}) CHECK(is_unital(make_depolarizing(g)));

  const auto report = is_cptp(make_depolarizing(0.2));
  CHECK(report.ok);
  CHECK(report.min_choi_eigenvalue >= -1e-12);

  Rng rng(11);
  const auto e = make_random_channel(3, 2, rng);
  CHECK(max_diff(choi(e), choi(e.superop())) < 1e-12);
}

TEST_CASE("superoperator and Kraus conversions") {
  Rng rng(12);
  for (int i = 0; i < 20; ++i) {
    const auto e = make_random_channel(2 + i % 3, 1 + i % 4, rng);
    const auto back = to_kraus(e.superop());
    CHECK(max_diff(choi(back), choi(e)) < 1e-10);
    const auto rho = random_state(e.dim(), StateKind::FullRank, rng);
    CHECK(max_diff(e.superop().apply(rho.mat()), e.apply(rho.mat())) < 1e-12);
  }
  // Transpose map is positive but not completely positive.
  Matrix t = Matrix::Zero(4, 4);
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) t(r * 2 + c, c * 2 + r) = 1.0;
  }
  CHECK_THROWS_CODE(to_kraus(Superoperator(2, t)), ErrorCode::NotCompletelyPositive);
}

TEST_CASE("constructor outputs are CPTP") {
  Rng rng(13);
  std::vector<KrausChannel> all = {
      make_identity(3),
      make_depolarizing(0.37),
      make_stochastic_pauli(0.1, 0.2, 0.05),
      make_global_depolarizing(0.6, random_state(3, StateKind::FullRank, rng)),
      make_unitary_channel(random_unitary(4, rng)),
      make_random_unital(2, 3, rng),
      make_random_channel(4, 3, rng),
  };
  for (const auto& e : all) CHECK(is_cptp(e).ok);
}

TEST_CASE("transfer matrices multiply under composition") {
  Rng rng(14);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto a = make_random_channel(2, 2, rng);
    const auto b = make_random_channel(2, 3, rng);
    const Eigen::MatrixXd lhs = pauli_transfer_matrix(compose(b, a));
    const Eigen::MatrixXd rhs = pauli_transfer_matrix(b) * pauli_transfer_matrix(a);
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("unitality is preserved by compose and tensor") {
  Rng rng(15);
  const auto a = make_random_unital(2, 3, rng);
  const auto b = make_random_unital(2, 2, rng);
  CHECK(is_unital(compose(a, b)));
  CHECK(is_unital(tensor_channels(a, b)));
}

TEST_CASE("NoiseEnsemble validation") {
  CHECK_THROWS_CODE(NoiseEnsemble({}), ErrorCode::InvalidArgument);
  CHECK_THROWS_CODE(NoiseEnsemble({make_identity(2), make_identity(3)}),
                    ErrorCode::InvalidArgument);
  CHECK(NoiseEnsemble({make_identity(2), make_depolarizing(0.1)}).size() == 2);
}

namespace {

LiouvillianSpec qubit_davies(double beta = 0.7) {
  return make_davies_generator(Observable(diag({0.0, 1.0})), beta, 1.0);
}

}  // namespace

TEST_CASE("semigroup_step") {
  const auto l = qubit_davies();
  CHECK(choi_diff(semigroup_step(l, 0.0), make_identity(2)) < 1e-9);

  for (double t : {0.1, 0.5, 1.0, 3.0}) {
    CHECK(fixed_point_residual(semigroup_step(l, t), l.gibbs()) < 1e-8);
  }

  const auto p1 = semigroup_step(l, 1.0);
  const auto p2 = semigroup_step(l, 2.0);
  Rng rng(16);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto rho = random_state(2, StateKind::FullRank, rng);
    worst = std::max(worst, max_diff(p1.apply(p1.apply(rho.mat())), p2.apply(rho.mat())));
  }
  CHECK(worst < 1e-7);

  CHECK_THROWS_CODE(semigroup_step(l, -1.0), ErrorCode::InvalidArgument);
}

TEST_CASE("semigroup of a qutrit Davies generator") {
  const Observable h(diag({-0.5, 0.2, 1.3}));
  const auto l = make_davies_generator(h, 1.1, 0.8);
  Rng rng(17);
  const auto a = semigroup_step(l, 0.4);
  const auto b = semigroup_step(l, 0.9);
  const auto ab = semigroup_step(l, 1.3);
  const auto rho = random_state(3, StateKind::Pure, rng);
  CHECK(max_diff(a.apply(b.apply(rho.mat())), ab.apply(rho.mat())) < 1e-7);
  CHECK(is_cptp(ab).ok);
}

TEST_CASE("LiouvillianSpec validation") {
  const Observable h(diag({0.0, 1.0}));
  // Pure decay to |0> has the ground state as fixed point, not the Gibbs state.
  Matrix down = Matrix::Zero(2, 2);
  down(0, 1) = 1.0;
  CHECK_THROWS_CODE(LiouvillianSpec(lindblad_superop(h.mat(), {{down, 1.0}}), h, 1.0),
                    ErrorCode::InvalidArgument);
  CHECK_THROWS_CODE(LiouvillianSpec(Matrix::Identity(4, 4), h, 1.0),
                    ErrorCode::InvalidArgument);
  CHECK_NOTHROW(LiouvillianSpec(lindblad_superop(h.mat(), {{pauli('Z'), 0.5}}), h, 1.0));
  CHECK_THROWS_CODE(make_davies_generator(Observable(identity(2)), 1.0, 1.0),
                    ErrorCode::InvalidArgument);
}

TEST_CASE("gibbs_state") {
  const Observable h(diag({0.0, 1.0}));
  const auto g = gibbs_state(h, std::log(3.0));
  CHECK(max_diff(g.mat(), diag({0.75, 0.25})) < 1e-14);
}
