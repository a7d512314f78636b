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

#include "qembound/contraction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "parallel.hpp"

namespace qembound::contraction {

using numkit::Complex;
using numkit::Matrix;
using numkit::Rng;
using numkit::Vector;

namespace {

constexpr double kMinDistinguishability = 1e-9;
constexpr double kMinDenominator = 1e-10;
constexpr double kFixedPointTol = 1e-8;
constexpr double kViolationSlack = 1e-7;

Vector random_ket(Eigen::Index dim, Rng& rng) {
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = rng.complex_normal();
  return v / v.norm();
}

Vector perturb(const Vector& v, double step, Rng& rng) {
  Vector w = v;
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) += step * rng.complex_normal();
  return w / w.norm();
}

struct PairScore {
  double ratio = -1.0;  // negative when the pair is skipped
  std::size_t channel = 0;
};

PairScore score_pair(const NoiseEnsemble& ensemble, const DensityMatrix& rho,
                     const DensityMatrix& sigma, const ObservableSet& oset) {
  const double d_o = divergences::observable_distinguishability(rho, sigma, oset);
  if (d_o < kMinDistinguishability) return {};
  PairScore best{0.0, 0};
  for (std::size_t n = 0; n < ensemble.size(); ++n) {
    const Matrix diff = ensemble[n].apply(rho.mat() - sigma.mat());
    const double r = 0.5 * numkit::trace_norm(diff) / d_o;
    if (r > best.ratio) best = {r, n};
  }
  return best;
}

struct RestartResult {
  PairScore score;
  Vector psi;
  Vector phi;
};

RestartResult run_restart(const NoiseEnsemble& ensemble, const ObservableSet& oset,
                          int refine_steps, Rng rng) {
  const Eigen::Index d = ensemble.dim();
  RestartResult best{{}, random_ket(d, rng), random_ket(d, rng)};
  best.score = score_pair(ensemble, DensityMatrix::pure(best.psi),
                          DensityMatrix::pure(best.phi), oset);
  double step = 0.5;
  for (int k = 0; k < refine_steps; ++k) {
    const Vector psi = perturb(best.psi, step, rng);
    const Vector phi = perturb(best.phi, step, rng);
    const PairScore s =
        score_pair(ensemble, DensityMatrix::pure(psi), DensityMatrix::pure(phi), oset);
    if (s.ratio > best.score.ratio) {
      best = {s, psi, phi};
      step = std::min(1.0, step * 1.2);
    } else {
      step = std::max(1e-4, step * 0.93);
    }
  }
  return best;
}

}  // namespace

double eta_ratio(const KrausChannel& e, const DensityMatrix& rho, const DensityMatrix& sigma,
                 const ObservableSet& oset) {
  const double d_o = divergences::observable_distinguishability(rho, sigma, oset);
  require(d_o >= kMinDistinguishability, ErrorCode::InvalidArgument,
          "states are not distinguishable by the observable set");
  return 0.5 * numkit::trace_norm(e.apply(rho.mat() - sigma.mat())) / d_o;
}

ContractionEstimate estimate_eta(const NoiseEnsemble& ensemble, const ObservableSet& oset,
                                 SearchBudget budget, const Rng& rng, int threads) {
  require(budget.restarts >= 1 && budget.refine_steps >= 0, ErrorCode::InvalidArgument,
          "search budget must have at least one restart");
  require(oset.dim() == ensemble.dim(), ErrorCode::InvalidArgument,
          "observable set dimension does not match the ensemble");
  const auto results = detail::parallel_map<RestartResult>(
      static_cast<std::size_t>(budget.restarts), threads, [&](std::size_t i) {
        return run_restart(ensemble, oset, budget.refine_steps, rng.derive(i));
      });

  ContractionEstimate out;
  out.method = EstimateMethod::Search;
  out.budget = budget;
  out.iterations = budget.restarts * (1 + budget.refine_steps);
  const RestartResult* best = nullptr;
  for (const auto& r : results) {
    if (r.score.ratio < 0.0) continue;
    if (best == nullptr || r.score.ratio > best->score.ratio) best = &r;
  }
  if (best != nullptr) {
    DensityMatrix rho = DensityMatrix::pure(best->psi);
    DensityMatrix sigma = DensityMatrix::pure(best->phi);
    out.channel_index = best->score.channel;
    out.value = eta_ratio(ensemble[out.channel_index], rho, sigma, oset);
    out.witness.emplace(std::move(rho), std::move(sigma));
  }
  return out;
}

double depolarizing_rel_ent_contraction(double gamma) {
  require(std::isfinite(gamma) && gamma >= 0.0 && gamma <= 1.0, ErrorCode::InvalidArgument,
          "gamma must lie in [0, 1]");
  return (1.0 - gamma) * (1.0 - gamma);
}

double q_ratio(double y, double x) {
  if (std::abs(x - y) < 1e-7) return 1.0;
  return divergences::binary_relative_entropy(y, x) / divergences::binary_relative_entropy(x, y);
}

double global_depolarizing_alpha1(double lambda_min) {
  require(std::isfinite(lambda_min) && lambda_min > 0.0 && lambda_min <= 0.5,
          ErrorCode::InvalidArgument, "lambda_min must lie in (0, 1/2]");
  // q diverges at x -> 0 and x -> 1, so the minimum is interior.
  constexpr int kGrid = 20000;
  const double h = 1.0 / kGrid;
  auto f = [&](double x) { return q_ratio(lambda_min, x); };
  int best_k = 1;
  double best = f(h);
  for (int k = 2; k < kGrid; ++k) {
    const double v = f(k * h);
    if (v < best) {
      best = v;
      best_k = k;
    }
  }
  double a = std::max((best_k - 1) * h, 0.5 * h);
  double b = std::min((best_k + 1) * h, 1.0 - 0.5 * h);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 100 && b - a > 1e-14; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  best = std::min({best, fc, fd});
  return std::clamp(0.5 * (1.0 + best), 0.5, 1.0);
}

double pauli_contraction_q(double qx, double qy, double qz) {
  for (double q : {qx, qy, qz}) {
    require(std::isfinite(q) && q >= 0.0 && q <= 1.0, ErrorCode::InvalidArgument,
            "Pauli probabilities must lie in [0, 1]");
  }
  require(qx + qy + qz <= 1.0 + 1e-12, ErrorCode::InvalidArgument,
          "Pauli probabilities must sum to at most 1");
  return std::abs(1.0 - 2.0 * std::min({qx + qy, qy + qz, qx + qz}));
}

double pauli_renyi2_contraction(double qx, double qy, double qz) {
  return std::pow(pauli_contraction_q(qx, qy, qz), 1.0 / std::numbers::ln2);
}

namespace {

struct SampleOutcome {
  double ratio = -1.0;  // negative when skipped
  std::optional<DensityMatrix> state;
};

DensityMatrix draw_state(Eigen::Index d, const DensityMatrix& fixed, std::size_t index,
                         Rng& rng) {
  switch (index % 4) {
    case 0:
    case 1:
      return numkit::random_state(d, numkit::StateKind::Pure, rng);
    case 2:
      return numkit::random_state(d, numkit::StateKind::FullRank, rng);
    default: {
      const double t = rng.uniform();
      const DensityMatrix pure = numkit::random_state(d, numkit::StateKind::Pure, rng);
      return DensityMatrix::from_numeric(t * fixed.mat() + (1.0 - t) * pure.mat());
    }
  }
}

}  // namespace

VerificationReport verify_contraction(const KrausChannel& channel, const DensityMatrix& fixed,
                                      double xi_claimed, Divergence divergence, int samples,
                                      const Rng& rng, int threads) {
  require(samples >= 1, ErrorCode::InvalidArgument, "need at least one sample");
  require(channel.dim() == fixed.dim(), ErrorCode::InvalidArgument,
          "channel/fixed-point dimension mismatch");
  require(channels::fixed_point_residual(channel, fixed) <= kFixedPointTol,
          ErrorCode::NotAFixedPoint, "reference state is not a fixed point of the channel");
  auto div = [divergence](const DensityMatrix& a, const DensityMatrix& b) {
    return divergence == Divergence::RelativeEntropy ? divergences::relative_entropy(a, b)
                                                     : divergences::renyi2_sandwiched(a, b);
  };
  const auto outcomes = detail::parallel_map<SampleOutcome>(
      static_cast<std::size_t>(samples), threads, [&](std::size_t i) {
        Rng r = rng.derive(i);
        DensityMatrix rho = draw_state(channel.dim(), fixed, i, r);
        SampleOutcome o;
        if (divergences::trace_distance(rho, fixed) < kFixedPointTol) return o;
        const double den = div(rho, fixed);
        if (!std::isfinite(den) || den < kMinDenominator) return o;
        o.ratio = div(channels::apply(channel, rho), fixed) / den;
        o.state = std::move(rho);
        return o;
      });

  VerificationReport report;
  for (const auto& o : outcomes) {
    if (o.ratio < 0.0) {
      ++report.skipped;
      continue;
    }
    ++report.evaluated;
    if (o.ratio > xi_claimed + kViolationSlack) ++report.violation_count;
    if (!report.worst_state || o.ratio > report.max_ratio) {
      report.max_ratio = o.ratio;
      report.worst_state = o.state;
    }
  }
  return report;
}

}  // namespace qembound::contraction
