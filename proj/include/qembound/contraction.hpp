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

#pragma once

#include <cstddef>
#include <optional>
#include <utility>

#include "qembound/channels.hpp"
#include "qembound/divergences.hpp"

/// Contraction coefficients: the search-based trace-distance coefficient of
/// a noise ensemble, closed-form constants for named noise families, and
/// sampling checks of relative-entropy contraction toward a fixed point.
namespace qembound::contraction {

using channels::KrausChannel;
using channels::NoiseEnsemble;
using divergences::ObservableSet;
using numkit::DensityMatrix;

enum class EstimateMethod { Analytic, Search };

struct SearchBudget {
  int restarts = 64;
  int refine_steps = 200;
};

struct ContractionEstimate {
  double value = 0.0;
  /// Pair achieving `value`; empty when every sampled pair was skipped.
  std::optional<std::pair<DensityMatrix, DensityMatrix>> witness;
  std::size_t channel_index = 0;
  EstimateMethod method = EstimateMethod::Search;
  int iterations = 0;
  SearchBudget budget;
};

/// Lower bound on max_E max_{rho,sigma} D_tr(E rho, E sigma) / D_O(rho, sigma)
/// from random pure pairs plus local refinement. Restart i draws from
/// rng.derive(i), so a larger budget never lowers the result.
ContractionEstimate estimate_eta(const NoiseEnsemble& ensemble, const ObservableSet& oset,
                                 SearchBudget budget, const numkit::Rng& rng,
                                 int threads = 1);

/// D_tr(E rho, E sigma) / D_O(rho, sigma) for one pair.
double eta_ratio(const KrausChannel& e, const DensityMatrix& rho, const DensityMatrix& sigma,
                 const ObservableSet& oset);

/// (1 - gamma)^2.
double depolarizing_rel_ent_contraction(double gamma);

/// D2(y||x) / D2(x||y), with value 1 at x = y.
double q_ratio(double y, double x);

/// min_{x in [0,1]} (1 + q_{lambda_min}(x)) / 2.
double global_depolarizing_alpha1(double lambda_min);

/// q = |1 - 2 min{qx+qy, qy+qz, qx+qz}|.
double pauli_contraction_q(double qx, double qy, double qz);
/// q^{1/ln 2}.
double pauli_renyi2_contraction(double qx, double qy, double qz);

enum class Divergence { RelativeEntropy, Renyi2 };

struct VerificationReport {
  double max_ratio = 0.0;
  int violation_count = 0;
  int evaluated = 0;
  int skipped = 0;
  std::optional<DensityMatrix> worst_state;
};

/// Samples states (half pure, a quarter full-rank, a quarter blended toward
/// `fixed`), computes D(N rho || fixed) / D(rho || fixed) and counts ratios
/// above xi_claimed + 1e-7. Throws NotAFixedPoint when `fixed` is not fixed
/// within 1e-8.
VerificationReport verify_contraction(const KrausChannel& channel, const DensityMatrix& fixed,
                                      double xi_claimed, Divergence divergence, int samples,
                                      const numkit::Rng& rng, int threads = 1);

}  // namespace qembound::contraction
