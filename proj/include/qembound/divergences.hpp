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

#include <limits>
#include <vector>

#include "qembound/numkit.hpp"

/// Distances, divergences and observable statistics. Information
/// quantities are in bits unless the name says otherwise.
namespace qembound::divergences {

using numkit::DensityMatrix;
using numkit::Observable;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
/// Weight of rho outside supp(sigma) above which S(rho||sigma) = +inf.
inline constexpr double kSupportLeak = 1e-9;

class ObservableSet {
 public:
  enum class Kind { Explicit, AllEffects };

  static ObservableSet explicit_set(std::vector<Observable> members);
  /// {A : 0 <= A <= I} on a `dim`-dimensional space.
  static ObservableSet all_effects(Eigen::Index dim);

  Kind kind() const noexcept { return kind_; }
  Eigen::Index dim() const noexcept { return dim_; }
  const std::vector<Observable>& members() const noexcept { return members_; }

 private:
  ObservableSet(Kind kind, Eigen::Index dim, std::vector<Observable> members)
      : kind_(kind), dim_(dim), members_(std::move(members)) {}

  Kind kind_;
  Eigen::Index dim_;
  std::vector<Observable> members_;
};

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);
double purified_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

/// S(rho||sigma) in bits; kInfinity when supp(rho) is not inside supp(sigma).
double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma);
/// Same quantity in nats.
double relative_entropy_nats(const DensityMatrix& rho, const DensityMatrix& sigma);

/// log2 Tr(sigma^{-1/2} rho sigma^{-1/2} rho); SingularReference when sigma
/// has an eigenvalue at or below 1e-12.
double renyi2_sandwiched(const DensityMatrix& rho, const DensityMatrix& sigma);

/// x log2(x/y) + (1-x) log2((1-x)/(1-y)) for x, y in (0, 1).
double binary_relative_entropy(double x, double y);

double von_neumann_entropy(const DensityMatrix& rho);
double von_neumann_entropy_nats(const DensityMatrix& rho);

double observable_distinguishability(const DensityMatrix& rho,
                                     const DensityMatrix& sigma,
                                     const ObservableSet& oset);

double expectation(const Observable& a, const DensityMatrix& rho);
double observable_std_dev(const Observable& a, const DensityMatrix& rho);
double min_eigenvalue(const DensityMatrix& rho);

}  // namespace qembound::divergences
