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
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qembound/channels.hpp"
#include "qembound/divergences.hpp"

/// Lower bounds on the number of distorted states an error-mitigation
/// protocol must consume. Scalar formulas are exposed separately from the
/// searches over state pairs and noise ensembles that wrap them.
///
/// Sample-count formulas use base-2 logarithms where a logarithm ratio is
/// not base-free; thermodynamic quantities are in nats.
namespace qembound::bounds {

using channels::KrausChannel;
using channels::LiouvillianSpec;
using channels::NoiseEnsemble;
using divergences::ObservableSet;
using numkit::DensityMatrix;
using numkit::Matrix;
using numkit::Observable;

struct AccuracyTarget {
  double delta = 0.0;
  double epsilon = 0.0;
  /// 0 <= epsilon <= 1/2, delta >= 0.
  void validate() const;
};

struct MomentTarget {
  double sigma_max = 0.0;
  double b_max = 0.0;
  void validate() const;
};

/// Unital channels placed before (Lambda) and after (Xi) a layer unitary.
struct Sandwich {
  KrausChannel before;
  KrausChannel after;
};

struct LayeredSpec {
  int qubits = 1;
  int layers = 1;
  double gamma = 0.0;
  /// Empty or exactly `layers` unitaries of dimension 2^qubits.
  std::vector<Matrix> unitaries;
  /// Empty or exactly `layers` entries; every channel must be unital.
  std::vector<std::optional<Sandwich>> sandwiches;
  void validate() const;
  Eigen::Index dim() const { return Eigen::Index{1} << qubits; }
};

class StateSet {
 public:
  enum class Kind { Explicit, AllPure };

  static StateSet explicit_set(std::vector<DensityMatrix> members);
  /// All pure states, searched with `pair_budget` random pairs.
  static StateSet all_pure(Eigen::Index dim, int pair_budget);

  Kind kind() const noexcept { return kind_; }
  Eigen::Index dim() const noexcept { return dim_; }
  const std::vector<DensityMatrix>& members() const noexcept { return members_; }
  int pair_budget() const noexcept { return pair_budget_; }

 private:
  StateSet(Kind kind, Eigen::Index dim, std::vector<DensityMatrix> members, int budget)
      : kind_(kind), dim_(dim), members_(std::move(members)), pair_budget_(budget) {}

  Kind kind_;
  Eigen::Index dim_;
  std::vector<DensityMatrix> members_;
  int pair_budget_;
};

enum class FormulaId {
  Thm1Fid,
  Thm1Rel,
  Prop2,
  Thm3,
  Thm4,
  Thm5,
  AppE1,
  AppE2,
  AppE3,
  AppE4,
  Thm6Prob,
  Thm6Moment,
  Thermal,
};

enum class Flag { PerfectlyDistinguishable, EmptyFeasibleSet, DomainViolated, Sampled };

const char* to_string(FormulaId id);
const char* to_string(Flag flag);
/// Throws InvalidArgument listing the valid identifiers.
FormulaId formula_from_string(const std::string& name);
std::vector<std::string> formula_names();

struct Witness {
  std::size_t first = 0;
  std::size_t second = 0;
  std::uint64_t first_hash = 0;
  std::uint64_t second_hash = 0;
  std::size_t channel_index = 0;
};

using NamedValue = std::pair<std::string, double>;

struct BoundReport {
  FormulaId formula = FormulaId::Thm1Fid;
  /// Empty when the formula's domain condition fails; +inf is a valid value.
  std::optional<double> value;
  std::vector<NamedValue> inputs;
  std::optional<Witness> witness;
  std::vector<Flag> flags;
  /// Auxiliary outputs such as approximations or free-energy gaps.
  std::vector<NamedValue> extras;

  bool has_flag(Flag f) const;
};

// Scalar forms.

/// log[1/(4 eps (1-eps))] / log[1/F]; 0 with PerfectlyDistinguishable when F = 0.
BoundReport thm1_fidelity_scalar(double fidelity, double epsilon);
/// 2 (1-2 eps)^2 / (ln2 S), S in bits; 0 with PerfectlyDistinguishable when S = inf.
BoundReport thm1_relative_entropy_scalar(double s_bits, double epsilon);
/// log[1 - 1/(1 + 2 sigma/(D - 2b))^2]^{-1} / log[1/F].
BoundReport thm3_scalar(double d_o, const MomentTarget& moments, double fidelity);

/// log[1/(4 eps (1-eps))] / log[1/(1 - 2 eta delta)^2]. The small-(eps, delta)
/// approximation ln(1/(4 eps)) / (4 eta delta) is reported as an extra.
BoundReport prop2_bound(double eta, const AccuracyTarget& target);

BoundReport thm4_bound(const LayeredSpec& spec, const AccuracyTarget& target);
BoundReport thm5_bound(const LayeredSpec& spec, const MomentTarget& moments, double d_o);

/// E1, E2 from `target`; E3, E4 need `moments` and `d_o`. E2/E4 carry
/// DomainViolated and no value unless sqrt(2 ln2) sqrt(M) (1-gamma)^L <= 1/2.
std::vector<BoundReport> variant_bounds(const LayeredSpec& spec,
                                           const std::optional<AccuracyTarget>& target,
                                           const std::optional<MomentTarget>& moments,
                                           double d_o);

/// Probability form (1-2 eps)^2 / (2 ln2 M xi^L).
BoundReport thm6_prob_bound(int qubits, int layers, double xi, const AccuracyTarget& target);
/// Moment form (1/(4 M xi^L)) (1/(2 sigma/(D - 2b) + 1))^2.
BoundReport thm6_moment_bound(int qubits, int layers, double xi, const MomentTarget& moments,
                              double d_o);

// Searches over state pairs.

struct SearchOptions {
  std::uint64_t seed = 0;  // used by all_pure state sets
  int threads = 1;
};

struct Thm1Result {
  BoundReport fidelity;
  BoundReport relative_entropy;
};

Thm1Result thm1_bound(const StateSet& states, const NoiseEnsemble& ensemble,
                      const ObservableSet& oset, const AccuracyTarget& target,
                      const SearchOptions& options = {});

BoundReport thm3_bound(const StateSet& states, const NoiseEnsemble& ensemble,
                       const ObservableSet& oset, const MomentTarget& moments,
                       const SearchOptions& options = {});

// Thermodynamics (nats, energy units of H).

double free_energy(const DensityMatrix& rho, const Observable& h, double beta);
double equilibrium_free_energy(const Observable& h, double beta);
/// -Tr[L(tau) ln tau] - beta Tr[L(tau) H]; SingularState unless tau is full rank.
double entropy_production_rate(const DensityMatrix& tau, const LiouvillianSpec& l);

struct AlphaEntEstimate {
  double value = 0.0;
  std::optional<DensityMatrix> witness;
  int evaluated = 0;
};

/// Minimum of entropy_production_rate / (beta (F - F_eq)) over `samples`
/// random full-rank states, each locally refined for `refine_steps` steps.
/// Sample i uses rng seed-derived stream i, so more samples never raise it.
AlphaEntEstimate alpha_ent_estimate(const LiouvillianSpec& l, int samples,
                                    const numkit::Rng& rng, int refine_steps = 40,
                                    int threads = 1);

/// Relative-entropy route of the sampling bound for rho_t = Phi_t(rho0) against
/// the Gibbs state. Extras: free_energy_gap, relative_entropy_bits.
BoundReport thermal_sample_bound(const DensityMatrix& rho0, const LiouvillianSpec& l, double t,
                                 const AccuracyTarget& target);

}  // namespace qembound::bounds
