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

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qembound/bounds.hpp"

/// Layered noisy circuits, PEC and ZNE estimators, and the Monte Carlo
/// harness that measures how many samples they need.
///
/// A layer is D^{(x)M} o Xi o U o Lambda, with D the single-qubit
/// depolarizing channel at per-site strength gamma_{l,m}. Simulation is
/// exact density-matrix evolution; randomness enters only through PEC's
/// Pauli insertions and the terminal measurement.
namespace qembound::mitigation {

using bounds::AccuracyTarget;
using bounds::LayeredSpec;
using channels::NoiseEnsemble;
using numkit::DensityMatrix;
using numkit::Matrix;
using numkit::Observable;
using numkit::Rng;

class LayeredCircuit {
 public:
  /// `strengths` is layers x qubits with every entry in [spec.gamma, 1].
  LayeredCircuit(LayeredSpec spec, std::vector<Matrix> unitaries, Eigen::MatrixXd strengths);

  /// Uses spec.unitaries when given, otherwise layer l gets a Haar unitary
  /// from rng.derive(l). All sites get strength spec.gamma.
  static LayeredCircuit build(LayeredSpec spec, const Rng& rng);
  /// Every layer unitary is the identity.
  static LayeredCircuit identity_layers(LayeredSpec spec);

  const LayeredSpec& spec() const noexcept { return spec_; }
  const std::vector<Matrix>& unitaries() const noexcept { return unitaries_; }
  const Eigen::MatrixXd& strengths() const noexcept { return strengths_; }
  Eigen::Index dim() const noexcept { return spec_.dim(); }
  int qubits() const noexcept { return spec_.qubits; }
  int layers() const noexcept { return spec_.layers; }
  int sites() const noexcept { return spec_.qubits * spec_.layers; }
  /// U_L ... U_1.
  Matrix total_unitary() const;

 private:
  LayeredSpec spec_;
  std::vector<Matrix> unitaries_;
  Eigen::MatrixXd strengths_;
};

enum class ProtocolKind { None, Pec, Zne };
enum class FitModel { Richardson, Linear, Exponential };

const char* to_string(ProtocolKind kind);
const char* to_string(FitModel fit);

struct ProtocolSpec {
  ProtocolKind kind = ProtocolKind::None;
  /// PEC: layers x qubits strengths the decomposition inverts; defaults to
  /// the circuit's true strengths.
  std::optional<Eigen::MatrixXd> assumed_gamma;
  /// ZNE: strictly increasing, first entry 1.
  std::vector<double> scale_factors{1.0, 2.0};
  FitModel fit = FitModel::Richardson;

  void validate(const LayeredCircuit& c) const;
};

struct EstimatorStats {
  double mean = 0.0;
  double ideal = 0.0;
  double bias = 0.0;
  double std_dev = 0.0;
  double success_prob = 0.0;
  int trials = 0;
  std::int64_t n_per_trial = 0;
  /// Fewer than 30 trials.
  bool low_trials = false;
  /// PEC assumed strengths differ from the circuit's.
  bool assumed_gamma_mismatch = false;
  /// ZNE trials whose exponential fit fell back to linear.
  int fit_fallbacks = 0;
};

double ideal_expectation(const LayeredCircuit& c, const DensityMatrix& rho_in,
                         const Observable& a);

/// Exact output with every strength replaced by min(scale gamma, 1).
DensityMatrix noisy_state(const LayeredCircuit& c, const DensityMatrix& rho_in,
                          double scale = 1.0);

/// Projective measurement of `a`: distinct eigenvalues (merged within 1e-9)
/// and their probabilities.
class Measurement {
 public:
  explicit Measurement(const Observable& a);

  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double> probabilities(const DensityMatrix& rho) const;
  double max_abs_value() const;

 private:
  std::vector<double> values_;
  std::vector<Matrix> projectors_;
};

std::vector<double> sample_measurement(const DensityMatrix& rho, const Observable& a,
                                       std::int64_t shots, Rng& rng);

/// Quasiprobability over conjugation by {I, X, Y, Z} inverting D_gamma.
struct PecDecomposition {
  std::array<double, 4> coefficients{};
  double one_norm = 1.0;
};

PecDecomposition pec_decomposition(double gamma);

double run_pec(const LayeredCircuit& c, const DensityMatrix& rho_in, const Observable& a,
               std::int64_t n, Rng& rng,
               const std::optional<Eigen::MatrixXd>& assumed_gamma = std::nullopt);

struct ZneEstimate {
  double value = 0.0;
  FitModel fit_used = FitModel::Richardson;
  bool fell_back = false;
};

/// Extrapolates (scale, value) data to scale 0. An exponential fit on data
/// that is not monotone with one strict sign falls back to linear, or
/// throws FitDegenerate when `allow_fallback` is false.
ZneEstimate extrapolate(const std::vector<double>& scales, const std::vector<double>& values,
                        FitModel fit, bool allow_fallback = true);

/// n shots split equally over the scale factors, the remainder going to the
/// smallest scale.
ZneEstimate run_zne(const LayeredCircuit& c, const DensityMatrix& rho_in, const Observable& a,
                    std::int64_t n, const ProtocolSpec& protocol, Rng& rng);

/// Trial i uses rng.derive(i).
EstimatorStats estimator_stats(const LayeredCircuit& c, const DensityMatrix& rho_in,
                               const Observable& a, const ProtocolSpec& protocol,
                               std::int64_t n, int trials, double delta, const Rng& rng,
                               int threads = 1);

struct CurvePoint {
  std::int64_t n = 0;
  double success_prob = 0.0;
  double wilson_lb = 0.0;
  double bias = 0.0;
  double std_dev = 0.0;
};

struct RequirementOptions {
  int trials = 400;
  std::int64_t n_max = std::int64_t{1} << 20;
  int threads = 1;
};

struct Probe {
  DensityMatrix rho_in;
  Observable observable;
};

struct SampleRequirement {
  bool achieved = false;
  /// Largest minimal certified n over the grid; 0 when not achieved.
  std::int64_t n_hat = 0;
  /// Success probability at n_max of the first unachievable grid point.
  double plateau = 0.0;
  /// Grid point that set n_hat (or failed).
  std::size_t worst_point = 0;
  std::vector<std::int64_t> per_point;
  /// Probes of the worst point, sorted by n.
  std::vector<CurvePoint> curve;
};

/// 95% Wilson score lower bound for `successes` out of `trials`.
double wilson_lower_bound(int successes, int trials);

/// Doubling then bisection on n until the Wilson lower bound of the success
/// fraction reaches 1 - epsilon. Grid point k uses rng.derive(k); a probe at
/// n uses derive(n) of that, and trial i derive(i) of the probe.
SampleRequirement empirical_sample_requirement(const LayeredCircuit& c,
                                               const std::vector<Probe>& grid,
                                               const ProtocolSpec& protocol,
                                               const AccuracyTarget& target,
                                               const RequirementOptions& options, const Rng& rng);

/// Effective channels F o U^dagger met by the protocol: the native circuit,
/// each ZNE scale, or each PEC insertion pattern. InvalidArgument when the
/// count would exceed `max_members` or the dimension exceeds 8.
NoiseEnsemble induced_ensemble(const LayeredCircuit& c, const ProtocolSpec& protocol,
                               std::size_t max_members = 4096);

struct ScanOptions {
  int qubits = 1;
  int first_layer = 1;
  int last_layer = 6;
  double gamma = 0.2;
  AccuracyTarget target{0.2, 0.1};
  ProtocolSpec protocol{ProtocolKind::Pec, std::nullopt, {1.0, 2.0}, FitModel::Richardson};
  /// Haar layer unitaries; identity layers otherwise.
  bool random_unitaries = true;
  RequirementOptions requirement;
};

struct ScanRow {
  int layers = 0;
  bounds::BoundReport thm4;
  bounds::BoundReport e1;
  bounds::BoundReport e2;
  /// Absent when the induced ensemble is too large to enumerate.
  std::optional<bounds::BoundReport> thm1_fidelity;
  std::optional<bounds::BoundReport> thm1_relative_entropy;
  SampleRequirement requirement;
  /// Every applicable bound value is <= n_hat (false when not achieved).
  bool dominated = false;
};

struct ScanResult {
  std::vector<ScanRow> rows;
  /// Least-squares slope of ln n_hat against L over achieved rows.
  std::optional<double> slope;
};

/// For each L, the probes are the inputs whose ideal outputs are |0...0> and
/// |10...0>, measured with Z on the first qubit. Circuits use
/// rng.derive(0).derive(L), sampling rng.derive(1).derive(L).
ScanResult layered_scan(const ScanOptions& options, const Rng& rng);

/// Least-squares slope of ys against xs.
double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace qembound::mitigation
