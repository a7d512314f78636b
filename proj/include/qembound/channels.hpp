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

#include <vector>

#include "qembound/numkit.hpp"

/// Quantum channels in Kraus and superoperator form, plus Lindblad
/// generators and the semigroups they produce.
///
/// Conventions:
///  - Tensor factors are big-endian: the first factor is the most
///    significant qubit.
///  - Superoperators act on column-stacked density matrices,
///    vec(rho)[c*d + r] = rho(r, c), so vec(A rho B) = (B^T (x) A) vec(rho).
///  - The Choi matrix is J = sum_ij E(|i><j|) (x) |i><j|, i.e. d times the
///    normalized Choi state.
namespace qembound::channels {

using numkit::DensityMatrix;
using numkit::Matrix;
using numkit::Observable;

inline constexpr double kTraceTol = 1e-9;
inline constexpr double kChoiCutoff = 1e-12;

class Superoperator {
 public:
  Superoperator(Eigen::Index dim, Matrix mat);

  static Superoperator identity(Eigen::Index dim);
  static Superoperator from_kraus(const std::vector<Matrix>& kraus);

  Eigen::Index dim() const noexcept { return dim_; }
  const Matrix& mat() const noexcept { return mat_; }

  Matrix apply(const Matrix& rho) const;
  /// Applies `this` after `first`.
  Superoperator after(const Superoperator& first) const;

 private:
  Eigen::Index dim_;
  Matrix mat_;
};

/// Linear map in Kraus form without the trace-preservation requirement.
class KrausMap {
 public:
  explicit KrausMap(std::vector<Matrix> kraus);

  Eigen::Index dim() const noexcept { return dim_; }
  const std::vector<Matrix>& kraus() const noexcept { return kraus_; }
  Matrix apply(const Matrix& x) const;
  /// || sum K^dagger K - I ||_max
  double trace_preservation_residual() const;

 private:
  Eigen::Index dim_;
  std::vector<Matrix> kraus_;
};

/// Completely positive trace-preserving map given by Kraus operators.
class KrausChannel {
 public:
  /// Throws InvalidArgument unless sum K^dagger K = I within kTraceTol.
  explicit KrausChannel(std::vector<Matrix> kraus);

  Eigen::Index dim() const noexcept { return map_.dim(); }
  const std::vector<Matrix>& kraus() const noexcept { return map_.kraus(); }
  const KrausMap& map() const noexcept { return map_; }

  Matrix apply(const Matrix& rho) const { return map_.apply(rho); }
  Superoperator superop() const { return Superoperator::from_kraus(kraus()); }

 private:
  KrausMap map_;
};

/// A nonempty family of channels of equal dimension.
class NoiseEnsemble {
 public:
  explicit NoiseEnsemble(std::vector<KrausChannel> channels);

  Eigen::Index dim() const noexcept { return channels_.front().dim(); }
  std::size_t size() const noexcept { return channels_.size(); }
  const std::vector<KrausChannel>& channels() const noexcept { return channels_; }
  const KrausChannel& operator[](std::size_t i) const { return channels_[i]; }

 private:
  std::vector<KrausChannel> channels_;
};

KrausChannel make_identity(Eigen::Index dim);
KrausChannel make_depolarizing(double p);
KrausChannel make_stochastic_pauli(double qx, double qy, double qz);
KrausChannel make_global_depolarizing(double gamma, const DensityMatrix& fixed);
KrausChannel make_unitary_channel(const Matrix& u);
/// Convex mixture of `terms` Haar unitaries with random weights (unital).
KrausChannel make_random_unital(Eigen::Index dim, int terms, numkit::Rng& rng);
/// Kraus operators of a random CPTP map via a Haar isometry.
KrausChannel make_random_channel(Eigen::Index dim, int kraus_count,
                                 numkit::Rng& rng);

KrausChannel compose(const KrausChannel& second, const KrausChannel& first);
KrausChannel tensor_channels(const KrausChannel& a, const KrausChannel& b);
DensityMatrix apply(const KrausChannel& e, const DensityMatrix& rho);
KrausMap adjoint(const KrausChannel& e);

Matrix choi(const KrausMap& e);
inline Matrix choi(const KrausChannel& e) { return choi(e.map()); }
Matrix choi(const Superoperator& s);

struct CptpReport {
  double min_choi_eigenvalue = 0.0;
  double trace_preservation_residual = 0.0;
  bool ok = false;
};

CptpReport is_cptp(const KrausChannel& e, double tol = 1e-9);
bool is_unital(const KrausChannel& e, double tol = 1e-9);
double fixed_point_residual(const KrausChannel& e, const DensityMatrix& sigma);

/// R_ij = Tr(P_i E(P_j)) / d over the n-qubit Pauli basis (I, X, Y, Z order,
/// big-endian strings).
Eigen::MatrixXd pauli_transfer_matrix(const KrausChannel& e);

/// Kraus form from the Choi matrix; eigenvalues below kChoiCutoff of the
/// largest are dropped. Throws NotCompletelyPositive if the Choi matrix has
/// an eigenvalue below -cp_tol, InvalidArgument if the result is not
/// trace-preserving within `tp_tol`.
KrausChannel to_kraus(const Superoperator& s, double cp_tol = 1e-9,
                      double tp_tol = 1e-9);

/// Generator of a Markovian semigroup together with its declared Gibbs state.
class LiouvillianSpec {
 public:
  /// Validates trace annihilation (1e-9) and L(gibbs) = 0 (1e-8).
  LiouvillianSpec(Matrix superop, Observable hamiltonian, double beta);

  Eigen::Index dim() const noexcept { return hamiltonian_.dim(); }
  const Matrix& superop() const noexcept { return superop_; }
  const Observable& hamiltonian() const noexcept { return hamiltonian_; }
  double beta() const noexcept { return beta_; }
  const DensityMatrix& gibbs() const noexcept { return gibbs_; }

  Matrix apply(const Matrix& tau) const;

 private:
  Matrix superop_;
  Observable hamiltonian_;
  double beta_;
  DensityMatrix gibbs_;
};

DensityMatrix gibbs_state(const Observable& h, double beta);

struct JumpOperator {
  Matrix op;
  double rate = 1.0;
};

/// Column-stacked superoperator of -i[H, .] + sum_k rate_k D[L_k].
Matrix lindblad_superop(const Matrix& h, const std::vector<JumpOperator>& jumps);

/// Detailed-balance (Davies-type) generator for a Hamiltonian with
/// nondegenerate spectrum: jumps |j><k| between eigenvectors at rate
/// kappa * exp(-beta (E_j - E_k) / 2), plus the Hamiltonian part.
LiouvillianSpec make_davies_generator(const Observable& h, double beta,
                                      double kappa);

/// Phi_t = exp(t L), converted to Kraus form. Throws NotCompletelyPositive
/// when the Choi matrix has an eigenvalue below -1e-7.
KrausChannel semigroup_step(const LiouvillianSpec& l, double t);
Superoperator semigroup_superop(const LiouvillianSpec& l, double t);

}  // namespace qembound::channels
