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

#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

#include <Eigen/Dense>

#include "qembound/error.hpp"

/// Dense complex-matrix primitives, validated state/observable types and
/// seeded random-instance generators.
namespace qembound::numkit {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
/// Eigenvalues at or below this fraction of the largest one are off-support.
inline constexpr double kSupportCutoff = 1e-12;

/// Seeded generator. `derive` depends only on the seed, never on the
/// engine state, so worker `i` always sees the same stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }
  Rng derive(std::uint64_t index) const;

  double normal();
  double uniform();
  std::uint64_t uniform_index(std::uint64_t n);
  Complex complex_normal();

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Unit-trace Hermitian PSD matrix.
class DensityMatrix {
 public:
  /// Validates within kHermitianTol / kPsdTol / kTraceTol.
  explicit DensityMatrix(Matrix m);

  /// Hermitizes and renormalizes round-off, then validates with `tol`.
  static DensityMatrix from_numeric(const Matrix& m, double tol = 1e-8);
  static DensityMatrix pure(const Vector& psi);
  static DensityMatrix basis(Eigen::Index dim, Eigen::Index index);
  static DensityMatrix maximally_mixed(Eigen::Index dim);

  Eigen::Index dim() const noexcept { return mat_.rows(); }
  const Matrix& mat() const noexcept { return mat_; }

 private:
  struct Unchecked {};
  DensityMatrix(Matrix m, Unchecked) : mat_(std::move(m)) {}
  Matrix mat_;
};

/// Hermitian matrix.
class Observable {
 public:
  explicit Observable(Matrix m);

  Eigen::Index dim() const noexcept { return mat_.rows(); }
  const Matrix& mat() const noexcept { return mat_; }

 private:
  Matrix mat_;
};

struct EigenDecomposition {
  RealVector values;  // ascending
  Matrix vectors;     // columns are eigenvectors
};

enum class MatrixFunction { Sqrt, Log2, Ln, InvSqrt };

double hermitian_residual(const Matrix& m);
bool is_hermitian(const Matrix& m, double tol = kHermitianTol);

/// Symmetrizes to (M+M^dagger)/2 before decomposing.
EigenDecomposition eig_hermitian(const Matrix& m);

/// Applies `fn` to the spectrum of a PSD matrix. Log variants act on the
/// support only; InvSqrt requires a strictly positive spectrum.
Matrix matrix_fn_psd(const Matrix& p, MatrixFunction fn);

double trace_norm(const Matrix& x);
Matrix tensor(const Matrix& a, const Matrix& b);
double max_abs_entry(const Matrix& m);
/// 64-bit FNV-1a hash of the dimensions and entry bytes.
std::uint64_t fingerprint(const Matrix& m);

Matrix pauli(char which);
/// Tensor product of single-qubit Paulis, e.g. "XZ" (big-endian).
Matrix pauli_string(std::string_view labels);
Matrix identity(Eigen::Index dim);

enum class StateKind { Pure, FullRank, RankK };

DensityMatrix random_state(Eigen::Index dim, StateKind kind, Rng& rng,
                           Eigen::Index rank = 0);
Matrix random_unitary(Eigen::Index dim, Rng& rng);
Matrix random_hermitian(Eigen::Index dim, Rng& rng);

}  // namespace qembound::numkit
