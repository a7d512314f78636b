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

#include "qembound/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

namespace qembound {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidMatrix: return "InvalidMatrix";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::NotCompletelyPositive: return "NotCompletelyPositive";
    case ErrorCode::SingularReference: return "SingularReference";
    case ErrorCode::SingularState: return "SingularState";
    case ErrorCode::NotAFixedPoint: return "NotAFixedPoint";
    case ErrorCode::Noninvertible: return "Noninvertible";
    case ErrorCode::FitDegenerate: return "FitDegenerate";
    case ErrorCode::Unachievable: return "Unachievable";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace qembound

namespace qembound::numkit {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a nonempty square matrix, got " << m.rows()
       << "x" << m.cols();
    fail(ErrorCode::InvalidMatrix, os.str());
  }
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

Rng Rng::derive(std::uint64_t index) const {
  return Rng(splitmix64(seed_ ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

double Rng::normal() { return normal_(engine_); }
double Rng::uniform() { return uniform_(engine_); }

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
  return dist(engine_);
}

Complex Rng::complex_normal() {
  const double re = normal();
  const double im = normal();
  return {re, im};
}

DensityMatrix::DensityMatrix(Matrix m) : mat_(std::move(m)) {
  require_square(mat_, "DensityMatrix");
  require(mat_.rows() >= 1, ErrorCode::InvalidMatrix, "DensityMatrix: empty");
  require(is_hermitian(mat_, kHermitianTol), ErrorCode::InvalidMatrix,
          "DensityMatrix: not Hermitian");
  require(std::abs(mat_.trace() - Complex(1.0)) <= kTraceTol,
          ErrorCode::InvalidMatrix, "DensityMatrix: trace is not 1");
  const auto eig = eig_hermitian(mat_);
  require(eig.values(0) >= -kPsdTol, ErrorCode::NotPSD,
          "DensityMatrix: negative eigenvalue");
}

DensityMatrix DensityMatrix::from_numeric(const Matrix& m, double tol) {
  require_square(m, "DensityMatrix");
  require(hermitian_residual(m) <= tol, ErrorCode::InvalidMatrix,
          "DensityMatrix: not Hermitian");
  Matrix h = 0.5 * (m + m.adjoint());
  const Complex tr = h.trace();
  require(std::abs(tr - Complex(1.0)) <= tol, ErrorCode::InvalidMatrix,
          "DensityMatrix: trace is not 1");
  h /= tr.real();
  const auto eig = eig_hermitian(h);
  require(eig.values(0) >= -tol, ErrorCode::NotPSD,
          "DensityMatrix: negative eigenvalue");
  return DensityMatrix(std::move(h), Unchecked{});
}

DensityMatrix DensityMatrix::pure(const Vector& psi) {
  const double norm = psi.norm();
  require(norm > 0.0, ErrorCode::InvalidArgument, "pure state: zero vector");
  const Vector v = psi / norm;
  return DensityMatrix(v * v.adjoint(), Unchecked{});
}

DensityMatrix DensityMatrix::basis(Eigen::Index dim, Eigen::Index index) {
  require(dim >= 1 && index >= 0 && index < dim, ErrorCode::InvalidArgument,
          "basis state index out of range");
  Matrix m = Matrix::Zero(dim, dim);
  m(index, index) = 1.0;
  return DensityMatrix(std::move(m), Unchecked{});
}

DensityMatrix DensityMatrix::maximally_mixed(Eigen::Index dim) {
  require(dim >= 1, ErrorCode::InvalidArgument, "dimension must be >= 1");
  return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim),
                       Unchecked{});
}

Observable::Observable(Matrix m) : mat_(std::move(m)) {
  require_square(mat_, "Observable");
  require(is_hermitian(mat_, kHermitianTol), ErrorCode::InvalidMatrix,
          "Observable: not Hermitian");
}

double hermitian_residual(const Matrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return max_abs_entry(m - m.adjoint());
}

bool is_hermitian(const Matrix& m, double tol) {
  return m.rows() == m.cols() && hermitian_residual(m) <= tol;
}

EigenDecomposition eig_hermitian(const Matrix& m) {
  require_square(m, "eig_hermitian");
  require(is_hermitian(m, 1e-8 * std::max(1.0, max_abs_entry(m))),
          ErrorCode::InvalidMatrix, "eig_hermitian: matrix is not Hermitian");
  const Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  require(solver.info() == Eigen::Success, ErrorCode::InvalidMatrix,
          "eig_hermitian: decomposition failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Matrix matrix_fn_psd(const Matrix& p, MatrixFunction fn) {
  const auto eig = eig_hermitian(p);
  const double lmax = std::max(eig.values.maxCoeff(), 0.0);
  const double tol = kPsdTol * std::max(1.0, lmax);
  require(eig.values(0) >= -tol, ErrorCode::NotPSD,
          "matrix_fn_psd: negative eigenvalue beyond tolerance");
  const double cutoff = kSupportCutoff * lmax;
  RealVector f(eig.values.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double lam = eig.values(i);
    switch (fn) {
      case MatrixFunction::Sqrt:
        f(i) = lam > cutoff ? std::sqrt(lam) : 0.0;
        break;
      case MatrixFunction::Log2:
        f(i) = lam > cutoff ? std::log2(lam) : 0.0;
        break;
      case MatrixFunction::Ln:
        f(i) = lam > cutoff ? std::log(lam) : 0.0;
        break;
      case MatrixFunction::InvSqrt:
        require(lam > cutoff && lam > 0.0, ErrorCode::SingularReference,
                "matrix_fn_psd: inverse square root of a singular matrix");
        f(i) = 1.0 / std::sqrt(lam);
        break;
    }
  }
  return eig.vectors * f.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
}

double trace_norm(const Matrix& x) {
  require_square(x, "trace_norm");
  if (is_hermitian(x, 1e-13 * std::max(1.0, max_abs_entry(x)))) {
    return eig_hermitian(x).values.cwiseAbs().sum();
  }
  Eigen::JacobiSVD<Matrix> svd(x);
  return svd.singularValues().sum();
}

Matrix tensor(const Matrix& a, const Matrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

std::uint64_t fingerprint(const Matrix& m) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  const std::int64_t shape[2] = {static_cast<std::int64_t>(m.rows()),
                                 static_cast<std::int64_t>(m.cols())};
  mix(shape, sizeof(shape));
  mix(m.data(), sizeof(Complex) * static_cast<std::size_t>(m.size()));
  return h;
}

double max_abs_entry(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

Matrix pauli(char which) {
  Matrix m(2, 2);
  switch (which) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default:
      fail(ErrorCode::InvalidArgument,
           std::string("unknown Pauli label '") + which + "'");
  }
  return m;
}

Matrix pauli_string(std::string_view labels) {
  require(!labels.empty(), ErrorCode::InvalidArgument, "empty Pauli string");
  Matrix out = pauli(labels.front());
  for (std::size_t i = 1; i < labels.size(); ++i) {
    out = tensor(out, pauli(labels[i]));
  }
  return out;
}

Matrix identity(Eigen::Index dim) { return Matrix::Identity(dim, dim); }

DensityMatrix random_state(Eigen::Index dim, StateKind kind, Rng& rng,
                           Eigen::Index rank) {
  require(dim >= 2, ErrorCode::InvalidArgument, "random_state: d must be >= 2");
  Eigen::Index k = dim;
  switch (kind) {
    case StateKind::Pure: k = 1; break;
    case StateKind::FullRank: k = dim; break;
    case StateKind::RankK:
      require(rank >= 1 && rank <= dim, ErrorCode::InvalidArgument,
              "random_state: rank must satisfy 1 <= k <= d");
      k = rank;
      break;
  }
  Matrix g(dim, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    for (Eigen::Index r = 0; r < dim; ++r) g(r, c) = rng.complex_normal();
  }
  if (k == 1) return DensityMatrix::pure(g.col(0));
  Matrix w = g * g.adjoint();
  w /= w.trace().real();
  return DensityMatrix::from_numeric(w);
}

Matrix random_unitary(Eigen::Index dim, Rng& rng) {
  require(dim >= 1, ErrorCode::InvalidArgument, "random_unitary: d must be >= 1");
  Matrix g(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    for (Eigen::Index r = 0; r < dim; ++r) g(r, c) = rng.complex_normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Phase fix makes the distribution Haar.
  for (Eigen::Index i = 0; i < dim; ++i) {
    const Complex d = r(i, i);
    const double mag = std::abs(d);
    q.col(i) *= mag > 0.0 ? d / mag : Complex(1.0);
  }
  return q;
}

Matrix random_hermitian(Eigen::Index dim, Rng& rng) {
  Matrix g(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    for (Eigen::Index r = 0; r < dim; ++r) g(r, c) = rng.complex_normal();
  }
  return 0.5 * (g + g.adjoint());
}

}  // namespace qembound::numkit
