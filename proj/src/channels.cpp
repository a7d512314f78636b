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

#include "qembound/channels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace qembound::channels {

using numkit::Complex;
using numkit::max_abs_entry;

namespace {

Matrix vec(const Matrix& m) {
  return Eigen::Map<const Matrix>(m.data(), m.size(), 1);
}

Matrix unvec(const Matrix& v, Eigen::Index dim) {
  return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

void require_prob(double p, const char* what) {
  require(std::isfinite(p) && p >= 0.0 && p <= 1.0, ErrorCode::InvalidArgument,
          std::string(what) + " must lie in [0, 1]");
}

}  // namespace

Superoperator::Superoperator(Eigen::Index dim, Matrix mat)
    : dim_(dim), mat_(std::move(mat)) {
  require(dim >= 1 && mat_.rows() == dim * dim && mat_.cols() == dim * dim,
          ErrorCode::InvalidMatrix, "superoperator must be d^2 x d^2");
}

Superoperator Superoperator::identity(Eigen::Index dim) {
  return {dim, Matrix::Identity(dim * dim, dim * dim)};
}

Superoperator Superoperator::from_kraus(const std::vector<Matrix>& kraus) {
  require(!kraus.empty(), ErrorCode::InvalidArgument, "empty Kraus set");
  const Eigen::Index d = kraus.front().rows();
  Matrix s = Matrix::Zero(d * d, d * d);
  for (const auto& k : kraus) s += Eigen::kroneckerProduct(k.conjugate(), k);
  return {d, std::move(s)};
}

Matrix Superoperator::apply(const Matrix& rho) const {
  require(rho.rows() == dim_ && rho.cols() == dim_, ErrorCode::InvalidArgument,
          "superoperator/state dimension mismatch");
  return unvec(mat_ * vec(rho), dim_);
}

Superoperator Superoperator::after(const Superoperator& first) const {
  require(first.dim_ == dim_, ErrorCode::InvalidArgument,
          "compose: dimension mismatch");
  return {dim_, mat_ * first.mat_};
}

KrausMap::KrausMap(std::vector<Matrix> kraus) : dim_(0), kraus_(std::move(kraus)) {
  require(!kraus_.empty(), ErrorCode::InvalidArgument, "empty Kraus set");
  dim_ = kraus_.front().rows();
  for (const auto& k : kraus_) {
    require(k.rows() == dim_ && k.cols() == dim_ && dim_ >= 1,
            ErrorCode::InvalidArgument, "Kraus operators must be equal-size square");
  }
}

Matrix KrausMap::apply(const Matrix& x) const {
  require(x.rows() == dim_ && x.cols() == dim_, ErrorCode::InvalidArgument,
          "channel/state dimension mismatch");
  Matrix out = Matrix::Zero(dim_, dim_);
  for (const auto& k : kraus_) out.noalias() += k * x * k.adjoint();
  return out;
}

double KrausMap::trace_preservation_residual() const {
  Matrix acc = Matrix::Zero(dim_, dim_);
  for (const auto& k : kraus_) acc.noalias() += k.adjoint() * k;
  return max_abs_entry(acc - Matrix::Identity(dim_, dim_));
}

KrausChannel::KrausChannel(std::vector<Matrix> kraus) : map_(std::move(kraus)) {
  const double r = map_.trace_preservation_residual();
  if (r > kTraceTol) {
    std::ostringstream os;
    os << "Kraus set is not trace preserving (residual " << r << ")";
    fail(ErrorCode::InvalidArgument, os.str());
  }
}

NoiseEnsemble::NoiseEnsemble(std::vector<KrausChannel> channels)
    : channels_(std::move(channels)) {
  require(!channels_.empty(), ErrorCode::InvalidArgument, "empty noise ensemble");
  for (const auto& c : channels_) {
    require(c.dim() == channels_.front().dim(), ErrorCode::InvalidArgument,
            "noise ensemble members must share a dimension");
  }
}

KrausChannel make_identity(Eigen::Index dim) {
  return KrausChannel({Matrix::Identity(dim, dim)});
}

KrausChannel make_depolarizing(double p) {
  require_prob(p, "depolarizing strength p");
  return make_stochastic_pauli(p / 4, p / 4, p / 4);
}

KrausChannel make_stochastic_pauli(double qx, double qy, double qz) {
  for (double q : {qx, qy, qz}) require_prob(q, "Pauli probability");
  const double q0 = 1.0 - qx - qy - qz;
  require(q0 >= -1e-12, ErrorCode::InvalidArgument,
          "Pauli probabilities must sum to at most 1");
  std::vector<Matrix> kraus;
  kraus.push_back(std::sqrt(std::max(q0, 0.0)) * numkit::pauli('I'));
  kraus.push_back(std::sqrt(qx) * numkit::pauli('X'));
  kraus.push_back(std::sqrt(qy) * numkit::pauli('Y'));
  kraus.push_back(std::sqrt(qz) * numkit::pauli('Z'));
  return KrausChannel(std::move(kraus));
}

KrausChannel make_global_depolarizing(double gamma, const DensityMatrix& fixed) {
  require_prob(gamma, "gamma");
  const auto eig = numkit::eig_hermitian(fixed.mat());
  require(eig.values(0) > 0.0, ErrorCode::InvalidArgument,
          "global depolarizing fixed point must be full rank");
  const Eigen::Index d = fixed.dim();
  std::vector<Matrix> kraus;
  kraus.push_back(std::sqrt(1.0 - gamma) * Matrix::Identity(d, d));
  for (Eigen::Index i = 0; i < d; ++i) {
    const double w = std::sqrt(gamma * eig.values(i));
    for (Eigen::Index j = 0; j < d; ++j) {
      Matrix k = Matrix::Zero(d, d);
      k.col(j) = w * eig.vectors.col(i);
      kraus.push_back(std::move(k));
    }
  }
  return KrausChannel(std::move(kraus));
}

KrausChannel make_unitary_channel(const Matrix& u) {
  require(u.rows() == u.cols() && u.rows() >= 1, ErrorCode::InvalidArgument,
          "unitary must be square");
  require(max_abs_entry(u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())) <= 1e-8,
          ErrorCode::InvalidArgument, "matrix is not unitary");
  return KrausChannel({u});
}

KrausChannel make_random_unital(Eigen::Index dim, int terms, numkit::Rng& rng) {
  require(terms >= 1, ErrorCode::InvalidArgument, "need at least one term");
  std::vector<double> w(static_cast<std::size_t>(terms));
  double total = 0.0;
  for (auto& x : w) {
    x = -std::log(1.0 - rng.uniform());
    total += x;
  }
  std::vector<Matrix> kraus;
  for (int i = 0; i < terms; ++i) {
    kraus.push_back(std::sqrt(w[static_cast<std::size_t>(i)] / total) *
                    numkit::random_unitary(dim, rng));
  }
  return KrausChannel(std::move(kraus));
}

KrausChannel make_random_channel(Eigen::Index dim, int kraus_count,
                                 numkit::Rng& rng) {
  require(kraus_count >= 1, ErrorCode::InvalidArgument, "need at least one Kraus operator");
  const Matrix v = numkit::random_unitary(dim * kraus_count, rng).leftCols(dim);
  std::vector<Matrix> kraus;
  for (int i = 0; i < kraus_count; ++i) kraus.push_back(v.block(i * dim, 0, dim, dim));
  return KrausChannel(std::move(kraus));
}

KrausChannel compose(const KrausChannel& second, const KrausChannel& first) {
  require(second.dim() == first.dim(), ErrorCode::InvalidArgument,
          "compose: dimension mismatch");
  std::vector<Matrix> kraus;
  kraus.reserve(second.kraus().size() * first.kraus().size());
  for (const auto& b : second.kraus()) {
    for (const auto& a : first.kraus()) kraus.push_back(b * a);
  }
  return KrausChannel(std::move(kraus));
}

KrausChannel tensor_channels(const KrausChannel& a, const KrausChannel& b) {
  std::vector<Matrix> kraus;
  kraus.reserve(a.kraus().size() * b.kraus().size());
  for (const auto& ka : a.kraus()) {
    for (const auto& kb : b.kraus()) kraus.push_back(numkit::tensor(ka, kb));
  }
  return KrausChannel(std::move(kraus));
}

DensityMatrix apply(const KrausChannel& e, const DensityMatrix& rho) {
  return DensityMatrix::from_numeric(e.apply(rho.mat()));
}

KrausMap adjoint(const KrausChannel& e) {
  std::vector<Matrix> kraus;
  kraus.reserve(e.kraus().size());
  for (const auto& k : e.kraus()) kraus.push_back(k.adjoint());
  return KrausMap(std::move(kraus));
}

Matrix choi(const KrausMap& e) {
  const Eigen::Index d = e.dim();
  Matrix j = Matrix::Zero(d * d, d * d);
  Matrix v(d * d, 1);
  for (const auto& k : e.kraus()) {
    for (Eigen::Index a = 0; a < d; ++a) {
      for (Eigen::Index i = 0; i < d; ++i) v(a * d + i, 0) = k(a, i);
    }
    j.noalias() += v * v.adjoint();
  }
  return j;
}

Matrix choi(const Superoperator& s) {
  const Eigen::Index d = s.dim();
  Matrix j(d * d, d * d);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index b = 0; b < d; ++b) {
        for (Eigen::Index jj = 0; jj < d; ++jj) {
          j(a * d + i, b * d + jj) = s.mat()(b * d + a, jj * d + i);
        }
      }
    }
  }
  return j;
}

CptpReport is_cptp(const KrausChannel& e, double tol) {
  CptpReport r;
  r.min_choi_eigenvalue = numkit::eig_hermitian(choi(e)).values(0);
  r.trace_preservation_residual = e.map().trace_preservation_residual();
  r.ok = r.min_choi_eigenvalue >= -tol && r.trace_preservation_residual <= tol;
  return r;
}

bool is_unital(const KrausChannel& e, double tol) {
  const Eigen::Index d = e.dim();
  const Matrix mixed = Matrix::Identity(d, d) / static_cast<double>(d);
  return numkit::trace_norm(e.apply(mixed) - mixed) <= tol;
}

double fixed_point_residual(const KrausChannel& e, const DensityMatrix& sigma) {
  return numkit::trace_norm(e.apply(sigma.mat()) - sigma.mat());
}

Eigen::MatrixXd pauli_transfer_matrix(const KrausChannel& e) {
  const Eigen::Index d = e.dim();
  int n = 0;
  while ((Eigen::Index{1} << n) < d) ++n;
  require((Eigen::Index{1} << n) == d, ErrorCode::InvalidArgument,
          "transfer matrix needs a qubit dimension");
  const Eigen::Index count = d * d;
  std::vector<Matrix> basis;
  basis.reserve(static_cast<std::size_t>(count));
  static constexpr char kLabels[] = {'I', 'X', 'Y', 'Z'};
  for (Eigen::Index idx = 0; idx < count; ++idx) {
    std::string s(static_cast<std::size_t>(n), 'I');
    Eigen::Index rest = idx;
    for (int q = n - 1; q >= 0; --q) {
      s[static_cast<std::size_t>(q)] = kLabels[rest % 4];
      rest /= 4;
    }
    basis.push_back(n == 0 ? Matrix::Identity(1, 1) : numkit::pauli_string(s));
  }
  Eigen::MatrixXd r(count, count);
  for (Eigen::Index j = 0; j < count; ++j) {
    const Matrix out = e.apply(basis[static_cast<std::size_t>(j)]);
    for (Eigen::Index i = 0; i < count; ++i) {
      r(i, j) = (basis[static_cast<std::size_t>(i)] * out).trace().real() /
                static_cast<double>(d);
    }
  }
  return r;
}

KrausChannel to_kraus(const Superoperator& s, double cp_tol, double tp_tol) {
  const Eigen::Index d = s.dim();
  const auto eig = numkit::eig_hermitian(choi(s));
  const double lmax = eig.values.maxCoeff();
  if (eig.values(0) < -cp_tol) {
    std::ostringstream os;
    os << "Choi matrix has eigenvalue " << eig.values(0)
       << "; map is not completely positive";
    fail(ErrorCode::NotCompletelyPositive, os.str());
  }
  std::vector<Matrix> kraus;
  for (Eigen::Index idx = eig.values.size() - 1; idx >= 0; --idx) {
    const double lam = eig.values(idx);
    if (lam <= kChoiCutoff * lmax) break;
    Matrix k(d, d);
    const double w = std::sqrt(lam);
    for (Eigen::Index a = 0; a < d; ++a) {
      for (Eigen::Index i = 0; i < d; ++i) k(a, i) = w * eig.vectors(a * d + i, idx);
    }
    kraus.push_back(std::move(k));
  }
  KrausMap map(std::move(kraus));
  const double residual = map.trace_preservation_residual();
  require(residual <= tp_tol, ErrorCode::InvalidArgument,
          "superoperator is not trace preserving");
  std::vector<Matrix> ks = map.kraus();
  if (residual > kTraceTol) {
    // Absorb drift between kTraceTol and tp_tol: K <- K (sum K^dagger K)^{-1/2}.
    Matrix acc = Matrix::Zero(d, d);
    for (const auto& k : ks) acc.noalias() += k.adjoint() * k;
    const Matrix fix = numkit::matrix_fn_psd(acc, numkit::MatrixFunction::InvSqrt);
    for (auto& k : ks) k = k * fix;
  }
  return KrausChannel(std::move(ks));
}

DensityMatrix gibbs_state(const Observable& h, double beta) {
  require(std::isfinite(beta) && beta > 0.0, ErrorCode::InvalidArgument,
          "beta must be positive");
  const auto eig = numkit::eig_hermitian(h.mat());
  const double emin = eig.values(0);
  numkit::RealVector w(eig.values.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    w(i) = std::exp(-beta * (eig.values(i) - emin));
  }
  w /= w.sum();
  return DensityMatrix::from_numeric(eig.vectors * w.cast<Complex>().asDiagonal() *
                                     eig.vectors.adjoint());
}

LiouvillianSpec::LiouvillianSpec(Matrix superop, Observable hamiltonian, double beta)
    : superop_(std::move(superop)),
      hamiltonian_(std::move(hamiltonian)),
      beta_(beta),
      gibbs_(gibbs_state(hamiltonian_, beta)) {
  const Eigen::Index d = hamiltonian_.dim();
  require(superop_.rows() == d * d && superop_.cols() == d * d,
          ErrorCode::InvalidArgument, "Liouvillian must be d^2 x d^2");
  // Tr L(tau) = vec(I)^dagger S vec(tau) vanishes for every tau iff this row
  // combination is zero.
  const Matrix trace_row = vec(Matrix::Identity(d, d)).adjoint() * superop_;
  require(max_abs_entry(trace_row) <= 1e-9, ErrorCode::InvalidArgument,
          "Liouvillian does not annihilate the trace");
  require(max_abs_entry(apply(gibbs_.mat())) <= 1e-8, ErrorCode::InvalidArgument,
          "Gibbs state is not a fixed point of the Liouvillian");
}

Matrix LiouvillianSpec::apply(const Matrix& tau) const {
  const Eigen::Index d = dim();
  require(tau.rows() == d && tau.cols() == d, ErrorCode::InvalidArgument,
          "Liouvillian/state dimension mismatch");
  return unvec(superop_ * vec(tau), d);
}

Matrix lindblad_superop(const Matrix& h, const std::vector<JumpOperator>& jumps) {
  const Eigen::Index d = h.rows();
  const Matrix id = Matrix::Identity(d, d);
  const Complex minus_i(0.0, -1.0);
  Matrix s = minus_i * (Eigen::kroneckerProduct(id, h).eval() -
                        Eigen::kroneckerProduct(h.transpose(), id).eval());
  for (const auto& j : jumps) {
    require(j.rate >= 0.0, ErrorCode::InvalidArgument, "jump rates must be nonnegative");
    const Matrix ldl = j.op.adjoint() * j.op;
    s += j.rate * (Eigen::kroneckerProduct(j.op.conjugate(), j.op).eval() -
                   0.5 * Eigen::kroneckerProduct(id, ldl).eval() -
                   0.5 * Eigen::kroneckerProduct(ldl.transpose(), id).eval());
  }
  return s;
}

LiouvillianSpec make_davies_generator(const Observable& h, double beta, double kappa) {
  require(kappa > 0.0, ErrorCode::InvalidArgument, "kappa must be positive");
  const auto eig = numkit::eig_hermitian(h.mat());
  const Eigen::Index d = h.dim();
  for (Eigen::Index i = 1; i < d; ++i) {
    require(eig.values(i) - eig.values(i - 1) > 1e-9, ErrorCode::InvalidArgument,
            "Davies generator needs a nondegenerate Hamiltonian");
  }
  std::vector<JumpOperator> jumps;
  for (Eigen::Index k = 0; k < d; ++k) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (j == k) continue;
      const double rate = kappa * std::exp(-0.5 * beta * (eig.values(j) - eig.values(k)));
      jumps.push_back({eig.vectors.col(j) * eig.vectors.col(k).adjoint(), rate});
    }
  }
  return LiouvillianSpec(lindblad_superop(h.mat(), jumps), h, beta);
}

Superoperator semigroup_superop(const LiouvillianSpec& l, double t) {
  require(std::isfinite(t) && t >= 0.0, ErrorCode::InvalidArgument,
          "semigroup time must be nonnegative");
  const Matrix scaled = t * l.superop();
  return {l.dim(), scaled.exp()};
}

KrausChannel semigroup_step(const LiouvillianSpec& l, double t) {
  return to_kraus(semigroup_superop(l, t), 1e-7, 1e-7);
}

}  // namespace qembound::channels
