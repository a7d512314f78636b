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

#include "qembound/divergences.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qembound::divergences {

using numkit::Complex;
using numkit::Matrix;
using numkit::MatrixFunction;

namespace {

void require_same_dim(const DensityMatrix& a, const DensityMatrix& b) {
  require(a.dim() == b.dim(), ErrorCode::InvalidArgument,
          "states have different dimensions");
}

// sum_i p_i log p_i - sum_ij p_i |<u_i|v_j>|^2 log q_j, in the log of `log_fn`.
template <typename LogFn>
double relative_entropy_impl(const DensityMatrix& rho, const DensityMatrix& sigma,
                             LogFn log_fn) {
  require_same_dim(rho, sigma);
  const auto er = numkit::eig_hermitian(rho.mat());
  const auto es = numkit::eig_hermitian(sigma.mat());
  const double rmax = er.values.maxCoeff();
  const double smax = es.values.maxCoeff();
  const double rcut = numkit::kSupportCutoff * rmax;
  const double scut = numkit::kSupportCutoff * smax;

  // Weight of rho along each sigma eigenvector: <v_j|rho|v_j>.
  const Matrix rho_in_sigma = es.vectors.adjoint() * rho.mat() * es.vectors;

  double leak = 0.0;
  double cross = 0.0;
  for (Eigen::Index j = 0; j < es.values.size(); ++j) {
    const double w = rho_in_sigma(j, j).real();
    if (es.values(j) <= scut) {
      leak += w;
    } else {
      cross += w * log_fn(es.values(j));
    }
  }
  if (leak > kSupportLeak) return kInfinity;

  double self = 0.0;
  for (Eigen::Index i = 0; i < er.values.size(); ++i) {
    const double p = er.values(i);
    if (p > rcut) self += p * log_fn(p);
  }
  return std::max(self - cross, 0.0);
}

}  // namespace

ObservableSet ObservableSet::explicit_set(std::vector<Observable> members) {
  require(!members.empty(), ErrorCode::InvalidArgument, "empty observable set");
  const Eigen::Index d = members.front().dim();
  for (const auto& a : members) {
    require(a.dim() == d, ErrorCode::InvalidArgument,
            "observables in a set must share a dimension");
  }
  return ObservableSet(Kind::Explicit, d, std::move(members));
}

ObservableSet ObservableSet::all_effects(Eigen::Index dim) {
  require(dim >= 1, ErrorCode::InvalidArgument, "dimension must be >= 1");
  return ObservableSet(Kind::AllEffects, dim, {});
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_same_dim(rho, sigma);
  return std::clamp(0.5 * numkit::trace_norm(rho.mat() - sigma.mat()), 0.0, 1.0);
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_same_dim(rho, sigma);
  const Matrix sr = numkit::matrix_fn_psd(rho.mat(), MatrixFunction::Sqrt);
  const Matrix inner = sr * sigma.mat() * sr;
  const auto eig = numkit::eig_hermitian(0.5 * (inner + inner.adjoint()));
  // Eigenvalues at round-off level count as zero.
  const double floor = 1e-13 * std::max(eig.values.maxCoeff(), 0.0);
  double root = 0.0;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    if (eig.values(i) > floor) root += std::sqrt(eig.values(i));
  }
  return std::clamp(root * root, 0.0, 1.0);
}

double purified_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return std::clamp(std::sqrt(std::max(1.0 - fidelity(rho, sigma), 0.0)), 0.0, 1.0);
}

double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return relative_entropy_impl(rho, sigma, [](double x) { return std::log2(x); });
}

double relative_entropy_nats(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return relative_entropy_impl(rho, sigma, [](double x) { return std::log(x); });
}

double renyi2_sandwiched(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_same_dim(rho, sigma);
  const auto es = numkit::eig_hermitian(sigma.mat());
  require(es.values(0) > 1e-12, ErrorCode::SingularReference,
          "Renyi-2 divergence needs a full-rank reference state");
  const Matrix isq = numkit::matrix_fn_psd(sigma.mat(), MatrixFunction::InvSqrt);
  const Matrix x = isq * rho.mat() * isq * rho.mat();
  return std::max(std::log2(x.trace().real()), 0.0);
}

double binary_relative_entropy(double x, double y) {
  require(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0, ErrorCode::InvalidArgument,
          "binary relative entropy needs arguments in (0, 1)");
  const double h = x - y;
  const double nats = x * std::log1p(h / y) + (1.0 - x) * std::log1p(-h / (1.0 - y));
  return std::max(nats, 0.0) / std::numbers::ln2;
}

double von_neumann_entropy_nats(const DensityMatrix& rho) {
  const auto eig = numkit::eig_hermitian(rho.mat());
  const double cut = numkit::kSupportCutoff * eig.values.maxCoeff();
  double s = 0.0;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    const double p = eig.values(i);
    if (p > cut) s -= p * std::log(p);
  }
  return std::max(s, 0.0);
}

double von_neumann_entropy(const DensityMatrix& rho) {
  return von_neumann_entropy_nats(rho) / std::numbers::ln2;
}

double observable_distinguishability(const DensityMatrix& rho,
                                     const DensityMatrix& sigma,
                                     const ObservableSet& oset) {
  require_same_dim(rho, sigma);
  require(oset.dim() == rho.dim(), ErrorCode::InvalidArgument,
          "observable set dimension does not match the states");
  if (oset.kind() == ObservableSet::Kind::AllEffects) {
    return trace_distance(rho, sigma);
  }
  const Matrix diff = rho.mat() - sigma.mat();
  double best = 0.0;
  for (const auto& a : oset.members()) {
    best = std::max(best, std::abs((a.mat() * diff).trace().real()));
  }
  return best;
}

double expectation(const Observable& a, const DensityMatrix& rho) {
  require(a.dim() == rho.dim(), ErrorCode::InvalidArgument,
          "observable/state dimension mismatch");
  return (a.mat() * rho.mat()).trace().real();
}

double observable_std_dev(const Observable& a, const DensityMatrix& rho) {
  const double mean = expectation(a, rho);
  const Matrix shifted =
      a.mat() - mean * Matrix::Identity(a.dim(), a.dim());
  const double var = (shifted * shifted * rho.mat()).trace().real();
  return std::sqrt(std::max(var, 0.0));
}

double min_eigenvalue(const DensityMatrix& rho) {
  return numkit::eig_hermitian(rho.mat()).values(0);
}

}  // namespace qembound::divergences
