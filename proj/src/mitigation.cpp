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

#include "qembound/mitigation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>

#include "parallel.hpp"

namespace qembound::mitigation {

using numkit::Complex;

namespace {

constexpr double kEigenMergeTol = 1e-9;
constexpr double kWilsonZ = 1.959963984540054;
constexpr double kSuccessSlack = 1e-12;
constexpr int kPecTableSites = 6;
constexpr Eigen::Index kMaxEnsembleDim = 8;

Eigen::Index qubit_mask(int qubit, int qubits) {
  return Eigen::Index{1} << (qubits - 1 - qubit);
}

// (1-g) rho + g (I/2 (x) Tr_m rho) on qubit m.
void depolarize_qubit(Matrix& rho, int qubit, int qubits, double gamma) {
  if (gamma == 0.0) return;
  const Eigen::Index mask = qubit_mask(qubit, qubits);
  const Eigen::Index d = rho.rows();
  Matrix out(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      out(i, j) = (1.0 - gamma) * rho(i, j);
      if (((i ^ j) & mask) == 0) {
        out(i, j) += 0.5 * gamma * (rho(i, j) + rho(i ^ mask, j ^ mask));
      }
    }
  }
  rho = std::move(out);
}

// P rho P for P = I, X, Y, Z (0..3) on qubit m.
void conjugate_pauli(Matrix& rho, int qubit, int qubits, int pauli) {
  if (pauli == 0) return;
  const Eigen::Index mask = qubit_mask(qubit, qubits);
  const Eigen::Index d = rho.rows();
  Matrix out(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      const double s = ((i ^ j) & mask) == 0 ? 1.0 : -1.0;
      switch (pauli) {
        case 1: out(i, j) = rho(i ^ mask, j ^ mask); break;
        case 2: out(i, j) = s * rho(i ^ mask, j ^ mask); break;
        default: out(i, j) = s * rho(i, j); break;
      }
    }
  }
  rho = std::move(out);
}

void apply_layer(const LayeredCircuit& c, int layer, Matrix& rho, double scale) {
  const auto& sandwiches = c.spec().sandwiches;
  const bool sandwiched = !sandwiches.empty() && sandwiches[layer].has_value();
  if (sandwiched) rho = sandwiches[layer]->before.apply(rho);
  const Matrix& u = c.unitaries()[layer];
  rho = u * rho * u.adjoint();
  if (sandwiched) rho = sandwiches[layer]->after.apply(rho);
  for (int m = 0; m < c.qubits(); ++m) {
    depolarize_qubit(rho, m, c.qubits(), std::min(scale * c.strengths()(layer, m), 1.0));
  }
}

Matrix evolve(const LayeredCircuit& c, const DensityMatrix& rho_in, double scale) {
  Matrix rho = rho_in.mat();
  for (int l = 0; l < c.layers(); ++l) apply_layer(c, l, rho, scale);
  return rho;
}

void require_dims(const LayeredCircuit& c, const DensityMatrix& rho_in) {
  require(rho_in.dim() == c.dim(), ErrorCode::InvalidArgument,
          "input state dimension does not match the circuit");
}

std::vector<double> cumulative(const std::vector<double>& probs) {
  std::vector<double> cdf(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    cdf[i] = acc;
  }
  for (auto& v : cdf) v /= acc;
  return cdf;
}

std::size_t draw(const std::vector<double>& cdf, Rng& rng) {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

// Mean of n i.i.d. measurement outcomes, drawn as multinomial counts.
double sample_mean(const std::vector<double>& values, const std::vector<double>& probs,
                   std::int64_t n, Rng& rng) {
  std::int64_t remaining = n;
  double mass = 1.0;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < values.size() && remaining > 0; ++k) {
    const double p = mass > 0.0 ? std::clamp(probs[k] / mass, 0.0, 1.0) : 0.0;
    std::binomial_distribution<std::int64_t> binom(remaining, p);
    const std::int64_t count = binom(rng.engine());
    total += static_cast<double>(count) * values[k];
    remaining -= count;
    mass -= probs[k];
  }
  total += static_cast<double>(remaining) * values.back();
  return total / static_cast<double>(n);
}

struct TrialOutcome {
  double value = 0.0;
  bool fell_back = false;
};

class Runner {
 public:
  virtual ~Runner() = default;
  virtual TrialOutcome run(std::int64_t n, Rng& rng) const = 0;
  virtual std::int64_t min_samples() const { return 1; }
};

class DirectRunner final : public Runner {
 public:
  DirectRunner(const LayeredCircuit& c, const DensityMatrix& rho_in, const Observable& a) {
    const Measurement meas(a);
    values_ = meas.values();
    probs_ = meas.probabilities(DensityMatrix::from_numeric(evolve(c, rho_in, 1.0)));
  }

  TrialOutcome run(std::int64_t n, Rng& rng) const override {
    return {sample_mean(values_, probs_, n, rng), false};
  }

 private:
  std::vector<double> values_;
  std::vector<double> probs_;
};

class ZneRunner final : public Runner {
 public:
  ZneRunner(const LayeredCircuit& c, const DensityMatrix& rho_in, const Observable& a,
            const ProtocolSpec& protocol)
      : scales_(protocol.scale_factors), fit_(protocol.fit) {
    const Measurement meas(a);
    values_ = meas.values();
    for (double s : scales_) {
      probs_.push_back(meas.probabilities(DensityMatrix::from_numeric(evolve(c, rho_in, s))));
    }
  }

  TrialOutcome run(std::int64_t n, Rng& rng) const override {
    require(n >= min_samples(), ErrorCode::InvalidArgument,
            "ZNE needs at least one sample per scale factor");
    const auto k = static_cast<std::int64_t>(scales_.size());
    std::vector<double> means;
    for (std::size_t i = 0; i < scales_.size(); ++i) {
      const std::int64_t shots = n / k + (i == 0 ? n % k : 0);
      means.push_back(sample_mean(values_, probs_[i], shots, rng));
    }
    const ZneEstimate e = extrapolate(scales_, means, fit_);
    return {e.value, e.fell_back};
  }

  std::int64_t min_samples() const override {
    return static_cast<std::int64_t>(scales_.size());
  }

 private:
  std::vector<double> scales_;
  FitModel fit_;
  std::vector<double> values_;
  std::vector<std::vector<double>> probs_;
};

class PecRunner final : public Runner {
 public:
  PecRunner(const LayeredCircuit& c, const DensityMatrix& rho_in, const Observable& a,
            const Eigen::MatrixXd& assumed)
      : circuit_(c), rho_in_(rho_in), meas_(a), values_(meas_.values()) {
    for (int l = 0; l < c.layers(); ++l) {
      for (int m = 0; m < c.qubits(); ++m) {
        const PecDecomposition dec = pec_decomposition(assumed(l, m));
        std::vector<double> weights(4);
        std::array<double, 4> signs{};
        for (int p = 0; p < 4; ++p) {
          weights[p] = std::abs(dec.coefficients[p]);
          signs[p] = dec.coefficients[p] < 0.0 ? -1.0 : 1.0;
        }
        site_cdfs_.push_back(cumulative(weights));
        site_signs_.push_back(signs);
        weight_ *= dec.one_norm;
      }
    }
    if (c.sites() <= kPecTableSites) {
      table_.resize(std::size_t{1} << (2 * c.sites()));
      fill_table(0, rho_in_.mat(), 0, 1);
    }
  }

  TrialOutcome run(std::int64_t n, Rng& rng) const override {
    require(n >= 1, ErrorCode::InvalidArgument, "PEC needs at least one sample");
    const std::size_t sites = site_cdfs_.size();
    std::vector<int> pattern(sites);
    double total = 0.0;
    for (std::int64_t s = 0; s < n; ++s) {
      double sign = 1.0;
      std::size_t index = 0;
      std::size_t stride = 1;
      for (std::size_t k = 0; k < sites; ++k) {
        const auto p = draw(site_cdfs_[k], rng);
        pattern[k] = static_cast<int>(p);
        sign *= site_signs_[k][p];
        index += p * stride;
        stride *= 4;
      }
      const std::size_t outcome =
          table_.empty() ? draw(trajectory_cdf(pattern), rng) : draw(table_[index], rng);
      total += sign * values_[outcome];
    }
    return {weight_ * total / static_cast<double>(n), false};
  }

 private:
  std::vector<double> output_cdf(const Matrix& rho) const {
    return cumulative(meas_.probabilities(DensityMatrix::from_numeric(rho)));
  }

  void fill_table(int layer, const Matrix& rho, std::size_t index, std::size_t stride) {
    if (layer == circuit_.layers()) {
      table_[index] = output_cdf(rho);
      return;
    }
    Matrix next = rho;
    apply_layer(circuit_, layer, next, 1.0);
    branch(layer, 0, next, index, stride);
  }

  void branch(int layer, int qubit, const Matrix& rho, std::size_t index, std::size_t stride) {
    if (qubit == circuit_.qubits()) {
      fill_table(layer + 1, rho, index, stride);
      return;
    }
    for (int p = 0; p < 4; ++p) {
      Matrix r = rho;
      conjugate_pauli(r, qubit, circuit_.qubits(), p);
      branch(layer, qubit + 1, r, index + static_cast<std::size_t>(p) * stride, stride * 4);
    }
  }

  std::vector<double> trajectory_cdf(const std::vector<int>& pattern) const {
    Matrix rho = rho_in_.mat();
    std::size_t k = 0;
    for (int l = 0; l < circuit_.layers(); ++l) {
      apply_layer(circuit_, l, rho, 1.0);
      for (int m = 0; m < circuit_.qubits(); ++m) {
        conjugate_pauli(rho, m, circuit_.qubits(), pattern[k++]);
      }
    }
    return output_cdf(rho);
  }

  const LayeredCircuit& circuit_;
  DensityMatrix rho_in_;
  Measurement meas_;
  std::vector<double> values_;
  std::vector<std::vector<double>> site_cdfs_;
  std::vector<std::array<double, 4>> site_signs_;
  double weight_ = 1.0;
  std::vector<std::vector<double>> table_;
};

Eigen::MatrixXd assumed_strengths(const LayeredCircuit& c, const ProtocolSpec& protocol) {
  return protocol.assumed_gamma ? *protocol.assumed_gamma : c.strengths();
}

std::unique_ptr<Runner> make_runner(const LayeredCircuit& c, const DensityMatrix& rho_in,
                                    const Observable& a, const ProtocolSpec& protocol) {
  require_dims(c, rho_in);
  require(a.dim() == c.dim(), ErrorCode::InvalidArgument,
          "observable dimension does not match the circuit");
  protocol.validate(c);
  switch (protocol.kind) {
    case ProtocolKind::Pec:
      return std::make_unique<PecRunner>(c, rho_in, a, assumed_strengths(c, protocol));
    case ProtocolKind::Zne:
      return std::make_unique<ZneRunner>(c, rho_in, a, protocol);
    case ProtocolKind::None:
      break;
  }
  return std::make_unique<DirectRunner>(c, rho_in, a);
}

struct ProbeResult {
  CurvePoint point;
  bool certified = false;
};

ProbeResult run_probe(const Runner& runner, double truth, std::int64_t n,
                      const AccuracyTarget& target, const RequirementOptions& options,
                      const Rng& point_rng) {
  const Rng probe_rng = point_rng.derive(static_cast<std::uint64_t>(n));
  const auto estimates = detail::parallel_map<double>(
      static_cast<std::size_t>(options.trials), options.threads, [&](std::size_t i) {
        Rng r = probe_rng.derive(i);
        return runner.run(n, r).value;
      });
  int successes = 0;
  double sum = 0.0;
  for (double e : estimates) {
    sum += e;
    if (std::abs(e - truth) <= target.delta + kSuccessSlack) ++successes;
  }
  const double mean = sum / static_cast<double>(estimates.size());
  double ss = 0.0;
  for (double e : estimates) ss += (e - mean) * (e - mean);
  const double sd =
      estimates.size() > 1 ? std::sqrt(ss / static_cast<double>(estimates.size() - 1)) : 0.0;
  ProbeResult r;
  r.point.n = n;
  r.point.success_prob = static_cast<double>(successes) / options.trials;
  r.point.wilson_lb = wilson_lower_bound(successes, options.trials);
  r.point.bias = mean - truth;
  r.point.std_dev = sd;
  r.certified = r.point.wilson_lb >= 1.0 - target.epsilon;
  return r;
}

struct PointRequirement {
  bool achieved = false;
  std::int64_t n_hat = 0;
  double plateau = 0.0;
  std::vector<CurvePoint> curve;
};

PointRequirement search_point(const Runner& runner, double truth, const AccuracyTarget& target,
                              const RequirementOptions& options, const Rng& point_rng) {
  std::map<std::int64_t, ProbeResult> probes;
  auto probe = [&](std::int64_t n) -> const ProbeResult& {
    auto it = probes.find(n);
    if (it == probes.end()) {
      it = probes.emplace(n, run_probe(runner, truth, n, target, options, point_rng)).first;
    }
    return it->second;
  };
  auto curve = [&] {
    std::vector<CurvePoint> out;
    for (const auto& [n, r] : probes) out.push_back(r.point);
    return out;
  };

  const std::int64_t n_min = runner.min_samples();
  require(options.n_max >= n_min, ErrorCode::InvalidArgument, "n_max is below the minimum n");
  std::int64_t n = n_min;
  std::int64_t lo = n_min - 1;
  while (true) {
    const ProbeResult& r = probe(n);
    if (r.certified) break;
    lo = n;
    if (n >= options.n_max) return {false, 0, r.point.success_prob, curve()};
    n = std::min(2 * n, options.n_max);
  }
  std::int64_t hi = n;
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (probe(mid).certified) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return {true, hi, probe(hi).point.success_prob, curve()};
}

// Column-stacked superoperator of a linear map given by its action.
Matrix superop_of(Eigen::Index d, const std::function<void(Matrix&)>& fn) {
  Matrix s(d * d, d * d);
  for (Eigen::Index c = 0; c < d; ++c) {
    for (Eigen::Index r = 0; r < d; ++r) {
      Matrix e = Matrix::Zero(d, d);
      e(r, c) = 1.0;
      fn(e);
      s.col(c * d + r) = Eigen::Map<const numkit::Vector>(e.data(), d * d);
    }
  }
  return s;
}

}  // namespace

LayeredCircuit::LayeredCircuit(LayeredSpec spec, std::vector<Matrix> unitaries,
                               Eigen::MatrixXd strengths)
    : spec_(std::move(spec)), unitaries_(std::move(unitaries)), strengths_(std::move(strengths)) {
  spec_.validate();
  require(spec_.qubits <= 6, ErrorCode::InvalidArgument,
          "circuit simulation supports at most 6 qubits");
  const auto layers = static_cast<std::size_t>(spec_.layers);
  require(unitaries_.size() == layers, ErrorCode::InvalidArgument, "need one unitary per layer");
  for (const auto& u : unitaries_) {
    require(u.rows() == dim() && u.cols() == dim(), ErrorCode::InvalidArgument,
            "layer unitary has the wrong dimension");
    require(numkit::max_abs_entry(u.adjoint() * u - Matrix::Identity(dim(), dim())) <= 1e-8,
            ErrorCode::InvalidArgument, "layer matrix is not unitary");
  }
  require(strengths_.rows() == spec_.layers && strengths_.cols() == spec_.qubits,
          ErrorCode::InvalidArgument, "noise strengths must be layers x qubits");
  for (Eigen::Index i = 0; i < strengths_.size(); ++i) {
    const double g = strengths_.data()[i];
    require(std::isfinite(g) && g >= spec_.gamma && g <= 1.0, ErrorCode::InvalidArgument,
            "every site strength must lie in [gamma, 1]");
  }
}

LayeredCircuit LayeredCircuit::build(LayeredSpec spec, const Rng& rng) {
  spec.validate();
  std::vector<Matrix> us = spec.unitaries;
  if (us.empty()) {
    for (int l = 0; l < spec.layers; ++l) {
      Rng r = rng.derive(static_cast<std::uint64_t>(l));
      us.push_back(numkit::random_unitary(spec.dim(), r));
    }
  }
  Eigen::MatrixXd g = Eigen::MatrixXd::Constant(spec.layers, spec.qubits, spec.gamma);
  return LayeredCircuit(std::move(spec), std::move(us), std::move(g));
}

LayeredCircuit LayeredCircuit::identity_layers(LayeredSpec spec) {
  spec.validate();
  std::vector<Matrix> us(static_cast<std::size_t>(spec.layers),
                         Matrix::Identity(spec.dim(), spec.dim()));
  Eigen::MatrixXd g = Eigen::MatrixXd::Constant(spec.layers, spec.qubits, spec.gamma);
  return LayeredCircuit(std::move(spec), std::move(us), std::move(g));
}

Matrix LayeredCircuit::total_unitary() const {
  Matrix u = Matrix::Identity(dim(), dim());
  for (const auto& layer : unitaries_) u = layer * u;
  return u;
}

const char* to_string(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::None: return "none";
    case ProtocolKind::Pec: return "pec";
    case ProtocolKind::Zne: return "zne";
  }
  return "unknown";
}

const char* to_string(FitModel fit) {
  switch (fit) {
    case FitModel::Richardson: return "richardson";
    case FitModel::Linear: return "linear";
    case FitModel::Exponential: return "exponential";
  }
  return "unknown";
}

void ProtocolSpec::validate(const LayeredCircuit& c) const {
  if (kind == ProtocolKind::Pec && assumed_gamma) {
    const auto& g = *assumed_gamma;
    require(g.rows() == c.layers() && g.cols() == c.qubits(), ErrorCode::InvalidArgument,
            "assumed_gamma must be layers x qubits");
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      require(std::isfinite(g.data()[i]) && g.data()[i] >= 0.0 && g.data()[i] < 1.0,
              ErrorCode::InvalidArgument, "assumed_gamma entries must lie in [0, 1)");
    }
  }
  if (kind == ProtocolKind::Zne) {
    require(!scale_factors.empty() && scale_factors.front() == 1.0,
            ErrorCode::InvalidArgument, "ZNE scale factors must start at 1");
    for (std::size_t i = 1; i < scale_factors.size(); ++i) {
      require(std::isfinite(scale_factors[i]) && scale_factors[i] > scale_factors[i - 1],
              ErrorCode::InvalidArgument, "ZNE scale factors must be strictly increasing");
    }
    require(fit == FitModel::Richardson || scale_factors.size() >= 2,
            ErrorCode::InvalidArgument, "linear and exponential fits need two scale factors");
  }
}

double ideal_expectation(const LayeredCircuit& c, const DensityMatrix& rho_in,
                         const Observable& a) {
  require_dims(c, rho_in);
  require(a.dim() == c.dim(), ErrorCode::InvalidArgument,
          "observable dimension does not match the circuit");
  const Matrix u = c.total_unitary();
  return (a.mat() * u * rho_in.mat() * u.adjoint()).trace().real();
}

DensityMatrix noisy_state(const LayeredCircuit& c, const DensityMatrix& rho_in, double scale) {
  require_dims(c, rho_in);
  require(std::isfinite(scale) && scale >= 1.0, ErrorCode::InvalidArgument,
          "noise scale must be >= 1");
  return DensityMatrix::from_numeric(evolve(c, rho_in, scale));
}

Measurement::Measurement(const Observable& a) {
  const auto eig = numkit::eig_hermitian(a.mat());
  const Eigen::Index d = a.dim();
  Eigen::Index start = 0;
  while (start < d) {
    Eigen::Index end = start + 1;
    while (end < d && eig.values(end) - eig.values(start) <= kEigenMergeTol) ++end;
    const Matrix v = eig.vectors.middleCols(start, end - start);
    values_.push_back(eig.values.segment(start, end - start).mean());
    projectors_.push_back(v * v.adjoint());
    start = end;
  }
}

std::vector<double> Measurement::probabilities(const DensityMatrix& rho) const {
  require(rho.dim() == projectors_.front().rows(), ErrorCode::InvalidArgument,
          "state dimension does not match the observable");
  std::vector<double> p;
  double total = 0.0;
  for (const auto& proj : projectors_) {
    p.push_back(std::max((proj * rho.mat()).trace().real(), 0.0));
    total += p.back();
  }
  for (auto& v : p) v /= total;
  return p;
}

double Measurement::max_abs_value() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> sample_measurement(const DensityMatrix& rho, const Observable& a,
                                       std::int64_t shots, Rng& rng) {
  require(shots >= 1, ErrorCode::InvalidArgument, "shots must be >= 1");
  const Measurement meas(a);
  const auto cdf = cumulative(meas.probabilities(rho));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(shots));
  for (std::int64_t i = 0; i < shots; ++i) out.push_back(meas.values()[draw(cdf, rng)]);
  return out;
}

PecDecomposition pec_decomposition(double gamma) {
  require(gamma != 1.0, ErrorCode::Noninvertible, "depolarizing noise at gamma = 1 has no inverse");
  require(std::isfinite(gamma) && gamma >= 0.0 && gamma < 1.0, ErrorCode::InvalidArgument,
          "gamma must lie in [0, 1)");
  PecDecomposition d;
  const double denom = 4.0 * (1.0 - gamma);
  d.coefficients = {(4.0 - gamma) / denom, -gamma / denom, -gamma / denom, -gamma / denom};
  d.one_norm = (2.0 + gamma) / (2.0 * (1.0 - gamma));
  return d;
}

double run_pec(const LayeredCircuit& c, const DensityMatrix& rho_in, const Observable& a,
               std::int64_t n, Rng& rng, const std::optional<Eigen::MatrixXd>& assumed_gamma) {
  require(n >= 1, ErrorCode::InvalidArgument, "PEC needs at least one sample");
  ProtocolSpec p;
  p.kind = ProtocolKind::Pec;
  p.assumed_gamma = assumed_gamma;
  return make_runner(c, rho_in, a, p)->run(n, rng).value;
}

ZneEstimate extrapolate(const std::vector<double>& scales, const std::vector<double>& values,
                        FitModel fit, bool allow_fallback) {
  require(!scales.empty() && scales.size() == values.size(), ErrorCode::InvalidArgument,
          "extrapolation needs matching, nonempty scale and value lists");
  for (std::size_t i = 1; i < scales.size(); ++i) {
    require(scales[i] > scales[i - 1], ErrorCode::InvalidArgument,
            "scales must be strictly increasing");
  }
  const std::size_t k = scales.size();
  auto linear = [&](const std::vector<double>& ys) {
    if (k == 1) return ys.front();
    std::vector<double> xs(scales);
    const double slope = fit_slope(xs, ys);
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      mx += xs[i];
      my += ys[i];
    }
    return my / k - slope * mx / k;
  };

  ZneEstimate out;
  out.fit_used = fit;
  switch (fit) {
    case FitModel::Richardson: {
      double v = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        double w = 1.0;
        for (std::size_t j = 0; j < k; ++j) {
          if (j != i) w *= scales[j] / (scales[j] - scales[i]);
        }
        v += w * values[i];
      }
      out.value = v;
      return out;
    }
    case FitModel::Linear:
      out.value = linear(values);
      return out;
    case FitModel::Exponential:
      break;
  }

  const double sign = values.front() > 0.0 ? 1.0 : -1.0;
  bool same_sign = true;
  bool non_increasing = true;
  bool non_decreasing = true;
  for (std::size_t i = 0; i < k; ++i) {
    same_sign = same_sign && values[i] * sign > 0.0;
    if (i > 0) {
      non_increasing = non_increasing && values[i] <= values[i - 1];
      non_decreasing = non_decreasing && values[i] >= values[i - 1];
    }
  }
  if (k < 2 || !same_sign || !(non_increasing || non_decreasing)) {
    require(allow_fallback, ErrorCode::FitDegenerate,
            "exponential fit needs monotone data of one strict sign");
    out.value = linear(values);
    out.fit_used = FitModel::Linear;
    out.fell_back = true;
    return out;
  }
  std::vector<double> logs;
  for (double v : values) logs.push_back(std::log(std::abs(v)));
  out.value = sign * std::exp(linear(logs));
  return out;
}

ZneEstimate run_zne(const LayeredCircuit& c, const DensityMatrix& rho_in, const Observable& a,
                    std::int64_t n, const ProtocolSpec& protocol, Rng& rng) {
  ProtocolSpec p = protocol;
  p.kind = ProtocolKind::Zne;
  p.validate(c);
  require_dims(c, rho_in);
  const ZneRunner runner(c, rho_in, a, p);
  const TrialOutcome t = runner.run(n, rng);
  ZneEstimate e;
  e.value = t.value;
  e.fell_back = t.fell_back;
  e.fit_used = t.fell_back ? FitModel::Linear : p.fit;
  return e;
}

EstimatorStats estimator_stats(const LayeredCircuit& c, const DensityMatrix& rho_in,
                               const Observable& a, const ProtocolSpec& protocol,
                               std::int64_t n, int trials, double delta, const Rng& rng,
                               int threads) {
  require(trials >= 1, ErrorCode::InvalidArgument, "trials must be >= 1");
  require(n >= 1, ErrorCode::InvalidArgument, "n must be >= 1");
  require(std::isfinite(delta) && delta >= 0.0, ErrorCode::InvalidArgument,
          "delta must be >= 0");
  const auto runner = make_runner(c, rho_in, a, protocol);
  const double truth = ideal_expectation(c, rho_in, a);
  const auto outcomes = detail::parallel_map<TrialOutcome>(
      static_cast<std::size_t>(trials), threads, [&](std::size_t i) {
        Rng r = rng.derive(i);
        return runner->run(n, r);
      });

  EstimatorStats s;
  s.ideal = truth;
  s.trials = trials;
  s.n_per_trial = n;
  s.low_trials = trials < 30;
  s.assumed_gamma_mismatch = protocol.kind == ProtocolKind::Pec && protocol.assumed_gamma &&
                             *protocol.assumed_gamma != c.strengths();
  double sum = 0.0;
  int successes = 0;
  for (const auto& o : outcomes) {
    sum += o.value;
    if (std::abs(o.value - truth) <= delta + kSuccessSlack) ++successes;
    if (o.fell_back) ++s.fit_fallbacks;
  }
  s.mean = sum / trials;
  s.bias = s.mean - truth;
  double ss = 0.0;
  for (const auto& o : outcomes) ss += (o.value - s.mean) * (o.value - s.mean);
  s.std_dev = trials > 1 ? std::sqrt(ss / (trials - 1)) : 0.0;
  s.success_prob = static_cast<double>(successes) / trials;
  return s;
}

double wilson_lower_bound(int successes, int trials) {
  require(trials >= 1 && successes >= 0 && successes <= trials, ErrorCode::InvalidArgument,
          "need 0 <= successes <= trials and trials >= 1");
  const double n = trials;
  const double p = successes / n;
  const double z2 = kWilsonZ * kWilsonZ;
  const double centre = p + z2 / (2.0 * n);
  const double spread = kWilsonZ * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return std::max((centre - spread) / (1.0 + z2 / n), 0.0);
}

SampleRequirement empirical_sample_requirement(const LayeredCircuit& c,
                                               const std::vector<Probe>& grid,
                                               const ProtocolSpec& protocol,
                                               const AccuracyTarget& target,
                                               const RequirementOptions& options,
                                               const Rng& rng) {
  require(!grid.empty(), ErrorCode::InvalidArgument, "need at least one (state, observable)");
  require(options.trials >= 1, ErrorCode::InvalidArgument, "trials must be >= 1");
  require(options.n_max >= 1, ErrorCode::InvalidArgument, "n_max must be >= 1");
  target.validate();

  SampleRequirement out;
  out.achieved = true;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto runner = make_runner(c, grid[k].rho_in, grid[k].observable, protocol);
    const double truth = ideal_expectation(c, grid[k].rho_in, grid[k].observable);
    PointRequirement r = search_point(*runner, truth, target, options, rng.derive(k));
    out.per_point.push_back(r.n_hat);
    if (!r.achieved) {
      out.achieved = false;
      out.n_hat = 0;
      out.plateau = r.plateau;
      out.worst_point = k;
      out.curve = std::move(r.curve);
      return out;
    }
    if (k == 0 || r.n_hat > out.n_hat) {
      out.n_hat = r.n_hat;
      out.worst_point = k;
      out.plateau = r.plateau;
      out.curve = std::move(r.curve);
    }
  }
  return out;
}

NoiseEnsemble induced_ensemble(const LayeredCircuit& c, const ProtocolSpec& protocol,
                               std::size_t max_members) {
  protocol.validate(c);
  const Eigen::Index d = c.dim();
  require(d <= kMaxEnsembleDim, ErrorCode::InvalidArgument,
          "induced ensembles are limited to 3 qubits");
  const Matrix u = c.total_unitary();
  const Matrix undo = superop_of(d, [&](Matrix& x) { x = u.adjoint() * x * u; });

  auto to_channel = [&](const Matrix& layers) {
    return channels::to_kraus(channels::Superoperator(d, layers * undo));
  };
  auto layer_superop = [&](int l, double scale) {
    return superop_of(d, [&](Matrix& x) { apply_layer(c, l, x, scale); });
  };

  std::vector<channels::KrausChannel> members;
  if (protocol.kind == ProtocolKind::Pec) {
    const int sites = c.sites();
    require(2 * sites < 63 && (std::size_t{1} << (2 * sites)) <= max_members,
            ErrorCode::InvalidArgument, "too many PEC insertion patterns to enumerate");
    std::vector<Matrix> paulis;
    const int patterns = 1 << (2 * c.qubits());
    for (int p = 0; p < patterns; ++p) {
      paulis.push_back(superop_of(d, [&](Matrix& x) {
        for (int m = 0; m < c.qubits(); ++m) {
          conjugate_pauli(x, m, c.qubits(), (p >> (2 * m)) & 3);
        }
      }));
    }
    std::vector<Matrix> layers;
    for (int l = 0; l < c.layers(); ++l) layers.push_back(layer_superop(l, 1.0));
    // Enumerated with the first site's Pauli varying fastest.
    std::vector<Matrix> acc{Matrix::Identity(d * d, d * d)};
    for (int l = 0; l < c.layers(); ++l) {
      std::vector<Matrix> next;
      next.reserve(acc.size() * paulis.size());
      for (const auto& p : paulis) {
        for (const auto& a : acc) next.push_back(p * layers[l] * a);
      }
      acc = std::move(next);
    }
    for (const auto& s : acc) members.push_back(to_channel(s));
  } else {
    const std::vector<double> scales =
        protocol.kind == ProtocolKind::Zne ? protocol.scale_factors : std::vector<double>{1.0};
    require(scales.size() <= max_members, ErrorCode::InvalidArgument,
            "too many ZNE scales to enumerate");
    for (double s : scales) {
      Matrix acc = Matrix::Identity(d * d, d * d);
      for (int l = 0; l < c.layers(); ++l) acc = layer_superop(l, s) * acc;
      members.push_back(to_channel(acc));
    }
  }
  return NoiseEnsemble(std::move(members));
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  require(xs.size() == ys.size() && xs.size() >= 2, ErrorCode::InvalidArgument,
          "slope fit needs at least two points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  require(sxx > 0.0, ErrorCode::FitDegenerate, "slope fit needs distinct x values");
  return sxy / sxx;
}

ScanResult layered_scan(const ScanOptions& options, const Rng& rng) {
  require(options.first_layer >= 1 && options.last_layer >= options.first_layer,
          ErrorCode::InvalidArgument, "layer range must satisfy 1 <= first <= last");
  options.target.validate();
  const Rng circuit_rng = rng.derive(0);
  const Rng sample_rng = rng.derive(1);

  ScanResult result;
  std::vector<double> xs;
  std::vector<double> ys;
  for (int l = options.first_layer; l <= options.last_layer; ++l) {
    LayeredSpec spec;
    spec.qubits = options.qubits;
    spec.layers = l;
    spec.gamma = options.gamma;
    const auto lu = static_cast<std::uint64_t>(l);
    const LayeredCircuit circuit = options.random_unitaries
                                       ? LayeredCircuit::build(spec, circuit_rng.derive(lu))
                                       : LayeredCircuit::identity_layers(spec);
    const Eigen::Index d = circuit.dim();
    const Matrix u = circuit.total_unitary();
    const Observable z1(numkit::pauli_string("Z" + std::string(options.qubits - 1, 'I')));

    std::vector<DensityMatrix> ideal_outputs{DensityMatrix::basis(d, 0),
                                             DensityMatrix::basis(d, d / 2)};
    std::vector<Probe> grid;
    for (const auto& out : ideal_outputs) {
      grid.push_back({DensityMatrix::from_numeric(u.adjoint() * out.mat() * u), z1});
    }

    ScanRow row;
    row.layers = l;
    row.thm4 = bounds::thm4_bound(spec, options.target);
    const auto e = bounds::variant_bounds(spec, options.target, std::nullopt, 2.0);
    row.e1 = e[0];
    row.e2 = e[1];
    try {
      const NoiseEnsemble ensemble = induced_ensemble(circuit, options.protocol);
      const auto result1 = bounds::thm1_bound(
          bounds::StateSet::explicit_set(ideal_outputs), ensemble,
          divergences::ObservableSet::explicit_set({z1}), options.target,
          {0, options.requirement.threads});
      row.thm1_fidelity = result1.fidelity;
      row.thm1_relative_entropy = result1.relative_entropy;
    } catch (const Error& err) {
      if (err.code() != ErrorCode::InvalidArgument) throw;
    }
    row.requirement = empirical_sample_requirement(circuit, grid, options.protocol, options.target,
                                                   options.requirement, sample_rng.derive(lu));
    if (row.requirement.achieved) {
      const auto n_hat = static_cast<double>(row.requirement.n_hat);
      bool ok = true;
      for (const bounds::BoundReport* b :
           {&row.thm4, &row.e1, &row.e2, row.thm1_fidelity ? &*row.thm1_fidelity : nullptr,
            row.thm1_relative_entropy ? &*row.thm1_relative_entropy : nullptr}) {
        if (b && b->value) ok = ok && *b->value <= n_hat;
      }
      row.dominated = ok;
      xs.push_back(l);
      ys.push_back(std::log(n_hat));
    }
    result.rows.push_back(std::move(row));
  }
  if (xs.size() >= 2) result.slope = fit_slope(xs, ys);
  return result;
}

}  // namespace qembound::mitigation
