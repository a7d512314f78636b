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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "driver.hpp"
#include "qembound/bounds.hpp"
#include "qembound/channels.hpp"
#include "qembound/mitigation.hpp"
#include "qembound/suites.hpp"

using namespace qembound;
using numkit::Rng;

namespace {

constexpr std::uint64_t kSeed = 20240611;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Verdict run_suites(const std::vector<std::string>& names, int min_instances) {
  suites::SuiteOptions o;
  o.seed = kSeed;
  Verdict v{true, ""};
  for (const auto& n : names) {
    const auto r = suites::run_suite(n, o);
    const bool ok = r.passed() && r.instances >= min_instances;
    v.pass = v.pass && ok;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s%s %d/%d", v.detail.empty() ? "" : "; ", n.c_str(),
                  r.instances - r.violations, r.instances);
    v.detail += buf;
  }
  return v;
}

Verdict criterion1() {
  const auto start = std::chrono::steady_clock::now();
  Verdict v = run_suites({"fuchs_van_de_graaf", "pinsker", "fidelity_multiplicativity",
                          "relative_entropy_additivity", "data_processing",
                          "distance_fluctuation", "fidelity_trace_lower",
                          "purified_relative_entropy", "renyi2_dominates"},
                         1500);
  const double t = seconds_since(start);
  v.pass = v.pass && t < 60.0;
  v.detail = fmt("%.2f s; ", t) + v.detail;
  return v;
}

Verdict criterion4() {
  using namespace bounds;
  LayeredSpec spec;
  spec.qubits = 2;
  spec.layers = 5;
  spec.gamma = 0.1;
  const double thm4 = *thm4_bound(spec, {0.0, 0.25}).value;
  bool ok = std::abs(thm4 - 0.25856) <= 1e-4;

  double worst = 0.0;
  const MomentTarget moments{0.5, 0.1};
  for (int k = 0; k < 100; ++k) {
    LayeredSpec s;
    s.qubits = 1 + k % 4;
    s.layers = 1 + (k / 4) % 25;
    s.gamma = 0.01 + 0.0098 * k;
    const AccuracyTarget t{0.0, 0.005 * (1 + k % 50)};
    const double xi = (1.0 - s.gamma) * (1.0 - s.gamma);
    const double a = *thm4_bound(s, t).value;
    const double b = *thm6_prob_bound(s.qubits, s.layers, xi, t).value;
    const double c = *thm5_bound(s, moments, 2.0).value;
    const double d = *thm6_moment_bound(s.qubits, s.layers, xi, moments, 2.0).value;
    worst = std::max({worst, std::abs(a - b) / std::max(1.0, std::abs(a)),
                      std::abs(c - d) / std::max(1.0, std::abs(c))});
  }
  ok = ok && worst <= 1e-12;

  const bool diverges = std::isinf(*prop2_bound(1.0, {0.0, 0.1}).value);
  bool increasing = true;
  double prev = 0.0;
  for (double delta = 0.1; delta > 1e-6; delta /= 10.0) {
    const double v = *prop2_bound(1.0, {delta, 0.1}).value;
    increasing = increasing && v > prev;
    prev = v;
  }
  const double p2 = *prop2_bound(1.0, {0.1, 0.1}).value;
  ok = ok && diverges && increasing && std::abs(p2 - 2.289224) <= 1e-4;

  char buf[200];
  std::snprintf(buf, sizeof buf, "thm4=%.6f; thm6 grid max rel diff %.2e; prop2(0.1,0.1)=%.6f, delta->0 %s",
                thm4, worst, p2, diverges && increasing ? "inf" : "finite");
  return {ok, buf};
}

Verdict criterion6(const mitigation::ScanResult& scan, double secs) {
  const double required = 0.75 * 2.0 * std::log(1.0 / 0.8);
  bool ok = scan.slope && *scan.slope >= required && secs <= 1200.0;
  std::string counts;
  for (const auto& row : scan.rows) {
    const bool above = row.requirement.achieved &&
                       static_cast<double>(row.requirement.n_hat) >= *row.thm4.value;
    ok = ok && above;
    counts += (counts.empty() ? "" : ",") +
              (row.requirement.achieved ? std::to_string(row.requirement.n_hat) : "none");
  }
  char buf[240];
  std::snprintf(buf, sizeof buf, "n_hat(L)=[%s]; slope %.4f >= %.4f; %.1f s", counts.c_str(),
                scan.slope.value_or(std::nan("")), required, secs);
  return {ok, buf};
}

struct ScanCase {
  const char* name;
  mitigation::ScanOptions options;
};

Verdict criterion7(const mitigation::ScanResult& base) {
  using mitigation::FitModel;
  using mitigation::ProtocolKind;
  std::vector<ScanCase> cases;
  {
    mitigation::ScanOptions o;
    o.qubits = 2;
    o.last_layer = 3;
    cases.push_back({"pec M=2 gamma=0.2", o});
  }
  {
    mitigation::ScanOptions o;
    o.gamma = 0.1;
    o.last_layer = 4;
    o.protocol.kind = ProtocolKind::Zne;
    o.protocol.scale_factors = {1.0, 2.0, 3.0};
    o.protocol.fit = FitModel::Richardson;
    cases.push_back({"zne M=1 gamma=0.1", o});
  }
  {
    mitigation::ScanOptions o;
    o.gamma = 0.05;
    o.last_layer = 3;
    o.protocol.kind = ProtocolKind::None;
    cases.push_back({"none M=1 gamma=0.05", o});
  }

  int rows = 0;
  int bad = 0;
  auto tally = [&](const mitigation::ScanResult& r) {
    for (const auto& row : r.rows) {
      ++rows;
      if (!row.dominated) ++bad;
    }
  };
  tally(base);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    tally(mitigation::layered_scan(cases[i].options, Rng(kSeed).derive(100 + i)));
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d configurations, %d rows, %d not dominated",
                static_cast<int>(cases.size()) + 1, rows, bad);
  return {bad == 0 && rows > 0, buf};
}

Verdict criterion8() {
  using namespace mitigation;
  double norm_err = 0.0;
  double inv_err = 0.0;
  Rng rng(kSeed);
  const char labels[] = {'I', 'X', 'Y', 'Z'};
  for (double g : {0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9}) {
    const auto dec = pec_decomposition(g);
    norm_err = std::max(norm_err, std::abs(dec.one_norm - (2.0 + g) / (2.0 * (1.0 - g))));
    const auto noise = channels::make_depolarizing(g);
    for (int k = 0; k < 50; ++k) {
      const auto rho = numkit::random_state(2, numkit::StateKind::FullRank, rng);
      const numkit::Matrix noisy = noise.apply(rho.mat());
      numkit::Matrix inv = numkit::Matrix::Zero(2, 2);
      for (int p = 0; p < 4; ++p) {
        const numkit::Matrix pm = numkit::pauli(labels[p]);
        inv += dec.coefficients[p] * pm * noisy * pm;
      }
      inv_err = std::max(inv_err, (inv - rho.mat()).cwiseAbs().maxCoeff());
    }
  }

  ProtocolSpec pec;
  pec.kind = ProtocolKind::Pec;
  const int trials = 200;
  int grid = 0;
  int outside = 0;
  double worst_z = 0.0;
  for (int m = 1; m <= 2; ++m) {
    for (int l = 1; l <= 3; ++l) {
      for (double g : {0.05, 0.1, 0.2}) {
        bounds::LayeredSpec spec;
        spec.qubits = m;
        spec.layers = l;
        spec.gamma = g;
        const Rng base = Rng(kSeed).derive(static_cast<std::uint64_t>(grid));
        const auto c = LayeredCircuit::build(spec, base.derive(0));
        Rng r = base.derive(1);
        const auto rho = numkit::random_state(c.dim(), numkit::StateKind::Pure, r);
        const numkit::Observable z(numkit::pauli_string("Z" + std::string(m - 1, 'I')));
        const auto s = estimator_stats(c, rho, z, pec, 1000, trials, 0.1, base.derive(2));
        const double se = s.std_dev / std::sqrt(static_cast<double>(trials));
        const double zscore = se > 0.0 ? std::abs(s.bias) / se : 0.0;
        worst_z = std::max(worst_z, zscore);
        if (zscore > 3.0) ++outside;
        ++grid;
      }
    }
  }
  const bool ok = norm_err <= 1e-12 && inv_err <= 1e-10 && outside == 0;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "one-norm err %.1e; inversion err %.1e; bias %d/%d within 3 SE (max %.2f SE)",
                norm_err, inv_err, grid - outside, grid, worst_z);
  return {ok, buf};
}

Verdict criterion10() {
  using driver::Json;
  const std::vector<std::pair<std::string, Json>> runs{
      {"verify", Json{{"seed", kSeed}}},
      {"layered-scan",
       Json{{"seed", kSeed}, {"M", 1}, {"L_range", Json::array({1, 3})}, {"gamma", 0.2}, {"delta", 0.2},
            {"epsilon", 0.1}, {"trials", 100}}},
      {"mitigate",
       Json{{"seed", kSeed}, {"M", 2}, {"L", 2}, {"gamma", 0.1}, {"n", 256}, {"trials", 50},
            {"delta", 0.1}, {"protocol", "pec"}}},
      {"contraction",
       Json{{"seed", kSeed},
            {"channels", Json::array({Json{{"type", "depolarizing"}, {"p", 0.1}}})},
            {"budget", {{"restarts", 8}, {"refine_steps", 20}}}}},
      {"thermal",
       Json{{"seed", kSeed}, {"beta", 0.8}, {"t_grid", Json::array({0.5, 1.0})}, {"delta", 0.05},
            {"epsilon", 0.1}, {"samples", 8}}},
  };
  int identical = 0;
  std::string differing;
  for (const auto& [command, config] : runs) {
    const auto a = driver::run(command, config, nullptr, 1);
    const auto b = driver::run(command, config, nullptr, 1);
    const auto c = driver::run(command, config, nullptr, 2);
    if (a.jsonl == b.jsonl && a.csv == b.csv && a.jsonl == c.jsonl && a.csv == c.csv &&
        !a.jsonl.empty()) {
      ++identical;
    } else {
      differing += " " + command;
    }
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "%d/%d commands byte-identical across reruns and thread counts%s%s",
                identical, static_cast<int>(runs.size()), differing.empty() ? "" : "; differ:",
                differing.c_str());
  return {identical == static_cast<int>(runs.size()), buf};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    std::function<Verdict()> check;
  };

  mitigation::ScanResult scan;
  double scan_secs = 0.0;
  auto ensure_scan = [&]() -> const mitigation::ScanResult& {
    if (scan.rows.empty()) {
      const auto start = std::chrono::steady_clock::now();
      scan = mitigation::layered_scan(mitigation::ScanOptions{}, Rng(kSeed));
      scan_secs = seconds_since(start);
    }
    return scan;
  };

  const std::vector<Criterion> criteria{
      {1, "inequality suites", criterion1},
      {2, "depolarizing contraction with sandwiches",
       [] { return run_suites({"depolarizing_contraction", "sandwich_contraction"}, 300); }},
      {3, "Renyi-2 Pauli contraction", [] { return run_suites({"pauli_renyi2_contraction"}, 300); }},
      {4, "formula reproduction", criterion4},
      {5, "minimum eigenvalue of layered outputs", [] { return run_suites({"min_eigenvalue"}, 200); }},
      {6, "exponential PEC cost", [&] {
         const auto& s = ensure_scan();
         return criterion6(s, scan_secs);
       }},
      {7, "bound dominance over the scan suite", [&] { return criterion7(ensure_scan()); }},
      {8, "PEC correctness", criterion8},
      {9, "thermal suite",
       [] {
         return run_suites({"entropy_production", "free_energy_identity", "free_energy_monotone",
                            "thermal_rate_fit"},
                           1);
       }},
      {10, "determinism", criterion10},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::printf("%s  criterion %2d  %-42s %s\n", v.pass ? "PASS" : "FAIL", c.id, c.title,
                v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
