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

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

/// Randomized property suites over the library: information-theoretic
/// inequalities, contraction claims, the minimum-eigenvalue claim for
/// layered circuits, and thermodynamic identities.
namespace qembound::suites {

struct SuiteOptions {
  std::uint64_t seed = 0;
  int threads = 1;
  /// Random instances per dimension for the inequality suites.
  int samples = 500;
  std::vector<Eigen::Index> dims{2, 4, 8};
  /// States per channel for the contraction suites.
  int contraction_samples = 300;
  /// States per circuit configuration for the minimum-eigenvalue suite.
  int circuit_samples = 200;
  /// States for the thermal suites.
  int thermal_samples = 100;
};

struct SuiteReport {
  std::string name;
  int instances = 0;
  int violations = 0;
  /// Largest lhs - rhs (or ratio - claim) seen; negative when all hold strictly.
  double max_excess = 0.0;
  double slack = 0.0;
  bool passed() const { return instances > 0 && violations == 0; }
};

std::vector<std::string> suite_names();
/// Suite k of suite_names() draws from Rng(seed).derive(k). InvalidArgument
/// for an unknown name.
SuiteReport run_suite(const std::string& name, const SuiteOptions& options);
std::vector<SuiteReport> run_all(const SuiteOptions& options);

}  // namespace qembound::suites
