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

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qembound/qembound.h"

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitUnachievable = 4;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string out;
  std::optional<std::string> formula;
  std::optional<int> m;
  std::optional<int> l;
  std::optional<double> gamma;
  std::optional<double> delta;
  std::optional<double> epsilon;
  std::vector<std::string> sets;
  bool record_timing = false;
};

int exit_code(qeb_status s) {
  switch (s) {
    case QEB_OK: return kExitOk;
    case QEB_CONFIG_ERROR: return kExitConfig;
    case QEB_UNACHIEVABLE: return kExitUnachievable;
    default: return kExitNumerical;
  }
}

Json parse_value(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error&) {
    return text;
  }
}

bool write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary);
  f << text;
  return static_cast<bool>(f);
}

int run(const std::string& command, const Options& opt) {
  Json config = Json::object();
  if (!opt.config_path.empty()) {
    std::ifstream f(opt.config_path);
    if (!f) {
      std::cerr << "error: cannot read config " << opt.config_path << "\n";
      return kExitConfig;
    }
    try {
      config = Json::parse(f);
    } catch (const Json::parse_error& e) {
      std::cerr << "error: " << opt.config_path << ": " << e.what() << "\n";
      return kExitConfig;
    }
  }

  Json overrides = Json::object();
  for (const auto& s : opt.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << "error: --set expects key=value, got '" << s << "'\n";
      return kExitConfig;
    }
    overrides[s.substr(0, eq)] = parse_value(s.substr(eq + 1));
  }
  if (opt.seed) overrides["seed"] = *opt.seed;
  if (opt.formula) overrides["formula_id"] = *opt.formula;
  if (opt.m) overrides["M"] = *opt.m;
  if (opt.l) overrides["L"] = *opt.l;
  if (opt.gamma) overrides["gamma"] = *opt.gamma;
  if (opt.delta) overrides["delta"] = *opt.delta;
  if (opt.epsilon) overrides["epsilon"] = *opt.epsilon;
  if (opt.record_timing) overrides["record_timing"] = true;

  qeb_result* result = nullptr;
  const qeb_status status = qeb_experiment_run(command.c_str(), config.dump().c_str(),
                                               overrides.dump().c_str(), opt.threads, &result);
  if (!result) {
    std::cerr << "error (" << qeb_status_name(status) << "): " << qeb_last_error() << "\n";
    return exit_code(status);
  }

  const std::string json = qeb_result_json(result);
  const std::string csv = qeb_result_csv(result);
  qeb_result_destroy(result);

  std::string format = "both";
  std::string path = opt.out;
  if (config.contains("output")) {
    const Json& o = config["output"];
    if (o.contains("format")) format = o["format"].get<std::string>();
    if (path.empty() && o.contains("path")) path = o["path"].get<std::string>();
  }
  const bool want_json = format != "csv";
  const bool want_csv = format != "json" && !csv.empty();

  fs::path json_path;
  if (!path.empty()) {
    json_path = path;
  } else if (const char* dir = std::getenv("QEMBOUND_OUT_DIR"); dir && *dir) {
    json_path = fs::path(dir) / (command + ".jsonl");
  }

  if (json_path.empty()) {
    std::cout << (want_json || csv.empty() ? json : csv);
  } else {
    fs::path csv_path = json_path;
    csv_path.replace_extension(".csv");
    if (want_json && csv_path == json_path) json_path.replace_extension(".jsonl");
    if (want_json && !write_file(json_path, json)) {
      std::cerr << "error: cannot write " << json_path << "\n";
      return kExitNumerical;
    }
    if (want_csv && !write_file(csv_path, csv)) {
      std::cerr << "error: cannot write " << csv_path << "\n";
      return kExitNumerical;
    }
  }
  if (status != QEB_OK) {
    std::cerr << qeb_status_name(status) << ": " << qeb_last_error() << "\n";
  }
  return exit_code(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampling-cost bounds and mitigation experiments"};
  app.set_version_flag("--version", std::string(qeb_version()));
  app.require_subcommand(1);

  Options opt;
  struct Entry {
    const char* name;
    const char* help;
  };
  const Entry entries[] = {
      {"verify", "Run the randomized inequality and contraction suites"},
      {"bound", "Evaluate one sample-complexity formula"},
      {"contraction", "Estimate eta and verify contraction coefficients"},
      {"layered-scan", "Sweep circuit depth: analytic bounds against empirical sample counts"},
      {"mitigate", "Estimator statistics for one mitigated circuit"},
      {"thermal", "Thermal-noise sampling bound over a time grid"},
  };
  for (const auto& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    sub->add_option("-c,--config", opt.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "Master seed");
    sub->add_option("--threads", opt.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("-o,--out", opt.out, "Output path; CSV goes next to it with a .csv extension");
    sub->add_option("--set", opt.sets, "Override a config key (dotted.key=value)");
    sub->add_flag("--record-timing", opt.record_timing, "Add wall time to provenance");
    if (std::string(e.name) == "bound") {
      sub->add_option("--formula", opt.formula, "Formula id");
    }
    if (std::string(e.name) != "verify" && std::string(e.name) != "contraction") {
      sub->add_option("--M", opt.m, "Qubits");
      sub->add_option("--L", opt.l, "Layers");
      sub->add_option("--gamma", opt.gamma, "Depolarizing strength");
      sub->add_option("--delta", opt.delta, "Accuracy");
      sub->add_option("--epsilon", opt.epsilon, "Failure probability");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  return run(app.get_subcommands().front()->get_name(), opt);
}
