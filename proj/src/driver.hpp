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

#include <string>
#include <vector>

#include "json.hpp"
#include "qembound/channels.hpp"

namespace qembound::driver {

using Json = nlohmann::ordered_json;

enum class Outcome { Ok, Failed, Unachievable };

struct Output {
  /// One JSON record per line.
  std::string jsonl;
  /// Empty when the command has no tabular output.
  std::string csv;
  Outcome outcome = Outcome::Ok;
};

std::vector<std::string> commands();

/// Merges `overrides` into `config` (dotted keys address nested objects),
/// validates the whole configuration, then runs the command. Configuration
/// problems throw ConfigError before any computation starts.
Output run(const std::string& command, const Json& config, const Json& overrides, int threads);

/// Builds a channel from its JSON spec ({"type": "depolarizing", "p": 0.1}, ...).
channels::KrausChannel parse_channel_spec(const Json& spec);

/// Version string of the library.
const char* version();

}  // namespace qembound::driver
