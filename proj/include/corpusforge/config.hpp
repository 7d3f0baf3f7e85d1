/* Copyright 2026 The corpusforge Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "corpusforge/backends.hpp"
#include "corpusforge/curriculum.hpp"
#include "corpusforge/geometry.hpp"
#include "json.hpp"

namespace corpusforge {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One [backends.<name>] section. `kind` selects the client:
//   http                      any role; needs url
//   mock-echo, mock-down      translators (variant = echo suffix)
//   mock-hash, mock-table     scorer (seed / default_score)
//   mock-template, mock-down  generator (lines, style)
struct BackendSpec {
  std::string name;
  std::string kind = "http";
  std::string url;
  std::optional<std::string> token;
  int max_in_flight = 8;
  int timeout_ms = 30000;
  std::string variant;
  std::uint64_t seed = 0;
  double default_score = 0.5;
  int lines = 2;
  std::string style = "plain";
};

struct Thresholds {
  double st = 0.85;
  double sqa_question = 0.80;
};

struct RetrySettings {
  int max_attempts = 5;
  int base_delay_ms = 250;
  double factor = 2.0;
};

struct RunConfig {
  std::string config_path;
  std::uint64_t seed = 0;
  std::optional<std::size_t> jobs;
  bool strict = false;
  std::vector<BackendSpec> translators;  // registry order
  std::optional<BackendSpec> scorer;
  std::optional<BackendSpec> generator;
  Thresholds thresholds;
  RetrySettings retry;
  GenerationParams generation;
  SpeechGeometryConfig geometry;
  HintPolicy hint;

  std::size_t effective_jobs() const;
};

// Parses the INI-style config file. Unknown sections and keys are errors.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text, const std::string& origin = "<string>");

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

// CORPUSFORGE_SEED, CORPUSFORGE_JOBS, CORPUSFORGE_BACKEND_<NAME>_URL.
void apply_env(RunConfig& config, const EnvLookup& env);

// "tower-13b" -> "CORPUSFORGE_BACKEND_TOWER_13B_URL"
std::string backend_url_env_name(const std::string& backend);

// Thresholds, hint probability and geometry; registry when requested.
void validate(const RunConfig& config, bool need_translation_registry, bool need_generator);

BackendRegistry build_registry(const RunConfig& config);

// Output-affecting settings only (jobs and paths excluded).
nlohmann::ordered_json effective_config_json(const RunConfig& config);
std::string config_hash(const RunConfig& config);

}  // namespace corpusforge
