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

#include <ostream>
#include <string>
#include <vector>

#include "corpusforge/config.hpp"

namespace corpusforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitBackendExhausted = 3;

struct Environment {
  EnvLookup env = process_env();
  std::ostream* out = nullptr;  // stdout when null
};

// Entry point behind the `corpusforge` binary. `args[0]` is the program name.
int run(const std::vector<std::string>& args, const Environment& environment = {});

// Writes `content` to a sibling temporary file and renames it over `path`.
void write_atomic(const std::string& path, const std::string& content);

std::string tool_version();

}  // namespace corpusforge::cli
