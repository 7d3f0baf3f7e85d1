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

#include "corpusforge/log.hpp"

#include <iostream>
#include <mutex>

namespace corpusforge {

namespace {
std::mutex g_log_mutex;
std::ostream* g_sink = &std::cerr;
}  // namespace

void log_event(std::string_view level, std::string_view event, nlohmann::ordered_json fields) {
  nlohmann::ordered_json line;
  line["level"] = level;
  line["event"] = event;
  for (auto& [key, value] : fields.items()) line[key] = std::move(value);
  const std::string text = line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);

  std::lock_guard lock(g_log_mutex);
  if (g_sink != nullptr) *g_sink << text << '\n';
}

std::ostream* set_log_sink(std::ostream* sink) {
  std::lock_guard lock(g_log_mutex);
  std::ostream* previous = g_sink;
  g_sink = sink;
  return previous;
}

}  // namespace corpusforge
