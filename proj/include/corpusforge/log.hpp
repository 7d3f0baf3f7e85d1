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
#include <string_view>

#include "json.hpp"

namespace corpusforge {

// One JSON object per line on the sink (stderr by default).
void log_event(std::string_view level, std::string_view event,
               nlohmann::ordered_json fields = nlohmann::ordered_json::object());

// nullptr silences logging. Returns the previous sink.
std::ostream* set_log_sink(std::ostream* sink);

}  // namespace corpusforge
