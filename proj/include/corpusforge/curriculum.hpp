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
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "corpusforge/geometry.hpp"
#include "corpusforge/manifest.hpp"
#include "corpusforge/rng.hpp"
#include "json.hpp"

namespace corpusforge {

inline constexpr double kDefaultHintProbability = 0.95;

enum class HintPlacement : std::uint8_t { kAfterTags, kBeforeTags };

struct HintPolicy {
  double probability = kDefaultHintProbability;
  std::uint64_t rng_seed = 0;
  HintPlacement placement = HintPlacement::kAfterTags;
};

struct RenderedExample {
  std::string id;
  std::string audio_path;
  double duration_s = 0.0;
  Task task = Task::kAsr;
  Language target_lang = Language::kEn;
  std::string corpus_name;
  std::string prefix_text;
  std::string target_text;
  std::int64_t audio_token_budget = 0;
  bool has_length_hint = false;

  bool operator==(const RenderedExample&) const = default;
};

// Language tag immediately followed by task tag, e.g. "<|en|><|transcribe|>".
std::string tag_for(Task task, Language target_lang);

// Whitespace-separated tokens for en/de; non-whitespace code points for zh.
std::size_t length_hint_value(std::string_view target_text, Language target_lang);
// "<|len:N|>"
std::string length_hint(std::string_view target_text, Language target_lang);

// Per-record Bernoulli(policy.probability) draw from a stream keyed on
// (seed, record id), so the outcome never depends on processing order.
bool draw_length_hint(const HintPolicy& policy, std::string_view record_id);

// Uses the caller's stream for the hint draw.
RenderedExample render_example(const CorpusRecord& record, const HintPolicy& policy,
                               SplitMix64& rng, const SpeechGeometryConfig& geometry = {});
// Uses the per-record stream from draw_length_hint.
RenderedExample render_example(const CorpusRecord& record, const HintPolicy& policy,
                               const SpeechGeometryConfig& geometry = {});

nlohmann::ordered_json rendered_to_json(const RenderedExample& example);
void serialize_rendered(const std::vector<RenderedExample>& examples, std::ostream& out);
std::string serialize_rendered(const std::vector<RenderedExample>& examples);

struct NamedManifest {
  std::string name;
  DatasetManifest manifest;
};

class StageGateError : public std::runtime_error {
 public:
  StageGateError(const std::string& message, std::vector<std::string> offenders);
  const std::vector<std::string>& offenders() const { return offenders_; }

 private:
  std::vector<std::string> offenders_;
};

struct AssembledStage {
  Stage stage = Stage::kIft;
  std::vector<RenderedExample> examples;  // seeded shuffle order
  MixtureTable stats;                     // over the emitted examples
  std::vector<std::string> dropped_too_long;
  std::size_t hinted = 0;
};

// Length-filters, renders and shuffles the union of the inputs. MA accepts
// ASR only and throws StageGateError naming every offender ("name:id").
// Duplicate ids across inputs throw std::invalid_argument.
AssembledStage assemble_stage(const std::vector<NamedManifest>& inputs, Stage stage,
                              const HintPolicy& policy, const SpeechGeometryConfig& geometry = {},
                              std::size_t jobs = 1);

nlohmann::ordered_json stage_stats_to_json(const AssembledStage& assembled);

}  // namespace corpusforge
