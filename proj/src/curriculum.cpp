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

#include "corpusforge/curriculum.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "corpusforge/parallel.hpp"

namespace corpusforge {

std::string tag_for(Task task, Language target_lang) {
  std::string out(language_tag(target_lang));
  out += task_tag(task);
  return out;
}

namespace {

bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::size_t count_whitespace_tokens(std::string_view text) {
  std::size_t tokens = 0;
  bool in_token = false;
  for (unsigned char c : text) {
    if (is_ascii_space(c)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++tokens;
    }
  }
  return tokens;
}

std::size_t count_non_space_code_points(std::string_view text) {
  static constexpr std::string_view kIdeographicSpace = "\xE3\x80\x80";
  std::size_t count = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if ((c & 0xC0) == 0x80) continue;  // continuation byte
    if (is_ascii_space(c)) continue;
    if (text.substr(i, kIdeographicSpace.size()) == kIdeographicSpace) continue;
    ++count;
  }
  return count;
}

}  // namespace

std::size_t length_hint_value(std::string_view target_text, Language target_lang) {
  return target_lang == Language::kZh ? count_non_space_code_points(target_text)
                                      : count_whitespace_tokens(target_text);
}

std::string length_hint(std::string_view target_text, Language target_lang) {
  return "<|len:" + std::to_string(length_hint_value(target_text, target_lang)) + "|>";
}

bool draw_length_hint(const HintPolicy& policy, std::string_view record_id) {
  SplitMix64 rng = record_stream(policy.rng_seed, record_id);
  return rng.uniform() < policy.probability;
}

RenderedExample render_example(const CorpusRecord& record, const HintPolicy& policy,
                               SplitMix64& rng, const SpeechGeometryConfig& geometry) {
  RenderedExample ex;
  ex.id = record.id;
  ex.audio_path = record.audio_path;
  ex.duration_s = record.duration_s;
  ex.task = record.task;
  ex.target_lang = record.target_lang;
  ex.corpus_name = record.provenance.corpus_name;
  ex.target_text = record.target_text;
  ex.audio_token_budget = audio_token_budget(record.duration_s, geometry);
  // u < p: never at p = 0, always at p = 1 since u is in [0, 1).
  ex.has_length_hint = rng.uniform() < policy.probability;

  const std::string tags = tag_for(record.task, record.target_lang);
  const std::string hint =
      ex.has_length_hint ? length_hint(record.target_text, record.target_lang) : std::string();
  ex.prefix_text = policy.placement == HintPlacement::kAfterTags ? tags + hint : hint + tags;
  if (record.task == Task::kSqa && record.question) ex.prefix_text += *record.question;
  return ex;
}

RenderedExample render_example(const CorpusRecord& record, const HintPolicy& policy,
                               const SpeechGeometryConfig& geometry) {
  SplitMix64 rng = record_stream(policy.rng_seed, record.id);
  return render_example(record, policy, rng, geometry);
}

nlohmann::ordered_json rendered_to_json(const RenderedExample& ex) {
  nlohmann::ordered_json j;
  j["id"] = ex.id;
  j["audio_path"] = ex.audio_path;
  j["duration_s"] = ex.duration_s;
  j["task"] = to_code(ex.task);
  j["target_lang"] = to_code(ex.target_lang);
  j["corpus_name"] = ex.corpus_name;
  j["prefix_text"] = ex.prefix_text;
  j["target_text"] = ex.target_text;
  j["audio_token_budget"] = ex.audio_token_budget;
  j["has_length_hint"] = ex.has_length_hint;
  return j;
}

void serialize_rendered(const std::vector<RenderedExample>& examples, std::ostream& out) {
  for (const auto& ex : examples) out << rendered_to_json(ex).dump() << '\n';
}

std::string serialize_rendered(const std::vector<RenderedExample>& examples) {
  std::ostringstream os;
  serialize_rendered(examples, os);
  return os.str();
}

StageGateError::StageGateError(const std::string& message, std::vector<std::string> offenders)
    : std::runtime_error(message), offenders_(std::move(offenders)) {}

AssembledStage assemble_stage(const std::vector<NamedManifest>& inputs, Stage stage,
                              const HintPolicy& policy, const SpeechGeometryConfig& geometry,
                              std::size_t jobs) {
  if (!(policy.probability >= 0.0 && policy.probability <= 1.0)) {
    throw std::invalid_argument("hint probability must lie in [0,1]");
  }
  validate(geometry);

  if (stage == Stage::kMa) {
    std::vector<std::string> offenders;
    for (const auto& in : inputs) {
      for (const auto& r : in.manifest.records) {
        if (r.task != Task::kAsr) offenders.push_back(in.name + ":" + r.id);
      }
    }
    if (!offenders.empty()) {
      std::string message = "MA stage admits only ASR records; offenders:";
      for (const auto& o : offenders) message += " " + o;
      throw StageGateError(message, std::move(offenders));
    }
  }

  AssembledStage out;
  out.stage = stage;
  std::vector<const CorpusRecord*> records;
  std::unordered_set<std::string> seen;
  for (const auto& in : inputs) {
    for (const auto& r : in.manifest.records) {
      if (!seen.insert(r.id).second) {
        throw std::invalid_argument("duplicate record id '" + r.id + "' across stage inputs");
      }
      if (r.duration_s <= geometry.max_audio_s) {
        records.push_back(&r);
      } else {
        out.dropped_too_long.push_back(r.id);
      }
    }
  }

  out.examples.resize(records.size());
  parallel_for(records.size(), jobs, [&](std::size_t i) {
    out.examples[i] = render_example(*records[i], policy, geometry);
  });

  // Seeded shuffle: order by a keyed hash of the id, so the result depends
  // only on (seed, id set) and not on input order or thread count.
  std::vector<std::uint64_t> keys(out.examples.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    keys[i] = hash_combine(policy.rng_seed ^ 0x5348554646ULL, fnv1a64(out.examples[i].id));
  }
  std::vector<std::size_t> order(out.examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (keys[a] != keys[b]) return keys[a] < keys[b];
    return out.examples[a].id < out.examples[b].id;
  });
  std::vector<RenderedExample> shuffled;
  shuffled.reserve(order.size());
  for (std::size_t i : order) shuffled.push_back(std::move(out.examples[i]));
  out.examples = std::move(shuffled);

  std::vector<CorpusRecord> emitted;
  emitted.reserve(records.size());
  for (const CorpusRecord* r : records) emitted.push_back(*r);
  out.stats = mixture_stats(emitted);
  out.hinted = static_cast<std::size_t>(std::count_if(
      out.examples.begin(), out.examples.end(), [](const auto& e) { return e.has_length_hint; }));
  return out;
}

nlohmann::ordered_json stage_stats_to_json(const AssembledStage& assembled) {
  nlohmann::ordered_json j;
  j["stage"] = to_code(assembled.stage);
  j["examples"] = assembled.examples.size();
  j["with_length_hint"] = assembled.hinted;
  j["dropped_too_long"] = assembled.dropped_too_long.size();
  j["mixture"] = mixture_to_json(assembled.stats);
  return j;
}

}  // namespace corpusforge
