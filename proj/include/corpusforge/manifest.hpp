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
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "json.hpp"

namespace corpusforge {

enum class Language : std::uint8_t { kEn, kDe, kZh };
enum class Task : std::uint8_t { kAsr, kSt, kSqa };
enum class Stage : std::uint8_t { kMa, kIft };

// Short codes ("en", "ASR", "ma") as used in manifests and on the command line.
std::string_view to_code(Language lang);
std::string_view to_code(Task task);
std::string_view to_code(Stage stage);

std::optional<Language> parse_language(std::string_view code);
std::optional<Task> parse_task(std::string_view code);
std::optional<Stage> parse_stage(std::string_view code);

// "<|en|>", "<|de|>", "<|zh|>"
std::string_view language_tag(Language lang);
// "<|transcribe|>", "<|translate|>", "<|reply|>"
std::string_view task_tag(Task task);
// "English", "German", "Chinese"
std::string_view language_name(Language lang);

inline constexpr std::string_view kUnanswerableSentinel = "unanswerable";

struct ProvenanceInfo {
  std::string corpus_name;
  std::string license;
  std::optional<std::string> system_id;
  std::optional<double> qe_score;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  bool operator==(const ProvenanceInfo&) const = default;
};

struct CorpusRecord {
  std::string id;
  std::string audio_path;
  double duration_s = 0.0;
  Task task = Task::kAsr;
  Language source_lang = Language::kEn;
  Language target_lang = Language::kEn;
  std::string transcript;
  std::string target_text;
  std::optional<std::string> question;
  std::optional<bool> answerable;
  ProvenanceInfo provenance;
  // Unknown fields kept verbatim when parsing in lenient mode.
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  bool operator==(const CorpusRecord&) const = default;
};

struct DatasetManifest {
  Stage stage = Stage::kIft;
  std::vector<CorpusRecord> records;

  bool operator==(const DatasetManifest&) const = default;
};

// Returns the first violated record invariant, or nullopt when the record is valid.
std::optional<std::string> check_record(const CorpusRecord& record);
// Stage-level rule for a single record (MA admits only ASR).
std::optional<std::string> check_stage(const CorpusRecord& record, Stage stage);

struct ManifestIssue {
  std::size_t line = 0;  // 1-based
  std::string kind;      // "syntax", "semantic", "duplicate"
  std::string message;
};

class ManifestError : public std::runtime_error {
 public:
  explicit ManifestError(std::vector<ManifestIssue> issues);
  const std::vector<ManifestIssue>& issues() const { return issues_; }

 private:
  std::vector<ManifestIssue> issues_;
};

struct ParseOptions {
  // Reject unknown fields instead of preserving them.
  bool strict = false;
};

// Parses one manifest line. Throws ManifestError (line 0) on failure.
CorpusRecord parse_record(std::string_view line, const ParseOptions& options = {});
nlohmann::ordered_json record_to_json(const CorpusRecord& record);

// Collects every rejected line before throwing, so callers see all offenders at once.
DatasetManifest parse_manifest(std::istream& input, Stage stage, const ParseOptions& options = {});
DatasetManifest parse_manifest(std::string_view text, Stage stage, const ParseOptions& options = {});
DatasetManifest load_manifest(const std::string& path, Stage stage, const ParseOptions& options = {});

void serialize_manifest(const DatasetManifest& manifest, std::ostream& out);
std::string serialize_manifest(const DatasetManifest& manifest);

struct MixtureKey {
  Task task;
  Language target_lang;
  std::string corpus_name;

  auto operator<=>(const MixtureKey&) const = default;
};

using MixtureTable = std::map<MixtureKey, double>;

// Hours per (task, target language, corpus), summed from duration_s.
MixtureTable mixture_stats(const DatasetManifest& manifest);
MixtureTable mixture_stats(const std::vector<CorpusRecord>& records);
nlohmann::ordered_json mixture_to_json(const MixtureTable& table);

}  // namespace corpusforge
