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

#include "corpusforge/manifest.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace corpusforge {

using nlohmann::ordered_json;

std::string_view to_code(Language lang) {
  switch (lang) {
    case Language::kEn: return "en";
    case Language::kDe: return "de";
    case Language::kZh: return "zh";
  }
  return "?";
}

std::string_view to_code(Task task) {
  switch (task) {
    case Task::kAsr: return "ASR";
    case Task::kSt: return "ST";
    case Task::kSqa: return "SQA";
  }
  return "?";
}

std::string_view to_code(Stage stage) {
  return stage == Stage::kMa ? "ma" : "ift";
}

std::optional<Language> parse_language(std::string_view code) {
  if (code == "en") return Language::kEn;
  if (code == "de") return Language::kDe;
  if (code == "zh") return Language::kZh;
  return std::nullopt;
}

std::optional<Task> parse_task(std::string_view code) {
  if (code == "ASR") return Task::kAsr;
  if (code == "ST") return Task::kSt;
  if (code == "SQA") return Task::kSqa;
  return std::nullopt;
}

std::optional<Stage> parse_stage(std::string_view code) {
  if (code == "ma" || code == "MA") return Stage::kMa;
  if (code == "ift" || code == "IFT") return Stage::kIft;
  return std::nullopt;
}

std::string_view language_tag(Language lang) {
  switch (lang) {
    case Language::kEn: return "<|en|>";
    case Language::kDe: return "<|de|>";
    case Language::kZh: return "<|zh|>";
  }
  return "";
}

std::string_view task_tag(Task task) {
  switch (task) {
    case Task::kAsr: return "<|transcribe|>";
    case Task::kSt: return "<|translate|>";
    case Task::kSqa: return "<|reply|>";
  }
  return "";
}

std::string_view language_name(Language lang) {
  switch (lang) {
    case Language::kEn: return "English";
    case Language::kDe: return "German";
    case Language::kZh: return "Chinese";
  }
  return "";
}

std::optional<std::string> check_record(const CorpusRecord& r) {
  if (r.id.empty()) return "id must be non-empty";
  if (!(r.duration_s > 0.0) || !std::isfinite(r.duration_s)) {
    return "duration_s must be a finite positive number";
  }
  if (r.task == Task::kAsr) {
    if (r.source_lang != r.target_lang) return "ASR record must have source_lang == target_lang";
    if (r.target_text != r.transcript) return "ASR record must have target_text == transcript";
  }
  if (r.task == Task::kSqa) {
    if (!r.question) return "SQA record requires question";
    if (!r.answerable) return "SQA record requires answerable";
  } else if (r.question || r.answerable) {
    return "question/answerable are only valid on SQA records";
  }
  if (r.answerable && !*r.answerable && r.target_text != kUnanswerableSentinel) {
    return "unanswerable record must carry target_text \"unanswerable\"";
  }
  if (r.provenance.qe_score) {
    double s = *r.provenance.qe_score;
    if (!(s >= 0.0 && s <= 1.0)) return "provenance.qe_score must lie in [0,1]";
  }
  if (r.provenance.system_id && r.provenance.system_id->empty()) {
    return "provenance.system_id must be non-empty when present";
  }
  return std::nullopt;
}

std::optional<std::string> check_stage(const CorpusRecord& r, Stage stage) {
  if (stage == Stage::kMa && r.task != Task::kAsr) {
    return "MA stage admits only ASR records (found " + std::string(to_code(r.task)) + ")";
  }
  return std::nullopt;
}

ManifestError::ManifestError(std::vector<ManifestIssue> issues)
    : std::runtime_error([&] {
        std::ostringstream os;
        for (std::size_t i = 0; i < issues.size(); ++i) {
          if (i) os << "; ";
          if (issues[i].line) os << "line " << issues[i].line << ": ";
          os << issues[i].kind << ": " << issues[i].message;
        }
        return os.str();
      }()),
      issues_(std::move(issues)) {}

namespace {

[[noreturn]] void fail(std::string kind, std::string message) {
  throw ManifestError({ManifestIssue{0, std::move(kind), std::move(message)}});
}

std::string take_string(ordered_json& obj, const char* key, bool required) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) fail("syntax", std::string("missing field '") + key + "'");
    return {};
  }
  if (!it->is_string()) fail("syntax", std::string("field '") + key + "' must be a string");
  std::string value = it->get<std::string>();
  obj.erase(it);
  return value;
}

std::optional<std::string> take_optional_string(ordered_json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (it != obj.end()) obj.erase(it);
    return std::nullopt;
  }
  if (!it->is_string()) fail("syntax", std::string("field '") + key + "' must be a string");
  std::string value = it->get<std::string>();
  obj.erase(it);
  return value;
}

std::optional<double> take_optional_number(ordered_json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (it != obj.end()) obj.erase(it);
    return std::nullopt;
  }
  if (!it->is_number()) fail("syntax", std::string("field '") + key + "' must be a number");
  double value = it->get<double>();
  obj.erase(it);
  return value;
}

Language take_language(ordered_json& obj, const char* key) {
  std::string code = take_string(obj, key, true);
  auto lang = parse_language(code);
  if (!lang) fail("semantic", std::string("field '") + key + "' has unknown language '" + code + "'");
  return *lang;
}

void reject_unknown(const ordered_json& rest, const char* where) {
  if (!rest.empty()) {
    fail("syntax", std::string("unknown field '") + rest.begin().key() + "' in " + where);
  }
}

}  // namespace

CorpusRecord parse_record(std::string_view line, const ParseOptions& options) {
  ordered_json obj = ordered_json::parse(line.begin(), line.end(), nullptr, false);
  if (obj.is_discarded()) fail("syntax", "not valid JSON");
  if (!obj.is_object()) fail("syntax", "record must be a JSON object");

  CorpusRecord r;
  r.id = take_string(obj, "id", true);
  r.audio_path = take_string(obj, "audio_path", true);
  auto duration = take_optional_number(obj, "duration_s");
  if (!duration) fail("syntax", "missing field 'duration_s'");
  r.duration_s = *duration;

  std::string task = take_string(obj, "task", true);
  auto parsed_task = parse_task(task);
  if (!parsed_task) fail("semantic", "unknown task '" + task + "'");
  r.task = *parsed_task;
  r.source_lang = take_language(obj, "source_lang");
  r.target_lang = take_language(obj, "target_lang");
  r.transcript = take_string(obj, "transcript", true);
  r.target_text = take_string(obj, "target_text", true);
  r.question = take_optional_string(obj, "question");

  if (auto it = obj.find("answerable"); it != obj.end()) {
    if (!it->is_null()) {
      if (!it->is_boolean()) fail("syntax", "field 'answerable' must be a boolean");
      r.answerable = it->get<bool>();
    }
    obj.erase(it);
  }

  auto prov_it = obj.find("provenance");
  if (prov_it == obj.end()) fail("syntax", "missing field 'provenance'");
  if (!prov_it->is_object()) fail("syntax", "field 'provenance' must be an object");
  ordered_json prov = std::move(*prov_it);
  obj.erase(prov_it);
  r.provenance.corpus_name = take_string(prov, "corpus_name", true);
  r.provenance.license = take_string(prov, "license", true);
  r.provenance.system_id = take_optional_string(prov, "system_id");
  r.provenance.qe_score = take_optional_number(prov, "qe_score");

  if (options.strict) {
    reject_unknown(prov, "provenance");
    reject_unknown(obj, "record");
  }
  r.provenance.extra = std::move(prov);
  r.extra = std::move(obj);

  if (auto violation = check_record(r)) fail("semantic", *violation);
  return r;
}

ordered_json record_to_json(const CorpusRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["audio_path"] = r.audio_path;
  j["duration_s"] = r.duration_s;
  j["task"] = to_code(r.task);
  j["source_lang"] = to_code(r.source_lang);
  j["target_lang"] = to_code(r.target_lang);
  j["transcript"] = r.transcript;
  j["target_text"] = r.target_text;
  if (r.question) j["question"] = *r.question;
  if (r.answerable) j["answerable"] = *r.answerable;

  ordered_json prov;
  prov["corpus_name"] = r.provenance.corpus_name;
  prov["license"] = r.provenance.license;
  if (r.provenance.system_id) prov["system_id"] = *r.provenance.system_id;
  if (r.provenance.qe_score) prov["qe_score"] = *r.provenance.qe_score;
  for (const auto& [key, value] : r.provenance.extra.items()) prov[key] = value;
  j["provenance"] = std::move(prov);

  for (const auto& [key, value] : r.extra.items()) j[key] = value;
  return j;
}

DatasetManifest parse_manifest(std::istream& input, Stage stage, const ParseOptions& options) {
  DatasetManifest manifest;
  manifest.stage = stage;
  std::vector<ManifestIssue> issues;
  std::unordered_set<std::string> seen;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(input, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      CorpusRecord record = parse_record(line, options);
      if (auto violation = check_stage(record, stage)) {
        issues.push_back({line_no, "semantic", *violation});
        continue;
      }
      if (!seen.insert(record.id).second) {
        issues.push_back({line_no, "duplicate", "duplicate id '" + record.id + "'"});
        continue;
      }
      manifest.records.push_back(std::move(record));
    } catch (const ManifestError& e) {
      for (auto issue : e.issues()) {
        issue.line = line_no;
        issues.push_back(std::move(issue));
      }
    }
  }
  if (!issues.empty()) throw ManifestError(std::move(issues));
  return manifest;
}

DatasetManifest parse_manifest(std::string_view text, Stage stage, const ParseOptions& options) {
  std::istringstream in{std::string(text)};
  return parse_manifest(in, stage, options);
}

DatasetManifest load_manifest(const std::string& path, Stage stage, const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ManifestError({ManifestIssue{0, "io", "cannot open manifest '" + path + "'"}});
  }
  return parse_manifest(in, stage, options);
}

void serialize_manifest(const DatasetManifest& manifest, std::ostream& out) {
  for (const auto& record : manifest.records) {
    out << record_to_json(record).dump(-1, ' ', false, nlohmann::json::error_handler_t::strict)
        << '\n';
  }
}

std::string serialize_manifest(const DatasetManifest& manifest) {
  std::ostringstream os;
  serialize_manifest(manifest, os);
  return os.str();
}

MixtureTable mixture_stats(const std::vector<CorpusRecord>& records) {
  std::map<MixtureKey, double> seconds;
  for (const auto& r : records) {
    seconds[MixtureKey{r.task, r.target_lang, r.provenance.corpus_name}] += r.duration_s;
  }
  MixtureTable hours;
  for (const auto& [key, s] : seconds) hours.emplace(key, s / 3600.0);
  return hours;
}

MixtureTable mixture_stats(const DatasetManifest& manifest) {
  return mixture_stats(manifest.records);
}

ordered_json mixture_to_json(const MixtureTable& table) {
  ordered_json rows = ordered_json::array();
  double total = 0.0;
  for (const auto& [key, hours] : table) {
    ordered_json row;
    row["task"] = to_code(key.task);
    row["target_lang"] = to_code(key.target_lang);
    row["corpus_name"] = key.corpus_name;
    row["hours"] = hours;
    rows.push_back(std::move(row));
    total += hours;
  }
  ordered_json out;
  out["rows"] = std::move(rows);
  out["total_hours"] = total;
  return out;
}

}  // namespace corpusforge
