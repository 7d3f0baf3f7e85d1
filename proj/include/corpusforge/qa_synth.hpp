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
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "corpusforge/backends.hpp"
#include "corpusforge/manifest.hpp"
#include "corpusforge/pseudolabel.hpp"
#include "json.hpp"

namespace corpusforge {

inline constexpr double kSqaQuestionThreshold = 0.80;
inline constexpr std::size_t kMaxUnanswerablePerContext = 2;

struct QaPair {
  std::string question;
  std::string answer;
};

struct QaContext {
  std::string context_id;
  std::string transcript;
  std::string audio_path;
  double duration_s = 0.0;
  std::vector<std::string> example_questions;
  std::vector<QaPair> qa_pairs;
  Language source_lang = Language::kEn;
  std::string corpus_name = "SpokenSQuAD";
  std::string license = "-";
};

// One context per line. example_questions defaults to the qa_pairs questions.
// Throws ManifestError listing every bad line.
std::vector<QaContext> parse_contexts(std::istream& input);
std::vector<QaContext> load_contexts(const std::string& path);

struct TranslatedQaPair {
  std::string question;
  std::string answer;
  QeScore question_score;
  SystemId system;  // produced both the question and the answer
  Language target_lang;
};

struct QaPairDecision {
  enum class Status { kKept, kDropped, kFailed };
  Status status = Status::kFailed;
  std::optional<TranslatedQaPair> pair;        // set when kept
  std::optional<OracleDecision> question_oracle;  // set unless the question failed
  std::string reason;                          // set when failed
  bool exhausted = false;                      // failure caused by retry exhaustion only
};

// The question goes to every system and is oracle-selected; the pair is kept
// iff the best question score >= q_threshold. The answer is then translated by
// the winning system only, and is never QE-scored.
QaPairDecision translate_qa_pair(std::string_view question, std::string_view answer,
                                 Language source_lang, Language target_lang,
                                 const BackendRegistry& registry,
                                 double q_threshold = kSqaQuestionThreshold);

std::string_view unanswerable_prompt_template();

std::string build_unanswerable_prompt(const QaContext& context, std::string_view example_question,
                                      Language target_lang);

class UnanswerableParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParsedQuestions {
  std::vector<std::string> questions;  // at most two
  bool short_response = false;         // fewer than two usable lines
};

// One question per line; enumeration markers and blank lines are dropped,
// repeated questions collapse, and only the first two survive.
ParsedQuestions parse_unanswerable_response(std::string_view raw);

struct UnanswerableOptions {
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  GenerationParams params;
  // Calls per (context, lang) cell before it is skipped.
  int attempts = 2;
  std::string corpus_name = "Generated Data";
};

struct UnanswerableResult {
  std::vector<CorpusRecord> records;  // ordered by (context, language)
  std::vector<std::size_t> per_cell;  // record count of each (context, language) cell
  std::size_t cells = 0;
  std::size_t skipped = 0;
  std::size_t short_cells = 0;
};

UnanswerableResult synthesize_unanswerable(const std::vector<QaContext>& contexts,
                                           const std::vector<Language>& langs,
                                           Generator& generator,
                                           const UnanswerableOptions& options = {});

struct BalanceRow {
  Language lang;
  std::size_t answerable = 0;
  std::size_t unanswerable = 0;
  double ratio = 0.0;  // unanswerable / total
};

// One row per target language present, in language order. Throws
// std::invalid_argument on non-SQA input.
std::vector<BalanceRow> balance_report(const std::vector<CorpusRecord>& records);
nlohmann::ordered_json balance_to_json(const std::vector<BalanceRow>& rows);

struct QaLanguageStats {
  std::size_t pairs = 0;
  std::size_t kept = 0;
  std::size_t dropped = 0;
  std::size_t failed = 0;
  std::size_t failed_exhausted = 0;
};

struct QaSynthOptions {
  double q_threshold = kSqaQuestionThreshold;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  GenerationParams params;
};

struct QaSynthResult {
  std::vector<CorpusRecord> records;
  std::map<Language, QaLanguageStats> translation;
  UnanswerableResult unanswerable_summary;  // records moved into `records`
  std::vector<BalanceRow> balance;
};

// Full spoken-QA build: source-language pairs as-is, translated pairs for the
// other languages, plus up to two unanswerable questions per (context, lang).
QaSynthResult synthesize_qa(const std::vector<QaContext>& contexts,
                            const std::vector<Language>& langs, const BackendRegistry& registry,
                            const QaSynthOptions& options = {});

nlohmann::ordered_json qa_report_to_json(const QaSynthResult& result, double q_threshold);

}  // namespace corpusforge
