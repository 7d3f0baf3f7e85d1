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
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "corpusforge/backends.hpp"
#include "corpusforge/manifest.hpp"
#include "json.hpp"

namespace corpusforge {

inline constexpr double kStKeepThreshold = 0.85;

struct UnscoredCandidate {
  SystemId system;
  std::string hypothesis;
};

struct TranslationCandidate {
  SystemId system;
  std::string hypothesis;
  QeScore score;
};

// A registry system that produced no usable candidate for one source.
struct Omission {
  SystemId system;
  std::string step;  // "translate" or "score"
  BackendErrorKind kind;
  std::string reason;
};

struct CandidateSet {
  std::vector<UnscoredCandidate> candidates;  // registry order, gaps for omissions
  std::vector<Omission> omissions;
};

struct ScoredCandidateSet {
  std::vector<TranslationCandidate> candidates;
  std::vector<Omission> omissions;
};

class PseudolabelFailure : public std::runtime_error {
 public:
  PseudolabelFailure(const std::string& message, std::vector<Omission> omissions);
  const std::vector<Omission>& omissions() const { return omissions_; }

 private:
  std::vector<Omission> omissions_;
};

// Translates `text` with every registry system, in registry order. Failures
// become omissions; throws PseudolabelFailure if every system failed. `label`
// names the item in log lines.
CandidateSet translate_with_all(std::string_view text, Language source_lang, Language target_lang,
                                std::span<const std::shared_ptr<Translator>> registry,
                                std::string_view label);

// Translates one source with every registry system, in registry order.
// Throws std::invalid_argument on precondition failure and PseudolabelFailure
// if no system produced a hypothesis.
CandidateSet generate_candidates(const CorpusRecord& record, Language target_lang,
                                 std::span<const std::shared_ptr<Translator>> registry);

// Scores every hypothesis against `source_text`. Scoring failures become
// omissions; throws PseudolabelFailure if nothing survives.
ScoredCandidateSet score_candidates(std::string_view source_text, Language source_lang,
                                    Language target_lang, CandidateSet unscored,
                                    QeScorer& scorer);

struct OracleDecision {
  TranslationCandidate best;
  std::size_t best_index = 0;  // position in the candidate list
  bool kept = false;
  double threshold = 0.0;
};

// Argmax by score, earliest candidate on ties; kept iff best >= threshold.
OracleDecision select_oracle(std::span<const TranslationCandidate> candidates, double threshold);

/// records x systems score table, stored system-major for the retention
/// kernel. NaN means the system produced no scored hypothesis for the record.
class ScoreMatrix {
 public:
  ScoreMatrix(std::size_t records, std::size_t systems);

  std::size_t records() const { return records_; }
  std::size_t systems() const { return systems_; }

  double& at(std::size_t record, std::size_t system) { return data_[system * records_ + record]; }
  double at(std::size_t record, std::size_t system) const {
    return data_[system * records_ + record];
  }
  std::span<const double> data() const { return data_; }

 private:
  std::size_t records_;
  std::size_t systems_;
  std::vector<double> data_;
};

struct SystemRetention {
  std::string system;
  std::size_t kept = 0;
  double rate = 0.0;
};

struct RetentionReport {
  double threshold = kStKeepThreshold;
  std::size_t records = 0;
  std::vector<SystemRetention> systems;
  std::size_t oracle_kept = 0;
  double oracle_rate = 0.0;

  // Per-record outcome; kept + dropped + failed == records.
  std::size_t kept = 0;
  std::size_t dropped = 0;
  std::size_t failed = 0;
  // Failed records where every system ran out of transport retries.
  std::size_t failed_exhausted = 0;

  std::map<std::string, std::size_t> omissions;
  std::map<std::string, std::size_t> oracle_wins;
};

// Per-system and oracle retention over a score matrix. Rows with no score at
// all count as failed. Throws std::logic_error if oracle dominance is violated.
RetentionReport retention_report(const ScoreMatrix& scores, std::span<const std::string> systems,
                                 double threshold);

nlohmann::ordered_json report_to_json(const RetentionReport& report, Language source_lang,
                                      Language target_lang);

struct PseudolabelOptions {
  double threshold = kStKeepThreshold;
  std::size_t jobs = 1;
};

struct PseudolabelResult {
  DatasetManifest st_manifest;
  RetentionReport report;
  ScoreMatrix scores{0, 0};
};

// Fans every ASR record out to all systems, oracle-selects, and keeps records
// whose best score clears the threshold. Per-record failures are tallied.
PseudolabelResult pseudolabel_corpus(const DatasetManifest& asr_manifest, Language target_lang,
                                     const BackendRegistry& registry,
                                     const PseudolabelOptions& options = {});

// Id and corpus name given to a pseudolabeled record.
std::string pseudolabel_id(const std::string& source_id, Language target_lang);
std::string pseudolabel_corpus_name(const std::string& source_corpus);

}  // namespace corpusforge
