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

#include "corpusforge/pseudolabel.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "corpusforge/kernels/kernels.hpp"
#include "corpusforge/log.hpp"
#include "corpusforge/parallel.hpp"

namespace corpusforge {

PseudolabelFailure::PseudolabelFailure(const std::string& message, std::vector<Omission> omissions)
    : std::runtime_error(message), omissions_(std::move(omissions)) {}

namespace {

Omission omission_from(const SystemId& system, std::string step, const std::exception& e) {
  if (const auto* be = dynamic_cast<const BackendError*>(&e)) {
    return Omission{system, std::move(step), be->kind(), be->what()};
  }
  return Omission{system, std::move(step), BackendErrorKind::kProtocol, e.what()};
}

}  // namespace

CandidateSet translate_with_all(std::string_view text, Language source_lang, Language target_lang,
                                std::span<const std::shared_ptr<Translator>> registry,
                                std::string_view label) {
  if (registry.empty()) throw std::invalid_argument("translation registry is empty");
  CandidateSet set;
  for (const auto& system : registry) {
    try {
      std::string hyp = system->translate(text, source_lang, target_lang);
      set.candidates.push_back({system->id(), std::move(hyp)});
    } catch (const std::exception& e) {
      set.omissions.push_back(omission_from(system->id(), "translate", e));
      log_event("warn", "candidate_omitted",
                {{"item", label}, {"system", system->id().name}, {"reason", e.what()}});
    }
  }
  if (set.candidates.empty()) {
    throw PseudolabelFailure("all systems failed for '" + std::string(label) + "'",
                             std::move(set.omissions));
  }
  return set;
}

CandidateSet generate_candidates(const CorpusRecord& record, Language target_lang,
                                 std::span<const std::shared_ptr<Translator>> registry) {
  if (record.task != Task::kAsr) {
    throw std::invalid_argument("record '" + record.id + "' is not an ASR record");
  }
  if (target_lang == record.source_lang) {
    throw std::invalid_argument("target language equals source language for '" + record.id + "'");
  }
  if (registry.empty()) throw std::invalid_argument("translation registry is empty");

  return translate_with_all(record.transcript, record.source_lang, target_lang, registry,
                            record.id);
}

ScoredCandidateSet score_candidates(std::string_view source_text, Language source_lang,
                                    Language target_lang, CandidateSet unscored,
                                    QeScorer& scorer) {
  ScoredCandidateSet out;
  out.omissions = std::move(unscored.omissions);
  for (auto& c : unscored.candidates) {
    try {
      QeScore s = scorer.score(source_text, c.hypothesis, source_lang, target_lang);
      out.candidates.push_back({std::move(c.system), std::move(c.hypothesis), s});
    } catch (const std::exception& e) {
      out.omissions.push_back(omission_from(c.system, "score", e));
      log_event("warn", "score_dropped", {{"system", c.system.name}, {"reason", e.what()}});
    }
  }
  if (out.candidates.empty()) {
    throw PseudolabelFailure("no hypothesis could be scored", std::move(out.omissions));
  }
  return out;
}

OracleDecision select_oracle(std::span<const TranslationCandidate> candidates, double threshold) {
  if (candidates.empty()) throw std::invalid_argument("select_oracle: empty candidate list");
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    // Strict > keeps the earliest of equal maxima.
    if (candidates[i].score.value() > candidates[best].score.value()) best = i;
  }
  OracleDecision decision{candidates[best], best, false, threshold};
  decision.kept = decision.best.score.value() >= threshold;
  return decision;
}

ScoreMatrix::ScoreMatrix(std::size_t records, std::size_t systems)
    : records_(records),
      systems_(systems),
      data_(records * systems, std::numeric_limits<double>::quiet_NaN()) {}

RetentionReport retention_report(const ScoreMatrix& scores, std::span<const std::string> systems,
                                 double threshold) {
  if (systems.size() != scores.systems()) {
    throw std::invalid_argument("retention_report: system name count does not match matrix");
  }
  RetentionReport report;
  report.threshold = threshold;
  report.records = scores.records();

  std::vector<std::size_t> kept(scores.systems());
  report.oracle_kept = kernels::count_retention(scores.data(), scores.records(), threshold, kept);

  const double n = static_cast<double>(report.records);
  for (std::size_t s = 0; s < systems.size(); ++s) {
    if (kept[s] > report.oracle_kept) {
      throw std::logic_error("oracle retention below system '" + systems[s] + "'");
    }
    report.systems.push_back({systems[s], kept[s], report.records ? kept[s] / n : 0.0});
  }
  report.oracle_rate = report.records ? report.oracle_kept / n : 0.0;

  for (std::size_t r = 0; r < scores.records(); ++r) {
    bool any = false;
    for (std::size_t s = 0; s < scores.systems() && !any; ++s) any = !std::isnan(scores.at(r, s));
    if (!any) ++report.failed;
  }
  report.kept = report.oracle_kept;
  report.dropped = report.records - report.kept - report.failed;
  return report;
}

nlohmann::ordered_json report_to_json(const RetentionReport& report, Language source_lang,
                                      Language target_lang) {
  nlohmann::ordered_json j;
  j["source_lang"] = to_code(source_lang);
  j["target_lang"] = to_code(target_lang);
  j["threshold"] = report.threshold;
  j["records"] = report.records;

  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& s : report.systems) {
    rows.push_back({{"model", s.system}, {"kept", s.kept}, {"percent_kept", 100.0 * s.rate}});
  }
  rows.push_back({{"model", "Oracle"},
                  {"kept", report.oracle_kept},
                  {"percent_kept", 100.0 * report.oracle_rate}});
  j["rows"] = std::move(rows);

  j["outcome"] = {{"kept", report.kept},
                  {"dropped", report.dropped},
                  {"failed", report.failed},
                  {"failed_exhausted", report.failed_exhausted}};
  nlohmann::ordered_json omissions = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.omissions) omissions[k] = v;
  j["omissions"] = std::move(omissions);
  nlohmann::ordered_json wins = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.oracle_wins) wins[k] = v;
  j["oracle_wins"] = std::move(wins);
  return j;
}

std::string pseudolabel_id(const std::string& source_id, Language target_lang) {
  return source_id + "-" + std::string(to_code(target_lang));
}

std::string pseudolabel_corpus_name(const std::string& source_corpus) {
  return source_corpus + " PL";
}

namespace {

struct RecordOutcome {
  std::optional<OracleDecision> decision;
  std::vector<Omission> omissions;
  std::vector<std::pair<std::size_t, double>> scores;  // (registry index, score)
  bool exhausted = false;
};

}  // namespace

PseudolabelResult pseudolabel_corpus(const DatasetManifest& asr_manifest, Language target_lang,
                                     const BackendRegistry& registry,
                                     const PseudolabelOptions& options) {
  if (!(options.threshold >= 0.0 && options.threshold <= 1.0)) {
    throw std::invalid_argument("threshold must lie in [0,1]");
  }
  registry.validate();
  if (registry.translators.empty()) throw std::invalid_argument("translation registry is empty");
  if (!registry.scorer) throw std::invalid_argument("registry has no QE scorer");
  for (const auto& r : asr_manifest.records) {
    if (r.task != Task::kAsr) {
      throw std::invalid_argument("pseudolabel input record '" + r.id + "' is not ASR");
    }
    if (r.source_lang == target_lang) {
      throw std::invalid_argument("record '" + r.id + "' is already in the target language");
    }
  }

  const auto& records = asr_manifest.records;
  const std::vector<SystemId> ids = registry.system_ids();
  std::map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < ids.size(); ++i) index_of[ids[i].name] = i;

  std::vector<RecordOutcome> outcomes(records.size());
  parallel_for(records.size(), options.jobs, [&](std::size_t i) {
    const CorpusRecord& record = records[i];
    RecordOutcome& out = outcomes[i];
    try {
      CandidateSet set = generate_candidates(record, target_lang, registry.translators);
      ScoredCandidateSet scored = score_candidates(record.transcript, record.source_lang,
                                                   target_lang, std::move(set), *registry.scorer);
      for (const auto& c : scored.candidates) {
        out.scores.emplace_back(index_of.at(c.system.name), c.score.value());
      }
      out.omissions = std::move(scored.omissions);
      out.decision = select_oracle(scored.candidates, options.threshold);
    } catch (const PseudolabelFailure& e) {
      out.omissions = e.omissions();
      out.exhausted = !out.omissions.empty();
      for (const auto& o : out.omissions) {
        if (o.kind != BackendErrorKind::kRetriesExhausted) out.exhausted = false;
      }
      log_event("error", "record_failed", {{"record", record.id}, {"reason", e.what()}});
    }
  });

  PseudolabelResult result;
  result.st_manifest.stage = Stage::kIft;
  result.scores = ScoreMatrix(records.size(), ids.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (const auto& [s, value] : outcomes[i].scores) result.scores.at(i, s) = value;
  }

  std::vector<std::string> names;
  for (const auto& id : ids) names.push_back(id.name);
  result.report = retention_report(result.scores, names, options.threshold);

  for (const auto& id : ids) {
    result.report.omissions[id.name] = 0;
    result.report.oracle_wins[id.name] = 0;
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    const RecordOutcome& out = outcomes[i];
    for (const auto& o : out.omissions) ++result.report.omissions[o.system.name];
    if (!out.decision) {
      if (out.exhausted) ++result.report.failed_exhausted;
      continue;
    }
    if (!out.decision->kept) continue;
    ++result.report.oracle_wins[out.decision->best.system.name];

    const CorpusRecord& src = records[i];
    CorpusRecord st;
    st.id = pseudolabel_id(src.id, target_lang);
    st.audio_path = src.audio_path;
    st.duration_s = src.duration_s;
    st.task = Task::kSt;
    st.source_lang = src.source_lang;
    st.target_lang = target_lang;
    st.transcript = src.transcript;
    st.target_text = out.decision->best.hypothesis;
    st.provenance.corpus_name = pseudolabel_corpus_name(src.provenance.corpus_name);
    st.provenance.license = src.provenance.license;
    st.provenance.system_id = out.decision->best.system.name;
    st.provenance.qe_score = out.decision->best.score.value();
    result.st_manifest.records.push_back(std::move(st));
  }
  return result;
}

}  // namespace corpusforge
