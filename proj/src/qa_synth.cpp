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

#include "corpusforge/qa_synth.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "corpusforge/log.hpp"
#include "corpusforge/parallel.hpp"
#include "corpusforge/rng.hpp"

namespace corpusforge {

using nlohmann::ordered_json;

// --- context files -------------------------------------------------------------

namespace {

QaContext parse_context(const std::string& line) {
  const ordered_json j = ordered_json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw std::invalid_argument("not a JSON object");

  auto str = [&](const char* key, bool required, std::string fallback = {}) {
    auto it = j.find(key);
    if (it == j.end()) {
      if (required) throw std::invalid_argument(std::string("missing field '") + key + "'");
      return fallback;
    }
    if (!it->is_string()) throw std::invalid_argument(std::string("'") + key + "' must be a string");
    return it->get<std::string>();
  };

  QaContext c;
  c.context_id = str("context_id", true);
  c.transcript = str("transcript", true);
  c.audio_path = str("audio_path", true);
  c.corpus_name = str("corpus_name", false, c.corpus_name);
  c.license = str("license", false, c.license);
  const std::string lang = str("source_lang", false, "en");
  auto parsed_lang = parse_language(lang);
  if (!parsed_lang) throw std::invalid_argument("unknown source_lang '" + lang + "'");
  c.source_lang = *parsed_lang;

  auto dur = j.find("duration_s");
  if (dur == j.end() || !dur->is_number()) throw std::invalid_argument("missing numeric 'duration_s'");
  c.duration_s = dur->get<double>();
  if (!(c.duration_s > 0.0)) throw std::invalid_argument("duration_s must be positive");

  if (auto pairs = j.find("qa_pairs"); pairs != j.end()) {
    if (!pairs->is_array()) throw std::invalid_argument("'qa_pairs' must be an array");
    for (const auto& p : *pairs) {
      if (!p.is_object() || !p.contains("question") || !p.contains("answer") ||
          !p["question"].is_string() || !p["answer"].is_string()) {
        throw std::invalid_argument("qa_pairs entries need string 'question' and 'answer'");
      }
      c.qa_pairs.push_back({p["question"].get<std::string>(), p["answer"].get<std::string>()});
      if (c.qa_pairs.back().question.empty() || c.qa_pairs.back().answer.empty()) {
        throw std::invalid_argument("qa_pairs entries must be non-empty");
      }
    }
  }
  if (auto ex = j.find("example_questions"); ex != j.end()) {
    if (!ex->is_array()) throw std::invalid_argument("'example_questions' must be an array");
    for (const auto& q : *ex) {
      if (!q.is_string()) throw std::invalid_argument("example questions must be strings");
      c.example_questions.push_back(q.get<std::string>());
    }
  } else {
    for (const auto& p : c.qa_pairs) c.example_questions.push_back(p.question);
  }
  if (c.example_questions.empty()) {
    throw std::invalid_argument("context needs at least one example question");
  }
  return c;
}

}  // namespace

std::vector<QaContext> parse_contexts(std::istream& input) {
  std::vector<QaContext> contexts;
  std::vector<ManifestIssue> issues;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(input, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      QaContext c = parse_context(line);
      if (!seen.insert(c.context_id).second) {
        issues.push_back({line_no, "duplicate", "duplicate context_id '" + c.context_id + "'"});
        continue;
      }
      contexts.push_back(std::move(c));
    } catch (const std::exception& e) {
      issues.push_back({line_no, "syntax", e.what()});
    }
  }
  if (!issues.empty()) throw ManifestError(std::move(issues));
  return contexts;
}

std::vector<QaContext> load_contexts(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ManifestError({ManifestIssue{0, "io", "cannot open contexts '" + path + "'"}});
  return parse_contexts(in);
}

// --- QA pair translation -------------------------------------------------------

QaPairDecision translate_qa_pair(std::string_view question, std::string_view answer,
                                 Language source_lang, Language target_lang,
                                 const BackendRegistry& registry, double q_threshold) {
  if (question.empty() || answer.empty()) {
    throw std::invalid_argument("translate_qa_pair: question and answer must be non-empty");
  }
  if (!registry.scorer) throw std::invalid_argument("registry has no QE scorer");

  QaPairDecision decision;
  auto all_exhausted = [](const std::vector<Omission>& omissions) {
    return !omissions.empty() &&
           std::all_of(omissions.begin(), omissions.end(), [](const Omission& o) {
             return o.kind == BackendErrorKind::kRetriesExhausted;
           });
  };

  ScoredCandidateSet scored;
  try {
    CandidateSet set = translate_with_all(question, source_lang, target_lang,
                                          registry.translators, question);
    scored = score_candidates(question, source_lang, target_lang, std::move(set), *registry.scorer);
  } catch (const PseudolabelFailure& e) {
    decision.status = QaPairDecision::Status::kFailed;
    decision.reason = std::string("question: ") + e.what();
    decision.exhausted = all_exhausted(e.omissions());
    return decision;
  }

  const OracleDecision oracle = select_oracle(scored.candidates, q_threshold);
  decision.question_oracle = oracle;
  if (!oracle.kept) {
    decision.status = QaPairDecision::Status::kDropped;
    return decision;
  }

  const auto& winner_name = oracle.best.system.name;
  auto winner = std::find_if(registry.translators.begin(), registry.translators.end(),
                             [&](const auto& t) { return t->id().name == winner_name; });
  // The answer goes to the question's winner only; no other system is tried.
  try {
    std::string translated_answer = (*winner)->translate(answer, source_lang, target_lang);
    decision.status = QaPairDecision::Status::kKept;
    decision.pair = TranslatedQaPair{oracle.best.hypothesis, std::move(translated_answer),
                                     oracle.best.score, oracle.best.system, target_lang};
  } catch (const BackendError& e) {
    decision.status = QaPairDecision::Status::kFailed;
    decision.reason = std::string("answer: ") + e.what();
    decision.exhausted = e.kind() == BackendErrorKind::kRetriesExhausted;
  }
  return decision;
}

// --- unanswerable prompt ------------------------------------------------------------

std::string_view unanswerable_prompt_template() {
  static constexpr std::string_view kTemplate =
      "Given a text passage and some questions about it, write 2 questions in [LANG_ID] as close "
      "to the style of the original questions as possible but that are not answerable. The "
      "questions must be of similar difficulty as the example questions, i.e., they have to "
      "mention aspects and topics of the passage, but the answer cannot be inferred from the "
      "text. Be creative. Provide one question per line.\n"
      "\n"
      "Text passage: [CONTEXT]\n"
      "\n"
      "Example questions: [QUESTION]\n"
      "Unanswerable questions:";
  return kTemplate;
}

std::string build_unanswerable_prompt(const QaContext& context, std::string_view example_question,
                                      Language target_lang) {
  struct Slot {
    std::string_view placeholder;
    std::string_view value;
  };
  const Slot slots[] = {{"[LANG_ID]", language_name(target_lang)},
                        {"[CONTEXT]", context.transcript},
                        {"[QUESTION]", example_question}};

  // Single left-to-right pass so substituted text is never rescanned.
  const std::string_view tpl = unanswerable_prompt_template();
  std::string out;
  out.reserve(tpl.size() + context.transcript.size() + example_question.size());
  std::size_t pos = 0;
  while (pos < tpl.size()) {
    bool matched = false;
    for (const auto& slot : slots) {
      if (tpl.substr(pos, slot.placeholder.size()) == slot.placeholder) {
        out += slot.value;
        pos += slot.placeholder.size();
        matched = true;
        break;
      }
    }
    if (!matched) out += tpl[pos++];
  }
  return out;
}

// --- response parsing ---------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\f\v");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\f\v");
  return s.substr(first, last - first + 1);
}

// "1." / "2)" / "-" / "*" followed by whitespace or end of line.
std::string_view strip_marker(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
  if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')')) {
    return trim(s.substr(i + 1));
  }
  if (i == 0 && !s.empty() && (s[0] == '-' || s[0] == '*')) return trim(s.substr(1));
  return s;
}

}  // namespace

ParsedQuestions parse_unanswerable_response(std::string_view raw) {
  ParsedQuestions parsed;
  while (!raw.empty() && parsed.questions.size() < kMaxUnanswerablePerContext) {
    const auto nl = raw.find('\n');
    std::string_view line = raw.substr(0, nl);
    raw = nl == std::string_view::npos ? std::string_view{} : raw.substr(nl + 1);

    std::string_view q = strip_marker(trim(line));
    if (q.empty()) continue;
    if (std::find(parsed.questions.begin(), parsed.questions.end(), q) != parsed.questions.end()) {
      continue;
    }
    parsed.questions.emplace_back(q);
  }
  if (parsed.questions.empty()) throw UnanswerableParseError("no usable question lines");
  parsed.short_response = parsed.questions.size() < kMaxUnanswerablePerContext;
  return parsed;
}

// --- unanswerable synthesis -----------------------------------------------------------

namespace {

struct CellOutcome {
  std::vector<CorpusRecord> records;
  bool skipped = false;
  bool short_response = false;
};

std::string unanswerable_id(const QaContext& c, std::size_t k, Language lang) {
  return c.context_id + "-unans" + std::to_string(k) + "-" + std::string(to_code(lang));
}

}  // namespace

UnanswerableResult synthesize_unanswerable(const std::vector<QaContext>& contexts,
                                           const std::vector<Language>& langs,
                                           Generator& generator,
                                           const UnanswerableOptions& options) {
  const std::size_t cells = contexts.size() * langs.size();
  std::vector<CellOutcome> outcomes(cells);

  parallel_for(cells, options.jobs, [&](std::size_t cell) {
    const QaContext& context = contexts[cell / langs.size()];
    const Language lang = langs[cell % langs.size()];
    CellOutcome& out = outcomes[cell];
    if (context.example_questions.empty()) {
      out.skipped = true;
      log_event("warn", "unanswerable_skipped",
                {{"context", context.context_id}, {"reason", "no example question"}});
      return;
    }
    const std::string prompt =
        build_unanswerable_prompt(context, context.example_questions.front(), lang);
    const std::uint64_t cell_seed = hash_combine(
        hash_combine(options.seed, fnv1a64(context.context_id)), static_cast<std::uint64_t>(lang));

    std::string last_error;
    for (int attempt = 0; attempt < std::max(1, options.attempts); ++attempt) {
      GenerationParams params = options.params;
      params.seed = static_cast<std::int64_t>(cell_seed + static_cast<std::uint64_t>(attempt));
      try {
        ParsedQuestions parsed = parse_unanswerable_response(generator.generate(prompt, params));
        out.short_response = parsed.short_response;
        for (std::size_t k = 0; k < parsed.questions.size(); ++k) {
          CorpusRecord r;
          r.id = unanswerable_id(context, k, lang);
          r.audio_path = context.audio_path;
          r.duration_s = context.duration_s;
          r.task = Task::kSqa;
          r.source_lang = context.source_lang;
          r.target_lang = lang;
          r.transcript = context.transcript;
          r.target_text = std::string(kUnanswerableSentinel);
          r.question = std::move(parsed.questions[k]);
          r.answerable = false;
          r.provenance.corpus_name = options.corpus_name;
          r.provenance.license = context.license;
          r.provenance.system_id = generator.name();
          out.records.push_back(std::move(r));
        }
        return;
      } catch (const std::exception& e) {
        last_error = e.what();
      }
    }
    out.skipped = true;
    log_event("warn", "unanswerable_skipped",
              {{"context", context.context_id}, {"lang", to_code(lang)}, {"reason", last_error}});
  });

  UnanswerableResult result;
  result.cells = cells;
  for (auto& out : outcomes) {
    if (out.skipped) ++result.skipped;
    if (out.short_response) ++result.short_cells;
    result.per_cell.push_back(out.records.size());
    for (auto& r : out.records) result.records.push_back(std::move(r));
  }
  return result;
}

// --- balance ---------------------------------------------------------------------------

std::vector<BalanceRow> balance_report(const std::vector<CorpusRecord>& records) {
  std::map<Language, BalanceRow> rows;
  for (const auto& r : records) {
    if (r.task != Task::kSqa) {
      throw std::invalid_argument("balance_report: record '" + r.id + "' is not SQA");
    }
    BalanceRow& row = rows.try_emplace(r.target_lang, BalanceRow{r.target_lang}).first->second;
    if (r.answerable.value_or(true)) {
      ++row.answerable;
    } else {
      ++row.unanswerable;
    }
  }
  std::vector<BalanceRow> out;
  for (auto& [lang, row] : rows) {
    row.ratio = static_cast<double>(row.unanswerable) /
                static_cast<double>(row.answerable + row.unanswerable);
    out.push_back(row);
  }
  return out;
}

ordered_json balance_to_json(const std::vector<BalanceRow>& rows) {
  ordered_json out = ordered_json::array();
  for (const auto& row : rows) {
    out.push_back({{"lang", to_code(row.lang)},
                   {"answerable", row.answerable},
                   {"unanswerable", row.unanswerable},
                   {"unanswerable_ratio", row.ratio}});
  }
  return out;
}

// --- full synthesis -------------------------------------------------------------------

namespace {

struct PairWork {
  std::size_t context;
  std::size_t pair;
  Language lang;
};

}  // namespace

QaSynthResult synthesize_qa(const std::vector<QaContext>& contexts,
                            const std::vector<Language>& langs, const BackendRegistry& registry,
                            const QaSynthOptions& options) {
  if (!(options.q_threshold >= 0.0 && options.q_threshold <= 1.0)) {
    throw std::invalid_argument("question threshold must lie in [0,1]");
  }
  registry.validate();
  if (!registry.generator) throw std::invalid_argument("registry has no generator");

  bool needs_translation = false;
  for (const auto& c : contexts) {
    for (Language lang : langs) needs_translation |= lang != c.source_lang && !c.qa_pairs.empty();
  }
  if (needs_translation && (registry.translators.empty() || !registry.scorer)) {
    throw std::invalid_argument("translation registry and QE scorer are required");
  }

  // Translation work items, in (context, lang, pair) order.
  std::vector<PairWork> work;
  for (std::size_t c = 0; c < contexts.size(); ++c) {
    for (Language lang : langs) {
      if (lang == contexts[c].source_lang) continue;
      for (std::size_t p = 0; p < contexts[c].qa_pairs.size(); ++p) work.push_back({c, p, lang});
    }
  }
  std::vector<QaPairDecision> decisions(work.size());
  parallel_for(work.size(), options.jobs, [&](std::size_t i) {
    const QaContext& ctx = contexts[work[i].context];
    const QaPair& pair = ctx.qa_pairs[work[i].pair];
    decisions[i] = translate_qa_pair(pair.question, pair.answer, ctx.source_lang, work[i].lang,
                                     registry, options.q_threshold);
    if (decisions[i].status == QaPairDecision::Status::kFailed) {
      log_event("warn", "qa_pair_failed",
                {{"context", ctx.context_id}, {"pair", work[i].pair}, {"reason", decisions[i].reason}});
    }
  });

  UnanswerableOptions un_options;
  un_options.seed = options.seed;
  un_options.jobs = options.jobs;
  un_options.params = options.params;
  UnanswerableResult unanswerable =
      synthesize_unanswerable(contexts, langs, *registry.generator, un_options);

  QaSynthResult result;
  for (Language lang : langs) result.translation[lang];

  // Assemble in (context, language) order: answerable first, then unanswerable.
  std::size_t w = 0;
  std::size_t u = 0;
  std::size_t cell = 0;
  for (std::size_t c = 0; c < contexts.size(); ++c) {
    const QaContext& ctx = contexts[c];
    for (Language lang : langs) {
      auto base_record = [&](std::size_t p) {
        CorpusRecord r;
        r.id = ctx.context_id + "-q" + std::to_string(p) + "-" + std::string(to_code(lang));
        r.audio_path = ctx.audio_path;
        r.duration_s = ctx.duration_s;
        r.task = Task::kSqa;
        r.source_lang = ctx.source_lang;
        r.target_lang = lang;
        r.transcript = ctx.transcript;
        r.answerable = true;
        r.provenance.license = ctx.license;
        return r;
      };

      if (lang == ctx.source_lang) {
        for (std::size_t p = 0; p < ctx.qa_pairs.size(); ++p) {
          CorpusRecord r = base_record(p);
          r.question = ctx.qa_pairs[p].question;
          r.target_text = ctx.qa_pairs[p].answer;
          r.provenance.corpus_name = ctx.corpus_name;
          result.records.push_back(std::move(r));
        }
      } else {
        QaLanguageStats& stats = result.translation[lang];
        for (std::size_t p = 0; p < ctx.qa_pairs.size(); ++p, ++w) {
          const QaPairDecision& d = decisions[w];
          ++stats.pairs;
          switch (d.status) {
            case QaPairDecision::Status::kDropped: ++stats.dropped; continue;
            case QaPairDecision::Status::kFailed:
              ++stats.failed;
              if (d.exhausted) ++stats.failed_exhausted;
              continue;
            case QaPairDecision::Status::kKept: ++stats.kept; break;
          }
          CorpusRecord r = base_record(p);
          r.question = d.pair->question;
          r.target_text = d.pair->answer;
          r.provenance.corpus_name = pseudolabel_corpus_name(ctx.corpus_name);
          r.provenance.system_id = d.pair->system.name;
          result.records.push_back(std::move(r));
        }
      }

      for (std::size_t k = 0; k < unanswerable.per_cell[cell]; ++k) {
        result.records.push_back(std::move(unanswerable.records[u++]));
      }
      ++cell;
    }
  }
  unanswerable.records.clear();
  result.unanswerable_summary = std::move(unanswerable);
  result.balance = balance_report(result.records);
  return result;
}

ordered_json qa_report_to_json(const QaSynthResult& result, double q_threshold) {
  ordered_json j;
  j["q_threshold"] = q_threshold;
  ordered_json translation = ordered_json::object();
  for (const auto& [lang, s] : result.translation) {
    if (s.pairs == 0) continue;
    translation[std::string(to_code(lang))] = {{"pairs", s.pairs},
                                               {"kept", s.kept},
                                               {"dropped", s.dropped},
                                               {"failed", s.failed},
                                               {"failed_exhausted", s.failed_exhausted}};
  }
  j["translation"] = std::move(translation);
  const auto& un = result.unanswerable_summary;
  std::size_t unanswerable_records = 0;
  for (const auto& r : result.records) {
    if (r.answerable && !*r.answerable) ++unanswerable_records;
  }
  j["unanswerable"] = {{"cells", un.cells},
                       {"records", unanswerable_records},
                       {"skipped", un.skipped},
                       {"short", un.short_cells}};
  j["balance"] = balance_to_json(result.balance);
  return j;
}

}  // namespace corpusforge
