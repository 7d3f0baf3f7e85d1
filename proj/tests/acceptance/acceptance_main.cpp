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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "corpusforge/cli.hpp"
#include "corpusforge/curriculum.hpp"
#include "corpusforge/geometry.hpp"
#include "corpusforge/kernels/kernels.hpp"
#include "corpusforge/log.hpp"
#include "corpusforge/pseudolabel.hpp"
#include "corpusforge/qa_synth.hpp"
#include "corpusforge/rng.hpp"
#include "oracles.hpp"

#ifndef CORPUSFORGE_SOURCE_DIR
#define CORPUSFORGE_SOURCE_DIR "."
#endif

namespace cf = corpusforge;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first few mismatches and a running verdict.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    pass_ = false;
    if (++failures_ <= 3) notes_ += (notes_.empty() ? "" : "; ") + what;
  }
  Outcome done(const std::string& summary) const {
    if (pass_) return {true, summary};
    return {false, summary + " | " + std::to_string(failures_) + " failure(s): " + notes_};
  }

 private:
  bool pass_ = true;
  std::size_t failures_ = 0;
  std::string notes_;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

cf::BackendOptions no_wait() {
  cf::BackendOptions o;
  o.retry.sleep = [](std::chrono::milliseconds) {};
  return o;
}

// --- oracle dominance --------------------------------------------------------

Outcome oracle_dominance() {
  const double thresholds[] = {0.5, 0.8, 0.85, 0.95};
  cf::SplitMix64 rng(20240611);
  Check check;
  const auto t0 = Clock::now();
  std::size_t cells = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t records = 1 + rng.next() % 200;
    const std::size_t systems = 1 + rng.next() % 6;
    const double threshold = thresholds[trial % 4];

    cf::BackendRegistry reg;
    std::vector<std::string> names;
    for (std::size_t s = 0; s < systems; ++s) {
      names.push_back("sys" + std::to_string(s));
      reg.translators.push_back(
          std::make_shared<cf::EchoTranslator>(cf::SystemId{names.back()}, names.back()));
    }
    reg.scorer = std::make_shared<cf::HashQeScorer>(rng.next());

    cf::DatasetManifest corpus;
    for (std::size_t r = 0; r < records; ++r) {
      corpus.records.push_back(cf::testing::make_asr("t" + std::to_string(trial) + "-" + std::to_string(r),
                                                     3.0, "utterance " + std::to_string(r)));
    }
    cf::PseudolabelOptions options;
    options.threshold = threshold;
    cf::PseudolabelResult result = cf::pseudolabel_corpus(corpus, cf::Language::kDe, reg, options);

    // Independent keep-sets straight from the scorer.
    std::vector<std::set<std::size_t>> keep(systems);
    std::size_t best_single = 0;
    for (std::size_t s = 0; s < systems; ++s) {
      std::vector<double> scores(records);
      for (std::size_t r = 0; r < records; ++r) {
        const std::string& text = corpus.records[r].transcript;
        scores[r] = reg.scorer->score(text, "de:" + text + "#" + names[s], cf::Language::kEn,
                                      cf::Language::kDe).value();
      }
      keep[s] = cf::testing::keep_set(scores, threshold);
      best_single = std::max(best_single, keep[s].size());
      check.expect(result.report.systems[s].kept == keep[s].size(), "per-system count mismatch");
    }
    const std::size_t union_size = cf::testing::union_of(keep).size();
    const double expected_rate = static_cast<double>(union_size) / static_cast<double>(records);
    check.expect(result.report.oracle_kept >= best_single, "oracle below best system");
    check.expect(result.report.oracle_kept == union_size, "oracle != |union|");
    check.expect(result.report.oracle_rate == expected_rate, "oracle rate != |union|/N");
    check.expect(result.st_manifest.records.size() == union_size, "manifest size != |union|");
    cells += records * systems;
  }
  const double secs = seconds_since(t0);
  check.expect(secs < 5.0, "runtime " + fmt("%.2f s", secs));
  return check.done("1000 matrices, " + std::to_string(cells) + " scores, " + fmt("%.2f s", secs));
}

// --- oracle over four near-equal systems -----------------------------------

Outcome oracle_over_best_system() {
  // Four systems with target keep-rates; a shared per-record difficulty makes
  // the systems agree most of the time, as real MT systems do.
  const std::vector<double> rates{0.581, 0.600, 0.594, 0.625};
  const std::size_t n = 1000;
  const double shared = 0.9;

  cf::BackendRegistry reg;
  for (std::size_t s = 0; s < rates.size(); ++s) {
    const std::string name = "system" + std::to_string(s);
    reg.translators.push_back(std::make_shared<cf::EchoTranslator>(cf::SystemId{name}, std::to_string(s)));
  }
  reg.scorer = std::make_shared<cf::FunctionQeScorer>(
      [&](std::string_view src, std::string_view hyp, cf::Language, cf::Language) {
        const std::size_t s = static_cast<std::size_t>(hyp.back() - '0');
        const std::uint64_t rec = cf::fnv1a64(src);
        const double pick = cf::to_unit(cf::hash_combine(rec, 1000 + s));
        const double u = pick < shared ? cf::to_unit(cf::hash_combine(rec, 7))
                                       : cf::to_unit(cf::hash_combine(rec, 2000 + s));
        const double v = cf::to_unit(cf::hash_combine(rec, 3000 + s));
        return u < rates[s] ? 0.85 + 0.15 * v : 0.84 * v;
      });

  cf::DatasetManifest corpus;
  for (std::size_t r = 0; r < n; ++r) {
    corpus.records.push_back(cf::testing::make_asr("cv-" + std::to_string(r), 4.0, "sentence " + std::to_string(r)));
  }
  cf::PseudolabelResult res = cf::pseudolabel_corpus(corpus, cf::Language::kDe, reg);

  Check check;
  std::string summary = "keep-rates";
  double best = 0.0;
  for (std::size_t s = 0; s < rates.size(); ++s) {
    const double rate = res.report.systems[s].rate;
    summary += " " + fmt("%.1f%%", 100.0 * rate);
    best = std::max(best, rate);
    check.expect(std::fabs(rate - rates[s]) <= 0.03, "system rate far from target");
  }
  summary += ", oracle " + fmt("%.1f%%", 100.0 * res.report.oracle_rate);
  check.expect(res.report.oracle_rate > best, "oracle not above best system");
  return check.done(summary + " (synthetic scores; real system percentages need real backends)");
}

// --- threshold boundaries -------------------------------------------------------

Outcome threshold_boundaries() {
  Check check;
  auto st_kept = [](double score) {
    cf::BackendRegistry reg;
    reg.translators.push_back(std::make_shared<cf::EchoTranslator>(cf::SystemId{"only"}));
    reg.scorer = std::make_shared<cf::TableQeScorer>(std::map<cf::TableQeScorer::Key, double>{}, score);
    cf::DatasetManifest corpus;
    corpus.records.push_back(cf::testing::make_asr("r", 1.0, "x"));
    return cf::pseudolabel_corpus(corpus, cf::Language::kDe, reg).st_manifest.records.size() == 1;
  };
  auto q_kept = [](double score) {
    cf::BackendRegistry reg;
    reg.translators.push_back(std::make_shared<cf::EchoTranslator>(cf::SystemId{"only"}));
    reg.scorer = std::make_shared<cf::TableQeScorer>(std::map<cf::TableQeScorer::Key, double>{}, score);
    return cf::translate_qa_pair("q?", "a", cf::Language::kEn, cf::Language::kZh, reg).status ==
           cf::QaPairDecision::Status::kKept;
  };
  check.expect(st_kept(0.85), "ST 0.85 dropped");
  check.expect(!st_kept(0.8499), "ST 0.8499 kept");
  check.expect(q_kept(0.80), "SQA 0.80 dropped");
  check.expect(!q_kept(0.7999), "SQA 0.7999 kept");
  return check.done("ST 0.85 keep / 0.8499 drop; SQA 0.80 keep / 0.7999 drop");
}

// --- same-system answer rule ------------------------------------------------------

Outcome same_system_rule() {
  cf::SplitMix64 rng(77);
  Check check;
  std::size_t kept = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t systems = 2 + rng.next() % 5;
    const std::string question = "question " + std::to_string(trial) + "?";
    const std::string answer = "answer " + std::to_string(trial);
    // Coarse grid so ties and exact-threshold hits occur.
    std::vector<double> q_scores(systems), a_scores(systems);
    for (std::size_t s = 0; s < systems; ++s) {
      q_scores[s] = std::floor(rng.uniform() * 21.0) / 20.0;
      a_scores[s] = rng.uniform();
    }

    std::mutex mu;
    std::map<std::string, std::vector<std::string>> received;
    cf::BackendRegistry reg;
    for (std::size_t s = 0; s < systems; ++s) {
      const std::string name = "m" + std::to_string(s);
      reg.translators.push_back(std::make_shared<cf::FunctionTranslator>(
          cf::SystemId{name},
          [&, name](std::string_view src, cf::Language, cf::Language) {
            std::lock_guard lock(mu);
            received[name].emplace_back(src);
            return std::string(src) + "#" + name;
          },
          no_wait()));
    }
    reg.scorer = std::make_shared<cf::FunctionQeScorer>(
        [&](std::string_view src, std::string_view hyp, cf::Language, cf::Language) {
          const std::size_t s = std::stoul(std::string(hyp.substr(hyp.rfind("#m") + 2)));
          return src == question ? q_scores[s] : a_scores[s];
        });

    const auto decision =
        cf::translate_qa_pair(question, answer, cf::Language::kEn, cf::Language::kDe, reg);
    std::size_t argmax = 0;
    for (std::size_t s = 1; s < systems; ++s) {
      if (q_scores[s] > q_scores[argmax]) argmax = s;
    }
    const bool should_keep = q_scores[argmax] >= 0.80;
    check.expect(should_keep == (decision.status == cf::QaPairDecision::Status::kKept),
                 "keep decision mismatch");
    if (decision.status != cf::QaPairDecision::Status::kKept) continue;
    ++kept;
    const std::string winner = "m" + std::to_string(argmax);
    check.expect(decision.pair->system.name == winner, "answer system != question argmax");
    check.expect(decision.pair->answer == answer + "#" + winner, "answer text from another system");
    for (const auto& [name, sources] : received) {
      const bool saw_answer = std::find(sources.begin(), sources.end(), answer) != sources.end();
      check.expect(saw_answer == (name == winner), "answer sent to a non-winning system");
    }
  }
  return check.done("500 pairs, " + std::to_string(kept) + " kept, answer always from the question winner");
}

// --- unanswerable cap and balance ---------------------------------------------------

Outcome unanswerable_cap() {
  Check check;
  std::vector<cf::QaContext> contexts;
  for (int c = 0; c < 6; ++c) {
    cf::QaContext ctx;
    ctx.context_id = "ctx" + std::to_string(c);
    ctx.transcript = "Passage number " + std::to_string(c) + " about rivers.";
    ctx.audio_path = ctx.context_id + ".wav";
    ctx.duration_s = 30.0 + c;
    for (int p = 0; p < c % 3 + 1; ++p) {
      ctx.qa_pairs.push_back({"Question " + std::to_string(p) + "?", "answer"});
      ctx.example_questions.push_back(ctx.qa_pairs.back().question);
    }
    contexts.push_back(ctx);
  }
  const std::vector<cf::Language> langs{cf::Language::kEn, cf::Language::kDe, cf::Language::kZh};

  std::vector<std::pair<std::string, std::function<std::string(std::string_view, const cf::GenerationParams&)>>> generators;
  for (int lines = 0; lines <= 10; ++lines) {
    for (const char* style : {"plain", "enumerated", "blank"}) {
      auto gen = std::make_shared<cf::TemplateGenerator>(lines, style);
      generators.emplace_back(std::string(style) + "x" + std::to_string(lines),
                              [gen](std::string_view p, const cf::GenerationParams& g) {
                                return gen->generate(p, g);
                              });
    }
  }
  generators.emplace_back("duplicated", [](std::string_view, const cf::GenerationParams&) {
    return std::string("Same?\nSame?\n1. Same?\n- Same?\nOther?\nThird?\n");
  });
  generators.emplace_back("random", [](std::string_view p, const cf::GenerationParams& g) {
    cf::SplitMix64 r(cf::hash_combine(cf::fnv1a64(p), static_cast<std::uint64_t>(g.seed.value_or(0))));
    std::string out;
    const int lines = static_cast<int>(r.next() % 11);
    for (int i = 0; i < lines; ++i) {
      switch (r.next() % 5) {
        case 0: out += "\n"; break;
        case 1: out += std::to_string(i) + ") Q" + std::to_string(r.next() % 3) + "?\n"; break;
        case 2: out += "   * \n"; break;
        case 3: out += "Q" + std::to_string(r.next() % 3) + "?\n"; break;
        default: out += "- Q" + std::to_string(i) + "?\r\n"; break;
      }
    }
    return out;
  });

  std::size_t total_unanswerable = 0;
  for (const auto& [label, fn] : generators) {
    cf::BackendRegistry reg;
    reg.translators.push_back(std::make_shared<cf::EchoTranslator>(cf::SystemId{"mt"}));
    reg.scorer = std::make_shared<cf::TableQeScorer>(std::map<cf::TableQeScorer::Key, double>{}, 0.9);
    reg.generator = std::make_shared<cf::FunctionGenerator>(fn, no_wait());
    cf::QaSynthOptions options;
    options.seed = 3;
    cf::QaSynthResult res = cf::synthesize_qa(contexts, langs, reg, options);

    std::map<std::pair<std::string, cf::Language>, std::size_t> per_cell;
    std::map<cf::Language, std::pair<std::size_t, std::size_t>> counts;
    for (const auto& r : res.records) {
      if (*r.answerable) {
        ++counts[r.target_lang].first;
      } else {
        ++counts[r.target_lang].second;
        const std::string ctx = r.id.substr(0, r.id.find("-unans"));
        ++per_cell[{ctx, r.target_lang}];
        check.expect(r.target_text == cf::kUnanswerableSentinel, label + ": sentinel missing");
        check.expect(!r.question->empty(), label + ": empty question");
      }
      check.expect(!cf::check_record(r), label + ": invalid record " + r.id);
    }
    for (const auto& [cell, k] : per_cell) {
      check.expect(k <= cf::kMaxUnanswerablePerContext, label + ": cap exceeded");
      total_unanswerable += k;
    }
    check.expect(res.balance.size() == counts.size(), label + ": balance row count");
    for (const auto& row : res.balance) {
      const auto [ans, unans] = counts[row.lang];
      check.expect(row.answerable == ans && row.unanswerable == unans, label + ": balance mismatch");
      const double ratio = static_cast<double>(unans) / static_cast<double>(ans + unans);
      check.expect(row.ratio == ratio, label + ": ratio mismatch");
    }
  }
  return check.done(std::to_string(generators.size()) + " adversarial generators, " +
                    std::to_string(total_unanswerable) + " unanswerable records, cap 2 held");
}

// --- prompt golden -----------------------------------------------------------------

Outcome prompt_golden() {
  Check check;
  const fs::path golden = fs::path(CORPUSFORGE_SOURCE_DIR) / "assets" / "unanswerable_prompt.txt";
  std::ifstream in(golden, std::ios::binary);
  check.expect(static_cast<bool>(in), "cannot read " + golden.string());
  std::ostringstream text;
  text << in.rdbuf();
  std::string expected = text.str();
  const std::pair<std::string, std::string> subs[] = {
      {"[LANG_ID]", "German"}, {"[CONTEXT]", "C"}, {"[QUESTION]", "Q"}};
  for (const auto& [from, to] : subs) {
    const auto pos = expected.find(from);
    check.expect(pos != std::string::npos, "placeholder " + from + " missing from golden file");
    if (pos != std::string::npos) expected.replace(pos, from.size(), to);
  }
  cf::QaContext ctx;
  ctx.transcript = "C";
  const std::string rendered = cf::build_unanswerable_prompt(ctx, "Q", cf::Language::kDe);
  check.expect(rendered == expected, "rendered prompt differs from golden file");
  check.expect(rendered.ends_with("Unanswerable questions:"), "closing line missing");
  check.expect(std::string_view(cf::unanswerable_prompt_template()) == text.str(),
               "template differs from golden file");
  return check.done(std::to_string(rendered.size()) + " bytes, byte-identical");
}

// --- geometry -------------------------------------------------------------------------

Outcome geometry_oracle() {
  Check check;
  cf::SplitMix64 rng(404);
  check.expect(cf::audio_token_budget(10.0) == 16, "10 s != 16");
  check.expect(cf::audio_token_budget(120.0) == 188, "120 s != 188");
  std::size_t comparisons = 0;
  for (int c = 0; c < 20; ++c) {
    cf::SpeechGeometryConfig g;
    cf::testing::SimGeometry sim;
    if (c > 0) {
      const double hops[] = {10.0, 12.5, 20.0, 25.0, 15.0};
      g.mel_hop_ms = sim.hop_ms = hops[rng.next() % 5];
      g.mel_stride = sim.mel_stride = 1 + static_cast<int>(rng.next() % 3);
      g.conv_layers = sim.conv_layers = static_cast<int>(rng.next() % 4);
      g.conv_kernel = sim.conv_kernel = 1 + static_cast<int>(rng.next() % 5);
      g.conv_stride = sim.conv_stride = 1 + static_cast<int>(rng.next() % 3);
      g.conv_padding = sim.conv_padding = static_cast<int>(rng.next() % 3);
      g.adapter_layers = sim.adapter_layers = static_cast<int>(rng.next() % 3);
      g.adapter_kernel = sim.adapter_kernel = 1 + static_cast<int>(rng.next() % 5);
      g.adapter_stride = sim.adapter_stride = 1 + static_cast<int>(rng.next() % 3);
      g.adapter_padding = sim.adapter_padding = static_cast<int>(rng.next() % 3);
    }
    std::vector<double> durations(500);
    for (auto& d : durations) {
      // Mix of arbitrary doubles and millisecond-exact decimals, all in (0, 300].
      d = rng.uniform() < 0.5 ? 300.0 * (1.0 - rng.uniform())
                              : static_cast<double>(1 + rng.next() % 300000) / 1000.0;
    }
    std::sort(durations.begin(), durations.end());
    std::int64_t prev = 0;
    for (double d : durations) {
      const auto chain = cf::audio_length_chain(d, g);
      const auto want = cf::testing::simulate_chain(d, sim);
      check.expect(chain == want, "chain mismatch at " + fmt("%.6f s", d) + " config " + std::to_string(c));
      const std::int64_t budget = cf::audio_token_budget(d, g);
      check.expect(budget == want.back(), "budget mismatch");
      check.expect(budget >= prev, "budget not monotone");
      prev = budget;
      ++comparisons;
    }
  }
  return check.done(std::to_string(comparisons) + " durations x configs; 10 s -> 16, 120 s -> 188");
}

// --- mask --------------------------------------------------------------------------

Outcome mask_exhaustive() {
  Check check;
  const auto t0 = Clock::now();
  std::uint64_t cells = 0;
  for (std::uint32_t a = 0; a <= 64; ++a) {
    for (std::uint32_t t = 0; t <= 64; ++t) {
      const cf::MaskLayout layout(a, t);
      const std::uint32_t n = a + t;
      const auto dense = layout.to_dense();
      const cf::ParsedRuns runs = cf::parse_mask_text(layout.to_text());
      check.expect(runs.begin == layout.run_begin() && runs.end == layout.run_end(),
                   "text export does not round-trip");
      for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = 0; j < n; ++j) {
          const bool want = cf::testing::mask_allows(a, i, j);
          const bool from_runs = j >= runs.begin[i] && j < runs.end[i];
          if (dense[static_cast<std::size_t>(i) * n + j] != want || from_runs != want) {
            check.expect(false, "cell (" + std::to_string(i) + "," + std::to_string(j) + ") of " +
                                    std::to_string(a) + "x" + std::to_string(t));
          }
          ++cells;
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  check.expect(secs < 10.0, "runtime " + fmt("%.2f s", secs));
  return check.done(std::to_string(cells) + " cells over [0,64]^2 using " +
                    std::string(cf::kernels::isa_name(cf::kernels::active_isa())) + " fill, " +
                    fmt("%.2f s", secs));
}

// --- length hint ------------------------------------------------------------------------

Outcome hint_frequency() {
  Check check;
  const std::size_t n = 100000;
  auto fraction = [&](double p) {
    cf::HintPolicy policy{p, 1234};
    std::size_t hinted = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const cf::CorpusRecord r = cf::testing::make_asr("utt-" + std::to_string(i), 5.0, "a b c");
      hinted += cf::render_example(r, policy).has_length_hint;
    }
    return hinted;
  };
  const std::size_t at95 = fraction(0.95);
  const double rate = static_cast<double>(at95) / n;
  check.expect(rate >= 0.94 && rate <= 0.96, "p=0.95 rate " + fmt("%.4f", rate));
  check.expect(fraction(0.0) == 0, "p=0 produced hints");
  check.expect(fraction(1.0) == n, "p=1 missed hints");
  return check.done("p=0.95 -> " + fmt("%.4f", rate) + "; p=0 -> 0; p=1 -> all of 100000");
}

// --- length filter ---------------------------------------------------------------------

Outcome length_filter_cap() {
  Check check;
  cf::DatasetManifest m;
  m.records = {cf::testing::make_asr("a", 119.9, "x"), cf::testing::make_asr("b", 120.0, "x"),
               cf::testing::make_asr("c", 120.1, "x")};
  const auto filtered = cf::length_filter(m, 120.0);
  check.expect(filtered.kept.records.size() == 2 && filtered.kept.records[0].id == "a" &&
                   filtered.kept.records[1].id == "b",
               "length_filter kept set");
  check.expect(filtered.dropped == std::vector<std::string>{"c"}, "length_filter dropped set");
  const auto stage = cf::assemble_stage({{"m", m}}, cf::Stage::kMa, cf::HintPolicy{});
  check.expect(stage.examples.size() == 2 && stage.dropped_too_long == std::vector<std::string>{"c"},
               "assemble_stage cap");
  return check.done("119.9 keep, 120.0 keep, 120.1 drop");
}

// --- end-to-end reproducibility ---------------------------------------------------------

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

Outcome end_to_end() {
  Check check;
  const fs::path root = fs::temp_directory_path() / "corpusforge-acceptance-e2e";
  fs::remove_all(root);
  fs::create_directories(root);

  write_file(root / "mock.ini",
             "seed = 2024\n[backends]\ntranslators = tower, madlad, nllb\nscorer = kiwi\n"
             "generator = llm\n[backends.tower]\nkind = mock-echo\nvariant = tower\n"
             "[backends.madlad]\nkind = mock-echo\nvariant = madlad\n[backends.nllb]\n"
             "kind = mock-echo\nvariant = nllb\n[backends.kiwi]\nkind = mock-hash\nseed = 5\n"
             "[backends.llm]\nkind = mock-template\nlines = 3\nstyle = enumerated\n");
  cf::DatasetManifest asr;
  cf::SplitMix64 rng(8);
  for (int i = 0; i < 200; ++i) {
    asr.records.push_back(cf::testing::make_asr("cv-" + std::to_string(i), 1.0 + 130.0 * rng.uniform(),
                                                "spoken sentence number " + std::to_string(i)));
  }
  write_file(root / "asr.jsonl", cf::serialize_manifest(asr));
  std::string contexts;
  for (int c = 0; c < 10; ++c) {
    contexts += R"({"context_id":"sq)" + std::to_string(c) +
                R"(","transcript":"passage text","audio_path":"sq.wav","duration_s":40,"qa_pairs":[{"question":"Who?","answer":"Ann"},{"question":"When?","answer":"1900"}]})" +
                "\n";
  }
  write_file(root / "contexts.jsonl", contexts);

  const std::vector<std::string> outputs{"st.jsonl", "st.jsonl.meta.json", "pl.json",
                                         "sqa.jsonl", "sqa.jsonl.meta.json", "qa.json",
                                         "ift.jsonl", "ift.jsonl.meta.json", "stats.json"};
  auto run_once = [&](const std::string& tag, const std::string& jobs) {
    const fs::path d = root / tag;
    fs::create_directories(d);
    auto p = [&](const std::string& f) { return (d / f).string(); };
    const std::vector<std::string> base{"corpusforge", "--config", (root / "mock.ini").string(),
                                        "--jobs", jobs};
    auto run = [&](std::vector<std::string> rest) {
      std::vector<std::string> args = base;
      args.insert(args.end(), rest.begin(), rest.end());
      return cf::cli::run(args);
    };
    check.expect(run({"pseudolabel", "--input", (root / "asr.jsonl").string(), "--target-lang", "de",
                      "--out", p("st.jsonl"), "--report", p("pl.json")}) == 0,
                 tag + ": pseudolabel failed");
    check.expect(run({"synth-qa", "--contexts", (root / "contexts.jsonl").string(), "--out",
                      p("sqa.jsonl"), "--report", p("qa.json")}) == 0,
                 tag + ": synth-qa failed");
    check.expect(run({"assemble", "--stage", "ift", "--inputs",
                      (root / "asr.jsonl").string() + "," + p("st.jsonl") + "," + p("sqa.jsonl"),
                      "--out", p("ift.jsonl"), "--stats", p("stats.json")}) == 0,
                 tag + ": assemble failed");
  };
  cf::set_log_sink(nullptr);
  run_once("first", "1");
  run_once("second", "4");
  cf::set_log_sink(&std::cerr);

  std::size_t bytes = 0;
  for (const auto& f : outputs) {
    const std::string a = read_file(root / "first" / f);
    const std::string b = read_file(root / "second" / f);
    check.expect(!a.empty(), f + " is empty");
    check.expect(a == b, f + " differs between runs");
    bytes += a.size();
  }
  fs::remove_all(root);
  return check.done(std::to_string(outputs.size()) + " artifacts, " + std::to_string(bytes) +
                    " bytes, byte-identical across runs (jobs 1 vs 4)");
}

}  // namespace

int main() {
  cf::set_log_sink(nullptr);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle-dominance", oracle_dominance},
      {"oracle-beats-best-system", oracle_over_best_system},
      {"threshold-boundaries", threshold_boundaries},
      {"same-system-answer", same_system_rule},
      {"unanswerable-cap-balance", unanswerable_cap},
      {"prompt-golden", prompt_golden},
      {"geometry-oracle", geometry_oracle},
      {"mask-exhaustive", mask_exhaustive},
      {"length-hint-frequency", hint_frequency},
      {"length-filter", length_filter_cap},
      {"end-to-end-reproducibility", end_to_end},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    failed += o.pass ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all " : "") << criteria.size() - failed << "/" << criteria.size()
            << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
