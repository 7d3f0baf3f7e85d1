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

#include "corpusforge/cli.hpp"

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "corpusforge/curriculum.hpp"
#include "corpusforge/geometry.hpp"
#include "corpusforge/log.hpp"
#include "corpusforge/parallel.hpp"
#include "corpusforge/manifest.hpp"
#include "corpusforge/pseudolabel.hpp"
#include "corpusforge/qa_synth.hpp"

#ifndef CORPUSFORGE_VERSION
#define CORPUSFORGE_VERSION "0.0.0"
#endif

namespace corpusforge::cli {

using nlohmann::ordered_json;

std::string tool_version() { return CORPUSFORGE_VERSION; }

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename onto '" + path + "': " + ec.message());
  }
}

namespace {

// Raised for anything that maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GlobalFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  bool strict = false;
};

RunConfig resolve_config(const GlobalFlags& flags, const Environment& environment) {
  RunConfig config = flags.config_path.empty() ? RunConfig{} : load_config(flags.config_path);
  if (flags.seed) config.seed = *flags.seed;
  if (flags.jobs) config.jobs = *flags.jobs;
  config.strict = config.strict || flags.strict;
  apply_env(config, environment.env);
  return config;
}

std::size_t worker_count(const RunConfig& config) {
  if (config.jobs) return *config.jobs;
  std::size_t jobs = default_jobs();
  auto cap = [&](const BackendSpec& spec) {
    jobs = std::min<std::size_t>(jobs, static_cast<std::size_t>(std::max(1, spec.max_in_flight)));
  };
  for (const auto& t : config.translators) cap(t);
  if (config.scorer) cap(*config.scorer);
  if (config.generator) cap(*config.generator);
  return std::max<std::size_t>(jobs, 1);
}

ordered_json run_metadata(const std::string& command, const RunConfig& config) {
  ordered_json meta;
  meta["tool"] = "corpusforge";
  meta["version"] = tool_version();
  meta["command"] = command;
  meta["seed"] = config.seed;
  meta["config_hash"] = config_hash(config);
  return meta;
}

std::string json_text(const ordered_json& j) { return j.dump(2) + "\n"; }

void write_with_metadata(const std::string& path, const std::string& content,
                         const ordered_json& meta) {
  write_atomic(path, content);
  write_atomic(path + ".meta.json", json_text(meta));
}

Language language_arg(const std::string& value, const char* flag) {
  auto lang = parse_language(value);
  if (!lang) throw UsageError(std::string(flag) + ": unknown language '" + value + "'");
  return *lang;
}

std::vector<std::string> split_csv(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void check_unit(double value, const char* what) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw UsageError(std::string(what) + " must lie in [0,1], got " + std::to_string(value));
  }
}

// --- commands --------------------------------------------------------------------

struct PseudolabelArgs {
  std::string input;
  std::string target_lang;
  std::optional<double> threshold;
  std::string out;
  std::string report;
};

int cmd_pseudolabel(const PseudolabelArgs& args, const GlobalFlags& flags,
                    const Environment& environment) {
  RunConfig config = resolve_config(flags, environment);
  if (args.threshold) config.thresholds.st = *args.threshold;
  check_unit(config.thresholds.st, "--threshold");
  validate(config, true, false);
  const Language target = language_arg(args.target_lang, "--target-lang");

  const DatasetManifest input =
      load_manifest(args.input, Stage::kIft, ParseOptions{config.strict});
  BackendRegistry registry = build_registry(config);

  PseudolabelOptions options;
  options.threshold = config.thresholds.st;
  options.jobs = worker_count(config);
  PseudolabelResult result = pseudolabel_corpus(input, target, registry, options);

  const Language source =
      input.records.empty() ? Language::kEn : input.records.front().source_lang;
  const ordered_json meta = run_metadata("pseudolabel", config);
  ordered_json report = report_to_json(result.report, source, target);
  report["run"] = meta;
  write_with_metadata(args.out, serialize_manifest(result.st_manifest), meta);
  write_atomic(args.report, json_text(report));

  log_event("info", "pseudolabel_done",
            {{"records", result.report.records},
             {"kept", result.report.kept},
             {"dropped", result.report.dropped},
             {"failed", result.report.failed}});
  if (result.report.failed_exhausted > 0) {
    log_event("error", "backend_exhausted", {{"records", result.report.failed_exhausted}});
    return kExitBackendExhausted;
  }
  return kExitOk;
}

struct SynthQaArgs {
  std::string contexts;
  std::string langs = "en,de,zh";
  std::optional<double> q_threshold;
  std::string out;
  std::string report;
};

int cmd_synth_qa(const SynthQaArgs& args, const GlobalFlags& flags,
                 const Environment& environment) {
  RunConfig config = resolve_config(flags, environment);
  if (args.q_threshold) config.thresholds.sqa_question = *args.q_threshold;
  check_unit(config.thresholds.sqa_question, "--q-threshold");
  validate(config, true, true);

  std::vector<Language> langs;
  for (const auto& code : split_csv(args.langs)) {
    const Language lang = language_arg(code, "--langs");
    if (std::find(langs.begin(), langs.end(), lang) == langs.end()) langs.push_back(lang);
  }
  if (langs.empty()) throw UsageError("--langs is empty");

  const std::vector<QaContext> contexts = load_contexts(args.contexts);
  BackendRegistry registry = build_registry(config);

  QaSynthOptions options;
  options.q_threshold = config.thresholds.sqa_question;
  options.seed = config.seed;
  options.jobs = worker_count(config);
  options.params = config.generation;
  QaSynthResult result = synthesize_qa(contexts, langs, registry, options);

  const ordered_json meta = run_metadata("synth-qa", config);
  ordered_json report = qa_report_to_json(result, options.q_threshold);
  report["records"] = result.records.size();
  report["run"] = meta;
  DatasetManifest manifest;
  manifest.records = std::move(result.records);
  write_with_metadata(args.out, serialize_manifest(manifest), meta);
  write_atomic(args.report, json_text(report));

  std::size_t exhausted = 0;
  for (const auto& [lang, stats] : result.translation) exhausted += stats.failed_exhausted;
  log_event("info", "synth_qa_done",
            {{"records", manifest.records.size()},
             {"unanswerable_skipped", result.unanswerable_summary.skipped}});
  if (exhausted > 0) {
    log_event("error", "backend_exhausted", {{"pairs", exhausted}});
    return kExitBackendExhausted;
  }
  return kExitOk;
}

struct AssembleArgs {
  std::string stage;
  std::string inputs;
  std::optional<double> hint_prob;
  std::string out;
  std::string stats;
};

int cmd_assemble(const AssembleArgs& args, const GlobalFlags& flags,
                 const Environment& environment) {
  RunConfig config = resolve_config(flags, environment);
  if (args.hint_prob) config.hint.probability = *args.hint_prob;
  check_unit(config.hint.probability, "--hint-prob");
  validate(config, false, false);
  auto stage = parse_stage(args.stage);
  if (!stage) throw UsageError("--stage must be ma or ift");

  std::vector<NamedManifest> inputs;
  for (const auto& path : split_csv(args.inputs)) {
    inputs.push_back({path, load_manifest(path, Stage::kIft, ParseOptions{config.strict})});
  }
  if (inputs.empty()) throw UsageError("--inputs is empty");

  HintPolicy policy = config.hint;
  policy.rng_seed = config.seed;
  AssembledStage assembled =
      assemble_stage(inputs, *stage, policy, config.geometry, worker_count(config));

  const ordered_json meta = run_metadata("assemble", config);
  ordered_json stats = stage_stats_to_json(assembled);
  stats["run"] = meta;
  write_with_metadata(args.out, serialize_rendered(assembled.examples), meta);
  write_atomic(args.stats, json_text(stats));
  log_event("info", "assemble_done",
            {{"stage", to_code(*stage)},
             {"examples", assembled.examples.size()},
             {"dropped_too_long", assembled.dropped_too_long.size()}});
  return kExitOk;
}

struct StatsArgs {
  std::string inputs;
  std::string stage = "ift";
  std::string out;
};

int cmd_stats(const StatsArgs& args, const GlobalFlags& flags, const Environment& environment) {
  RunConfig config = resolve_config(flags, environment);
  auto stage = parse_stage(args.stage);
  if (!stage) throw UsageError("--stage must be ma or ift");

  std::vector<CorpusRecord> records;
  for (const auto& path : split_csv(args.inputs)) {
    DatasetManifest m = load_manifest(path, *stage, ParseOptions{config.strict});
    for (auto& r : m.records) records.push_back(std::move(r));
  }
  ordered_json stats;
  stats["stage"] = to_code(*stage);
  stats["records"] = records.size();
  stats["mixture"] = mixture_to_json(mixture_stats(records));
  stats["run"] = run_metadata("stats", config);
  if (args.out.empty()) {
    *environment.out << json_text(stats);
  } else {
    write_atomic(args.out, json_text(stats));
  }
  return kExitOk;
}

struct ValidateArgs {
  std::string input;
  std::string stage = "ift";
};

int cmd_validate(const ValidateArgs& args, const GlobalFlags& flags,
                 const Environment& environment) {
  RunConfig config = resolve_config(flags, environment);
  auto stage = parse_stage(args.stage);
  if (!stage) throw UsageError("--stage must be ma or ift");
  const DatasetManifest manifest =
      load_manifest(args.input, *stage, ParseOptions{config.strict});
  ordered_json summary;
  summary["input"] = args.input;
  summary["stage"] = to_code(*stage);
  summary["records"] = manifest.records.size();
  summary["valid"] = true;
  summary["run"] = run_metadata("validate", config);
  *environment.out << json_text(summary);
  return kExitOk;
}

struct MaskArgs {
  std::optional<std::uint32_t> audio_len;
  std::optional<double> duration_s;
  std::uint32_t text_len = 0;
  std::string out;
};

int cmd_mask(const MaskArgs& args, const GlobalFlags& flags, const Environment& environment) {
  RunConfig config = resolve_config(flags, environment);
  validate(config, false, false);
  if (args.audio_len.has_value() == args.duration_s.has_value()) {
    throw UsageError("give exactly one of --audio-len or --duration");
  }
  std::uint32_t audio_len = 0;
  if (args.audio_len) {
    audio_len = *args.audio_len;
  } else {
    if (!(*args.duration_s > 0.0)) throw UsageError("--duration must be positive");
    audio_len = static_cast<std::uint32_t>(audio_token_budget(*args.duration_s, config.geometry));
  }
  const std::string text = build_mask_layout(audio_len, args.text_len).to_text();
  if (args.out.empty()) {
    *environment.out << text;
  } else {
    write_with_metadata(args.out, text, run_metadata("mask", config));
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, const Environment& environment_in) {
  Environment environment = environment_in;
  if (environment.out == nullptr) environment.out = &std::cout;

  CLI::App app{"Corpus curation pipeline for multitask speech-to-text training data",
               "corpusforge"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", tool_version());

  GlobalFlags flags;
  app.add_option("--config", flags.config_path, "Pipeline config file (INI)");
  app.add_option("--seed", flags.seed, "Seed for every random stream");
  app.add_option("--jobs", flags.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--strict", flags.strict, "Reject unknown manifest fields");

  PseudolabelArgs pl;
  auto* pseudolabel = app.add_subcommand("pseudolabel", "Multi-system translation with QE oracle");
  pseudolabel->add_option("--input", pl.input, "ASR manifest")->required();
  pseudolabel->add_option("--target-lang", pl.target_lang, "de or zh")->required();
  pseudolabel->add_option("--threshold", pl.threshold, "Keep iff best QE score >= threshold");
  pseudolabel->add_option("--out", pl.out, "ST manifest to write")->required();
  pseudolabel->add_option("--report", pl.report, "Retention report (JSON)")->required();

  SynthQaArgs qa;
  auto* synth_qa = app.add_subcommand("synth-qa", "Translated and unanswerable spoken-QA records");
  synth_qa->add_option("--contexts", qa.contexts, "QA context file")->required();
  synth_qa->add_option("--langs", qa.langs, "Comma-separated languages");
  synth_qa->add_option("--q-threshold", qa.q_threshold, "Keep iff best question score >= value");
  synth_qa->add_option("--out", qa.out, "SQA manifest to write")->required();
  synth_qa->add_option("--report", qa.report, "QA report (JSON)")->required();

  AssembleArgs as;
  auto* assemble = app.add_subcommand("assemble", "Render and shuffle one training stage");
  assemble->add_option("--stage", as.stage, "ma or ift")->required();
  assemble->add_option("--inputs", as.inputs, "Comma-separated manifests")->required();
  assemble->add_option("--hint-prob", as.hint_prob, "Length-hint probability");
  assemble->add_option("--out", as.out, "Rendered stage manifest")->required();
  assemble->add_option("--stats", as.stats, "Mixture statistics (JSON)")->required();

  StatsArgs st;
  auto* stats = app.add_subcommand("stats", "Hours per (task, language, corpus)");
  stats->add_option("--inputs,--input", st.inputs, "Comma-separated manifests")->required();
  stats->add_option("--stage", st.stage, "ma or ift");
  stats->add_option("--out", st.out, "Write JSON here instead of stdout");

  ValidateArgs va;
  auto* validate_cmd = app.add_subcommand("validate", "Parse and check a manifest");
  validate_cmd->add_option("--input", va.input, "Manifest")->required();
  validate_cmd->add_option("--stage", va.stage, "ma or ift");

  MaskArgs mk;
  auto* mask = app.add_subcommand("mask", "Export a prefix-LM attention layout");
  mask->add_option("--audio-len", mk.audio_len, "Audio positions");
  mask->add_option("--duration", mk.duration_s, "Derive audio positions from a clip length (s)");
  mask->add_option("--text-len", mk.text_len, "Text positions");
  mask->add_option("--out", mk.out, "Write here instead of stdout");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    *environment.out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    *environment.out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    *environment.out << tool_version() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    log_event("error", "usage", {{"message", e.what()}});
    return kExitValidation;
  }

  try {
    if (*pseudolabel) return cmd_pseudolabel(pl, flags, environment);
    if (*synth_qa) return cmd_synth_qa(qa, flags, environment);
    if (*assemble) return cmd_assemble(as, flags, environment);
    if (*stats) return cmd_stats(st, flags, environment);
    if (*validate_cmd) return cmd_validate(va, flags, environment);
    if (*mask) return cmd_mask(mk, flags, environment);
  } catch (const ManifestError& e) {
    for (const auto& issue : e.issues()) {
      log_event("error", "manifest_invalid",
                {{"line", issue.line}, {"kind", issue.kind}, {"message", issue.message}});
    }
    return kExitValidation;
  } catch (const StageGateError& e) {
    log_event("error", "stage_gate", {{"message", e.what()}, {"offenders", e.offenders()}});
    return kExitValidation;
  } catch (const ConfigError& e) {
    log_event("error", "config_invalid", {{"message", e.what()}});
    return kExitValidation;
  } catch (const UsageError& e) {
    log_event("error", "usage", {{"message", e.what()}});
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    log_event("error", "invalid_input", {{"message", e.what()}});
    return kExitValidation;
  } catch (const std::exception& e) {
    log_event("error", "internal", {{"message", e.what()}});
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace corpusforge::cli
