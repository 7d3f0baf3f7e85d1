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

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "corpusforge/manifest.hpp"

namespace corpusforge {

struct SystemId {
  std::string name;

  bool operator==(const SystemId&) const = default;
  auto operator<=>(const SystemId&) const = default;
};

class QeScore {
 public:
  // Throws std::out_of_range unless 0 <= value <= 1.
  explicit QeScore(double value);
  double value() const { return value_; }

 private:
  double value_;
};

struct GenerationParams {
  int max_new_tokens = 256;
  double temperature = 0.0;
  std::optional<std::int64_t> seed;
};

enum class BackendErrorKind {
  kPrecondition,      // rejected before any request was made
  kTransport,         // connection or timeout; retryable
  kStatus,            // non-2xx response
  kProtocol,          // malformed body or out-of-range value
  kEmptyOutput,       // server answered with an empty hypothesis
  kRetriesExhausted,  // transport kept failing after the last attempt
};

std::string_view to_string(BackendErrorKind kind);

class BackendError : public std::runtime_error {
 public:
  BackendError(BackendErrorKind kind, std::string system, const std::string& message);

  BackendErrorKind kind() const { return kind_; }
  const std::string& system() const { return system_; }
  bool retryable() const { return kind_ == BackendErrorKind::kTransport; }

 private:
  BackendErrorKind kind_;
  std::string system_;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{250};
  double factor = 2.0;
  // Replaced in tests to observe backoff without waiting.
  std::function<void(std::chrono::milliseconds)> sleep;

  // Delay after failed attempt `attempt` (0-based): base * factor^attempt.
  std::chrono::milliseconds delay_after(int attempt) const;
};

struct BackendOptions {
  RetryPolicy retry;
  int max_in_flight = 8;
};

// Shared retry + concurrency limiting for every backend flavour.
class BackendBase {
 public:
  BackendBase(std::string name, BackendOptions options);
  virtual ~BackendBase() = default;
  BackendBase(const BackendBase&) = delete;
  BackendBase& operator=(const BackendBase&) = delete;

  const std::string& name() const { return name_; }
  const BackendOptions& options() const { return options_; }

 protected:
  // Runs `attempt` under the in-flight limit, retrying transport errors with
  // exponential backoff.
  template <typename F>
  auto with_retry(F&& attempt) -> decltype(attempt());

 private:
  void acquire();
  void release();
  void backoff(int attempt) const;

  std::string name_;
  BackendOptions options_;
  std::unique_ptr<std::counting_semaphore<>> slots_;
};

class Translator : public BackendBase {
 public:
  Translator(SystemId id, BackendOptions options = {});

  const SystemId& id() const { return id_; }

  std::string translate(std::string_view source_text, Language source_lang, Language target_lang);

 protected:
  virtual std::string do_translate(std::string_view source_text, Language source_lang,
                                   Language target_lang) = 0;

 private:
  SystemId id_;
};

class QeScorer : public BackendBase {
 public:
  explicit QeScorer(std::string name = "qe", BackendOptions options = {});

  QeScore score(std::string_view source_text, std::string_view hypothesis, Language source_lang,
                Language target_lang);

 protected:
  virtual double do_score(std::string_view source_text, std::string_view hypothesis,
                          Language source_lang, Language target_lang) = 0;
};

class Generator : public BackendBase {
 public:
  explicit Generator(std::string name = "generator", BackendOptions options = {});

  std::string generate(std::string_view prompt, const GenerationParams& params);

 protected:
  virtual std::string do_generate(std::string_view prompt, const GenerationParams& params) = 0;
};

// ---------------------------------------------------------------------------
// HTTP JSON clients: POST /translate, /score, /generate.

struct HttpEndpoint {
  std::string url;  // scheme://host[:port][/prefix]
  std::optional<std::string> bearer_token;
  std::chrono::milliseconds timeout{30000};
};

class HttpTranslator final : public Translator {
 public:
  HttpTranslator(SystemId id, HttpEndpoint endpoint, BackendOptions options = {});

 protected:
  std::string do_translate(std::string_view source_text, Language source_lang,
                           Language target_lang) override;

 private:
  HttpEndpoint endpoint_;
};

class HttpQeScorer final : public QeScorer {
 public:
  HttpQeScorer(std::string name, HttpEndpoint endpoint, BackendOptions options = {});

 protected:
  double do_score(std::string_view source_text, std::string_view hypothesis, Language source_lang,
                  Language target_lang) override;

 private:
  HttpEndpoint endpoint_;
};

class HttpGenerator final : public Generator {
 public:
  HttpGenerator(std::string name, HttpEndpoint endpoint, BackendOptions options = {});

 protected:
  std::string do_generate(std::string_view prompt, const GenerationParams& params) override;

 private:
  HttpEndpoint endpoint_;
};

// ---------------------------------------------------------------------------
// Deterministic in-process mocks.

// "<target>:<text>", plus "#<variant>" when a variant is set so several echo
// systems can produce distinct hypotheses.
class EchoTranslator final : public Translator {
 public:
  EchoTranslator(SystemId id, std::string variant = {}, BackendOptions options = {});

 protected:
  std::string do_translate(std::string_view source_text, Language source_lang,
                           Language target_lang) override;

 private:
  std::string variant_;
};

// Every attempt fails with a transport error.
class UnreachableTranslator final : public Translator {
 public:
  explicit UnreachableTranslator(SystemId id, BackendOptions options = {});

 protected:
  std::string do_translate(std::string_view, Language, Language) override;
};

class FunctionTranslator final : public Translator {
 public:
  using Fn = std::function<std::string(std::string_view, Language, Language)>;
  FunctionTranslator(SystemId id, Fn fn, BackendOptions options = {});

 protected:
  std::string do_translate(std::string_view source_text, Language source_lang,
                           Language target_lang) override;

 private:
  Fn fn_;
};

class TableQeScorer final : public QeScorer {
 public:
  using Key = std::tuple<std::string, std::string, Language, Language>;
  TableQeScorer(std::map<Key, double> table, double default_score, BackendOptions options = {});

 protected:
  double do_score(std::string_view source_text, std::string_view hypothesis, Language source_lang,
                  Language target_lang) override;

 private:
  std::map<Key, double> table_;
  double default_score_;
};

// Uniform in [0,1), a pure function of (seed, inputs).
class HashQeScorer final : public QeScorer {
 public:
  explicit HashQeScorer(std::uint64_t seed, BackendOptions options = {});

 protected:
  double do_score(std::string_view source_text, std::string_view hypothesis, Language source_lang,
                  Language target_lang) override;

 private:
  std::uint64_t seed_;
};

class FunctionQeScorer final : public QeScorer {
 public:
  using Fn = std::function<double(std::string_view, std::string_view, Language, Language)>;
  explicit FunctionQeScorer(Fn fn, BackendOptions options = {});

 protected:
  double do_score(std::string_view source_text, std::string_view hypothesis, Language source_lang,
                  Language target_lang) override;

 private:
  Fn fn_;
};

// Returns the same response for every prompt.
class ScriptedGenerator final : public Generator {
 public:
  explicit ScriptedGenerator(std::string response, BackendOptions options = {});

 protected:
  std::string do_generate(std::string_view, const GenerationParams&) override;

 private:
  std::string response_;
};

// Emits `lines` question lines derived from a hash of the prompt.
// Styles: "plain", "enumerated", "blank" (only whitespace).
class TemplateGenerator final : public Generator {
 public:
  TemplateGenerator(int lines, std::string style, BackendOptions options = {});

 protected:
  std::string do_generate(std::string_view prompt, const GenerationParams& params) override;

 private:
  int lines_;
  std::string style_;
};

class FunctionGenerator final : public Generator {
 public:
  using Fn = std::function<std::string(std::string_view, const GenerationParams&)>;
  explicit FunctionGenerator(Fn fn, BackendOptions options = {});

 protected:
  std::string do_generate(std::string_view prompt, const GenerationParams& params) override;

 private:
  Fn fn_;
};

class UnreachableGenerator final : public Generator {
 public:
  explicit UnreachableGenerator(BackendOptions options = {});

 protected:
  std::string do_generate(std::string_view, const GenerationParams&) override;
};

/// Ordered set of translation systems plus the QE scorer and LLM generator.
/// Registry order is the tie-break order for oracle selection.
struct BackendRegistry {
  std::vector<std::shared_ptr<Translator>> translators;
  std::shared_ptr<QeScorer> scorer;
  std::shared_ptr<Generator> generator;

  // Throws std::invalid_argument on empty or duplicate system names.
  void validate() const;
  std::vector<SystemId> system_ids() const;
};

// ---------------------------------------------------------------------------

template <typename F>
auto BackendBase::with_retry(F&& attempt) -> decltype(attempt()) {
  const int attempts = options_.retry.max_attempts < 1 ? 1 : options_.retry.max_attempts;
  for (int i = 0;; ++i) {
    acquire();
    try {
      auto result = attempt();
      release();
      return result;
    } catch (const BackendError& e) {
      release();
      if (!e.retryable()) throw;
      if (i + 1 >= attempts) {
        throw BackendError(BackendErrorKind::kRetriesExhausted, name_,
                           "gave up after " + std::to_string(attempts) +
                               " attempts: " + e.what());
      }
    } catch (...) {
      release();
      throw;
    }
    backoff(i);
  }
}

}  // namespace corpusforge
