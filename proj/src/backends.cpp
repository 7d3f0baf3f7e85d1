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

#include "corpusforge/backends.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <thread>

#include "corpusforge/rng.hpp"
#include "httplib.h"
#include "json.hpp"

namespace corpusforge {

using nlohmann::json;

QeScore::QeScore(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::out_of_range("QE score " + std::to_string(value) + " outside [0,1]");
  }
}

std::string_view to_string(BackendErrorKind kind) {
  switch (kind) {
    case BackendErrorKind::kPrecondition: return "precondition";
    case BackendErrorKind::kTransport: return "transport";
    case BackendErrorKind::kStatus: return "status";
    case BackendErrorKind::kProtocol: return "protocol";
    case BackendErrorKind::kEmptyOutput: return "empty_output";
    case BackendErrorKind::kRetriesExhausted: return "retries_exhausted";
  }
  return "unknown";
}

BackendError::BackendError(BackendErrorKind kind, std::string system, const std::string& message)
    : std::runtime_error(system + ": " + std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      system_(std::move(system)) {}

std::chrono::milliseconds RetryPolicy::delay_after(int attempt) const {
  const double ms = static_cast<double>(base_delay.count()) * std::pow(factor, attempt);
  return std::chrono::milliseconds(static_cast<std::int64_t>(ms));
}

BackendBase::BackendBase(std::string name, BackendOptions options)
    : name_(std::move(name)),
      options_(std::move(options)),
      slots_(std::make_unique<std::counting_semaphore<>>(
          options_.max_in_flight < 1 ? 1 : options_.max_in_flight)) {}

void BackendBase::acquire() { slots_->acquire(); }
void BackendBase::release() { slots_->release(); }

void BackendBase::backoff(int attempt) const {
  const auto delay = options_.retry.delay_after(attempt);
  if (options_.retry.sleep) {
    options_.retry.sleep(delay);
  } else {
    std::this_thread::sleep_for(delay);
  }
}

// --- Translator / QeScorer / Generator --------------------------------------

Translator::Translator(SystemId id, BackendOptions options)
    : BackendBase(id.name, std::move(options)), id_(std::move(id)) {}

std::string Translator::translate(std::string_view source_text, Language source_lang,
                                  Language target_lang) {
  if (source_text.empty()) {
    throw BackendError(BackendErrorKind::kPrecondition, name(), "empty source text");
  }
  if (source_lang == target_lang) {
    throw BackendError(BackendErrorKind::kPrecondition, name(),
                       "source and target language are both " + std::string(to_code(source_lang)));
  }
  std::string out =
      with_retry([&] { return do_translate(source_text, source_lang, target_lang); });
  if (out.empty()) {
    throw BackendError(BackendErrorKind::kEmptyOutput, name(), "system returned an empty hypothesis");
  }
  return out;
}

QeScorer::QeScorer(std::string name, BackendOptions options)
    : BackendBase(std::move(name), std::move(options)) {}

QeScore QeScorer::score(std::string_view source_text, std::string_view hypothesis,
                        Language source_lang, Language target_lang) {
  if (source_text.empty() || hypothesis.empty()) {
    throw BackendError(BackendErrorKind::kPrecondition, name(), "empty text passed to scorer");
  }
  const double value =
      with_retry([&] { return do_score(source_text, hypothesis, source_lang, target_lang); });
  if (!(value >= 0.0 && value <= 1.0)) {
    throw BackendError(BackendErrorKind::kProtocol, name(),
                       "score " + std::to_string(value) + " outside [0,1]");
  }
  return QeScore(value);
}

Generator::Generator(std::string name, BackendOptions options)
    : BackendBase(std::move(name), std::move(options)) {}

std::string Generator::generate(std::string_view prompt, const GenerationParams& params) {
  if (prompt.empty()) {
    throw BackendError(BackendErrorKind::kPrecondition, name(), "empty prompt");
  }
  if (params.max_new_tokens < 1) {
    throw BackendError(BackendErrorKind::kPrecondition, name(), "max_new_tokens must be >= 1");
  }
  if (!(params.temperature >= 0.0)) {
    throw BackendError(BackendErrorKind::kPrecondition, name(), "temperature must be >= 0");
  }
  return with_retry([&] { return do_generate(prompt, params); });
}

// --- HTTP ----------------------------------------------------------------------

namespace {

struct SplitUrl {
  std::string scheme_host_port;
  std::string prefix;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto path_start = url.find('/', host_start);
  SplitUrl out;
  out.scheme_host_port = url.substr(0, path_start);
  if (path_start != std::string::npos) {
    out.prefix = url.substr(path_start);
    while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  }
  return out;
}

json post_json(const std::string& system, const HttpEndpoint& endpoint, const std::string& route,
               const json& body) {
  const SplitUrl target = split_url(endpoint.url);
  httplib::Client client(target.scheme_host_port);
  if (!client.is_valid()) {
    throw BackendError(BackendErrorKind::kPrecondition, system,
                       "unsupported backend url '" + endpoint.url + "'");
  }
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  if (endpoint.bearer_token) client.set_bearer_token_auth(*endpoint.bearer_token);

  auto result = client.Post(target.prefix + route, body.dump(), "application/json");
  if (!result) {
    throw BackendError(BackendErrorKind::kTransport, system,
                       "POST " + route + " failed: " + httplib::to_string(result.error()));
  }
  if (result->status < 200 || result->status >= 300) {
    throw BackendError(BackendErrorKind::kStatus, system,
                       "POST " + route + " returned HTTP " + std::to_string(result->status));
  }
  json parsed = json::parse(result->body, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    throw BackendError(BackendErrorKind::kProtocol, system, "response body is not a JSON object");
  }
  return parsed;
}

std::string output_field(const std::string& system, const json& body) {
  auto it = body.find("output");
  if (it == body.end() || !it->is_string()) {
    throw BackendError(BackendErrorKind::kProtocol, system, "response lacks string field 'output'");
  }
  return it->get<std::string>();
}

}  // namespace

HttpTranslator::HttpTranslator(SystemId id, HttpEndpoint endpoint, BackendOptions options)
    : Translator(std::move(id), std::move(options)), endpoint_(std::move(endpoint)) {}

std::string HttpTranslator::do_translate(std::string_view source_text, Language source_lang,
                                         Language target_lang) {
  json body;
  body["system"] = id().name;
  body["source_text"] = source_text;
  body["source_lang"] = to_code(source_lang);
  body["target_lang"] = to_code(target_lang);
  return output_field(name(), post_json(name(), endpoint_, "/translate", body));
}

HttpQeScorer::HttpQeScorer(std::string name, HttpEndpoint endpoint, BackendOptions options)
    : QeScorer(std::move(name), std::move(options)), endpoint_(std::move(endpoint)) {}

double HttpQeScorer::do_score(std::string_view source_text, std::string_view hypothesis,
                              Language source_lang, Language target_lang) {
  json body;
  body["source_text"] = source_text;
  body["hypothesis"] = hypothesis;
  body["source_lang"] = to_code(source_lang);
  body["target_lang"] = to_code(target_lang);
  const json response = post_json(name(), endpoint_, "/score", body);
  auto it = response.find("score");
  if (it == response.end() || !it->is_number()) {
    throw BackendError(BackendErrorKind::kProtocol, name(), "response lacks numeric field 'score'");
  }
  return it->get<double>();
}

HttpGenerator::HttpGenerator(std::string name, HttpEndpoint endpoint, BackendOptions options)
    : Generator(std::move(name), std::move(options)), endpoint_(std::move(endpoint)) {}

std::string HttpGenerator::do_generate(std::string_view prompt, const GenerationParams& params) {
  json body;
  body["prompt"] = prompt;
  body["max_new_tokens"] = params.max_new_tokens;
  body["temperature"] = params.temperature;
  if (params.seed) body["seed"] = *params.seed;
  return output_field(name(), post_json(name(), endpoint_, "/generate", body));
}

// --- mocks -------------------------------------------------------------------------

EchoTranslator::EchoTranslator(SystemId id, std::string variant, BackendOptions options)
    : Translator(std::move(id), std::move(options)), variant_(std::move(variant)) {}

std::string EchoTranslator::do_translate(std::string_view source_text, Language,
                                         Language target_lang) {
  std::string out(to_code(target_lang));
  out += ':';
  out += source_text;
  if (!variant_.empty()) {
    out += '#';
    out += variant_;
  }
  return out;
}

UnreachableTranslator::UnreachableTranslator(SystemId id, BackendOptions options)
    : Translator(std::move(id), std::move(options)) {}

std::string UnreachableTranslator::do_translate(std::string_view, Language, Language) {
  throw BackendError(BackendErrorKind::kTransport, name(), "connection refused");
}

FunctionTranslator::FunctionTranslator(SystemId id, Fn fn, BackendOptions options)
    : Translator(std::move(id), std::move(options)), fn_(std::move(fn)) {}

std::string FunctionTranslator::do_translate(std::string_view source_text, Language source_lang,
                                             Language target_lang) {
  return fn_(source_text, source_lang, target_lang);
}

TableQeScorer::TableQeScorer(std::map<Key, double> table, double default_score,
                             BackendOptions options)
    : QeScorer("table-qe", std::move(options)),
      table_(std::move(table)),
      default_score_(default_score) {}

double TableQeScorer::do_score(std::string_view source_text, std::string_view hypothesis,
                               Language source_lang, Language target_lang) {
  auto it = table_.find(
      Key{std::string(source_text), std::string(hypothesis), source_lang, target_lang});
  return it == table_.end() ? default_score_ : it->second;
}

HashQeScorer::HashQeScorer(std::uint64_t seed, BackendOptions options)
    : QeScorer("hash-qe", std::move(options)), seed_(seed) {}

double HashQeScorer::do_score(std::string_view source_text, std::string_view hypothesis,
                              Language source_lang, Language target_lang) {
  std::uint64_t h = hash_combine(seed_, fnv1a64(source_text));
  h = hash_combine(h, fnv1a64(hypothesis));
  h = hash_combine(h, static_cast<std::uint64_t>(source_lang) * 3 +
                          static_cast<std::uint64_t>(target_lang));
  return to_unit(h);
}

FunctionQeScorer::FunctionQeScorer(Fn fn, BackendOptions options)
    : QeScorer("function-qe", std::move(options)), fn_(std::move(fn)) {}

double FunctionQeScorer::do_score(std::string_view source_text, std::string_view hypothesis,
                                  Language source_lang, Language target_lang) {
  return fn_(source_text, hypothesis, source_lang, target_lang);
}

ScriptedGenerator::ScriptedGenerator(std::string response, BackendOptions options)
    : Generator("scripted-generator", std::move(options)), response_(std::move(response)) {}

std::string ScriptedGenerator::do_generate(std::string_view, const GenerationParams&) {
  return response_;
}

TemplateGenerator::TemplateGenerator(int lines, std::string style, BackendOptions options)
    : Generator("template-generator", std::move(options)), lines_(lines), style_(std::move(style)) {
  if (style_ != "plain" && style_ != "enumerated" && style_ != "blank") {
    throw std::invalid_argument("unknown template generator style '" + style_ + "'");
  }
}

std::string TemplateGenerator::do_generate(std::string_view prompt, const GenerationParams& params) {
  const std::uint64_t h = hash_combine(fnv1a64(prompt), static_cast<std::uint64_t>(params.seed.value_or(0)));
  std::string out;
  for (int i = 0; i < lines_; ++i) {
    if (style_ == "blank") {
      out += "  \n";
      continue;
    }
    if (style_ == "enumerated") out += std::to_string(i + 1) + ". ";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_combine(h, i)));
    out += "What is not said about topic ";
    out += buf;
    out += "?\n";
  }
  return out;
}

FunctionGenerator::FunctionGenerator(Fn fn, BackendOptions options)
    : Generator("function-generator", std::move(options)), fn_(std::move(fn)) {}

std::string FunctionGenerator::do_generate(std::string_view prompt, const GenerationParams& params) {
  return fn_(prompt, params);
}

UnreachableGenerator::UnreachableGenerator(BackendOptions options)
    : Generator("unreachable-generator", std::move(options)) {}

std::string UnreachableGenerator::do_generate(std::string_view, const GenerationParams&) {
  throw BackendError(BackendErrorKind::kTransport, name(), "connection refused");
}

// --- registry -----------------------------------------------------------------------

void BackendRegistry::validate() const {
  std::set<std::string> names;
  for (const auto& t : translators) {
    if (!t) throw std::invalid_argument("registry contains a null translator");
    if (t->id().name.empty()) throw std::invalid_argument("system id must be non-empty");
    if (!names.insert(t->id().name).second) {
      throw std::invalid_argument("duplicate system id '" + t->id().name + "'");
    }
  }
}

std::vector<SystemId> BackendRegistry::system_ids() const {
  std::vector<SystemId> ids;
  ids.reserve(translators.size());
  for (const auto& t : translators) ids.push_back(t->id());
  return ids;
}

}  // namespace corpusforge
