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

#include "corpusforge/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "corpusforge/parallel.hpp"
#include "corpusforge/rng.hpp"

namespace corpusforge {

namespace pt = boost::property_tree;

std::size_t RunConfig::effective_jobs() const {
  return jobs.value_or(default_jobs());
}

namespace {

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = item.find_last_not_of(" \t");
    out.push_back(item.substr(first, last - first + 1));
  }
  return out;
}

// Typed reads that name the offending key on failure.
class Section {
 public:
  Section(const pt::ptree& tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  template <typename T>
  void read(const char* key, T& out) {
    allowed_.insert(key);
    auto child = tree_.get_child_optional(pt::ptree::path_type(key, '\0'));
    if (!child) return;
    auto value = child->get_value_optional<T>();
    if (!value) {
      throw ConfigError("[" + name_ + "] " + key + ": cannot parse '" + child->data() + "'");
    }
    out = *value;
  }

  void read_optional(const char* key, std::optional<std::string>& out) {
    allowed_.insert(key);
    if (auto child = tree_.get_child_optional(pt::ptree::path_type(key, '\0'))) {
      out = child->data();
    }
  }

  void reject_unknown() const {
    for (const auto& [key, value] : tree_) {
      if (!value.empty()) continue;  // nested section, checked by the caller
      if (!allowed_.count(key)) throw ConfigError("[" + name_ + "] unknown key '" + key + "'");
    }
  }

 private:
  const pt::ptree& tree_;
  std::string name_;
  std::set<std::string> allowed_;
};

BackendSpec read_backend(const pt::ptree& root, const std::string& name) {
  const std::string section_name = "backends." + name;
  auto tree = root.get_child_optional(pt::ptree::path_type(section_name, '\0'));
  if (!tree) throw ConfigError("backend '" + name + "' has no [" + section_name + "] section");
  BackendSpec spec;
  spec.name = name;
  Section s(*tree, section_name);
  s.read("kind", spec.kind);
  s.read("url", spec.url);
  s.read_optional("token", spec.token);
  s.read("max_in_flight", spec.max_in_flight);
  s.read("timeout_ms", spec.timeout_ms);
  s.read("variant", spec.variant);
  s.read("seed", spec.seed);
  s.read("default_score", spec.default_score);
  s.read("lines", spec.lines);
  s.read("style", spec.style);
  s.reject_unknown();
  return spec;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
  pt::ptree root;
  try {
    std::istringstream in(text);
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }

  RunConfig config;
  config.config_path = origin;
  std::set<std::string> used_backends;

  // Top-level keys
  {
    Section top(root, "top-level");
    std::size_t jobs = 0;
    top.read("seed", config.seed);
    top.read("jobs", jobs);
    top.read("strict", config.strict);
    if (jobs > 0) config.jobs = jobs;
    top.reject_unknown();
  }

  static const std::set<std::string> kSections = {"thresholds", "retry",    "generation",
                                                  "geometry",   "hint",     "backends"};
  for (const auto& [key, value] : root) {
    if (value.empty()) continue;
    if (!kSections.count(key) && key.rfind("backends.", 0) != 0) {
      throw ConfigError(origin + ": unknown section [" + key + "]");
    }
  }

  if (auto t = root.get_child_optional("thresholds")) {
    Section s(*t, "thresholds");
    s.read("st", config.thresholds.st);
    s.read("sqa_question", config.thresholds.sqa_question);
    s.reject_unknown();
  }
  if (auto t = root.get_child_optional("retry")) {
    Section s(*t, "retry");
    s.read("max_attempts", config.retry.max_attempts);
    s.read("base_delay_ms", config.retry.base_delay_ms);
    s.read("factor", config.retry.factor);
    s.reject_unknown();
  }
  if (auto t = root.get_child_optional("generation")) {
    Section s(*t, "generation");
    s.read("max_new_tokens", config.generation.max_new_tokens);
    s.read("temperature", config.generation.temperature);
    s.reject_unknown();
  }
  if (auto t = root.get_child_optional("geometry")) {
    Section s(*t, "geometry");
    auto& g = config.geometry;
    s.read("sample_rate_hz", g.sample_rate_hz);
    s.read("mel_hop_ms", g.mel_hop_ms);
    s.read("mel_stride", g.mel_stride);
    s.read("conv_layers", g.conv_layers);
    s.read("conv_kernel", g.conv_kernel);
    s.read("conv_stride", g.conv_stride);
    s.read("conv_padding", g.conv_padding);
    s.read("adapter_layers", g.adapter_layers);
    s.read("adapter_kernel", g.adapter_kernel);
    s.read("adapter_stride", g.adapter_stride);
    s.read("adapter_padding", g.adapter_padding);
    s.read("max_audio_s", g.max_audio_s);
    s.read("mel_dim", g.mel_dim);
    s.reject_unknown();
  }
  if (auto t = root.get_child_optional("hint")) {
    Section s(*t, "hint");
    std::string placement = "after_tags";
    s.read("probability", config.hint.probability);
    s.read("placement", placement);
    s.reject_unknown();
    if (placement == "after_tags") {
      config.hint.placement = HintPlacement::kAfterTags;
    } else if (placement == "before_tags") {
      config.hint.placement = HintPlacement::kBeforeTags;
    } else {
      throw ConfigError("[hint] placement must be after_tags or before_tags");
    }
  }
  if (auto t = root.get_child_optional("backends")) {
    Section s(*t, "backends");
    std::string translators;
    std::optional<std::string> scorer;
    std::optional<std::string> generator;
    s.read("translators", translators);
    s.read_optional("scorer", scorer);
    s.read_optional("generator", generator);
    s.reject_unknown();
    for (const auto& name : split_list(translators)) {
      config.translators.push_back(read_backend(root, name));
      used_backends.insert(name);
    }
    if (scorer) {
      config.scorer = read_backend(root, *scorer);
      used_backends.insert(*scorer);
    }
    if (generator) {
      config.generator = read_backend(root, *generator);
      used_backends.insert(*generator);
    }
  }
  for (const auto& [key, value] : root) {
    if (key.rfind("backends.", 0) == 0 && !used_backends.count(key.substr(9))) {
      throw ConfigError(origin + ": section [" + key + "] is not referenced from [backends]");
    }
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path);
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* value = std::getenv(name.c_str());
    if (value == nullptr) return std::nullopt;
    return std::string(value);
  };
}

std::string backend_url_env_name(const std::string& backend) {
  std::string out = "CORPUSFORGE_BACKEND_";
  for (unsigned char c : backend) {
    out += std::isalnum(c) ? static_cast<char>(std::toupper(c)) : '_';
  }
  out += "_URL";
  return out;
}

void apply_env(RunConfig& config, const EnvLookup& env) {
  auto parse_u64 = [](const std::string& name, const std::string& value) {
    try {
      std::size_t used = 0;
      const auto parsed = std::stoull(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
      return static_cast<std::uint64_t>(parsed);
    } catch (const std::exception&) {
      throw ConfigError(name + ": expected a non-negative integer, got '" + value + "'");
    }
  };
  if (auto seed = env("CORPUSFORGE_SEED")) config.seed = parse_u64("CORPUSFORGE_SEED", *seed);
  if (auto jobs = env("CORPUSFORGE_JOBS")) {
    const auto n = parse_u64("CORPUSFORGE_JOBS", *jobs);
    if (n == 0) throw ConfigError("CORPUSFORGE_JOBS must be >= 1");
    config.jobs = n;
  }
  auto override_url = [&](BackendSpec& spec) {
    if (auto url = env(backend_url_env_name(spec.name))) {
      spec.url = *url;
      spec.kind = "http";
    }
  };
  for (auto& t : config.translators) override_url(t);
  if (config.scorer) override_url(*config.scorer);
  if (config.generator) override_url(*config.generator);
}

void validate(const RunConfig& config, bool need_translation_registry, bool need_generator) {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(config.thresholds.st)) throw ConfigError("thresholds.st must lie in [0,1]");
  if (!in_unit(config.thresholds.sqa_question)) {
    throw ConfigError("thresholds.sqa_question must lie in [0,1]");
  }
  if (!in_unit(config.hint.probability)) throw ConfigError("hint.probability must lie in [0,1]");
  if (config.retry.max_attempts < 1) throw ConfigError("retry.max_attempts must be >= 1");
  if (config.retry.base_delay_ms < 0) throw ConfigError("retry.base_delay_ms must be >= 0");
  if (config.generation.max_new_tokens < 1) {
    throw ConfigError("generation.max_new_tokens must be >= 1");
  }
  if (!(config.generation.temperature >= 0.0)) {
    throw ConfigError("generation.temperature must be >= 0");
  }
  try {
    validate(config.geometry);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (need_translation_registry) {
    if (config.translators.empty()) throw ConfigError("backends.translators is empty");
    if (!config.scorer) throw ConfigError("backends.scorer is not set");
  }
  if (need_generator && !config.generator) throw ConfigError("backends.generator is not set");
}

namespace {

HttpEndpoint endpoint_for(const BackendSpec& spec) {
  if (spec.url.empty()) throw ConfigError("backend '" + spec.name + "' needs a url");
  HttpEndpoint ep;
  ep.url = spec.url;
  ep.bearer_token = spec.token;
  ep.timeout = std::chrono::milliseconds(spec.timeout_ms);
  return ep;
}

}  // namespace

BackendRegistry build_registry(const RunConfig& config) {
  BackendOptions options;
  options.retry.max_attempts = config.retry.max_attempts;
  options.retry.base_delay = std::chrono::milliseconds(config.retry.base_delay_ms);
  options.retry.factor = config.retry.factor;

  auto options_for = [&](const BackendSpec& spec) {
    BackendOptions o = options;
    o.max_in_flight = spec.max_in_flight;
    return o;
  };

  BackendRegistry registry;
  for (const auto& spec : config.translators) {
    SystemId id{spec.name};
    if (spec.kind == "http") {
      registry.translators.push_back(
          std::make_shared<HttpTranslator>(id, endpoint_for(spec), options_for(spec)));
    } else if (spec.kind == "mock-echo") {
      registry.translators.push_back(
          std::make_shared<EchoTranslator>(id, spec.variant, options_for(spec)));
    } else if (spec.kind == "mock-down") {
      registry.translators.push_back(std::make_shared<UnreachableTranslator>(id, options_for(spec)));
    } else {
      throw ConfigError("translator '" + spec.name + "': unsupported kind '" + spec.kind + "'");
    }
  }
  if (config.scorer) {
    const auto& spec = *config.scorer;
    if (spec.kind == "http") {
      registry.scorer = std::make_shared<HttpQeScorer>(spec.name, endpoint_for(spec), options_for(spec));
    } else if (spec.kind == "mock-hash") {
      registry.scorer = std::make_shared<HashQeScorer>(spec.seed, options_for(spec));
    } else if (spec.kind == "mock-table") {
      registry.scorer = std::make_shared<TableQeScorer>(std::map<TableQeScorer::Key, double>{},
                                                        spec.default_score, options_for(spec));
    } else {
      throw ConfigError("scorer '" + spec.name + "': unsupported kind '" + spec.kind + "'");
    }
  }
  if (config.generator) {
    const auto& spec = *config.generator;
    if (spec.kind == "http") {
      registry.generator =
          std::make_shared<HttpGenerator>(spec.name, endpoint_for(spec), options_for(spec));
    } else if (spec.kind == "mock-template") {
      try {
        registry.generator =
            std::make_shared<TemplateGenerator>(spec.lines, spec.style, options_for(spec));
      } catch (const std::invalid_argument& e) {
        throw ConfigError("generator '" + spec.name + "': " + e.what());
      }
    } else if (spec.kind == "mock-down") {
      registry.generator = std::make_shared<UnreachableGenerator>(options_for(spec));
    } else {
      throw ConfigError("generator '" + spec.name + "': unsupported kind '" + spec.kind + "'");
    }
  }
  try {
    registry.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return registry;
}

nlohmann::ordered_json effective_config_json(const RunConfig& c) {
  auto backend_json = [](const BackendSpec& b) {
    nlohmann::ordered_json j;
    j["name"] = b.name;
    j["kind"] = b.kind;
    j["url"] = b.url;
    j["variant"] = b.variant;
    j["seed"] = b.seed;
    j["default_score"] = b.default_score;
    j["lines"] = b.lines;
    j["style"] = b.style;
    return j;
  };
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["strict"] = c.strict;
  j["thresholds"] = {{"st", c.thresholds.st}, {"sqa_question", c.thresholds.sqa_question}};
  j["retry"] = {{"max_attempts", c.retry.max_attempts},
                {"base_delay_ms", c.retry.base_delay_ms},
                {"factor", c.retry.factor}};
  j["generation"] = {{"max_new_tokens", c.generation.max_new_tokens},
                     {"temperature", c.generation.temperature}};
  const auto& g = c.geometry;
  j["geometry"] = {{"sample_rate_hz", g.sample_rate_hz},   {"mel_hop_ms", g.mel_hop_ms},
                   {"mel_stride", g.mel_stride},           {"conv_layers", g.conv_layers},
                   {"conv_kernel", g.conv_kernel},         {"conv_stride", g.conv_stride},
                   {"conv_padding", g.conv_padding},       {"adapter_layers", g.adapter_layers},
                   {"adapter_kernel", g.adapter_kernel},   {"adapter_stride", g.adapter_stride},
                   {"adapter_padding", g.adapter_padding}, {"max_audio_s", g.max_audio_s},
                   {"mel_dim", g.mel_dim}};
  j["hint"] = {{"probability", c.hint.probability},
               {"placement", c.hint.placement == HintPlacement::kAfterTags ? "after_tags"
                                                                           : "before_tags"}};
  nlohmann::ordered_json translators = nlohmann::ordered_json::array();
  for (const auto& t : c.translators) translators.push_back(backend_json(t));
  j["translators"] = std::move(translators);
  j["scorer"] = c.scorer ? backend_json(*c.scorer) : nlohmann::ordered_json();
  j["generator"] = c.generator ? backend_json(*c.generator) : nlohmann::ordered_json();
  return j;
}

std::string config_hash(const RunConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(effective_config_json(config).dump())));
  return buf;
}

}  // namespace corpusforge
