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

#include "corpusforge/geometry.hpp"

#include <cmath>
#include <charconv>
#include <sstream>
#include <stdexcept>

#include "corpusforge/kernels/kernels.hpp"

namespace corpusforge {

void validate(const SpeechGeometryConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("geometry: ") + what);
  };
  require(c.sample_rate_hz > 0, "sample_rate_hz must be positive");
  require(c.mel_hop_ms > 0.0 && std::isfinite(c.mel_hop_ms), "mel_hop_ms must be positive");
  require(c.mel_stride >= 1, "mel_stride must be >= 1");
  require(c.conv_layers >= 0, "conv_layers must be >= 0");
  require(c.conv_kernel >= 1, "conv_kernel must be >= 1");
  require(c.conv_stride >= 1, "conv_stride must be >= 1");
  require(c.conv_padding >= 0, "conv_padding must be >= 0");
  require(c.adapter_layers >= 0, "adapter_layers must be >= 0");
  require(c.adapter_kernel >= 1, "adapter_kernel must be >= 1");
  require(c.adapter_stride >= 1, "adapter_stride must be >= 1");
  require(c.adapter_padding >= 0, "adapter_padding must be >= 0");
  require(c.max_audio_s > 0.0, "max_audio_s must be positive");
  require(c.mel_dim > 0, "mel_dim must be positive");
}

std::int64_t layer_out_len(std::int64_t in_len, int kernel, int stride, int padding) {
  if (in_len <= 0) return 0;
  const std::int64_t numerator = in_len + 2 * static_cast<std::int64_t>(padding) - kernel;
  if (numerator < 0) return 0;
  return numerator / stride + 1;
}

std::int64_t mel_frame_count(double duration_s, const SpeechGeometryConfig& config) {
  if (!(duration_s > 0.0)) return 0;
  const long double frames =
      static_cast<long double>(duration_s) * 1000.0L / static_cast<long double>(config.mel_hop_ms);
  const long double snapped = std::floor(frames + 1e-9L);
  return static_cast<std::int64_t>(snapped);
}

std::vector<std::int64_t> audio_length_chain(double duration_s, const SpeechGeometryConfig& c) {
  std::vector<std::int64_t> chain;
  chain.reserve(2 + static_cast<std::size_t>(c.conv_layers + c.adapter_layers));
  std::int64_t len = mel_frame_count(duration_s, c);
  chain.push_back(len);
  len /= c.mel_stride;
  chain.push_back(len);
  for (int i = 0; i < c.conv_layers; ++i) {
    len = layer_out_len(len, c.conv_kernel, c.conv_stride, c.conv_padding);
    chain.push_back(len);
  }
  for (int i = 0; i < c.adapter_layers; ++i) {
    len = layer_out_len(len, c.adapter_kernel, c.adapter_stride, c.adapter_padding);
    chain.push_back(len);
  }
  return chain;
}

std::int64_t audio_token_budget(double duration_s, const SpeechGeometryConfig& config) {
  return audio_length_chain(duration_s, config).back();
}

LengthFilterResult length_filter(const DatasetManifest& manifest, double max_s) {
  LengthFilterResult result;
  result.kept.stage = manifest.stage;
  for (const auto& record : manifest.records) {
    if (record.duration_s <= max_s) {
      result.kept.records.push_back(record);
    } else {
      result.dropped.push_back(record.id);
    }
  }
  return result;
}

MaskLayout::MaskLayout(std::uint32_t audio_len, std::uint32_t text_len)
    : audio_len_(audio_len), text_len_(text_len) {
  const std::uint32_t n = audio_len + text_len;
  run_begin_.assign(n, 0);
  run_end_.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    run_end_[i] = i < audio_len ? audio_len : i + 1;
  }
}

std::vector<std::uint8_t> MaskLayout::to_dense() const {
  const std::size_t n = size();
  std::vector<std::uint8_t> dense(n * n);
  kernels::fill_mask(run_begin_, run_end_, n, dense);
  return dense;
}

std::string MaskLayout::to_text() const {
  std::string out;
  out.reserve(static_cast<std::size_t>(size()) * 8);
  for (std::uint32_t i = 0; i < size(); ++i) {
    out += std::to_string(run_begin_[i]);
    out += '-';
    out += std::to_string(run_end_[i] - 1);
    out += '\n';
  }
  return out;
}

MaskLayout build_mask_layout(std::uint32_t audio_len, std::uint32_t text_len) {
  return MaskLayout(audio_len, text_len);
}

ParsedRuns parse_mask_text(std::string_view text) {
  ParsedRuns runs;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    const auto dash = line.find('-');
    std::uint32_t first = 0;
    std::uint32_t last = 0;
    bool ok = dash != std::string_view::npos;
    if (ok) {
      auto [p1, e1] = std::from_chars(line.data(), line.data() + dash, first);
      auto [p2, e2] = std::from_chars(line.data() + dash + 1, line.data() + line.size(), last);
      ok = e1 == std::errc{} && p1 == line.data() + dash && e2 == std::errc{} &&
           p2 == line.data() + line.size() && first <= last;
    }
    if (!ok) {
      throw std::invalid_argument("mask line " + std::to_string(line_no) + ": expected 'start-end'");
    }
    runs.begin.push_back(first);
    runs.end.push_back(last + 1);
  }
  return runs;
}

}  // namespace corpusforge
