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
#include <string>
#include <string_view>
#include <vector>

#include "corpusforge/manifest.hpp"

namespace corpusforge {

/// Framing, convolution and adapter parameters that fix how many audio
/// positions a clip occupies in the decoder context.
struct SpeechGeometryConfig {
  int sample_rate_hz = 16000;
  double mel_hop_ms = 10.0;
  int mel_stride = 2;
  int conv_layers = 3;
  int conv_kernel = 3;
  int conv_stride = 2;
  int conv_padding = 1;
  int adapter_layers = 2;
  int adapter_kernel = 3;
  int adapter_stride = 2;
  int adapter_padding = 1;
  double max_audio_s = 120.0;
  int mel_dim = 80;

  bool operator==(const SpeechGeometryConfig&) const = default;
};

// Throws std::invalid_argument naming the first bad field.
void validate(const SpeechGeometryConfig& config);

// floor((in + 2*padding - kernel) / stride) + 1, or 0 when the window never fits.
std::int64_t layer_out_len(std::int64_t in_len, int kernel, int stride, int padding);

// Mel frames for a clip: floor(duration_ms / hop_ms). Products that land within
// 1e-9 frames below an integer snap up to it, so 0.29 s at 10 ms is 29 frames.
std::int64_t mel_frame_count(double duration_s, const SpeechGeometryConfig& config);

// Every intermediate length, starting with the mel frame count and ending with
// the adapter output.
std::vector<std::int64_t> audio_length_chain(double duration_s, const SpeechGeometryConfig& config);

std::int64_t audio_token_budget(double duration_s, const SpeechGeometryConfig& config = {});

struct LengthFilterResult {
  DatasetManifest kept;
  std::vector<std::string> dropped;
};

// Keeps records with duration_s <= max_s, preserving order.
LengthFilterResult length_filter(const DatasetManifest& manifest, double max_s = 120.0);

/// Prefix-LM attention layout: audio rows see the whole audio block and
/// nothing else; text row i sees columns [0, i]. Each row is one contiguous
/// run, stored as half-open [begin, end).
class MaskLayout {
 public:
  MaskLayout(std::uint32_t audio_len, std::uint32_t text_len);

  std::uint32_t audio_len() const { return audio_len_; }
  std::uint32_t text_len() const { return text_len_; }
  std::uint32_t size() const { return audio_len_ + text_len_; }

  bool allowed(std::uint32_t row, std::uint32_t col) const {
    return col >= run_begin_[row] && col < run_end_[row];
  }

  const std::vector<std::uint32_t>& run_begin() const { return run_begin_; }
  const std::vector<std::uint32_t>& run_end() const { return run_end_; }

  // Row-major size() x size() matrix of 0/1.
  std::vector<std::uint8_t> to_dense() const;

  // One line per row, "start-end" with inclusive column bounds (docs/mask-format.md).
  std::string to_text() const;

 private:
  std::uint32_t audio_len_;
  std::uint32_t text_len_;
  std::vector<std::uint32_t> run_begin_;
  std::vector<std::uint32_t> run_end_;
};

MaskLayout build_mask_layout(std::uint32_t audio_len, std::uint32_t text_len);

// Parses the text export back into per-row half-open runs. Throws
// std::invalid_argument on malformed lines.
struct ParsedRuns {
  std::vector<std::uint32_t> begin;
  std::vector<std::uint32_t> end;
};
ParsedRuns parse_mask_text(std::string_view text);

}  // namespace corpusforge
