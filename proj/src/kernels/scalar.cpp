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

#include <algorithm>
#include <cassert>

#include "corpusforge/kernels/kernels.hpp"

namespace corpusforge::kernels::scalar {

std::size_t count_retention(std::span<const double> scores, std::size_t records, double threshold,
                            std::span<std::size_t> kept_per_system) {
  const std::size_t systems = kept_per_system.size();
  assert(scores.size() == systems * records);
  std::fill(kept_per_system.begin(), kept_per_system.end(), 0);
  std::size_t oracle = 0;
  for (std::size_t r = 0; r < records; ++r) {
    bool any = false;
    for (std::size_t s = 0; s < systems; ++s) {
      // NaN compares false.
      if (scores[s * records + r] >= threshold) {
        ++kept_per_system[s];
        any = true;
      }
    }
    oracle += any ? 1 : 0;
  }
  return oracle;
}

void fill_mask(std::span<const std::uint32_t> run_begin, std::span<const std::uint32_t> run_end,
               std::size_t cols, std::span<std::uint8_t> dense) {
  const std::size_t rows = run_begin.size();
  assert(run_end.size() == rows);
  assert(dense.size() == rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    std::uint8_t* row = dense.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) {
      row[j] = (j >= run_begin[i] && j < run_end[i]) ? 1 : 0;
    }
  }
}

}  // namespace corpusforge::kernels::scalar
