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

// Compiled with -mavx2; only reached after a runtime CPU check.

#include <immintrin.h>

#include <algorithm>
#include <bit>
#include <cassert>

#include "corpusforge/kernels/kernels.hpp"

namespace corpusforge::kernels::avx2 {

std::size_t count_retention(std::span<const double> scores, std::size_t records, double threshold,
                            std::span<std::size_t> kept_per_system) {
  const std::size_t systems = kept_per_system.size();
  assert(scores.size() == systems * records);
  std::fill(kept_per_system.begin(), kept_per_system.end(), 0);
  if (systems == 0) return 0;

  const __m256d thr = _mm256_set1_pd(threshold);
  const double* base = scores.data();
  std::size_t oracle = 0;
  std::size_t r = 0;
  for (; r + 4 <= records; r += 4) {
    __m256d any = _mm256_setzero_pd();
    for (std::size_t s = 0; s < systems; ++s) {
      __m256d v = _mm256_loadu_pd(base + s * records + r);
      // Ordered compare: NaN lanes come out false.
      __m256d keep = _mm256_cmp_pd(v, thr, _CMP_GE_OQ);
      kept_per_system[s] += static_cast<std::size_t>(std::popcount(
          static_cast<unsigned>(_mm256_movemask_pd(keep))));
      any = _mm256_or_pd(any, keep);
    }
    oracle += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(_mm256_movemask_pd(any))));
  }
  // tail
  for (; r < records; ++r) {
    bool hit = false;
    for (std::size_t s = 0; s < systems; ++s) {
      if (base[s * records + r] >= threshold) {
        ++kept_per_system[s];
        hit = true;
      }
    }
    oracle += hit ? 1 : 0;
  }
  return oracle;
}

void fill_mask(std::span<const std::uint32_t> run_begin, std::span<const std::uint32_t> run_end,
               std::size_t cols, std::span<std::uint8_t> dense) {
  const std::size_t rows = run_begin.size();
  assert(run_end.size() == rows);
  assert(dense.size() == rows * cols);

  const __m256i lane = _mm256_setr_epi8(0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16,
                                        17, 18, 19, 20, 21, 22, 23, 24, 25, 26, 27, 28, 29, 30, 31);
  const __m256i ones = _mm256_set1_epi8(1);

  for (std::size_t i = 0; i < rows; ++i) {
    std::uint8_t* row = dense.data() + i * cols;
    const std::size_t begin = run_begin[i];
    const std::size_t end = run_end[i];
    std::size_t j = 0;
    for (; j + 32 <= cols; j += 32) {
      // Clamp the run into this 32-column chunk; lane k is set iff lo <= k < hi.
      const auto lo = static_cast<int>(std::clamp<std::ptrdiff_t>(
          static_cast<std::ptrdiff_t>(begin) - static_cast<std::ptrdiff_t>(j), 0, 32));
      const auto hi = static_cast<int>(std::clamp<std::ptrdiff_t>(
          static_cast<std::ptrdiff_t>(end) - static_cast<std::ptrdiff_t>(j), 0, 32));
      const __m256i ge_lo = _mm256_cmpgt_epi8(lane, _mm256_set1_epi8(static_cast<char>(lo - 1)));
      const __m256i lt_hi = _mm256_cmpgt_epi8(_mm256_set1_epi8(static_cast<char>(hi)), lane);
      const __m256i bytes = _mm256_and_si256(_mm256_and_si256(ge_lo, lt_hi), ones);
      _mm256_storeu_si256(reinterpret_cast<__m256i*>(row + j), bytes);
    }
    for (; j < cols; ++j) row[j] = (j >= begin && j < end) ? 1 : 0;
  }
}

}  // namespace corpusforge::kernels::avx2
