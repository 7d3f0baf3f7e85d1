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

// Data-parallel inner loops with a portable scalar reference and an AVX2 variant.
// The dispatching entry points pick the widest variant the CPU supports; the
// per-ISA namespaces are exposed so the variants can be tested against each other.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace corpusforge::kernels {

enum class Isa : std::uint8_t { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);
bool cpu_supports(Isa isa);

// Widest supported ISA, unless CORPUSFORGE_SIMD=scalar|avx2 forces one.
Isa active_isa();

// `scores` is system-major: system s occupies [s * records, (s + 1) * records).
// NaN marks a missing score and never counts as kept. Writes the number of
// records with score >= threshold per system into `kept_per_system` (size =
// systems) and returns the number of records where any system clears it.
using RetentionFn = std::size_t (*)(std::span<const double> scores, std::size_t records,
                                    double threshold, std::span<std::size_t> kept_per_system);

// Expands contiguous column runs into a dense row-major 0/1 matrix of
// `cols` columns. Row i has ones exactly on [run_begin[i], run_end[i]).
using MaskFillFn = void (*)(std::span<const std::uint32_t> run_begin,
                            std::span<const std::uint32_t> run_end, std::size_t cols,
                            std::span<std::uint8_t> dense);

namespace scalar {
std::size_t count_retention(std::span<const double> scores, std::size_t records, double threshold,
                            std::span<std::size_t> kept_per_system);
void fill_mask(std::span<const std::uint32_t> run_begin, std::span<const std::uint32_t> run_end,
               std::size_t cols, std::span<std::uint8_t> dense);
}  // namespace scalar

namespace avx2 {
std::size_t count_retention(std::span<const double> scores, std::size_t records, double threshold,
                            std::span<std::size_t> kept_per_system);
void fill_mask(std::span<const std::uint32_t> run_begin, std::span<const std::uint32_t> run_end,
               std::size_t cols, std::span<std::uint8_t> dense);
}  // namespace avx2

RetentionFn retention_kernel(Isa isa);
MaskFillFn mask_kernel(Isa isa);

inline std::size_t count_retention(std::span<const double> scores, std::size_t records,
                                   double threshold, std::span<std::size_t> kept_per_system) {
  return retention_kernel(active_isa())(scores, records, threshold, kept_per_system);
}

inline void fill_mask(std::span<const std::uint32_t> run_begin,
                      std::span<const std::uint32_t> run_end, std::size_t cols,
                      std::span<std::uint8_t> dense) {
  mask_kernel(active_isa())(run_begin, run_end, cols, dense);
}

}  // namespace corpusforge::kernels
