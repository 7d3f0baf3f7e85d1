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

#include <cstdlib>
#include <string>

#include "corpusforge/kernels/kernels.hpp"

namespace corpusforge::kernels {

std::string_view isa_name(Isa isa) {
  return isa == Isa::kAvx2 ? "avx2" : "scalar";
}

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(CORPUSFORGE_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

namespace {

Isa resolve_isa() {
  const char* forced = std::getenv("CORPUSFORGE_SIMD");
  if (forced != nullptr) {
    std::string value(forced);
    if (value == "scalar") return Isa::kScalar;
    if (value == "avx2" && cpu_supports(Isa::kAvx2)) return Isa::kAvx2;
  }
  return cpu_supports(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar;
}

}  // namespace

Isa active_isa() {
  static const Isa isa = resolve_isa();
  return isa;
}

RetentionFn retention_kernel(Isa isa) {
#if defined(CORPUSFORGE_HAVE_AVX2)
  if (isa == Isa::kAvx2 && cpu_supports(Isa::kAvx2)) return &avx2::count_retention;
#endif
  (void)isa;
  return &scalar::count_retention;
}

MaskFillFn mask_kernel(Isa isa) {
#if defined(CORPUSFORGE_HAVE_AVX2)
  if (isa == Isa::kAvx2 && cpu_supports(Isa::kAvx2)) return &avx2::fill_mask;
#endif
  (void)isa;
  return &scalar::fill_mask;
}

}  // namespace corpusforge::kernels
