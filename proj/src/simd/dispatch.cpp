// Copyright 2026 The djpeg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <atomic>
#include <cstdlib>
#include <string>

#include "djpeg/error.hpp"
#include "djpeg/simd/kernels.hpp"

namespace djpeg::simd {

namespace detail {
#if !defined(DJPEG_HAVE_AVX2)
const KernelTable* avx2_table() { return nullptr; }
#endif
#if !defined(DJPEG_HAVE_NEON)
const KernelTable* neon_table() { return nullptr; }
#endif
}  // namespace detail

namespace {

bool cpu_supports_avx2() {
#if defined(DJPEG_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* select_default() {
  if (const char* env = std::getenv("DJPEG_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return &detail::scalar_table();
    if (want == "avx2" && isa_available(Isa::kAvx2)) return detail::avx2_table();
    if (want == "neon" && isa_available(Isa::kNeon)) return detail::neon_table();
  }
  if (isa_available(Isa::kAvx2)) return detail::avx2_table();
  if (isa_available(Isa::kNeon)) return detail::neon_table();
  return &detail::scalar_table();
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{select_default()};
  return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return true;
    case Isa::kAvx2: return detail::avx2_table() != nullptr && cpu_supports_avx2();
    case Isa::kNeon: return detail::neon_table() != nullptr;
  }
  return false;
}

const KernelTable& kernels_for(Isa isa) {
  require(isa_available(isa), ErrorCode::kConfigError,
          "SIMD variant not available: " + std::string(isa_name(isa)));
  switch (isa) {
    case Isa::kAvx2: return *detail::avx2_table();
    case Isa::kNeon: return *detail::neon_table();
    case Isa::kScalar: break;
  }
  return detail::scalar_table();
}

const KernelTable& kernels() {
  return *active_slot().load(std::memory_order_relaxed);
}

void set_active_isa(Isa isa) {
  active_slot().store(&kernels_for(isa), std::memory_order_relaxed);
}

}  // namespace djpeg::simd
