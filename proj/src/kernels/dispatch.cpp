/*
 * Copyright 2026 The DenseLoRA Desk Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <atomic>
#include <cstdlib>
#include <string>

#include "denselora/kernels/kernels.hpp"
#include "denselora/numeric/errors.hpp"

namespace denselora::kernels {

std::string_view to_string(SimdLevel level) {
  switch (level) {
    case SimdLevel::Scalar:
      return "scalar";
    case SimdLevel::Avx2:
      return "avx2";
    case SimdLevel::Neon:
      return "neon";
  }
  return "unknown";
}

std::optional<SimdLevel> parse_simd_level(std::string_view name) {
  if (name == "scalar") return SimdLevel::Scalar;
  if (name == "avx2") return SimdLevel::Avx2;
  if (name == "neon") return SimdLevel::Neon;
  return std::nullopt;
}

bool level_compiled(SimdLevel level) {
  switch (level) {
    case SimdLevel::Scalar:
      return true;
    case SimdLevel::Avx2:
#if defined(DENSELORA_HAVE_AVX2)
      return true;
#else
      return false;
#endif
    case SimdLevel::Neon:
#if defined(DENSELORA_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

bool level_supported(SimdLevel level) {
  if (!level_compiled(level)) return false;
  switch (level) {
    case SimdLevel::Scalar:
      return true;
    case SimdLevel::Avx2:
#if defined(DENSELORA_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case SimdLevel::Neon:
      return true;  // baseline on aarch64
  }
  return false;
}

const KernelTable& table(SimdLevel level) {
  if (!level_supported(level)) {
    throw ConfigError("SIMD level '" + std::string(to_string(level)) + "' is not available on this build/CPU");
  }
  switch (level) {
#if defined(DENSELORA_HAVE_AVX2)
    case SimdLevel::Avx2:
      return detail::avx2_table();
#endif
#if defined(DENSELORA_HAVE_NEON)
    case SimdLevel::Neon:
      return detail::neon_table();
#endif
    default:
      return detail::scalar_table();
  }
}

SimdLevel best_supported_level() {
  if (level_supported(SimdLevel::Avx2)) return SimdLevel::Avx2;
  if (level_supported(SimdLevel::Neon)) return SimdLevel::Neon;
  return SimdLevel::Scalar;
}

namespace {

const KernelTable* initial_table() {
  if (const char* env = std::getenv("DENSELORA_SIMD")) {
    auto level = parse_simd_level(env);
    if (!level) throw ConfigError(std::string("DENSELORA_SIMD: unknown level '") + env + "'");
    return &table(*level);
  }
  return &table(best_supported_level());
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{initial_table()};
  return slot;
}

}  // namespace

const KernelTable& active() { return *active_slot().load(std::memory_order_acquire); }

void set_active(SimdLevel level) { active_slot().store(&table(level), std::memory_order_release); }

}  // namespace denselora::kernels
