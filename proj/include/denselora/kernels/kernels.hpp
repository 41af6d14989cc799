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

#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

namespace denselora::kernels {

enum class SimdLevel { Scalar, Avx2, Neon };

std::string_view to_string(SimdLevel level);
std::optional<SimdLevel> parse_simd_level(std::string_view name);

// Inner loops of the numeric substrate. Every variant performs the same IEEE
// operations in the same order per output element (separate multiply and add,
// no reassociation), so all levels are bitwise interchangeable.
struct KernelTable {
  SimdLevel level;
  // c[m x p] += a[m x n] * b[n x p], accumulated over n in increasing order.
  void (*gemm_acc)(std::size_t m, std::size_t n, std::size_t p, const double* a, const double* b, double* c);
  // y += alpha * x
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
  // out = x + y
  void (*add)(std::size_t n, const double* x, const double* y, double* out);
  // out = x * y
  void (*mul)(std::size_t n, const double* x, const double* y, double* out);
  // out += x * y
  void (*mul_acc)(std::size_t n, const double* x, const double* y, double* out);
  // out = alpha * x
  void (*scale)(std::size_t n, double alpha, const double* x, double* out);
};

bool level_compiled(SimdLevel level);
bool level_supported(SimdLevel level);

// Table for one level; throws if the level is not compiled in or not
// supported by this CPU.
const KernelTable& table(SimdLevel level);

// Process-wide active table. Chosen on first use: DENSELORA_SIMD env var
// ("scalar", "avx2", "neon") if set, else the best supported level.
const KernelTable& active();
void set_active(SimdLevel level);
SimdLevel best_supported_level();

namespace detail {
const KernelTable& scalar_table();
#if defined(DENSELORA_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(DENSELORA_HAVE_NEON)
const KernelTable& neon_table();
#endif
}  // namespace detail

}  // namespace denselora::kernels
