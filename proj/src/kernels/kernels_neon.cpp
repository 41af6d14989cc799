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

#include <arm_neon.h>

#include "denselora/kernels/kernels.hpp"

namespace denselora::kernels::detail {

namespace {

// vmulq/vaddq rather than vfmaq: fused multiply-add would round differently
// from the scalar reference.

void gemm_acc(std::size_t m, std::size_t n, std::size_t p, const double* a, const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * p;
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a[i * n + k];
      const float64x2_t av = vdupq_n_f64(aik);
      const double* brow = b + k * p;
      std::size_t j = 0;
      for (; j + 2 <= p; j += 2) {
        float64x2_t cv = vld1q_f64(crow + j);
        cv = vaddq_f64(cv, vmulq_f64(av, vld1q_f64(brow + j)));
        vst1q_f64(crow + j, cv);
      }
      for (; j < p; ++j) crow[j] = crow[j] + aik * brow[j];
    }
  }
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  const float64x2_t av = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(av, vld1q_f64(x + i))));
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void add(std::size_t n, const double* x, const double* y, double* out) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vaddq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
  for (; i < n; ++i) out[i] = x[i] + y[i];
}

void mul(std::size_t n, const double* x, const double* y, double* out) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
  for (; i < n; ++i) out[i] = x[i] * y[i];
}

void mul_acc(std::size_t n, const double* x, const double* y, double* out) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vaddq_f64(vld1q_f64(out + i), vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i))));
  for (; i < n; ++i) out[i] = out[i] + x[i] * y[i];
}

void scale(std::size_t n, double alpha, const double* x, double* out) {
  const float64x2_t av = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_f64(av, vld1q_f64(x + i)));
  for (; i < n; ++i) out[i] = alpha * x[i];
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable table{SimdLevel::Neon, gemm_acc, axpy, add, mul, mul_acc, scale};
  return table;
}

}  // namespace denselora::kernels::detail
