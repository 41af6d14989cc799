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

#include "denselora/training/optimizer.hpp"

#include <cmath>

#include "denselora/numeric/errors.hpp"

namespace denselora {

AdamW::AdamW(const TrainConfig& config)
    : beta1_(config.beta1), beta2_(config.beta2), eps_(config.eps), weight_decay_(config.weight_decay) {}

void AdamW::step(std::span<const ParameterPtr> params, double lr) {
  for (const auto& p : params) {
    if (!p->trainable()) continue;
    for (std::size_t i = 0; i < p->grad.size(); ++i) {
      if (!std::isfinite(p->grad[i])) {
        throw NumericError("non-finite gradient in parameter '" + p->name() + "' at index " + std::to_string(i));
      }
    }
  }
  ++step_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  for (const auto& p : params) {
    if (p->trainable()) {
      auto [it, inserted] = state_.try_emplace(p.get());
      Moments& s = it->second;
      if (inserted) {
        s.m = Tensor::zeros(p->shape());
        s.v = Tensor::zeros(p->shape());
      }
      for (std::size_t i = 0; i < p->numel(); ++i) {
        const double g = p->grad[i];
        s.m[i] = beta1_ * s.m[i] + (1.0 - beta1_) * g;
        s.v[i] = beta2_ * s.v[i] + (1.0 - beta2_) * g * g;
        const double m_hat = s.m[i] / bc1;
        const double v_hat = s.v[i] / bc2;
        double w = p->value[i];
        w -= lr * weight_decay_ * w;
        w -= lr * m_hat / (std::sqrt(v_hat) + eps_);
        p->value[i] = w;
      }
    }
    p->zero_grad();
  }
}

}  // namespace denselora
