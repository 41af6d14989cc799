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
#include <span>
#include <unordered_map>

#include "denselora/numeric/autodiff.hpp"
#include "denselora/training/schedule.hpp"

namespace denselora {

/// Adam with decoupled weight decay. Moment state is kept per parameter.
class AdamW {
 public:
  explicit AdamW(const TrainConfig& config);

  /// One update of every trainable parameter in `params` with learning rate
  /// `lr`, then zeroes all their gradients. Frozen parameters are untouched.
  /// Throws NumericError naming the parameter on a non-finite gradient.
  void step(std::span<const ParameterPtr> params, double lr);

  std::size_t steps_taken() const { return step_; }

 private:
  struct Moments {
    Tensor m;
    Tensor v;
  };

  double beta1_, beta2_, eps_, weight_decay_;
  std::size_t step_ = 0;
  std::unordered_map<const Parameter*, Moments> state_;
};

}  // namespace denselora
