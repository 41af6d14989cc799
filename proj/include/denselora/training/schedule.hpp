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
#include <cstdint>

#include <json.hpp>

namespace denselora {

struct TrainConfig {
  double learning_rate = 3e-4;
  std::size_t warmup_steps = 100;
  std::size_t batch_size = 16;
  std::size_t epochs = 2;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  std::size_t eval_every = 0;  // 0: evaluate only after the last step

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Linear warmup from 0 to learning_rate over warmup_steps, then linear decay
/// to 0 at total_steps.
double lr_at(std::size_t step, std::size_t total_steps, const TrainConfig& config);

}  // namespace denselora
