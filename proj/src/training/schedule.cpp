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

#include "denselora/training/schedule.hpp"

#include <string>

#include "denselora/numeric/errors.hpp"

namespace denselora {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("betas must lie in [0, 1)");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"learning_rate", learning_rate}, {"warmup_steps", warmup_steps}, {"batch_size", batch_size},
          {"epochs", epochs},               {"seed", seed},                 {"beta1", beta1},
          {"beta2", beta2},                 {"eps", eps},                   {"weight_decay", weight_decay},
          {"eval_every", eval_every}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.learning_rate = j.at("learning_rate").get<double>();
  c.warmup_steps = j.at("warmup_steps").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.eps = j.at("eps").get<double>();
  c.weight_decay = j.at("weight_decay").get<double>();
  c.eval_every = j.at("eval_every").get<std::size_t>();
  c.validate();
  return c;
}

double lr_at(std::size_t step, std::size_t total_steps, const TrainConfig& config) {
  if (total_steps <= config.warmup_steps) {
    throw ConfigError("total_steps (" + std::to_string(total_steps) + ") must exceed warmup_steps (" +
                      std::to_string(config.warmup_steps) + ")");
  }
  if (step > total_steps) throw ConfigError("lr_at: step beyond total_steps");
  const double lr = config.learning_rate;
  if (step < config.warmup_steps) {
    return lr * static_cast<double>(step) / static_cast<double>(config.warmup_steps);
  }
  return lr * static_cast<double>(total_steps - step) / static_cast<double>(total_steps - config.warmup_steps);
}

}  // namespace denselora
