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
#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "denselora/adapters/checkpoint.hpp"
#include "denselora/model/model.hpp"
#include "denselora/numeric/errors.hpp"
#include "denselora/training/schedule.hpp"
#include "denselora/training/tasks.hpp"

namespace denselora {

struct StepRecord {
  std::size_t step = 0;
  double loss = 0.0;
  double lr = 0.0;
  std::optional<double> accuracy;  // set on evaluation steps

  nlohmann::json to_json() const;
  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct MetricsHistory {
  std::vector<StepRecord> steps;
  double wall_seconds = 0.0;  // informational, excluded from equality

  std::vector<double> losses() const;
  std::optional<double> final_accuracy() const;
  friend bool operator==(const MetricsHistory& a, const MetricsHistory& b) { return a.steps == b.steps; }
};

struct TrainResult {
  MetricsHistory history;
  AdapterCheckpoint before;
  AdapterCheckpoint after;
};

// Thrown when the loss stays above 10x its initial value for 100 consecutive steps.
class TrainingDiverged : public NumericError {
 public:
  TrainingDiverged(const std::string& what, MetricsHistory history)
      : NumericError(what), history_(std::move(history)) {}
  const MetricsHistory& history() const { return history_; }

 private:
  MetricsHistory history_;
};

using RecordSink = std::function<void(const StepRecord&)>;

std::size_t steps_per_epoch(const TaskSpec& task, const TrainConfig& config);

/// Minimizes next-token cross-entropy on the task's target positions over the
/// model's trainable parameters with AdamW and the linear warmup schedule.
TrainResult train(Model& model, const Task& task, const TrainConfig& config, const RecordSink& sink = {});

/// Fraction of target positions where the eval-mode argmax equals the label.
double evaluate(const Model& model, std::span<const Example> examples, std::size_t batch_size = 64);

}  // namespace denselora
