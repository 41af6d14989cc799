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

#include "denselora/training/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "denselora/numeric/ops.hpp"
#include "denselora/training/optimizer.hpp"

namespace denselora {

nlohmann::json StepRecord::to_json() const {
  nlohmann::json j = {{"step", step}, {"loss", loss}, {"lr", lr}};
  if (accuracy) j["accuracy"] = *accuracy;
  return j;
}

std::vector<double> MetricsHistory::losses() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.loss);
  return out;
}

std::optional<double> MetricsHistory::final_accuracy() const {
  for (auto it = steps.rbegin(); it != steps.rend(); ++it)
    if (it->accuracy) return it->accuracy;
  return std::nullopt;
}

std::size_t steps_per_epoch(const TaskSpec& task, const TrainConfig& config) {
  return (task.train_size + config.batch_size - 1) / config.batch_size;
}

double evaluate(const Model& model, std::span<const Example> examples, std::size_t batch_size) {
  std::size_t correct = 0, total = 0;
  for (std::size_t start = 0; start < examples.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, examples.size() - start);
    const Batch batch = make_batch(examples.subspan(start, n));
    Tape tape;
    ForwardContext ctx;
    const Tensor logits = model.forward(tape, batch.inputs, batch.seq_len, ctx).value();
    const std::size_t vocab = logits.cols();
    for (std::size_t row = 0; row < batch.targets.size(); ++row) {
      if (batch.targets[row] < 0) continue;
      std::size_t best = 0;
      for (std::size_t j = 1; j < vocab; ++j)
        if (logits(row, j) > logits(row, best)) best = j;
      correct += best == static_cast<std::size_t>(batch.targets[row]);
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

TrainResult train(Model& model, const Task& task, const TrainConfig& config, const RecordSink& sink) {
  config.validate();
  if (!model.has_adapters()) throw ConfigError("train: no adapters attached");
  const auto started = std::chrono::steady_clock::now();

  TrainResult result;
  result.before = model.export_adapters();
  const std::size_t per_epoch = steps_per_epoch(task.spec, config);
  const std::size_t total_steps = config.epochs * per_epoch;
  if (total_steps == 0) {
    result.after = result.before;
    return result;
  }
  lr_at(0, total_steps, config);  // validates warmup against the run length

  const auto params = model.trainable_parameters();
  AdamW optimizer(config);
  Rng root(config.seed);
  Rng shuffle_rng = root.fork("shuffle");
  Rng dropout_rng = root.fork("dropout");

  std::vector<std::size_t> order(task.train.size());
  std::iota(order.begin(), order.end(), 0);

  std::optional<double> initial_loss;
  std::size_t above_streak = 0;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    for (std::size_t b = 0; b < per_epoch; ++b, ++step) {
      const std::size_t begin = b * config.batch_size;
      const std::size_t end = std::min(begin + config.batch_size, order.size());
      const Batch batch = make_batch(task.train, std::span(order).subspan(begin, end - begin));

      Tape tape;
      ForwardContext ctx{Mode::Train, &dropout_rng};
      Var loss = cross_entropy(model.forward(tape, batch.inputs, batch.seq_len, ctx), batch.targets);
      tape.backward(loss);

      StepRecord record;
      record.step = step;
      record.loss = loss.value().item();
      record.lr = lr_at(step, total_steps, config);
      optimizer.step(params, record.lr);

      const bool last = step + 1 == total_steps;
      if (last || (config.eval_every > 0 && (step + 1) % config.eval_every == 0)) {
        record.accuracy = evaluate(model, task.eval);
      }
      result.history.steps.push_back(record);
      if (sink) sink(record);

      if (!initial_loss) initial_loss = record.loss;
      above_streak = record.loss > 10.0 * *initial_loss ? above_streak + 1 : 0;
      if (above_streak >= 100) {
        result.history.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        throw TrainingDiverged("training diverged at step " + std::to_string(step) + ": loss " +
                                   std::to_string(record.loss) + " above 10x initial for 100 steps",
                               result.history);
      }
    }
  }
  result.after = model.export_adapters();
  result.history.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace denselora
