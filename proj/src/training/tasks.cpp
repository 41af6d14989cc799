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

#include "denselora/training/tasks.hpp"

#include <set>
#include <string>

#include "denselora/numeric/errors.hpp"
#include "denselora/numeric/rng.hpp"

namespace denselora {

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::Copy:
      return "copy";
    case TaskKind::Reverse:
      return "reverse";
    case TaskKind::ModularAdd:
      return "modular-add";
  }
  return "unknown";
}

std::optional<TaskKind> parse_task(std::string_view name) {
  if (name == "copy") return TaskKind::Copy;
  if (name == "reverse") return TaskKind::Reverse;
  if (name == "modular-add") return TaskKind::ModularAdd;
  return std::nullopt;
}

void TaskSpec::validate() const {
  if (vocab_size < 2) throw ConfigError("task vocab_size must be at least 2");
  if (train_size == 0 || eval_size == 0) throw ConfigError("task train_size and eval_size must be positive");
  switch (kind) {
    case TaskKind::Copy:
    case TaskKind::Reverse:
      if (seq_len < 2 || seq_len % 2 != 0) throw ConfigError("copy/reverse tasks need an even seq_len >= 2");
      break;
    case TaskKind::ModularAdd:
      if (seq_len < 3 || seq_len % 3 != 0) throw ConfigError("modular-add needs seq_len a positive multiple of 3");
      break;
  }
}

nlohmann::json TaskSpec::to_json() const {
  return {{"name", to_string(kind)}, {"vocab_size", vocab_size}, {"seq_len", seq_len},
          {"train_size", train_size}, {"eval_size", eval_size}};
}

TaskSpec TaskSpec::from_json(const nlohmann::json& j) {
  TaskSpec s;
  auto kind = parse_task(j.at("name").get<std::string>());
  if (!kind) throw ConfigError("unknown task '" + j.at("name").get<std::string>() + "'");
  s.kind = *kind;
  s.vocab_size = j.at("vocab_size").get<std::size_t>();
  s.seq_len = j.at("seq_len").get<std::size_t>();
  s.train_size = j.at("train_size").get<std::size_t>();
  s.eval_size = j.at("eval_size").get<std::size_t>();
  s.validate();
  return s;
}

namespace {

Example sample(const TaskSpec& spec, Rng& rng) {
  Example ex;
  ex.tokens.resize(spec.seq_len);
  ex.target.assign(spec.seq_len, 0);
  const auto draw = [&] { return static_cast<int>(rng.below(spec.vocab_size)); };
  switch (spec.kind) {
    case TaskKind::Copy:
    case TaskKind::Reverse: {
      const std::size_t n = spec.seq_len / 2;
      for (std::size_t i = 0; i < n; ++i) ex.tokens[i] = draw();
      for (std::size_t i = 0; i < n; ++i) {
        ex.tokens[n + i] = spec.kind == TaskKind::Copy ? ex.tokens[i] : ex.tokens[n - 1 - i];
        ex.target[n + i] = 1;
      }
      break;
    }
    case TaskKind::ModularAdd:
      for (std::size_t i = 0; i + 2 < spec.seq_len; i += 3) {
        ex.tokens[i] = draw();
        ex.tokens[i + 1] = draw();
        ex.tokens[i + 2] = (ex.tokens[i] + ex.tokens[i + 1]) % static_cast<int>(spec.vocab_size);
        ex.target[i + 2] = 1;
      }
      break;
  }
  return ex;
}

}  // namespace

Task Task::generate(const TaskSpec& spec, std::uint64_t seed) {
  spec.validate();
  Task task;
  task.spec = spec;
  Rng train_rng = Rng(seed).fork("task.train");
  Rng eval_rng = Rng(seed).fork("task.eval");

  std::set<std::vector<int>> seen;
  for (std::size_t i = 0; i < spec.train_size; ++i) {
    task.train.push_back(sample(spec, train_rng));
    seen.insert(task.train.back().tokens);
  }
  // Tiny task spaces can run out of unseen sequences; give up rather than loop.
  const std::size_t max_attempts = 1000 * spec.eval_size;
  std::size_t attempts = 0;
  while (task.eval.size() < spec.eval_size) {
    if (++attempts > max_attempts) throw ConfigError("task space too small for disjoint train/eval splits");
    Example ex = sample(spec, eval_rng);
    if (seen.insert(ex.tokens).second) task.eval.push_back(std::move(ex));
  }
  return task;
}

Batch make_batch(std::span<const Example> examples) {
  Batch b;
  if (examples.empty()) throw InputError("make_batch: no examples");
  const std::size_t len = examples.front().tokens.size();
  b.batch = examples.size();
  b.seq_len = len - 1;
  for (const Example& ex : examples) {
    if (ex.tokens.size() != len) throw InputError("make_batch: sequences differ in length");
    for (std::size_t t = 0; t + 1 < len; ++t) {
      b.inputs.push_back(ex.tokens[t]);
      b.targets.push_back(ex.target[t + 1] ? ex.tokens[t + 1] : -1);
    }
  }
  return b;
}

Batch make_batch(std::span<const Example> all, std::span<const std::size_t> indices) {
  std::vector<Example> picked;
  picked.reserve(indices.size());
  for (auto i : indices) picked.push_back(all[i]);
  return make_batch(picked);
}

}  // namespace denselora
