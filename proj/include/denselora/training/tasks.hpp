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
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace denselora {

enum class TaskKind { Copy, Reverse, ModularAdd };

std::string_view to_string(TaskKind kind);
std::optional<TaskKind> parse_task(std::string_view name);

struct TaskSpec {
  TaskKind kind = TaskKind::Copy;
  std::size_t vocab_size = 16;
  std::size_t seq_len = 12;
  std::size_t train_size = 2048;
  std::size_t eval_size = 256;

  void validate() const;
  nlohmann::json to_json() const;
  static TaskSpec from_json(const nlohmann::json& j);
  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

// One full sequence; target[i] marks tokens[i] as predicted from tokens[0..i).
struct Example {
  std::vector<int> tokens;
  std::vector<std::uint8_t> target;

  friend bool operator==(const Example&, const Example&) = default;
};

/// Synthetic sequence tasks.
///   copy:        x1..xn x1..xn, second half predicted
///   reverse:     x1..xn xn..x1, second half predicted
///   modular-add: (a, b, (a+b) mod V) triples, the sums predicted
/// Train and eval sets come from distinct seed streams and share no sequence.
struct Task {
  TaskSpec spec;
  std::vector<Example> train;
  std::vector<Example> eval;

  static Task generate(const TaskSpec& spec, std::uint64_t seed);
};

// Next-token batch: inputs are tokens[0..L-1), targets tokens[1..L) or -1
// where not predicted. Both flattened sequence by sequence.
struct Batch {
  std::vector<int> inputs;
  std::vector<int> targets;
  std::size_t batch = 0;
  std::size_t seq_len = 0;  // model-side length, L - 1
};

Batch make_batch(std::span<const Example> examples);
Batch make_batch(std::span<const Example> all, std::span<const std::size_t> indices);

}  // namespace denselora
