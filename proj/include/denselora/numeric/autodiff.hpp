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
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "denselora/numeric/tensor.hpp"

namespace denselora {

/// Trainable tensor with gradient accumulator.
///
/// The initial snapshot is taken at construction and never changes; the
/// increment analysis measures value() against it.
class Parameter {
 public:
  Parameter(std::string name, Tensor value, bool trainable = true);

  const std::string& name() const { return name_; }
  const Shape& shape() const { return value.shape(); }
  std::size_t numel() const { return value.size(); }
  const Tensor& initial_snapshot() const { return initial_; }

  bool trainable() const { return trainable_; }
  void set_trainable(bool trainable) { trainable_ = trainable; }

  void zero_grad() { grad.fill(0.0); }

  Tensor value;
  Tensor grad;

 private:
  std::string name_;
  Tensor initial_;
  bool trainable_;
};

using ParameterPtr = std::shared_ptr<Parameter>;

ParameterPtr make_parameter(std::string name, Tensor value, bool trainable = true);

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}

  Tape& tape() const { return *tape_; }
  std::size_t index() const { return index_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

/// Reverse-mode tape for a single forward pass.
///
/// Nodes are appended in evaluation order, so reverse index order is a valid
/// topological order for backward. A tape supports exactly one backward().
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Leaf bound to a parameter. Repeated calls with the same parameter return
  // the same node.
  Var parameter(Parameter& param);

  // Records an op result. `inputs` decide requires_grad; `backward` is only
  // kept when some input requires a gradient.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);

  // Propagates d(loss)/d(node) and accumulates into trainable parameters.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  const Tensor& value(std::size_t index) const { return nodes_[index].value; }
  bool requires_grad(std::size_t index) const { return nodes_[index].requires_grad; }
  // Gradient buffer of a node, allocated as zeros on first access.
  Tensor& grad(std::size_t index);
  bool has_grad(std::size_t index) const { return nodes_[index].has_grad; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    Parameter* param = nullptr;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
  bool backward_done_ = false;
};

}  // namespace denselora
