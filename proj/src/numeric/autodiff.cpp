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

#include "denselora/numeric/autodiff.hpp"

#include "denselora/kernels/kernels.hpp"
#include "denselora/numeric/errors.hpp"

namespace denselora {

Parameter::Parameter(std::string name, Tensor value_in, bool trainable)
    : value(std::move(value_in)),
      grad(Tensor::zeros(value.shape())),
      name_(std::move(name)),
      initial_(value),
      trainable_(trainable) {}

ParameterPtr make_parameter(std::string name, Tensor value, bool trainable) {
  return std::make_shared<Parameter>(std::move(name), std::move(value), trainable);
}

const Tensor& Var::value() const { return tape_->value(index_); }

bool Var::requires_grad() const { return tape_->requires_grad(index_); }

Var Tape::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Parameter& param) {
  if (auto it = param_nodes_.find(&param); it != param_nodes_.end()) return Var(this, it->second);
  Node node;
  node.value = param.value;
  node.requires_grad = param.trainable();
  node.param = &param;
  nodes_.push_back(std::move(node));
  param_nodes_.emplace(&param, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  for (const Var& in : inputs) {
    if (&in.tape() != this) throw Error("Tape::record: input from a different tape");
    node.requires_grad = node.requires_grad || nodes_[in.index()].requires_grad;
  }
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Tensor& Tape::grad(std::size_t index) {
  Node& node = nodes_[index];
  if (!node.has_grad) {
    node.grad = Tensor::zeros(node.value.shape());
    node.has_grad = true;
  }
  return node.grad;
}

void Tape::backward(Var loss) {
  if (&loss.tape() != this) throw Error("Tape::backward: loss recorded on a different tape");
  if (loss.value().size() != 1) {
    throw DimensionError("backward: loss must be a scalar, got shape " + shape_string(loss.shape()));
  }
  if (backward_done_) throw Error("backward: tape already consumed");
  backward_done_ = true;
  if (!requires_grad(loss.index())) return;

  grad(loss.index()).fill(1.0);
  const auto& k = kernels::active();
  for (std::size_t i = loss.index() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.has_grad || !node.requires_grad) continue;
    if (node.backward) {
      node.backward(*this, i);
    } else if (node.param != nullptr && node.param->trainable()) {
      Tensor& dst = node.param->grad;
      k.axpy(dst.size(), 1.0, node.grad.data().data(), dst.data().data());
    }
  }
}

}  // namespace denselora
