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
#include <optional>
#include <span>
#include <string_view>

#include "denselora/numeric/autodiff.hpp"
#include "denselora/numeric/rng.hpp"
#include "denselora/numeric/tensor.hpp"

namespace denselora {

// Every kind satisfies f(0) = 0.
enum class ActivationKind { Identity, Tanh, Relu };

std::string_view to_string(ActivationKind kind);
std::optional<ActivationKind> parse_activation(std::string_view name);

// Eager tensor math.
Tensor matmul(const Tensor& a, const Tensor& b);  // [m x n]·[n x p]; rank-1 rhs is a column vector
Tensor activation(const Tensor& x, ActivationKind kind);
double activation_derivative(double x, ActivationKind kind);

// Differentiable ops on Vars. Matrices are row-major; a batch of hidden
// vectors is a [rows x features] matrix.
Var matmul(Var a, Var b);
Var transpose(Var a);
Var linear(Var x, Var weight);  // x[n x in] · weight[out x in]^T
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var add_rowwise(Var x, Var row);  // x[n x m] + row[m]
Var mul_rowwise(Var x, Var row);  // x[n x m] ⊙ row[m]
Var activation(Var x, ActivationKind kind);
Var silu(Var x);
Var rms_norm(Var x, double eps = 1e-6);
// Per-sequence causal multi-head attention; rows are `batch * seq_len` tokens
// laid out sequence by sequence.
Var causal_attention(Var q, Var k, Var v, std::size_t n_heads, std::size_t seq_len);
Var embedding(Var table, std::span<const int> ids);
// Mean token cross-entropy; targets < 0 are ignored.
Var cross_entropy(Var logits, std::span<const int> targets);
Var sum(Var x);
Var mean(Var x);
// Inverted dropout; identity when p == 0.
Var dropout(Var x, double p, Rng& rng);

namespace testing {
// Scales every activation derivative by (1 + relative_error) in backward.
// Negative control for gradient checking; 0 restores exact derivatives.
void set_derivative_fault(double relative_error);
double derivative_fault();
}  // namespace testing

}  // namespace denselora
