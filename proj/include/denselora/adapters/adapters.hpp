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
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "denselora/numeric/autodiff.hpp"
#include "denselora/numeric/ops.hpp"
#include "denselora/numeric/rng.hpp"
#include "denselora/numeric/tensor.hpp"

namespace denselora {

enum class AdapterVariant { DenseLoRA, Freeze, OnlyMatrix, LoRA, RED };

std::string_view to_string(AdapterVariant variant);
std::optional<AdapterVariant> parse_variant(std::string_view name);
// DenseLoRA, Freeze and OnlyMatrix route through a shared encoder/decoder.
bool uses_codec(AdapterVariant variant);

struct AdapterOptions {
  std::size_t rank = 8;
  std::optional<double> alpha;  // unset means 2 * rank
  double dropout = 0.05;
  ActivationKind activation = ActivationKind::Tanh;

  double alpha_value() const { return alpha ? *alpha : 2.0 * static_cast<double>(rank); }
  void validate() const;
  friend bool operator==(const AdapterOptions&, const AdapterOptions&) = default;
};

enum class Mode { Train, Eval };

struct ForwardContext {
  Mode mode = Mode::Eval;
  Rng* dropout_rng = nullptr;  // required in Train mode when dropout > 0
};

/// Low-rank update ΔW = B·A with B zero-initialized.
struct LoraAdapter {
  ParameterPtr a;  // [rank x k], Kaiming (fan_in = k)
  ParameterPtr b;  // [d x rank], zeros
  std::size_t rank = 0;
  double alpha = 0.0;
  double dropout = 0.0;

  double scaling() const { return alpha / static_cast<double>(rank); }
  std::size_t k() const { return a->shape()[1]; }
  std::size_t d() const { return b->shape()[0]; }

  static LoraAdapter create(std::size_t d, std::size_t k, const AdapterOptions& options, Rng& rng,
                            const std::string& prefix);
};

/// Encoder/decoder pair shared by every layer of one module type.
struct SharedCodec {
  ParameterPtr encoder;  // W_e [rank x k], Kaiming (fan_in = k)
  ParameterPtr decoder;  // W_d [d x rank], zeros
  ActivationKind activation = ActivationKind::Tanh;
  std::size_t k = 0;
  std::size_t d = 0;
  std::size_t rank = 0;

  static std::shared_ptr<SharedCodec> create(std::size_t k, std::size_t d, std::size_t rank, ActivationKind activation,
                                             Rng& rng, const std::string& prefix);
};

/// Per-layer dense rank x rank matrix between the shared encoder and decoder.
struct DenseLoraAdapter {
  ParameterPtr matrix;  // M [rank x rank], Kaiming (fan_in = rank)
  std::shared_ptr<SharedCodec> codec;
  double alpha = 0.0;
  double dropout = 0.0;

  double scaling() const { return alpha / static_cast<double>(codec->rank); }
};

/// Representation edit l_scaling ⊙ h + l_bias, identity at construction.
struct RedAdapter {
  ParameterPtr scaling;  // [d], ones
  ParameterPtr bias;     // [d], zeros

  static RedAdapter create(std::size_t d, const std::string& prefix);
};

// Single-vector forms, evaluated without dropout.
Tensor lora_forward(const Tensor& h, const Parameter& w0, const LoraAdapter& adapter);
Tensor lora_merge(const Tensor& w0, const LoraAdapter& adapter);
Tensor encode(const Tensor& h, const SharedCodec& codec);
Tensor decode(const Tensor& v, const SharedCodec& codec);
Tensor denselora_forward(const Tensor& h, const Parameter& w0, const DenseLoraAdapter& adapter);
Tensor red_forward(const Tensor& h, const RedAdapter& adapter);

// (alpha / rank) · W_d · M · W_e as a d x k matrix. Only meaningful for an
// identity activation; throws ConfigError otherwise.
Tensor only_matrix_merge(const DenseLoraAdapter& adapter);

// Batched graph forms over [rows x k] inputs. The *_branch functions return
// only the adapter contribution, already scaled by alpha / rank.
Var encode(Var x, const SharedCodec& codec);
Var decode(Var v, const SharedCodec& codec);
Var lora_branch(Var x, const LoraAdapter& adapter, ForwardContext& ctx);
Var denselora_branch(Var x, const DenseLoraAdapter& adapter, ForwardContext& ctx);
Var red_apply(Var h, const RedAdapter& adapter);

struct AdapterGroup {
  std::shared_ptr<SharedCodec> codec;
  std::vector<DenseLoraAdapter> layers;
  std::optional<std::string> notice;  // set when rank >= min(k, d)
};

/// One codec plus `layers` independently initialized M matrices for a shape
/// group. Freeze marks the codec untrainable; OnlyMatrix forces an identity
/// activation.
AdapterGroup attach_group(std::size_t layers, std::size_t k, std::size_t d, AdapterVariant variant,
                          const AdapterOptions& options, Rng& rng, const std::string& prefix);

}  // namespace denselora
