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

#include "denselora/adapters/adapters.hpp"

#include <algorithm>

#include "denselora/numeric/errors.hpp"
#include "denselora/numeric/init.hpp"

namespace denselora {

std::string_view to_string(AdapterVariant variant) {
  switch (variant) {
    case AdapterVariant::DenseLoRA:
      return "denselora";
    case AdapterVariant::Freeze:
      return "freeze";
    case AdapterVariant::OnlyMatrix:
      return "only-matrix";
    case AdapterVariant::LoRA:
      return "lora";
    case AdapterVariant::RED:
      return "red";
  }
  return "unknown";
}

std::optional<AdapterVariant> parse_variant(std::string_view name) {
  if (name == "denselora") return AdapterVariant::DenseLoRA;
  if (name == "freeze") return AdapterVariant::Freeze;
  if (name == "only-matrix") return AdapterVariant::OnlyMatrix;
  if (name == "lora") return AdapterVariant::LoRA;
  if (name == "red") return AdapterVariant::RED;
  return std::nullopt;
}

bool uses_codec(AdapterVariant variant) {
  return variant == AdapterVariant::DenseLoRA || variant == AdapterVariant::Freeze ||
         variant == AdapterVariant::OnlyMatrix;
}

void AdapterOptions::validate() const {
  if (rank == 0) throw ConfigError("adapter rank must be at least 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("adapter dropout must lie in [0, 1)");
  if (!(alpha_value() > 0.0)) throw ConfigError("adapter alpha must be positive");
}

LoraAdapter LoraAdapter::create(std::size_t d, std::size_t k, const AdapterOptions& options, Rng& rng,
                                const std::string& prefix) {
  options.validate();
  LoraAdapter adapter;
  adapter.a = make_parameter(prefix + ".A", kaiming_uniform({options.rank, k}, k, rng));
  adapter.b = make_parameter(prefix + ".B", Tensor::zeros({d, options.rank}));
  adapter.rank = options.rank;
  adapter.alpha = options.alpha_value();
  adapter.dropout = options.dropout;
  return adapter;
}

std::shared_ptr<SharedCodec> SharedCodec::create(std::size_t k, std::size_t d, std::size_t rank,
                                                 ActivationKind activation, Rng& rng, const std::string& prefix) {
  if (rank == 0) throw ConfigError("codec rank must be at least 1");
  auto codec = std::make_shared<SharedCodec>();
  codec->encoder = make_parameter(prefix + ".W_e", kaiming_uniform({rank, k}, k, rng));
  codec->decoder = make_parameter(prefix + ".W_d", Tensor::zeros({d, rank}));
  codec->activation = activation;
  codec->k = k;
  codec->d = d;
  codec->rank = rank;
  return codec;
}

RedAdapter RedAdapter::create(std::size_t d, const std::string& prefix) {
  RedAdapter adapter;
  adapter.scaling = make_parameter(prefix + ".l_scaling", Tensor::full({d}, 1.0));
  adapter.bias = make_parameter(prefix + ".l_bias", Tensor::zeros({d}));
  return adapter;
}

namespace {

Var branch_input(Var x, double p, ForwardContext& ctx) {
  if (ctx.mode != Mode::Train || p == 0.0) return x;
  if (ctx.dropout_rng == nullptr) throw ConfigError("training-mode forward needs a dropout rng");
  return dropout(x, p, *ctx.dropout_rng);
}

Tensor as_row(const Tensor& h, std::size_t expected, const char* op) {
  if (h.rank() != 1 || h.size() != expected) {
    throw DimensionError(std::string(op) + ": expected a vector of length " + std::to_string(expected) + ", got " +
                         shape_string(h.shape()));
  }
  return h.reshaped({1, h.size()});
}

Tensor as_vector(const Tensor& row) { return row.reshaped({row.size()}); }

void check_base(const Parameter& w0, std::size_t d, std::size_t k, const char* op) {
  if (w0.shape() != Shape{d, k}) {
    throw DimensionError(std::string(op) + ": base weight " + shape_string(w0.shape()) + " does not match adapter " +
                         shape_string({d, k}));
  }
}

}  // namespace

Var encode(Var x, const SharedCodec& codec) {
  return activation(linear(x, x.tape().parameter(*codec.encoder)), codec.activation);
}

Var decode(Var v, const SharedCodec& codec) {
  return activation(linear(v, v.tape().parameter(*codec.decoder)), codec.activation);
}

Var lora_branch(Var x, const LoraAdapter& adapter, ForwardContext& ctx) {
  Tape& tape = x.tape();
  Var in = branch_input(x, adapter.dropout, ctx);
  Var low = linear(in, tape.parameter(*adapter.a));
  return scale(linear(low, tape.parameter(*adapter.b)), adapter.scaling());
}

Var denselora_branch(Var x, const DenseLoraAdapter& adapter, ForwardContext& ctx) {
  Tape& tape = x.tape();
  Var in = branch_input(x, adapter.dropout, ctx);
  Var compressed = encode(in, *adapter.codec);
  Var adapted = linear(compressed, tape.parameter(*adapter.matrix));
  return scale(decode(adapted, *adapter.codec), adapter.scaling());
}

Var red_apply(Var h, const RedAdapter& adapter) {
  Tape& tape = h.tape();
  return add_rowwise(mul_rowwise(h, tape.parameter(*adapter.scaling)), tape.parameter(*adapter.bias));
}

Tensor lora_forward(const Tensor& h, const Parameter& w0, const LoraAdapter& adapter) {
  check_base(w0, adapter.d(), adapter.k(), "lora_forward");
  Tape tape;
  ForwardContext ctx;
  Var x = tape.constant(as_row(h, adapter.k(), "lora_forward"));
  Var out = add(linear(x, tape.constant(w0.value)), lora_branch(x, adapter, ctx));
  return as_vector(out.value());
}

Tensor lora_merge(const Tensor& w0, const LoraAdapter& adapter) {
  if (w0.shape() != Shape{adapter.d(), adapter.k()}) {
    throw DimensionError("lora_merge: base weight " + shape_string(w0.shape()) + " does not match adapter");
  }
  const Tensor delta = matmul(adapter.b->value, adapter.a->value);
  Tensor merged(w0.shape());
  const double s = adapter.scaling();
  for (std::size_t i = 0; i < merged.size(); ++i) merged[i] = w0[i] + s * delta[i];
  return merged;
}

Tensor encode(const Tensor& h, const SharedCodec& codec) {
  Tape tape;
  return as_vector(encode(tape.constant(as_row(h, codec.k, "encode")), codec).value());
}

Tensor decode(const Tensor& v, const SharedCodec& codec) {
  Tape tape;
  return as_vector(decode(tape.constant(as_row(v, codec.rank, "decode")), codec).value());
}

Tensor denselora_forward(const Tensor& h, const Parameter& w0, const DenseLoraAdapter& adapter) {
  const SharedCodec& codec = *adapter.codec;
  if (w0.shape() != Shape{codec.d, codec.k}) {
    throw ConfigError("denselora_forward: codec shape group (k=" + std::to_string(codec.k) +
                      ", d=" + std::to_string(codec.d) + ") does not match base weight " + shape_string(w0.shape()));
  }
  if (adapter.matrix->shape() != Shape{codec.rank, codec.rank}) {
    throw ConfigError("denselora_forward: M shape " + shape_string(adapter.matrix->shape()) +
                      " does not match codec rank " + std::to_string(codec.rank));
  }
  Tape tape;
  ForwardContext ctx;
  Var x = tape.constant(as_row(h, codec.k, "denselora_forward"));
  Var out = add(linear(x, tape.constant(w0.value)), denselora_branch(x, adapter, ctx));
  return as_vector(out.value());
}

Tensor red_forward(const Tensor& h, const RedAdapter& adapter) {
  const std::size_t d = adapter.scaling->numel();
  if (adapter.bias->numel() != d) throw DimensionError("red_forward: scaling and bias lengths differ");
  Tape tape;
  return as_vector(red_apply(tape.constant(as_row(h, d, "red_forward")), adapter).value());
}

Tensor only_matrix_merge(const DenseLoraAdapter& adapter) {
  const SharedCodec& codec = *adapter.codec;
  if (codec.activation != ActivationKind::Identity) {
    throw ConfigError("only_matrix_merge: the branch is nonlinear unless the codec activation is identity");
  }
  const Tensor product = matmul(matmul(codec.decoder->value, adapter.matrix->value), codec.encoder->value);
  Tensor merged(product.shape());
  const double s = adapter.scaling();
  for (std::size_t i = 0; i < merged.size(); ++i) merged[i] = s * product[i];
  return merged;
}

AdapterGroup attach_group(std::size_t layers, std::size_t k, std::size_t d, AdapterVariant variant,
                          const AdapterOptions& options, Rng& rng, const std::string& prefix) {
  if (!uses_codec(variant)) {
    throw ConfigError("attach_group: variant '" + std::string(to_string(variant)) + "' has no shared codec");
  }
  if (layers == 0) throw ConfigError("attach_group: at least one layer required");
  options.validate();
  const std::size_t r = options.rank;

  AdapterGroup group;
  if (r >= std::min(k, d)) {
    group.notice = prefix + ": rank " + std::to_string(r) + " >= min(k, d) = " + std::to_string(std::min(k, d)) +
                   "; the low-rank bottleneck is not a bottleneck";
  }
  const ActivationKind act = variant == AdapterVariant::OnlyMatrix ? ActivationKind::Identity : options.activation;
  group.codec = SharedCodec::create(k, d, r, act, rng, prefix);
  const bool frozen_codec = variant == AdapterVariant::Freeze;
  if (frozen_codec) {
    // A frozen all-zero decoder would block every gradient to M, so the
    // frozen decoder is random and M starts at zero instead.
    group.codec->decoder = make_parameter(prefix + ".W_d", kaiming_uniform({d, r}, r, rng), false);
    group.codec->encoder->set_trainable(false);
  }
  group.layers.reserve(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    DenseLoraAdapter adapter;
    const std::string name = "layers." + std::to_string(l) + "." + prefix + ".M";
    adapter.matrix = frozen_codec ? make_parameter(name, Tensor::zeros({r, r}))
                                  : make_parameter(name, kaiming_uniform({r, r}, r, rng));
    adapter.codec = group.codec;
    adapter.alpha = options.alpha_value();
    adapter.dropout = options.dropout;
    group.layers.push_back(std::move(adapter));
  }
  return group;
}

}  // namespace denselora
