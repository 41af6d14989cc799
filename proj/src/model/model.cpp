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

#include "denselora/model/model.hpp"

#include <algorithm>
#include <set>

#include "denselora/numeric/errors.hpp"
#include "denselora/numeric/init.hpp"
#include "denselora/numeric/ops.hpp"

namespace denselora {

void ModelConfig::validate() const {
  if (n_layers == 0 || d_model == 0 || n_heads == 0 || d_ff == 0 || vocab_size == 0 || max_seq_len == 0) {
    throw ConfigError("model dimensions must all be at least 1");
  }
  if (d_model % n_heads != 0) {
    throw ConfigError("d_model (" + std::to_string(d_model) + ") must be divisible by n_heads (" +
                      std::to_string(n_heads) + ")");
  }
}

nlohmann::json ModelConfig::to_json() const {
  return {{"n_layers", n_layers}, {"d_model", d_model},       {"n_heads", n_heads}, {"d_ff", d_ff},
          {"vocab_size", vocab_size}, {"max_seq_len", max_seq_len}, {"seed", seed}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.n_layers = j.at("n_layers").get<std::size_t>();
  c.d_model = j.at("d_model").get<std::size_t>();
  c.n_heads = j.at("n_heads").get<std::size_t>();
  c.d_ff = j.at("d_ff").get<std::size_t>();
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.max_seq_len = j.at("max_seq_len").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  return c;
}

Model::Model(const ModelConfig& config) : config_(config) {
  config_.validate();
  const std::size_t dm = config_.d_model;
  Rng root(config_.seed);

  Rng emb = root.fork("embedding");
  auto unit_uniform = [&emb](Shape shape) {
    Tensor t(std::move(shape));
    for (auto& v : t.data()) v = emb.uniform(-1.0, 1.0);
    return t;
  };
  token_embedding_ = make_parameter("tok_embedding", unit_uniform({config_.vocab_size, dm}), false);
  position_embedding_ = make_parameter("pos_embedding", unit_uniform({config_.max_seq_len, dm}), false);

  layers_.resize(config_.n_layers);
  for (std::size_t l = 0; l < config_.n_layers; ++l) {
    Rng rng = root.fork("layer." + std::to_string(l));
    Layer& layer = layers_[l];
    const std::string prefix = "layers." + std::to_string(l) + ".";
    layer.attn_norm = make_parameter(prefix + "attn_norm", Tensor::full({dm}, 1.0), false);
    layer.mlp_norm = make_parameter(prefix + "mlp_norm", Tensor::full({dm}, 1.0), false);
    for (Site s : kAllSites) {
      const SiteShape shape = site_shape(s);
      layer.proj[s] = make_parameter(prefix + site_letter(s), kaiming_uniform({shape.d, shape.k}, shape.k, rng), false);
    }
  }
  Rng head = root.fork("head");
  final_norm_ = make_parameter("final_norm", Tensor::full({dm}, 1.0), false);
  lm_head_ = make_parameter("lm_head", kaiming_uniform({config_.vocab_size, dm}, dm, head), false);
}

Model build_model(const ModelConfig& config) { return Model(config); }

SiteShape Model::site_shape(Site site) const {
  switch (site) {
    case Site::G:
    case Site::U:
      return {config_.d_model, config_.d_ff};
    case Site::D:
      return {config_.d_ff, config_.d_model};
    default:
      return {config_.d_model, config_.d_model};
  }
}

Parameter& Model::projection(Site site, std::size_t layer) const { return *layers_.at(layer).proj.at(site); }

TargetSet Model::adapted_targets() const {
  TargetSet t;
  for (const auto& [site, _] : adapters_) t.insert(site);
  return t;
}

void Model::attach(AdapterVariant variant, const TargetSet& targets, const AdapterOptions& options, Rng& rng) {
  if (targets.empty()) throw ConfigError("attach: target set is empty");
  if (targets.intersects(adapted_targets())) {
    throw ConfigError("attach: targets " + targets.to_string() + " overlap already adapted " +
                      adapted_targets().to_string());
  }
  options.validate();
  for (Site site : targets.sites()) {
    SiteAdapters entry;
    entry.variant = variant;
    entry.options = options;
    entry.shape = site_shape(site);
    const std::string module(1, site_letter(site));
    if (uses_codec(variant)) {
      AdapterGroup group = attach_group(config_.n_layers, entry.shape.k, entry.shape.d, variant, options, rng, module);
      if (group.notice) notices_.push_back(*group.notice);
      entry.codec = group.codec;
      entry.options.activation = group.codec->activation;
      entry.dense = std::move(group.layers);
    } else if (variant == AdapterVariant::LoRA) {
      if (options.rank >= std::min(entry.shape.k, entry.shape.d)) {
        notices_.push_back(module + ": rank " + std::to_string(options.rank) + " >= min(k, d)");
      }
      for (std::size_t l = 0; l < config_.n_layers; ++l) {
        entry.lora.push_back(
            LoraAdapter::create(entry.shape.d, entry.shape.k, options, rng, "layers." + std::to_string(l) + "." + module));
      }
    } else {
      for (std::size_t l = 0; l < config_.n_layers; ++l) {
        entry.red.push_back(RedAdapter::create(entry.shape.d, "layers." + std::to_string(l) + "." + module));
      }
    }
    adapters_.emplace(site, std::move(entry));
  }
}

Var Model::project(Tape& tape, Var h, Site site, std::size_t layer, ForwardContext& ctx, ForwardTrace* trace) const {
  Var out = linear(h, tape.parameter(projection(site, layer)));
  if (auto it = adapters_.find(site); it != adapters_.end()) {
    const SiteAdapters& a = it->second;
    switch (a.variant) {
      case AdapterVariant::LoRA:
        out = add(out, lora_branch(h, a.lora[layer], ctx));
        break;
      case AdapterVariant::RED:
        out = red_apply(out, a.red[layer]);
        break;
      default:
        out = add(out, denselora_branch(h, a.dense[layer], ctx));
        break;
    }
  }
  if (trace) trace->site_outputs[{layer, site}] = out.value();
  return out;
}

Var Model::forward(Tape& tape, std::span<const int> ids, std::size_t seq_len, ForwardContext& ctx,
                   ForwardTrace* trace) const {
  if (seq_len == 0 || seq_len > config_.max_seq_len) {
    throw InputError("sequence length " + std::to_string(seq_len) + " outside [1, " +
                     std::to_string(config_.max_seq_len) + "]");
  }
  if (ids.empty() || ids.size() % seq_len != 0) throw InputError("token count is not a multiple of seq_len");
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= config_.vocab_size) {
      throw InputError("token id " + std::to_string(id) + " outside vocabulary of " +
                       std::to_string(config_.vocab_size));
    }
  }
  std::vector<int> positions(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) positions[i] = static_cast<int>(i % seq_len);

  Var x = add(embedding(tape.parameter(*token_embedding_), ids),
              embedding(tape.parameter(*position_embedding_), positions));
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    Var h = mul_rowwise(rms_norm(x), tape.parameter(*layer.attn_norm));
    Var q = project(tape, h, Site::Q, l, ctx, trace);
    Var k = project(tape, h, Site::K, l, ctx, trace);
    Var v = project(tape, h, Site::V, l, ctx, trace);
    Var attn = causal_attention(q, k, v, config_.n_heads, seq_len);
    x = add(x, project(tape, attn, Site::O, l, ctx, trace));

    Var h2 = mul_rowwise(rms_norm(x), tape.parameter(*layer.mlp_norm));
    Var gate = silu(project(tape, h2, Site::G, l, ctx, trace));
    Var up = project(tape, h2, Site::U, l, ctx, trace);
    x = add(x, project(tape, mul(gate, up), Site::D, l, ctx, trace));
  }
  Var out = mul_rowwise(rms_norm(x), tape.parameter(*final_norm_));
  return linear(out, tape.parameter(*lm_head_));
}

Tensor Model::logits(std::span<const int> tokens, ForwardTrace* trace) const {
  Tape tape;
  ForwardContext ctx;
  return forward(tape, tokens, tokens.size(), ctx, trace).value();
}

std::vector<ParameterPtr> Model::base_parameters() const {
  std::vector<ParameterPtr> out{token_embedding_, position_embedding_};
  for (const Layer& layer : layers_) {
    out.push_back(layer.attn_norm);
    out.push_back(layer.mlp_norm);
    for (Site s : kAllSites) out.push_back(layer.proj.at(s));
  }
  out.push_back(final_norm_);
  out.push_back(lm_head_);
  return out;
}

std::size_t Model::base_parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : base_parameters()) n += p->numel();
  return n;
}

std::vector<ParameterPtr> Model::adapter_parameters() const {
  std::vector<ParameterPtr> out;
  std::set<const Parameter*> seen;
  auto push = [&](const ParameterPtr& p) {
    if (seen.insert(p.get()).second) out.push_back(p);
  };
  for (const auto& [site, a] : adapters_) {
    if (a.codec) {
      push(a.codec->encoder);
      push(a.codec->decoder);
    }
    for (const auto& d : a.dense) push(d.matrix);
    for (const auto& l : a.lora) {
      push(l.a);
      push(l.b);
    }
    for (const auto& r : a.red) {
      push(r.scaling);
      push(r.bias);
    }
  }
  return out;
}

std::vector<ParameterPtr> Model::trainable_parameters() const {
  std::vector<ParameterPtr> out;
  for (const auto& p : adapter_parameters())
    if (p->trainable()) out.push_back(p);
  for (const auto& p : base_parameters())
    if (p->trainable()) out.push_back(p);
  return out;
}

nlohmann::json Model::adapter_manifest() const {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& [site, a] : adapters_) {
    groups.push_back({{"module", std::string(1, site_letter(site))},
                      {"variant", to_string(a.variant)},
                      {"rank", a.options.rank},
                      {"alpha", a.options.alpha_value()},
                      {"dropout", a.options.dropout},
                      {"activation", to_string(a.options.activation)},
                      {"k", a.shape.k},
                      {"d", a.shape.d}});
  }
  return {{"format", "denselora-adapters"}, {"n_layers", config_.n_layers}, {"groups", groups}};
}

AdapterCheckpoint Model::export_adapters() const {
  AdapterCheckpoint ckpt;
  ckpt.manifest = adapter_manifest();
  for (const auto& [site, a] : adapters_) {
    const std::string module(1, site_letter(site));
    if (a.codec) {
      ckpt.entries.push_back({module, kSharedLayer, AdapterRole::Encoder, a.codec->encoder->value});
      ckpt.entries.push_back({module, kSharedLayer, AdapterRole::Decoder, a.codec->decoder->value});
    }
    for (std::size_t l = 0; l < config_.n_layers; ++l) {
      const int li = static_cast<int>(l);
      if (!a.dense.empty()) ckpt.entries.push_back({module, li, AdapterRole::M, a.dense[l].matrix->value});
      if (!a.lora.empty()) {
        ckpt.entries.push_back({module, li, AdapterRole::A, a.lora[l].a->value});
        ckpt.entries.push_back({module, li, AdapterRole::B, a.lora[l].b->value});
      }
      if (!a.red.empty()) {
        ckpt.entries.push_back({module, li, AdapterRole::Scaling, a.red[l].scaling->value});
        ckpt.entries.push_back({module, li, AdapterRole::Bias, a.red[l].bias->value});
      }
    }
  }
  return ckpt;
}

void Model::import_adapters(const AdapterCheckpoint& checkpoint) {
  if (checkpoint.manifest != adapter_manifest()) {
    throw InputError("adapter checkpoint manifest does not match the attached adapters");
  }
  auto load = [&](const ParameterPtr& p, const std::string& module, int layer, AdapterRole role) {
    const CheckpointEntry* e = checkpoint.find(module, layer, role);
    if (!e) throw InputError("adapter checkpoint lacks entry " + module + "/" + std::string(to_string(role)));
    if (e->tensor.shape() != p->shape()) throw InputError("adapter checkpoint entry " + e->key() + " has wrong shape");
    p->value = e->tensor;
  };
  for (auto& [site, a] : adapters_) {
    const std::string module(1, site_letter(site));
    if (a.codec) {
      load(a.codec->encoder, module, kSharedLayer, AdapterRole::Encoder);
      load(a.codec->decoder, module, kSharedLayer, AdapterRole::Decoder);
    }
    for (std::size_t l = 0; l < config_.n_layers; ++l) {
      const int li = static_cast<int>(l);
      if (!a.dense.empty()) load(a.dense[l].matrix, module, li, AdapterRole::M);
      if (!a.lora.empty()) {
        load(a.lora[l].a, module, li, AdapterRole::A);
        load(a.lora[l].b, module, li, AdapterRole::B);
      }
      if (!a.red.empty()) {
        load(a.red[l].scaling, module, li, AdapterRole::Scaling);
        load(a.red[l].bias, module, li, AdapterRole::Bias);
      }
    }
  }
}

}  // namespace denselora
