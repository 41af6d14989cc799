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
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "denselora/adapters/adapters.hpp"
#include "denselora/adapters/checkpoint.hpp"
#include "denselora/model/targets.hpp"
#include "denselora/numeric/autodiff.hpp"

namespace denselora {

struct ModelConfig {
  std::size_t n_layers = 2;
  std::size_t d_model = 32;
  std::size_t n_heads = 2;
  std::size_t d_ff = 64;
  std::size_t vocab_size = 16;
  std::size_t max_seq_len = 16;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Input (k) and output (d) width of a projection site.
struct SiteShape {
  std::size_t k = 0;
  std::size_t d = 0;
};

// Adapters of one module type across all layers.
struct SiteAdapters {
  AdapterVariant variant = AdapterVariant::DenseLoRA;
  AdapterOptions options;
  SiteShape shape;
  std::shared_ptr<SharedCodec> codec;  // codec variants only
  std::vector<DenseLoraAdapter> dense;
  std::vector<LoraAdapter> lora;
  std::vector<RedAdapter> red;
};

// Optional probe of projection outputs, keyed by (layer, site).
struct ForwardTrace {
  std::map<std::pair<std::size_t, Site>, Tensor> site_outputs;
};

/// Decoder-only toy transformer with frozen base weights.
///
/// Per layer: RMS pre-norm, causal multi-head attention (Q, K, V, O), RMS
/// pre-norm, gated MLP D(silu(G h) ⊙ U h). Learned absolute positions.
/// Projection weights are stored [out x in].
class Model {
 public:
  explicit Model(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  SiteShape site_shape(Site site) const;

  /// Attaches `variant` adapters to every site in `targets`. May be called
  /// again with disjoint targets for hybrid configurations.
  void attach(AdapterVariant variant, const TargetSet& targets, const AdapterOptions& options, Rng& rng);

  bool has_adapters() const { return !adapters_.empty(); }
  TargetSet adapted_targets() const;
  const std::map<Site, SiteAdapters>& adapters() const { return adapters_; }
  std::map<Site, SiteAdapters>& adapters() { return adapters_; }
  const std::vector<std::string>& notices() const { return notices_; }

  // ids holds batch * seq_len tokens, sequence after sequence.
  Var forward(Tape& tape, std::span<const int> ids, std::size_t seq_len, ForwardContext& ctx,
              ForwardTrace* trace = nullptr) const;
  // Eval-mode logits [len x vocab] for one sequence.
  Tensor logits(std::span<const int> tokens, ForwardTrace* trace = nullptr) const;

  Parameter& projection(Site site, std::size_t layer) const;
  std::vector<ParameterPtr> base_parameters() const;
  // Unique adapter parameters (shared codecs once), deterministic order.
  std::vector<ParameterPtr> adapter_parameters() const;
  std::vector<ParameterPtr> trainable_parameters() const;
  std::size_t base_parameter_count() const;

  AdapterCheckpoint export_adapters() const;
  // Copies tensors into already-attached adapters; manifests must agree.
  void import_adapters(const AdapterCheckpoint& checkpoint);
  nlohmann::json adapter_manifest() const;

 private:
  struct Layer {
    ParameterPtr attn_norm;
    ParameterPtr mlp_norm;
    std::map<Site, ParameterPtr> proj;
  };

  Var project(Tape& tape, Var h, Site site, std::size_t layer, ForwardContext& ctx, ForwardTrace* trace) const;

  ModelConfig config_;
  ParameterPtr token_embedding_;
  ParameterPtr position_embedding_;
  std::vector<Layer> layers_;
  ParameterPtr final_norm_;
  ParameterPtr lm_head_;
  std::map<Site, SiteAdapters> adapters_;
  std::vector<std::string> notices_;
};

Model build_model(const ModelConfig& config);

}  // namespace denselora
