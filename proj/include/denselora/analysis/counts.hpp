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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "denselora/adapters/adapters.hpp"
#include "denselora/model/model.hpp"
#include "denselora/numeric/errors.hpp"

namespace denselora {

// Closed-form trainable counts for one module type across l layers, where
// the module maps k inputs to d outputs.
std::int64_t count_full_ft(std::int64_t l, std::int64_t d, std::int64_t k);
std::int64_t count_lora(std::int64_t l, std::int64_t d, std::int64_t k, std::int64_t r);
std::int64_t count_denselora(std::int64_t l, std::int64_t d, std::int64_t k, std::int64_t r);
std::int64_t count_freeze(std::int64_t l, std::int64_t r);
std::int64_t count_red(std::int64_t l, std::int64_t d);
std::int64_t count_variant(AdapterVariant variant, std::int64_t l, std::int64_t d, std::int64_t k, std::int64_t r);

struct ModuleDims {
  std::string name;
  std::int64_t k = 0;  // input width
  std::int64_t d = 0;  // output width
};

struct ParamCountRow {
  std::string module;
  std::int64_t full_ft = 0;
  std::int64_t lora = 0;
  std::int64_t denselora = 0;
};

struct ParamCountReport {
  std::int64_t layers = 0;
  std::int64_t rank = 0;
  std::vector<ParamCountRow> rows;
  std::int64_t full_ft = 0;
  std::int64_t lora = 0;
  std::int64_t denselora = 0;
  std::optional<std::int64_t> base_total;

  double lora_to_denselora_ratio() const;
  // Percent of base_total; nullopt without a base total.
  std::optional<double> percent(std::int64_t count) const;
  nlohmann::json to_json() const;
};

/// Per-method totals with one shared codec per module type.
ParamCountReport count_params(std::int64_t layers, const std::vector<ModuleDims>& modules, std::int64_t rank,
                              std::optional<std::int64_t> base_total = std::nullopt);

struct CountPreset {
  std::string name;
  std::int64_t layers = 0;
  std::vector<ModuleDims> modules;
  std::int64_t base_total = 0;
};

// Dimension tables only; nothing is instantiated.
std::optional<CountPreset> find_preset(const std::string& name);

struct ModelCountGroup {
  Site site;
  AdapterVariant variant;
  std::int64_t k = 0, d = 0, rank = 0;
  std::int64_t formula = 0;
  std::int64_t enumerated = 0;
};

struct ModelCountReport {
  std::vector<ModelCountGroup> groups;
  std::int64_t enumerated_total = 0;
  std::int64_t formula_total = 0;
  std::int64_t base_total = 0;
  double percent_of_base = 0.0;

  nlohmann::json to_json() const;
};

class CountMismatch : public Error {
 public:
  using Error::Error;
};

/// Enumerates the model's unique trainable parameters and checks them against
/// the closed forms per module type. Throws CountMismatch on disagreement.
ModelCountReport count_model(const Model& model);

}  // namespace denselora
