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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "denselora/adapters/adapters.hpp"
#include "denselora/model/model.hpp"
#include "denselora/model/model_checkpoint.hpp"
#include "denselora/model/targets.hpp"
#include "denselora/training/schedule.hpp"
#include "denselora/training/tasks.hpp"

namespace denselora {

struct AdapterSpec {
  AdapterVariant variant = AdapterVariant::DenseLoRA;
  TargetSet targets = TargetSet::parse("QKVUD");
  AdapterOptions options;
  std::uint64_t seed = 0;  // adapter initialization stream
  // Second variant on disjoint targets, sharing rank/alpha/dropout/activation.
  std::optional<AdapterVariant> hybrid_variant;
  TargetSet hybrid_targets;

  std::vector<Attachment> attachments() const;
  friend bool operator==(const AdapterSpec&, const AdapterSpec&) = default;
};

// Everything a train run depends on.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  TaskSpec task;
  AdapterSpec adapter;

  void validate() const;
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  std::string to_ini() const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// "section.key" -> value
using ConfigOverrides = std::map<std::string, std::string>;

/// INI text with [model], [train], [task] and [adapter] sections. Overrides
/// win over file values; unknown keys and malformed values throw ConfigError.
RunConfig parse_run_config(const std::string& ini_text, const ConfigOverrides& overrides = {});
RunConfig load_run_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});
RunConfig apply_overrides(const RunConfig& base, const ConfigOverrides& overrides);

/// Builds the model and attaches every adapter in the spec, in order.
Model build_adapted_model(const RunConfig& config);

inline constexpr const char* kArtifactVersion = "0.1.0";

// Written before training starts.
nlohmann::json run_manifest(const RunConfig& config);

}  // namespace denselora
