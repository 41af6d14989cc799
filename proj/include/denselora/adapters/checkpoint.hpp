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

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "denselora/numeric/tensor.hpp"

namespace denselora {

enum class AdapterRole { A, B, M, Encoder, Decoder, Scaling, Bias };

std::string_view to_string(AdapterRole role);  // "A", "B", "M", "W_e", "W_d", "l_scaling", "l_bias"
std::optional<AdapterRole> parse_role(std::string_view name);

// Layer index used for entries shared by every layer (the codec).
inline constexpr int kSharedLayer = -1;

struct CheckpointEntry {
  std::string module_type;
  int layer_index = kSharedLayer;
  AdapterRole role = AdapterRole::A;
  Tensor tensor;

  std::string key() const;  // "<module>.<layer|shared>.<role>"
};

/// Named adapter tensors plus a manifest describing variant, rank, alpha,
/// activation and the shape group of every adapted module type.
///
/// File layout (little-endian):
///   "DLAC" | u32 version | u64 len | manifest JSON |
///   u64 count | count x (u64 len | entry key JSON | DLT1 tensor)
struct AdapterCheckpoint {
  nlohmann::json manifest = nlohmann::json::object();
  std::vector<CheckpointEntry> entries;

  const CheckpointEntry* find(std::string_view module_type, int layer_index, AdapterRole role) const;
};

inline constexpr std::string_view kCheckpointMagic = "DLAC";
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const AdapterCheckpoint& checkpoint);
AdapterCheckpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const AdapterCheckpoint& checkpoint);
AdapterCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace denselora
