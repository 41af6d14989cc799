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

#include "denselora/model/model.hpp"

namespace denselora {

// Attachment recipe stored with a model checkpoint so it can be rebuilt.
struct Attachment {
  AdapterVariant variant = AdapterVariant::DenseLoRA;
  TargetSet targets;
  AdapterOptions options;
};

/// Model checkpoint:
///   "DLMD" | u32 version | u64 len | manifest JSON (config, attachments) |
///   u64 count | count x (u64 len | name | DLT1 tensor) | adapter container
void save_model(const std::filesystem::path& path, const Model& model, const std::vector<Attachment>& attachments);

struct LoadedModel {
  Model model;
  std::vector<Attachment> attachments;
};
LoadedModel load_model(const std::filesystem::path& path);

}  // namespace denselora
