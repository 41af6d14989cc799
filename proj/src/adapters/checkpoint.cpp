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

#include "denselora/adapters/checkpoint.hpp"

#include <array>
#include <fstream>
#include <istream>
#include <ostream>

#include "denselora/numeric/errors.hpp"
#include "denselora/numeric/serialize.hpp"

namespace denselora {

namespace {

constexpr std::uint64_t kMaxBlob = std::uint64_t{1} << 30;

void write_blob(std::ostream& out, const std::string& bytes) {
  write_u64(out, bytes.size());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string read_blob(std::istream& in) {
  const std::uint64_t n = read_u64(in);
  if (n > kMaxBlob) throw InputError("checkpoint blob too large");
  std::string bytes(n, '\0');
  in.read(bytes.data(), static_cast<std::streamsize>(n));
  if (static_cast<std::uint64_t>(in.gcount()) != n) throw InputError("truncated checkpoint");
  return bytes;
}

}  // namespace

std::string_view to_string(AdapterRole role) {
  switch (role) {
    case AdapterRole::A:
      return "A";
    case AdapterRole::B:
      return "B";
    case AdapterRole::M:
      return "M";
    case AdapterRole::Encoder:
      return "W_e";
    case AdapterRole::Decoder:
      return "W_d";
    case AdapterRole::Scaling:
      return "l_scaling";
    case AdapterRole::Bias:
      return "l_bias";
  }
  return "unknown";
}

std::optional<AdapterRole> parse_role(std::string_view name) {
  for (auto role : {AdapterRole::A, AdapterRole::B, AdapterRole::M, AdapterRole::Encoder, AdapterRole::Decoder,
                    AdapterRole::Scaling, AdapterRole::Bias}) {
    if (to_string(role) == name) return role;
  }
  return std::nullopt;
}

std::string CheckpointEntry::key() const {
  return module_type + "." + (layer_index == kSharedLayer ? std::string("shared") : std::to_string(layer_index)) +
         "." + std::string(to_string(role));
}

const CheckpointEntry* AdapterCheckpoint::find(std::string_view module_type, int layer_index, AdapterRole role) const {
  for (const auto& e : entries) {
    if (e.module_type == module_type && e.layer_index == layer_index && e.role == role) return &e;
  }
  return nullptr;
}

void write_checkpoint(std::ostream& out, const AdapterCheckpoint& checkpoint) {
  out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  write_u32(out, kCheckpointVersion);
  write_blob(out, checkpoint.manifest.dump());
  write_u64(out, checkpoint.entries.size());
  for (const auto& e : checkpoint.entries) {
    nlohmann::json key = {{"module", e.module_type}, {"layer", e.layer_index}, {"role", to_string(e.role)}};
    write_blob(out, key.dump());
    write_tensor(out, e.tensor);
  }
  if (!out) throw InputError("failed to write adapter checkpoint");
}

AdapterCheckpoint read_checkpoint(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != 4 || std::string_view(magic.data(), 4) != kCheckpointMagic) {
    throw InputError("not an adapter checkpoint (bad magic)");
  }
  const std::uint32_t version = read_u32(in);
  if (version != kCheckpointVersion) throw InputError("unsupported adapter checkpoint version " + std::to_string(version));

  AdapterCheckpoint checkpoint;
  try {
    checkpoint.manifest = nlohmann::json::parse(read_blob(in));
    const std::uint64_t count = read_u64(in);
    for (std::uint64_t i = 0; i < count; ++i) {
      const auto key = nlohmann::json::parse(read_blob(in));
      CheckpointEntry entry;
      entry.module_type = key.at("module").get<std::string>();
      entry.layer_index = key.at("layer").get<int>();
      const auto role = parse_role(key.at("role").get<std::string>());
      if (!role) throw InputError("unknown adapter role in checkpoint");
      entry.role = *role;
      entry.tensor = read_tensor(in);
      checkpoint.entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed adapter checkpoint: ") + e.what());
  }
  return checkpoint;
}

void save_checkpoint(const std::filesystem::path& path, const AdapterCheckpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  write_checkpoint(out, checkpoint);
}

AdapterCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace denselora
