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

#include "denselora/model/model_checkpoint.hpp"

#include <array>
#include <fstream>

#include "denselora/numeric/errors.hpp"
#include "denselora/numeric/serialize.hpp"

namespace denselora {

namespace {

constexpr std::string_view kModelMagic = "DLMD";
constexpr std::uint32_t kModelVersion = 1;

void write_string(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  const std::uint64_t n = read_u64(in);
  if (n > (std::uint64_t{1} << 30)) throw InputError("model checkpoint string too large");
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (static_cast<std::uint64_t>(in.gcount()) != n) throw InputError("truncated model checkpoint");
  return s;
}

nlohmann::json attachment_json(const Attachment& a) {
  nlohmann::json j = {{"variant", to_string(a.variant)},
                      {"targets", a.targets.to_string()},
                      {"rank", a.options.rank},
                      {"dropout", a.options.dropout},
                      {"activation", to_string(a.options.activation)}};
  if (a.options.alpha) j["alpha"] = *a.options.alpha;
  return j;
}

Attachment attachment_from_json(const nlohmann::json& j) {
  Attachment a;
  auto variant = parse_variant(j.at("variant").get<std::string>());
  auto act = parse_activation(j.at("activation").get<std::string>());
  if (!variant || !act) throw InputError("model checkpoint: bad attachment record");
  a.variant = *variant;
  a.targets = TargetSet::parse(j.at("targets").get<std::string>());
  a.options.rank = j.at("rank").get<std::size_t>();
  a.options.dropout = j.at("dropout").get<double>();
  a.options.activation = *act;
  if (j.contains("alpha")) a.options.alpha = j.at("alpha").get<double>();
  return a;
}

}  // namespace

void save_model(const std::filesystem::path& path, const Model& model, const std::vector<Attachment>& attachments) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  nlohmann::json manifest = {{"format", "denselora-model"}, {"config", model.config().to_json()}};
  manifest["attachments"] = nlohmann::json::array();
  for (const auto& a : attachments) manifest["attachments"].push_back(attachment_json(a));

  out.write(kModelMagic.data(), kModelMagic.size());
  write_u32(out, kModelVersion);
  write_string(out, manifest.dump());
  const auto base = model.base_parameters();
  write_u64(out, base.size());
  for (const auto& p : base) {
    write_string(out, p->name());
    write_tensor(out, p->value);
  }
  write_checkpoint(out, model.export_adapters());
  if (!out) throw InputError("failed to write model checkpoint " + path.string());
}

LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != 4 || std::string_view(magic.data(), 4) != kModelMagic) throw InputError("not a model checkpoint");
  if (read_u32(in) != kModelVersion) throw InputError("unsupported model checkpoint version");

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_string(in));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed model manifest: ") + e.what());
  }
  LoadedModel loaded{Model(ModelConfig::from_json(manifest.at("config"))), {}};
  Rng rng(0);  // adapter values are overwritten by the checkpoint below
  for (const auto& j : manifest.at("attachments")) {
    loaded.attachments.push_back(attachment_from_json(j));
    const Attachment& a = loaded.attachments.back();
    loaded.model.attach(a.variant, a.targets, a.options, rng);
  }

  const std::uint64_t count = read_u64(in);
  auto base = loaded.model.base_parameters();
  if (count != base.size()) throw InputError("model checkpoint base tensor count mismatch");
  for (auto& p : base) {
    const std::string name = read_string(in);
    Tensor t = read_tensor(in);
    if (name != p->name() || t.shape() != p->shape()) throw InputError("model checkpoint tensor '" + name + "' mismatch");
    p->value = std::move(t);
  }
  loaded.model.import_adapters(read_checkpoint(in));
  return loaded;
}

}  // namespace denselora
