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

#include "denselora/analysis/counts.hpp"

#include <set>

namespace denselora {

std::int64_t count_full_ft(std::int64_t l, std::int64_t d, std::int64_t k) { return l * d * k; }

std::int64_t count_lora(std::int64_t l, std::int64_t d, std::int64_t k, std::int64_t r) { return l * (d + k) * r; }

std::int64_t count_denselora(std::int64_t l, std::int64_t d, std::int64_t k, std::int64_t r) {
  return (d + k + l * r) * r;
}

std::int64_t count_freeze(std::int64_t l, std::int64_t r) { return l * r * r; }

std::int64_t count_red(std::int64_t l, std::int64_t d) { return 2 * l * d; }

std::int64_t count_variant(AdapterVariant variant, std::int64_t l, std::int64_t d, std::int64_t k, std::int64_t r) {
  switch (variant) {
    case AdapterVariant::DenseLoRA:
    case AdapterVariant::OnlyMatrix:
      return count_denselora(l, d, k, r);
    case AdapterVariant::Freeze:
      return count_freeze(l, r);
    case AdapterVariant::LoRA:
      return count_lora(l, d, k, r);
    case AdapterVariant::RED:
      return count_red(l, d);
  }
  return 0;
}

double ParamCountReport::lora_to_denselora_ratio() const {
  return denselora == 0 ? 0.0 : static_cast<double>(lora) / static_cast<double>(denselora);
}

std::optional<double> ParamCountReport::percent(std::int64_t count) const {
  if (!base_total || *base_total <= 0) return std::nullopt;
  return 100.0 * static_cast<double>(count) / static_cast<double>(*base_total);
}

nlohmann::json ParamCountReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"module", r.module}, {"full_ft", r.full_ft}, {"lora", r.lora}, {"denselora", r.denselora}});
  }
  nlohmann::json j = {{"layers", layers},       {"rank", rank},   {"modules", rows_json},
                      {"full_ft", full_ft},     {"lora", lora},   {"denselora", denselora},
                      {"ratio_lora_over_denselora", lora_to_denselora_ratio()}};
  if (base_total) {
    j["base_total"] = *base_total;
    j["percent"] = {{"lora", *percent(lora)}, {"denselora", *percent(denselora)}};
  }
  return j;
}

ParamCountReport count_params(std::int64_t layers, const std::vector<ModuleDims>& modules, std::int64_t rank,
                              std::optional<std::int64_t> base_total) {
  if (layers < 1 || rank < 1) throw ConfigError("count_params: layers and rank must be at least 1");
  if (modules.empty()) throw ConfigError("count_params: no module dimensions given");
  ParamCountReport report;
  report.layers = layers;
  report.rank = rank;
  report.base_total = base_total;
  for (const auto& m : modules) {
    if (m.k < 1 || m.d < 1) throw ConfigError("count_params: module '" + m.name + "' needs positive dims");
    ParamCountRow row{m.name, count_full_ft(layers, m.d, m.k), count_lora(layers, m.d, m.k, rank),
                      count_denselora(layers, m.d, m.k, rank)};
    report.full_ft += row.full_ft;
    report.lora += row.lora;
    report.denselora += row.denselora;
    report.rows.push_back(row);
  }
  return report;
}

std::optional<CountPreset> find_preset(const std::string& name) {
  if (name == "llama2-7b") {
    // hidden 4096, MLP 11008, 32 layers; base total 6,738,415,616.
    return CountPreset{name,
                       32,
                       {{"Q", 4096, 4096}, {"K", 4096, 4096}, {"V", 4096, 4096}, {"U", 4096, 11008}, {"D", 11008, 4096}},
                       6738415616};
  }
  return std::nullopt;
}

nlohmann::json ModelCountReport::to_json() const {
  nlohmann::json g = nlohmann::json::array();
  for (const auto& x : groups) {
    g.push_back({{"module", std::string(1, site_letter(x.site))},
                 {"variant", to_string(x.variant)},
                 {"k", x.k},
                 {"d", x.d},
                 {"rank", x.rank},
                 {"formula", x.formula},
                 {"enumerated", x.enumerated}});
  }
  return {{"groups", g},
          {"enumerated_total", enumerated_total},
          {"formula_total", formula_total},
          {"base_total", base_total},
          {"percent_of_base", percent_of_base}};
}

ModelCountReport count_model(const Model& model) {
  ModelCountReport report;
  report.base_total = static_cast<std::int64_t>(model.base_parameter_count());
  const auto layers = static_cast<std::int64_t>(model.config().n_layers);

  std::set<const Parameter*> seen;
  auto tally = [&seen](const ParameterPtr& p) -> std::int64_t {
    if (!p->trainable() || !seen.insert(p.get()).second) return 0;
    return static_cast<std::int64_t>(p->numel());
  };

  for (const auto& [site, a] : model.adapters()) {
    ModelCountGroup g{site, a.variant, static_cast<std::int64_t>(a.shape.k), static_cast<std::int64_t>(a.shape.d),
                      static_cast<std::int64_t>(a.options.rank), 0, 0};
    g.formula = count_variant(a.variant, layers, g.d, g.k, g.rank);
    if (a.codec) g.enumerated += tally(a.codec->encoder) + tally(a.codec->decoder);
    for (const auto& x : a.dense) g.enumerated += tally(x.matrix);
    for (const auto& x : a.lora) g.enumerated += tally(x.a) + tally(x.b);
    for (const auto& x : a.red) g.enumerated += tally(x.scaling) + tally(x.bias);
    report.formula_total += g.formula;
    report.groups.push_back(g);
  }
  for (const auto& p : model.trainable_parameters()) report.enumerated_total += static_cast<std::int64_t>(p->numel());

  for (const auto& g : report.groups) {
    if (g.formula != g.enumerated) {
      throw CountMismatch("count_model: module " + std::string(1, site_letter(g.site)) + " enumerates " +
                          std::to_string(g.enumerated) + " trainable parameters, formula gives " +
                          std::to_string(g.formula));
    }
  }
  if (report.enumerated_total != report.formula_total) {
    throw CountMismatch("count_model: " + std::to_string(report.enumerated_total) +
                        " trainable parameters enumerated, formulas give " + std::to_string(report.formula_total));
  }
  report.percent_of_base =
      report.base_total > 0 ? 100.0 * static_cast<double>(report.enumerated_total) / report.base_total : 0.0;
  return report;
}

}  // namespace denselora
