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

#include "denselora/analysis/density.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "denselora/numeric/errors.hpp"
#include "denselora/numeric/rng.hpp"

namespace denselora {

std::string_view to_string(TauMode mode) { return mode == TauMode::Pooled ? "pooled" : "per-matrix"; }

std::optional<TauMode> parse_tau_mode(std::string_view name) {
  if (name == "pooled") return TauMode::Pooled;
  if (name == "per-matrix") return TauMode::PerMatrix;
  return std::nullopt;
}

namespace {

double sum_sq_delta(const Tensor& initial, const Tensor& final) {
  if (initial.shape() != final.shape()) {
    throw DimensionError("increment: shapes differ, " + shape_string(initial.shape()) + " vs " +
                         shape_string(final.shape()));
  }
  double ss = 0.0;
  for (std::size_t i = 0; i < initial.size(); ++i) {
    const double d = final[i] - initial[i];
    ss += d * d;
  }
  return ss;
}

bool in_comparison_set(AdapterRole role) {
  return role == AdapterRole::M || role == AdapterRole::A || role == AdapterRole::B;
}

std::size_t count_active(const Tensor& delta, double tau) {
  return static_cast<std::size_t>(
      std::count_if(delta.data().begin(), delta.data().end(), [tau](double v) { return std::abs(v) > tau; }));
}

}  // namespace

double increment_rms(const Tensor& initial, const Tensor& final) {
  if (initial.size() == 0) return 0.0;
  return std::sqrt(sum_sq_delta(initial, final) / static_cast<double>(initial.size()));
}

IncrementStats increment_density(const Tensor& initial, const Tensor& final, double pool_rms, double tau_factor) {
  if (!(tau_factor > 0.0)) throw ConfigError("increment_density: tau factor must be positive");
  if (!(pool_rms > 0.0)) throw NumericError("increment_density: pooled increment rms is zero (degenerate, no training)");
  IncrementStats s;
  s.rms = increment_rms(initial, final);
  s.tau = tau_factor * pool_rms;
  s.total = initial.size();
  for (std::size_t i = 0; i < initial.size(); ++i) s.active += std::abs(final[i] - initial[i]) > s.tau;
  s.active_fraction = s.total ? static_cast<double>(s.active) / static_cast<double>(s.total) : 0.0;
  return s;
}

std::string DensityEntry::name() const {
  std::string n = run.empty() ? "" : run + ":";
  return n + module + "." + (layer == kSharedLayer ? std::string("shared") : std::to_string(layer)) + "." +
         std::string(to_string(role));
}

nlohmann::json DensityReport::to_json() const {
  nlohmann::json e = nlohmann::json::array();
  for (const auto& x : entries) {
    e.push_back({{"name", x.name()},
                 {"degenerate", x.degenerate},
                 {"tau", x.stats.tau},
                 {"rms_increment", x.stats.rms},
                 {"active_fraction", x.degenerate ? nlohmann::json(nullptr) : nlohmann::json(x.stats.active_fraction)},
                 {"slice_active_fraction",
                  x.degenerate ? nlohmann::json(nullptr) : nlohmann::json(x.slice_active_fraction)}});
  }
  nlohmann::json c = nlohmann::json::array();
  for (const auto& x : comparisons) {
    c.push_back({{"module", x.module},
                 {"layer", x.layer},
                 {"m", x.m_fraction},
                 {"a", x.a_fraction},
                 {"b", x.b_fraction},
                 {"ratio", x.ratio}});
  }
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"tau_mode", to_string(options.tau_mode)},
          {"tau_factor", options.tau_factor},
          {"tau_convention", "tau = tau_factor * rms of increments over the pool selected by tau_mode (self-defined)"},
          {"slice_seed", options.slice_seed},
          {"pooled_rms", pooled_rms},
          {"degenerate", degenerate},
          {"entries", e},
          {"comparisons", c},
          {"summary", {{"m", opt(m_fraction)}, {"a", opt(a_fraction)}, {"b", opt(b_fraction)}, {"ratio", opt(ratio)}}}};
}

DensityReport density_report(std::span<const RunSnapshots> runs, const DensityOptions& options) {
  if (!(options.tau_factor > 0.0)) throw ConfigError("density: tau factor must be positive");
  DensityReport report;
  report.options = options;

  struct Pending {
    DensityEntry entry;
    Tensor delta;
  };
  std::vector<Pending> pending;
  double pool_ss = 0.0;
  std::size_t pool_n = 0;

  for (const RunSnapshots& run : runs) {
    if (run.before->manifest != run.after->manifest) {
      throw InputError("density: manifests of '" + run.label + "' before/after checkpoints differ");
    }
    if (run.before->entries.size() != run.after->entries.size()) {
      throw InputError("density: '" + run.label + "' checkpoints list different entries");
    }
    for (const auto& b : run.before->entries) {
      const CheckpointEntry* a = run.after->find(b.module_type, b.layer_index, b.role);
      if (!a || a->tensor.shape() != b.tensor.shape()) {
        throw InputError("density: entry " + b.key() + " missing or reshaped in '" + run.label + "' after checkpoint");
      }
      Pending p;
      p.entry.run = run.label;
      p.entry.module = b.module_type;
      p.entry.layer = b.layer_index;
      p.entry.role = b.role;
      p.entry.shape = b.tensor.shape();
      p.delta = Tensor(b.tensor.shape());
      for (std::size_t i = 0; i < p.delta.size(); ++i) p.delta[i] = a->tensor[i] - b.tensor[i];
      if (in_comparison_set(b.role)) {
        pool_ss += sum_sq_delta(b.tensor, a->tensor);
        pool_n += b.tensor.size();
      }
      pending.push_back(std::move(p));
    }
  }
  report.pooled_rms = pool_n ? std::sqrt(pool_ss / static_cast<double>(pool_n)) : 0.0;
  if (options.tau_mode == TauMode::Pooled && !(report.pooled_rms > 0.0)) report.degenerate = true;

  for (auto& p : pending) {
    DensityEntry& e = p.entry;
    const Tensor zero(p.delta.shape());
    const double own_rms = increment_rms(zero, p.delta);
    const double pool = options.tau_mode == TauMode::Pooled ? report.pooled_rms : own_rms;
    e.stats.rms = own_rms;
    e.stats.total = p.delta.size();
    if (!(pool > 0.0)) {
      e.degenerate = true;
    } else {
      e.stats = increment_density(zero, p.delta, pool, options.tau_factor);
    }

    // rank x rank window for heatmaps
    const std::size_t rows = p.delta.rows(), cols = p.delta.cols();
    std::size_t h = rows, w = cols;
    Rng rng(mix_seed(options.slice_seed, e.name()));
    if (e.role == AdapterRole::A) {
      w = std::min(rows, cols);
      e.slice_col = rng.below(cols - w + 1);
    } else if (e.role == AdapterRole::B) {
      h = std::min(rows, cols);
      e.slice_row = rng.below(rows - h + 1);
    }
    e.slice = Tensor({h, w});
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) e.slice(i, j) = p.delta(e.slice_row + i, e.slice_col + j);
    if (!e.degenerate) {
      e.slice_active_fraction = static_cast<double>(count_active(e.slice, e.stats.tau)) / static_cast<double>(h * w);
    }
    report.entries.push_back(std::move(e));
  }
  if (std::all_of(report.entries.begin(), report.entries.end(), [](const DensityEntry& x) { return x.degenerate; })) {
    report.degenerate = true;
  }

  // Match M with A/B of the same module and layer.
  std::map<std::pair<std::string, int>, std::map<AdapterRole, const DensityEntry*>> by_site;
  for (const auto& e : report.entries) {
    if (in_comparison_set(e.role) && !e.degenerate) by_site[{e.module, e.layer}][e.role] = &e;
  }
  std::size_t m_active = 0, m_total = 0, a_active = 0, a_total = 0, b_active = 0, b_total = 0;
  for (const auto& [key, roles] : by_site) {
    if (!roles.count(AdapterRole::M) || !roles.count(AdapterRole::A) || !roles.count(AdapterRole::B)) continue;
    const auto& m = roles.at(AdapterRole::M)->stats;
    const auto& a = roles.at(AdapterRole::A)->stats;
    const auto& b = roles.at(AdapterRole::B)->stats;
    DensityComparison c{key.first, key.second, m.active_fraction, a.active_fraction, b.active_fraction, 0.0};
    const double denom = std::max(a.active_fraction, b.active_fraction);
    c.ratio = denom > 0.0 ? c.m_fraction / denom : std::numeric_limits<double>::infinity();
    report.comparisons.push_back(c);
    m_active += m.active, m_total += m.total;
    a_active += a.active, a_total += a.total;
    b_active += b.active, b_total += b.total;
  }
  if (m_total && a_total && b_total) {
    report.m_fraction = static_cast<double>(m_active) / static_cast<double>(m_total);
    report.a_fraction = static_cast<double>(a_active) / static_cast<double>(a_total);
    report.b_fraction = static_cast<double>(b_active) / static_cast<double>(b_total);
    const double denom = std::max(*report.a_fraction, *report.b_fraction);
    report.ratio = denom > 0.0 ? *report.m_fraction / denom : std::numeric_limits<double>::infinity();
  }
  return report;
}

DensityReport density_report(const AdapterCheckpoint& before, const AdapterCheckpoint& after,
                             const DensityOptions& options) {
  const RunSnapshots run{"", &before, &after};
  return density_report(std::span(&run, 1), options);
}

std::string to_csv(const Tensor& grid) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    for (std::size_t j = 0; j < grid.cols(); ++j) {
      if (j) out << ',';
      out << grid(i, j);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace denselora
