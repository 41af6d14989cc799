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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "denselora/adapters/checkpoint.hpp"
#include "denselora/numeric/tensor.hpp"

namespace denselora {

// Which increments set the threshold τ = tau_factor · rms(pool).
enum class TauMode {
  PerMatrix,  // each matrix against its own increment rms
  Pooled,     // every M, A and B increment in the report, pooled
};

std::string_view to_string(TauMode mode);
std::optional<TauMode> parse_tau_mode(std::string_view name);

struct IncrementStats {
  double rms = 0.0;
  double tau = 0.0;
  double active_fraction = 0.0;
  std::size_t active = 0;
  std::size_t total = 0;
};

// sqrt(mean((final - initial)^2))
double increment_rms(const Tensor& initial, const Tensor& final);

/// Fraction of |final - initial| entries strictly above tau_factor · pool_rms.
/// Throws NumericError when pool_rms is zero (nothing was trained).
IncrementStats increment_density(const Tensor& initial, const Tensor& final, double pool_rms,
                                 double tau_factor = 0.1);

struct DensityOptions {
  TauMode tau_mode = TauMode::Pooled;
  double tau_factor = 0.1;
  std::uint64_t slice_seed = 0;
};

struct DensityEntry {
  std::string run;
  std::string module;
  int layer = kSharedLayer;
  AdapterRole role = AdapterRole::M;
  Shape shape;
  bool degenerate = false;
  IncrementStats stats;
  // rank x rank increment window: all of M, a seeded column block of A, a
  // seeded row block of B.
  Tensor slice;
  std::size_t slice_row = 0;
  std::size_t slice_col = 0;
  double slice_active_fraction = 0.0;

  std::string name() const;
};

struct DensityComparison {
  std::string module;
  int layer = 0;
  double m_fraction = 0.0;
  double a_fraction = 0.0;
  double b_fraction = 0.0;
  double ratio = 0.0;  // m / max(a, b)
};

struct DensityReport {
  DensityOptions options;
  double pooled_rms = 0.0;
  bool degenerate = false;
  std::vector<DensityEntry> entries;
  std::vector<DensityComparison> comparisons;
  // Aggregates over all matched (module, layer) pairs.
  std::optional<double> m_fraction, a_fraction, b_fraction, ratio;

  nlohmann::json to_json() const;  // summary without slices
};

struct RunSnapshots {
  std::string label;
  const AdapterCheckpoint* before = nullptr;
  const AdapterCheckpoint* after = nullptr;
};

/// Increment densities of every adapter matrix in the given runs. M matrices
/// are compared with A and B of the same (module, layer) from any run.
/// Throws InputError when a run's before/after manifests disagree.
DensityReport density_report(std::span<const RunSnapshots> runs, const DensityOptions& options = {});
DensityReport density_report(const AdapterCheckpoint& before, const AdapterCheckpoint& after,
                             const DensityOptions& options = {});

// Heatmap grid as CSV rows.
std::string to_csv(const Tensor& grid);

}  // namespace denselora
