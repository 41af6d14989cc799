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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "denselora/analysis/density.hpp"
#include "denselora/cli/config.hpp"
#include "denselora/numeric/gradcheck.hpp"
#include "denselora/training/trainer.hpp"

namespace denselora {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitConfig = 3,
  kExitNumeric = 4,
  kExitIo = 5,
};

// Default output directory when --out is not given.
inline constexpr const char* kOutDirEnv = "DENSELORA_OUT_DIR";
std::filesystem::path default_out_dir();

struct TrainOutcome {
  TrainResult result;
  std::size_t trainable_count = 0;
  std::optional<double> merge_error;  // only-matrix runs
};

/// Writes manifest.json, metrics.jsonl, adapters_before.dlck,
/// adapters_after.dlck, model.dlmd and config.ini under out_dir.
TrainOutcome run_train(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

// Max |merged(h) - adapted(h)| over `samples` random inputs per only-matrix site and layer.
double only_matrix_merge_error(const Model& model, std::size_t samples, std::uint64_t seed);

struct GradCheckRequest {
  std::size_t n_layers = 2;
  std::size_t d_model = 8;
  std::size_t n_heads = 2;
  std::size_t d_ff = 12;
  std::size_t vocab_size = 8;
  std::size_t seq_len = 5;
  std::size_t batch = 2;
  std::size_t rank = 2;
  AdapterVariant variant = AdapterVariant::DenseLoRA;
  ActivationKind activation = ActivationKind::Tanh;
  TargetSet targets = TargetSet::parse("QKVOGUD");
  std::uint64_t seed = 0;
  double perturbation = 0.1;  // moves adapters off their zero-branch init
  double corrupt_derivative = 0.0;
};

inline constexpr std::size_t kGradCheckParamLimit = 100000;
inline constexpr double kGradCheckTolerance = 1e-5;

/// Throws ConfigError when the model exceeds kGradCheckParamLimit parameters.
GradCheckResult run_grad_check(const GradCheckRequest& request);

struct DensityFiles {
  DensityReport report;
  std::vector<std::filesystem::path> written;
};

DensityFiles write_density_outputs(std::span<const RunSnapshots> runs, const DensityOptions& options,
                                   const std::filesystem::path& out_dir);

struct SweepRow {
  std::size_t rank = 0;
  std::int64_t trainable = 0;
  std::int64_t formula = 0;
  double accuracy = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<std::size_t> skipped;
};

SweepResult run_rank_sweep(const RunConfig& config, const std::vector<std::size_t>& ranks, std::ostream& log);

/// Entry point behind the denselora executable; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace denselora
