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
#include <functional>
#include <span>
#include <string>

#include "denselora/numeric/autodiff.hpp"

namespace denselora {

// Builds a scalar loss on the given tape. Must be deterministic.
using Objective = std::function<Var(Tape&)>;

struct GradCheckOptions {
  double epsilon = 1e-5;
  // 0 checks every coordinate; otherwise a seeded sample per parameter.
  std::size_t max_coords_per_parameter = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates_checked = 0;
};

/// Compares backward() against central differences over the trainable
/// parameters in `params`. Error per coordinate is
/// |analytic - numeric| / max(1, |numeric|).
///
/// Throws NumericError if two forward passes disagree. Parameter values are
/// restored bit-exactly and gradients are left zeroed.
GradCheckResult grad_check(const Objective& objective, std::span<const ParameterPtr> params,
                           const GradCheckOptions& options = {});

}  // namespace denselora
