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

#include "denselora/numeric/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <vector>

#include "denselora/numeric/errors.hpp"
#include "denselora/numeric/rng.hpp"

namespace denselora {

namespace {

double evaluate(const Objective& objective) {
  Tape tape;
  return objective(tape).value().item();
}

std::vector<std::size_t> sample_coordinates(std::size_t numel, std::size_t limit, Rng& rng) {
  std::vector<std::size_t> idx(numel);
  std::iota(idx.begin(), idx.end(), 0);
  if (limit == 0 || limit >= numel) return idx;
  // partial Fisher-Yates
  for (std::size_t i = 0; i < limit; ++i) std::swap(idx[i], idx[i + rng.below(numel - i)]);
  idx.resize(limit);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

GradCheckResult grad_check(const Objective& objective, std::span<const ParameterPtr> params,
                           const GradCheckOptions& options) {
  if (!(options.epsilon > 0.0)) throw ConfigError("grad_check: epsilon must be positive");

  for (const auto& p : params) p->zero_grad();
  double reference = 0.0;
  {
    Tape tape;
    Var loss = objective(tape);
    reference = loss.value().item();
    tape.backward(loss);
  }
  const double repeat = evaluate(objective);
  if (std::memcmp(&reference, &repeat, sizeof(double)) != 0) {
    throw NumericError("grad_check: objective is non-deterministic (two forward passes disagree)");
  }

  GradCheckResult result;
  Rng rng(options.seed);
  const double eps = options.epsilon;
  for (const auto& p : params) {
    if (!p->trainable()) continue;
    for (std::size_t i : sample_coordinates(p->numel(), options.max_coords_per_parameter, rng)) {
      const double original = p->value[i];
      p->value[i] = original + eps;
      const double up = evaluate(objective);
      p->value[i] = original - eps;
      const double down = evaluate(objective);
      p->value[i] = original;

      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = p->grad[i];
      double err = std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric));
      if (std::isnan(err)) err = INFINITY;
      ++result.coordinates_checked;
      if (result.worst_parameter.empty() || err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_parameter = p->name();
        result.worst_index = i;
        result.worst_analytic = analytic;
        result.worst_numeric = numeric;
      }
    }
  }
  for (const auto& p : params) p->zero_grad();
  return result;
}

}  // namespace denselora
