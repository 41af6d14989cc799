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

#include "denselora/numeric/init.hpp"

#include <cmath>

#include "denselora/numeric/errors.hpp"

namespace denselora {

double kaiming_bound(std::size_t fan_in) {
  if (fan_in == 0) throw ConfigError("kaiming init: fan_in must be at least 1");
  return std::sqrt(6.0 / static_cast<double>(fan_in));
}

Tensor kaiming_uniform(const Shape& shape, std::size_t fan_in, Rng& rng) {
  const double bound = kaiming_bound(fan_in);
  Tensor t(shape);
  for (auto& v : t.data()) v = rng.uniform(-bound, bound);
  return t;
}

}  // namespace denselora
