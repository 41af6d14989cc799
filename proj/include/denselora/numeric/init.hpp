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

#include "denselora/numeric/rng.hpp"
#include "denselora/numeric/tensor.hpp"

namespace denselora {

// I.i.d. uniform draws on [-sqrt(6 / fan_in), +sqrt(6 / fan_in)], row-major order.
Tensor kaiming_uniform(const Shape& shape, std::size_t fan_in, Rng& rng);

double kaiming_bound(std::size_t fan_in);

}  // namespace denselora
