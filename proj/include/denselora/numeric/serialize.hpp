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

#include <iosfwd>
#include <string>
#include <string_view>

#include "denselora/numeric/tensor.hpp"

namespace denselora {

// Portable tensor layout:
//   "DLT1" | u64 rank | u64 dim[rank] | f64 values[numel]
// All integers and doubles little-endian.
inline constexpr std::string_view kTensorMagic = "DLT1";

void write_tensor(std::ostream& out, const Tensor& t);
Tensor read_tensor(std::istream& in);

std::string encode_tensor(const Tensor& t);
Tensor decode_tensor(std::string_view bytes);

// Little-endian primitives shared by the checkpoint containers.
void write_u64(std::ostream& out, std::uint64_t v);
std::uint64_t read_u64(std::istream& in);
void write_u32(std::ostream& out, std::uint32_t v);
std::uint32_t read_u32(std::istream& in);

}  // namespace denselora
