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

#include "denselora/numeric/serialize.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "denselora/numeric/errors.hpp"

namespace denselora {

namespace {

// Refuse absurd headers before allocating.
constexpr std::uint64_t kMaxRank = 8;
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 32;

void read_exact(std::istream& in, char* dst, std::size_t n) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) throw InputError("unexpected end of tensor stream");
}

}  // namespace

void write_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> buf;
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf.data(), buf.size());
}

std::uint64_t read_u64(std::istream& in) {
  std::array<char, 8> buf;
  read_exact(in, buf.data(), buf.size());
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  return v;
}

void write_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> buf;
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf.data(), buf.size());
}

std::uint32_t read_u32(std::istream& in) {
  std::array<char, 4> buf;
  read_exact(in, buf.data(), buf.size());
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  return v;
}

void write_tensor(std::ostream& out, const Tensor& t) {
  out.write(kTensorMagic.data(), kTensorMagic.size());
  write_u64(out, t.rank());
  for (auto d : t.shape()) write_u64(out, d);
  for (double v : t.data()) write_u64(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw InputError("failed to write tensor");
}

Tensor read_tensor(std::istream& in) {
  std::array<char, 4> magic;
  read_exact(in, magic.data(), magic.size());
  if (std::string_view(magic.data(), magic.size()) != kTensorMagic) throw InputError("bad tensor magic");
  const std::uint64_t rank = read_u64(in);
  if (rank > kMaxRank) throw InputError("tensor rank " + std::to_string(rank) + " too large");
  Shape shape(rank);
  std::uint64_t numel = 1;
  for (auto& d : shape) {
    d = read_u64(in);
    if (d != 0 && numel > kMaxElements / d) throw InputError("tensor too large");
    numel *= d;
  }
  std::vector<double> data(numel);
  for (auto& v : data) v = std::bit_cast<double>(read_u64(in));
  return Tensor(std::move(shape), std::move(data));
}

std::string encode_tensor(const Tensor& t) {
  std::ostringstream out(std::ios::binary);
  write_tensor(out, t);
  return out.str();
}

Tensor decode_tensor(std::string_view bytes) {
  std::istringstream in(std::string(bytes), std::ios::binary);
  Tensor t = read_tensor(in);
  if (in.peek() != std::char_traits<char>::eof()) throw InputError("trailing bytes after tensor payload");
  return t;
}

}  // namespace denselora
