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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace denselora {

// The seven adaptable projections of a LLaMA-style block.
enum class Site : std::uint8_t { Q, K, V, O, G, U, D };

inline constexpr std::array<Site, 7> kAllSites = {Site::Q, Site::K, Site::V, Site::O, Site::G, Site::U, Site::D};

char site_letter(Site site);
std::optional<Site> parse_site(char letter);

class TargetSet {
 public:
  TargetSet() = default;
  TargetSet(std::initializer_list<Site> sites);

  // Letters in any order, optional separators: "QKVUD", "q,k,v", "U D".
  static TargetSet parse(std::string_view text);

  bool contains(Site site) const { return (bits_ >> static_cast<unsigned>(site)) & 1u; }
  void insert(Site site) { bits_ |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(site)); }
  bool empty() const { return bits_ == 0; }
  std::size_t size() const;
  bool intersects(const TargetSet& other) const { return (bits_ & other.bits_) != 0; }
  TargetSet united(const TargetSet& other) const;
  std::vector<Site> sites() const;  // canonical Q K V O G U D order
  std::string to_string() const;    // e.g. "QKVUD", "-" when empty

  friend bool operator==(const TargetSet&, const TargetSet&) = default;

 private:
  std::uint8_t bits_ = 0;
};

}  // namespace denselora
