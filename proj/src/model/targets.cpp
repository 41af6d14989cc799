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

#include "denselora/model/targets.hpp"

#include <bit>
#include <cctype>

#include "denselora/numeric/errors.hpp"

namespace denselora {

char site_letter(Site site) {
  static constexpr char kLetters[] = {'Q', 'K', 'V', 'O', 'G', 'U', 'D'};
  return kLetters[static_cast<unsigned>(site)];
}

std::optional<Site> parse_site(char letter) {
  for (Site s : kAllSites) {
    if (site_letter(s) == std::toupper(static_cast<unsigned char>(letter))) return s;
  }
  return std::nullopt;
}

TargetSet::TargetSet(std::initializer_list<Site> sites) {
  for (Site s : sites) insert(s);
}

TargetSet TargetSet::parse(std::string_view text) {
  TargetSet set;
  if (text == "-" || text.empty()) return set;
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '/' || c == '+') continue;
    auto site = parse_site(c);
    if (!site) throw ConfigError("unknown target module '" + std::string(1, c) + "' (expected letters from QKVOGUD)");
    set.insert(*site);
  }
  return set;
}

std::size_t TargetSet::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

TargetSet TargetSet::united(const TargetSet& other) const {
  TargetSet out = *this;
  out.bits_ |= other.bits_;
  return out;
}

std::vector<Site> TargetSet::sites() const {
  std::vector<Site> out;
  for (Site s : kAllSites)
    if (contains(s)) out.push_back(s);
  return out;
}

std::string TargetSet::to_string() const {
  if (empty()) return "-";
  std::string out;
  for (Site s : sites()) out.push_back(site_letter(s));
  return out;
}

}  // namespace denselora
