/**
 * Copyright 2026 The TFSL Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "tfsl/pathology.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <utility>

#include "tfsl/error.h"

namespace tfsl {

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](char x, char y) {
    return std::tolower(static_cast<unsigned char>(x)) ==
           std::tolower(static_cast<unsigned char>(y));
  });
}

}  // namespace

PathologyId::PathologyId(std::size_t index) : index_(index) {
  if (index >= kPathologyCount) {
    throw Error(ErrorCode::kInvalidArgument,
                "pathology index out of range: " + std::to_string(index));
  }
}

PathologyId PathologyId::parse(std::string_view text) {
  for (std::size_t i = 0; i < kPathologyCount; ++i) {
    if (iequals(text, kPathologyNames[i])) return PathologyId(i);
  }
  std::string_view digits = text;
  if (!digits.empty() && (digits.front() == 'P' || digits.front() == 'p')) {
    digits.remove_prefix(1);
  }
  std::size_t index = 0;
  auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
  if (!digits.empty() && ec == std::errc() && end == digits.data() + digits.size() &&
      index < kPathologyCount) {
    return PathologyId(index);
  }
  throw Error(ErrorCode::kNotFound, "unknown pathology: " + std::string(text));
}

std::array<PathologyId, kPathologyCount> PathologyId::all() {
  return [] <std::size_t... I>(std::index_sequence<I...>) {
    return std::array<PathologyId, kPathologyCount>{PathologyId(I)...};
  }(std::make_index_sequence<kPathologyCount>{});
}

}  // namespace tfsl
