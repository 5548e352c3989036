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
#ifndef TFSL_PATHOLOGY_H_
#define TFSL_PATHOLOGY_H_

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

namespace tfsl {

inline constexpr std::size_t kPathologyCount = 14;

// CheXpert observation columns, in report row order.
inline constexpr std::array<std::string_view, kPathologyCount> kPathologyNames = {
    "No Finding",      "Enlarged Cardiomediastinum",
    "Cardiomegaly",    "Lung Opacity",
    "Lung Lesion",     "Edema",
    "Consolidation",   "Pneumonia",
    "Atelectasis",     "Pneumothorax",
    "Pleural Effusion", "Pleural Other",
    "Fracture",        "Support Devices",
};

class PathologyId {
 public:
  // Throws Error(kInvalidArgument) outside [0, 13].
  explicit PathologyId(std::size_t index);

  std::size_t index() const noexcept { return index_; }
  std::string_view name() const noexcept { return kPathologyNames[index_]; }

  // Accepts a full name (case-insensitive), a bare index ("3") or "P3".
  static PathologyId parse(std::string_view text);
  static std::array<PathologyId, kPathologyCount> all();

  friend bool operator==(PathologyId a, PathologyId b) = default;
  friend auto operator<=>(PathologyId a, PathologyId b) = default;

 private:
  std::size_t index_;
};

}  // namespace tfsl

#endif  // TFSL_PATHOLOGY_H_
