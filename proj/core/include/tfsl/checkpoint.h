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
#ifndef TFSL_CHECKPOINT_H_
#define TFSL_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tfsl/model.h"

namespace tfsl {

// Layout (little-endian):
//   "TFSLCKPT" | u32 format_version | u64 n | n bytes of JSON metadata |
//   u32 tensor count | per tensor: u32 name length, name, u32 rows, u32 cols,
//   rows*cols f64 (column-major) | u64 FNV-1a of all preceding bytes.
inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

std::vector<std::uint8_t> serialize_checkpoint(const Model& model);
Model deserialize_checkpoint(std::span<const std::uint8_t> bytes);

// Content id of a serialized checkpoint (hex of its trailing checksum).
std::string checkpoint_id(std::span<const std::uint8_t> bytes);

// Returns the checkpoint id.
std::string save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace tfsl

#endif  // TFSL_CHECKPOINT_H_
