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
#ifndef TFSL_DATA_INGEST_H_
#define TFSL_DATA_INGEST_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tfsl/image.h"
#include "tfsl/pathology.h"

namespace tfsl {

enum class Label : std::uint8_t { kNegative, kPositive, kUncertain };

using LabelVector = std::array<Label, kPathologyCount>;

// How CheXpert's -1 (uncertain) annotations enter the binary ground truth.
enum class UncertainPolicy { kTreatAsNegative, kTreatAsPositive };

UncertainPolicy parse_uncertain_policy(std::string_view text);
std::string_view to_string(UncertainPolicy policy);

struct PreprocessConfig {
  int resize_to = 320;
  int crop_to = 224;
  // Only center cropping is supported.
  std::string crop_mode = "center";
  // Optional per-channel standardization applied after scaling to [0,1].
  bool normalize = false;
  std::array<float, 3> mean = {0.485f, 0.456f, 0.406f};
  std::array<float, 3> stddev = {0.229f, 0.224f, 0.225f};

  // Throws Error(kConfig) when crop_to > resize_to or sizes are not positive.
  void validate() const;

  friend bool operator==(const PreprocessConfig&, const PreprocessConfig&) = default;
};

void to_json(nlohmann::json& j, const PreprocessConfig& cfg);
void from_json(const nlohmann::json& j, PreprocessConfig& cfg);

struct ImageRecord {
  std::string image_id;
  std::string source;
  LabelVector labels{};
  Image pixels;

  bool positive(PathologyId p) const { return labels[p.index()] == Label::kPositive; }
};

// Parses a CheXpert-format CSV manifest. The image id is the Path cell
// verbatim; the source is that path resolved against the manifest's
// directory. Pixels are left empty (see load_images).
std::vector<ImageRecord> load_manifest(const std::filesystem::path& path,
                                       UncertainPolicy policy = UncertainPolicy::kTreatAsNegative);

// Writes records as a CheXpert-format manifest (Path + 14 label columns).
void write_manifest(const std::filesystem::path& path, std::span<const ImageRecord> records);

// Decode, convert to RGB, resize to resize_to x resize_to, center crop to
// crop_to, scale to [0,1] and optionally standardize.
Image preprocess_image(std::span<const std::uint8_t> raw, const PreprocessConfig& cfg);

// Same pipeline applied to an already decoded image.
Image preprocess_image(const Image& decoded, const PreprocessConfig& cfg);

// Reads and preprocesses the pixels of every record from its source path.
void load_images(std::span<ImageRecord> records, const PreprocessConfig& cfg);

struct SplitFractions {
  double train = 0.3;
  double eval = 0.7;
};

struct DatasetSplit {
  std::string split_id;
  std::vector<std::string> train_ids;
  std::vector<std::string> eval_ids;
};

void to_json(nlohmann::json& j, const DatasetSplit& split);
void from_json(const nlohmann::json& j, DatasetSplit& split);

// Deterministic, input-order independent split: ids are sorted, shuffled
// under the seed, and cut at round(train * n). Each side is returned in
// sorted id order.
DatasetSplit split_dataset(std::span<const ImageRecord> records, SplitFractions fractions,
                           std::uint64_t seed);

// Records whose ids appear in `ids`, in the order of `ids`.
std::vector<ImageRecord> select_records(std::span<const ImageRecord> records,
                                        std::span<const std::string> ids);

}  // namespace tfsl

#endif  // TFSL_DATA_INGEST_H_
