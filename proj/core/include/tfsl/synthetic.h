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
#ifndef TFSL_SYNTHETIC_H_
#define TFSL_SYNTHETIC_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "tfsl/data_ingest.h"

namespace tfsl {

// Desk-scale stand-in for a radiograph corpus: grayscale images with a smooth
// background, additive noise, and one bright Gaussian marker per positive
// pathology at a pathology-specific location.
struct SyntheticSpec {
  int image_size = 64;
  int n_pathologies = 2;
  double prevalence = 0.5;
  double noise_sigma = 0.05;
  double marker_amplitude = 0.5;
  // Markers are drawn with amplitude scaled uniformly in [1 - jitter, 1].
  double amplitude_jitter = 0.5;
  double marker_sigma = 3.0;
  std::uint64_t seed = 0;

  void validate() const;

  friend bool operator==(const SyntheticSpec&, const SyntheticSpec&) = default;
};

void to_json(nlohmann::json& j, const SyntheticSpec& spec);
void from_json(const nlohmann::json& j, SyntheticSpec& spec);

// Center of pathology k's marker, in pixels (x, y).
std::pair<double, double> marker_center(const SyntheticSpec& spec, int pathology);

// Pure function of (spec, n_images). Image ids are "images/syn_NNNNNN.png",
// the path each image gets when written by write_synthetic_dataset.
std::vector<ImageRecord> generate_synthetic_dataset(const SyntheticSpec& spec, std::size_t n_images);

// Writes PNGs, manifest.csv and synthetic_spec.json under dir.
void write_synthetic_dataset(const std::filesystem::path& dir, const SyntheticSpec& spec,
                             std::span<const ImageRecord> records);

}  // namespace tfsl

#endif  // TFSL_SYNTHETIC_H_
