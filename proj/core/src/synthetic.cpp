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
#include "tfsl/synthetic.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "tfsl/error.h"
#include "tfsl/random.h"

namespace tfsl {

void SyntheticSpec::validate() const {
  if (image_size < 8) throw Error(ErrorCode::kConfig, "synthetic image_size must be >= 8");
  if (n_pathologies < 1 || n_pathologies > static_cast<int>(kPathologyCount)) {
    throw Error(ErrorCode::kConfig, "synthetic n_pathologies must be in [1, 14]");
  }
  if (!(prevalence >= 0.0 && prevalence <= 1.0)) {
    throw Error(ErrorCode::kConfig, "synthetic prevalence must be in [0, 1]");
  }
  if (noise_sigma < 0 || marker_amplitude <= 0 || marker_sigma <= 0 || amplitude_jitter < 0 ||
      amplitude_jitter > 1) {
    throw Error(ErrorCode::kConfig, "invalid synthetic marker/noise parameters");
  }
}

void to_json(nlohmann::json& j, const SyntheticSpec& spec) {
  j = {{"image_size", spec.image_size},
       {"n_pathologies", spec.n_pathologies},
       {"prevalence", spec.prevalence},
       {"noise_sigma", spec.noise_sigma},
       {"marker_amplitude", spec.marker_amplitude},
       {"amplitude_jitter", spec.amplitude_jitter},
       {"marker_sigma", spec.marker_sigma},
       {"seed", spec.seed}};
}

void from_json(const nlohmann::json& j, SyntheticSpec& spec) {
  SyntheticSpec d;
  spec.image_size = j.value("image_size", d.image_size);
  spec.n_pathologies = j.value("n_pathologies", d.n_pathologies);
  spec.prevalence = j.value("prevalence", d.prevalence);
  spec.noise_sigma = j.value("noise_sigma", d.noise_sigma);
  spec.marker_amplitude = j.value("marker_amplitude", d.marker_amplitude);
  spec.amplitude_jitter = j.value("amplitude_jitter", d.amplitude_jitter);
  spec.marker_sigma = j.value("marker_sigma", d.marker_sigma);
  spec.seed = j.value("seed", d.seed);
}

std::pair<double, double> marker_center(const SyntheticSpec& spec, int pathology) {
  const double c = (spec.image_size - 1) / 2.0;
  const double r = 0.28 * spec.image_size;
  const double angle = 2.0 * std::numbers::pi * pathology / spec.n_pathologies + 0.25 * std::numbers::pi;
  return {c + r * std::cos(angle), c + r * std::sin(angle)};
}

std::vector<ImageRecord> generate_synthetic_dataset(const SyntheticSpec& spec, std::size_t n_images) {
  spec.validate();
  if (n_images == 0) throw Error(ErrorCode::kInvalidArgument, "n_images must be positive");

  const int size = spec.image_size;
  std::vector<ImageRecord> records(n_images);
  for (std::size_t i = 0; i < n_images; ++i) {
    Rng rng(derive_seed(spec.seed, i));
    ImageRecord& rec = records[i];
    char name[64];
    std::snprintf(name, sizeof(name), "images/syn_%06zu.png", i);
    rec.image_id = name;
    rec.source = "synthetic:" + std::to_string(spec.seed) + ":" + std::to_string(i);
    rec.labels.fill(Label::kNegative);

    Image gray(1, size, size);
    const double tilt = rng.uniform(-0.05, 0.05);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        double v = 0.25 + 0.15 * y / size + tilt * (x - size / 2.0) / size;
        gray.at(0, y, x) = static_cast<float>(v);
      }
    }
    for (int p = 0; p < spec.n_pathologies; ++p) {
      const bool positive = rng.uniform() < spec.prevalence;
      const double amplitude =
          spec.marker_amplitude * (1.0 - spec.amplitude_jitter * rng.uniform());
      const double jx = rng.uniform(-1.5, 1.5);
      const double jy = rng.uniform(-1.5, 1.5);
      if (!positive) continue;
      rec.labels[p] = Label::kPositive;
      auto [cx, cy] = marker_center(spec, p);
      cx += jx;
      cy += jy;
      const double two_s2 = 2.0 * spec.marker_sigma * spec.marker_sigma;
      for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
          const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
          gray.at(0, y, x) += static_cast<float>(amplitude * std::exp(-d2 / two_s2));
        }
      }
    }
    if (spec.noise_sigma > 0) {
      for (float& v : gray.data) v += static_cast<float>(spec.noise_sigma * rng.normal());
    }
    quantize_8bit(gray);

    rec.pixels = Image(3, size, size);
    for (int c = 0; c < 3; ++c) {
      std::copy(gray.data.begin(), gray.data.end(),
                rec.pixels.data.begin() + static_cast<std::ptrdiff_t>(c) * size * size);
    }
  }
  return records;
}

void write_synthetic_dataset(const std::filesystem::path& dir, const SyntheticSpec& spec,
                             std::span<const ImageRecord> records) {
  std::filesystem::create_directories(dir / "images");
  for (const auto& rec : records) {
    Image gray(1, rec.pixels.height, rec.pixels.width);
    std::copy(rec.pixels.data.begin(), rec.pixels.data.begin() + gray.data.size(), gray.data.begin());
    const auto bytes = encode_png(gray);
    std::ofstream out(dir / rec.image_id, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / rec.image_id).string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  write_manifest(dir / "manifest.csv", records);
  std::ofstream js(dir / "synthetic_spec.json");
  js << nlohmann::json(spec).dump(2) << '\n';
}

}  // namespace tfsl
