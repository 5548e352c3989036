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
#include <fstream>

#include <gtest/gtest.h>

#include "tfsl/error.h"
#include "test_support.h"

namespace tfsl {
namespace {

TEST(SyntheticTest, SameSeedSameBytes) {
  SyntheticSpec spec;
  spec.image_size = 32;
  spec.seed = 11;
  const auto a = generate_synthetic_dataset(spec, 20);
  const auto b = generate_synthetic_dataset(spec, 20);
  ASSERT_EQ(a.size(), 20u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].image_id, b[i].image_id);
    EXPECT_EQ(a[i].labels, b[i].labels);
    EXPECT_EQ(encode_png(a[i].pixels), encode_png(b[i].pixels));
  }
  spec.seed = 12;
  const auto c = generate_synthetic_dataset(spec, 20);
  int differing = 0;
  for (std::size_t i = 0; i < a.size(); ++i) differing += a[i].pixels != c[i].pixels;
  EXPECT_GT(differing, 15);
}

TEST(SyntheticTest, PrefixIsStableUnderLargerCounts) {
  SyntheticSpec spec;
  spec.image_size = 16;
  const auto small = generate_synthetic_dataset(spec, 5);
  const auto large = generate_synthetic_dataset(spec, 50);
  for (std::size_t i = 0; i < small.size(); ++i) EXPECT_EQ(small[i].pixels, large[i].pixels);
}

TEST(SyntheticTest, NoiselessMarkerIsBrighterThanBackground) {
  SyntheticSpec spec;
  spec.image_size = 64;
  spec.noise_sigma = 0.0;
  spec.prevalence = 1.0;
  spec.n_pathologies = 2;
  spec.seed = 3;
  SyntheticSpec clean = spec;
  clean.prevalence = 0.0;
  const auto marked = generate_synthetic_dataset(spec, 4);
  const auto plain = generate_synthetic_dataset(clean, 4);
  for (std::size_t i = 0; i < marked.size(); ++i) {
    for (int p = 0; p < 2; ++p) {
      auto [cx, cy] = marker_center(spec, p);
      const int x = static_cast<int>(std::lround(cx));
      const int y = static_cast<int>(std::lround(cy));
      EXPECT_GT(marked[i].pixels.at(0, y, x), plain[i].pixels.at(0, y, x) + 0.1f);
      EXPECT_GT(marked[i].pixels.at(0, y, x), marked[i].pixels.at(0, 2, 2));
    }
  }
}

TEST(SyntheticTest, PrevalenceWithinBinomialInterval) {
  SyntheticSpec spec;
  spec.image_size = 8;
  spec.n_pathologies = 3;
  spec.prevalence = 0.5;
  spec.seed = 2024;
  const auto records = generate_synthetic_dataset(spec, 1000);
  for (int p = 0; p < 3; ++p) {
    int positives = 0;
    for (const auto& r : records) positives += r.labels[p] == Label::kPositive;
    // 99% normal approximation: 500 +- 2.576 * sqrt(250).
    EXPECT_GE(positives, 459) << "pathology " << p;
    EXPECT_LE(positives, 541) << "pathology " << p;
  }
  for (const auto& r : records) {
    for (std::size_t p = 3; p < kPathologyCount; ++p) EXPECT_EQ(r.labels[p], Label::kNegative);
  }
}

TEST(SyntheticTest, PixelsAreRgbGrayInUnitRange) {
  const auto records = testing::tiny_dataset(10, 1);
  for (const auto& r : records) {
    ASSERT_EQ(r.pixels.channels, 3);
    const std::size_t plane = r.pixels.data.size() / 3;
    for (std::size_t k = 0; k < plane; ++k) {
      EXPECT_EQ(r.pixels.data[k], r.pixels.data[plane + k]);
      EXPECT_GE(r.pixels.data[k], 0.0f);
      EXPECT_LE(r.pixels.data[k], 1.0f);
    }
  }
}

TEST(SyntheticTest, WrittenDatasetReloadsIdentically) {
  testing::TempDir dir;
  SyntheticSpec spec;
  spec.image_size = 16;
  spec.seed = 8;
  const auto records = generate_synthetic_dataset(spec, 6);
  write_synthetic_dataset(dir.path(), spec, records);

  auto loaded = load_manifest(dir / "manifest.csv");
  load_images(loaded, testing::tiny_preprocess(16));
  ASSERT_EQ(loaded.size(), records.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    EXPECT_EQ(loaded[i].labels, records[i].labels);
    ASSERT_EQ(loaded[i].pixels.data.size(), records[i].pixels.data.size());
    for (std::size_t k = 0; k < loaded[i].pixels.data.size(); ++k) {
      ASSERT_NEAR(loaded[i].pixels.data[k], records[i].pixels.data[k], 1e-6);
    }
  }
  std::ifstream in(dir / "synthetic_spec.json");
  EXPECT_EQ(nlohmann::json::parse(in).get<SyntheticSpec>(), spec);
}

TEST(SyntheticTest, RejectsBadSpecs) {
  SyntheticSpec spec;
  spec.n_pathologies = 15;
  EXPECT_THROW(spec.validate(), Error);
  spec = {};
  spec.prevalence = 1.5;
  EXPECT_THROW(generate_synthetic_dataset(spec, 3), Error);
  EXPECT_THROW(generate_synthetic_dataset(SyntheticSpec{}, 0), Error);
}

}  // namespace
}  // namespace tfsl
