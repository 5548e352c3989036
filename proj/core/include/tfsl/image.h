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
#ifndef TFSL_IMAGE_H_
#define TFSL_IMAGE_H_

#include <cstdint>
#include <span>
#include <vector>

namespace tfsl {

// Planar (channel, row, column) float image.
struct Image {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;

  Image() = default;
  Image(int c, int h, int w, float fill = 0.0f)
      : channels(c), height(h), width(w),
        data(static_cast<std::size_t>(c) * h * w, fill) {}

  float& at(int c, int y, int x) {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  float at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }

  bool empty() const noexcept { return data.empty(); }
  bool all_finite() const noexcept;

  friend bool operator==(const Image&, const Image&) = default;
};

// Lossless 8-bit PNG encoding of an image with values in [0,1]; values are
// rounded to the nearest 1/255 step.
std::vector<std::uint8_t> encode_png(const Image& image);

// Rounds every value to the nearest 1/255 step, matching an 8-bit round trip.
void quantize_8bit(Image& image);

}  // namespace tfsl

#endif  // TFSL_IMAGE_H_
