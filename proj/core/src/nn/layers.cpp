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
#include "tfsl/nn/layers.h"

#include <cmath>

namespace tfsl::nn {

Matrix im2col3x3(const FeatureMap& input) {
  const int channels = static_cast<int>(input.data.rows());
  const int h = input.height;
  const int w = input.width;
  Matrix cols = Matrix::Zero(channels * 9, static_cast<Eigen::Index>(h) * w);
  for (int c = 0; c < channels; ++c) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const Eigen::Index row = c * 9 + ky * 3 + kx;
        for (int y = 0; y < h; ++y) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= h) continue;
          for (int x = 0; x < w; ++x) {
            const int sx = x + kx - 1;
            if (sx < 0 || sx >= w) continue;
            cols(row, static_cast<Eigen::Index>(y) * w + x) =
                input.data(c, static_cast<Eigen::Index>(sy) * w + sx);
          }
        }
      }
    }
  }
  return cols;
}

Matrix col2im3x3(const Matrix& cols, int channels, int h, int w) {
  Matrix out = Matrix::Zero(channels, static_cast<Eigen::Index>(h) * w);
  for (int c = 0; c < channels; ++c) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const Eigen::Index row = c * 9 + ky * 3 + kx;
        for (int y = 0; y < h; ++y) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= h) continue;
          for (int x = 0; x < w; ++x) {
            const int sx = x + kx - 1;
            if (sx < 0 || sx >= w) continue;
            out(c, static_cast<Eigen::Index>(sy) * w + sx) +=
                cols(row, static_cast<Eigen::Index>(y) * w + x);
          }
        }
      }
    }
  }
  return out;
}

Conv3x3::Conv3x3(int in_channels, int out_channels, const std::string& name)
    : weight(name + ".weight", out_channels, in_channels * 9),
      bias(name + ".bias", out_channels, 1),
      in_channels_(in_channels),
      out_channels_(out_channels) {}

void Conv3x3::init(Rng& rng) {
  const double stddev = std::sqrt(2.0 / (in_channels_ * 9));
  for (Eigen::Index i = 0; i < weight.value.size(); ++i) {
    weight.value.data()[i] = stddev * rng.normal();
  }
  bias.value.setZero();
}

FeatureMap Conv3x3::forward(const FeatureMap& input, Matrix& cols) const {
  cols = im2col3x3(input);
  FeatureMap out;
  out.height = input.height;
  out.width = input.width;
  out.data.noalias() = weight.value * cols;
  out.data.colwise() += bias.value.col(0);
  return out;
}

Matrix Conv3x3::backward(const Matrix& cols, const Matrix& grad_out, int height, int width,
                         bool need_input_grad) {
  weight.grad.noalias() += grad_out * cols.transpose();
  bias.grad.col(0) += grad_out.rowwise().sum();
  if (!need_input_grad) return {};
  Matrix grad_cols = weight.value.transpose() * grad_out;
  return col2im3x3(grad_cols, in_channels_, height, width);
}

FeatureMap max_pool2(const FeatureMap& input, std::vector<Eigen::Index>& argmax) {
  const int oh = input.height / 2;
  const int ow = input.width / 2;
  const Eigen::Index channels = input.data.rows();
  FeatureMap out;
  out.height = oh;
  out.width = ow;
  out.data.resize(channels, static_cast<Eigen::Index>(oh) * ow);
  argmax.resize(static_cast<std::size_t>(channels * oh * ow));
  for (Eigen::Index c = 0; c < channels; ++c) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        Eigen::Index best = static_cast<Eigen::Index>(2 * y) * input.width + 2 * x;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const Eigen::Index idx = static_cast<Eigen::Index>(2 * y + dy) * input.width + 2 * x + dx;
            if (input.data(c, idx) > input.data(c, best)) best = idx;
          }
        }
        const Eigen::Index o = static_cast<Eigen::Index>(y) * ow + x;
        out.data(c, o) = input.data(c, best);
        argmax[static_cast<std::size_t>(c * oh * ow + o)] = best;
      }
    }
  }
  return out;
}

Matrix max_pool2_backward(const Matrix& grad_out, const std::vector<Eigen::Index>& argmax,
                          Eigen::Index rows, Eigen::Index cols) {
  Matrix grad = Matrix::Zero(rows, cols);
  const Eigen::Index per_channel = grad_out.cols();
  for (Eigen::Index c = 0; c < grad_out.rows(); ++c) {
    for (Eigen::Index o = 0; o < per_channel; ++o) {
      grad(c, argmax[static_cast<std::size_t>(c * per_channel + o)]) += grad_out(c, o);
    }
  }
  return grad;
}

}  // namespace tfsl::nn
