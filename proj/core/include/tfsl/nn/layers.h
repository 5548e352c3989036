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
#ifndef TFSL_NN_LAYERS_H_
#define TFSL_NN_LAYERS_H_

#include <string>
#include <vector>

#include <Eigen/Core>

#include "tfsl/random.h"

namespace tfsl::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)), value(Matrix::Zero(rows, cols)), grad(Matrix::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(); }
};

// Feature maps are (channels, height * width) with pixel index y * width + x.
struct FeatureMap {
  Matrix data;
  int height = 0;
  int width = 0;
};

// Unfolds 3x3 neighbourhoods (zero padded) into rows c * 9 + ky * 3 + kx.
Matrix im2col3x3(const FeatureMap& input);
// Adjoint of im2col3x3: scatters column gradients back to a feature map.
Matrix col2im3x3(const Matrix& cols, int channels, int height, int width);

// Same-padding, stride-1 3x3 convolution.
class Conv3x3 {
 public:
  Conv3x3() = default;
  Conv3x3(int in_channels, int out_channels, const std::string& name);

  // He-normal weights, zero bias.
  void init(Rng& rng);

  // `cols` receives the unfolded input needed by backward.
  FeatureMap forward(const FeatureMap& input, Matrix& cols) const;
  // Accumulates parameter gradients and returns the input gradient.
  Matrix backward(const Matrix& cols, const Matrix& grad_out, int height, int width,
                  bool need_input_grad);

  int in_channels() const { return in_channels_; }
  int out_channels() const { return out_channels_; }

  Parameter weight;  // (out, in * 9)
  Parameter bias;    // (out, 1)

 private:
  int in_channels_ = 0;
  int out_channels_ = 0;
};

// 2x2 max pooling with stride 2 (floor on odd sizes). `argmax` stores the
// flat input index picked for each output element.
FeatureMap max_pool2(const FeatureMap& input, std::vector<Eigen::Index>& argmax);
Matrix max_pool2_backward(const Matrix& grad_out, const std::vector<Eigen::Index>& argmax,
                          Eigen::Index rows, Eigen::Index cols);

inline double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

inline double prelu(double x, double slope) { return x > 0 ? x : slope * x; }

}  // namespace tfsl::nn

#endif  // TFSL_NN_LAYERS_H_
