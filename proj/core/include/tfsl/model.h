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
#ifndef TFSL_MODEL_H_
#define TFSL_MODEL_H_

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "tfsl/data_ingest.h"
#include "tfsl/image.h"
#include "tfsl/nn/layers.h"
#include "tfsl/pathology.h"

namespace tfsl {

inline constexpr int kEmbeddingDim = 128;

using nn::Matrix;
using nn::Parameter;
using nn::Vector;

struct BackboneConfig {
  int input_channels = 3;
  // Output channels of each conv-relu-maxpool block; the last one is the
  // feature dimension after global average pooling.
  std::vector<int> channels = {8, 16, 64};

  friend bool operator==(const BackboneConfig&, const BackboneConfig&) = default;
};

void to_json(nlohmann::json& j, const BackboneConfig& cfg);
void from_json(const nlohmann::json& j, BackboneConfig& cfg);

// Small convolutional feature extractor: N x (conv3x3 -> ReLU -> maxpool2),
// then global average pooling.
class ConvBackbone {
 public:
  struct BlockTrace {
    Matrix cols;
    Matrix activated;
    std::vector<Eigen::Index> argmax;
    int height = 0;
    int width = 0;
  };
  struct Trace {
    std::vector<BlockTrace> blocks;
    int out_height = 0;
    int out_width = 0;
  };

  explicit ConvBackbone(BackboneConfig cfg = {});

  void init(std::uint64_t seed);

  const BackboneConfig& config() const { return cfg_; }
  int feature_dim() const { return cfg_.channels.back(); }

  // Throws Error(kDimensionMismatch) on a channel mismatch and
  // Error(kNonFinite) on non-finite pixels.
  Vector forward(const Image& image, Trace* trace = nullptr) const;
  // Accumulates parameter gradients for dLoss/dFeatures.
  void backward(const Trace& trace, const Vector& grad_features);

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

 private:
  BackboneConfig cfg_;
  std::vector<nn::Conv3x3> convs_;
};

// Linear map to one logit per pathology followed by a sigmoid.
struct ClassifierHead {
  Parameter weight;  // (14, feature_dim)
  Parameter bias;    // (14, 1)

  explicit ClassifierHead(int feature_dim = 0);
  void init(std::uint64_t seed);
  int input_dim() const { return static_cast<int>(weight.value.cols()); }

  Vector logits(const Vector& features) const;
  Vector probabilities(const Vector& features) const;
  // Returns dLoss/dFeatures and accumulates parameter gradients.
  Vector backward(const Vector& features, const Vector& grad_logits);
};

// 128-unit linear layer followed by PReLU with a single learnable slope.
struct EmbeddingHead {
  Parameter weight;  // (128, feature_dim)
  Parameter bias;    // (128, 1)
  Parameter slope;   // (1, 1)

  static constexpr double kInitialSlope = 0.25;

  explicit EmbeddingHead(int feature_dim = 0);
  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases.
  void init(std::uint64_t seed);

  // `pre_activation` receives W f + b when non-null.
  Vector forward(const Vector& features, Vector* pre_activation = nullptr) const;
  Vector backward(const Vector& features, const Vector& pre_activation, const Vector& grad_out);
};

struct Model {
  ConvBackbone backbone;
  ClassifierHead classifier;
  std::optional<EmbeddingHead> embedding;
  PreprocessConfig preprocess;
  // Seeds and training settings that produced the parameters; carried
  // verbatim into checkpoints.
  nlohmann::json provenance = nlohmann::json::object();

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  std::vector<Parameter*> embedding_parameters(bool include_backbone);
};

// Throws Error(kDimensionMismatch) when head.input_dim() != feature_dim.
Model build_classifier(ConvBackbone backbone, ClassifierHead head,
                       PreprocessConfig preprocess = {});

// Adds a freshly initialised embedding head; backbone and classifier are
// copied verbatim.
Model swap_embedding_head(const Model& classifier, std::uint64_t seed);

Vector embed_image(const Model& model, const Image& pixels);

struct Classification {
  std::array<double, kPathologyCount> probability{};
  std::array<bool, kPathologyCount> positive{};
};

// positive[p] iff probability[p] >= threshold.
Classification classify_image(const Model& model, const Image& pixels, double threshold = 0.5);

}  // namespace tfsl

#endif  // TFSL_MODEL_H_
