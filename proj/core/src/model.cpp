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
#include "tfsl/model.h"

#include <cmath>

#include "tfsl/error.h"
#include "tfsl/random.h"

namespace tfsl {

void to_json(nlohmann::json& j, const BackboneConfig& cfg) {
  j = {{"input_channels", cfg.input_channels}, {"channels", cfg.channels}};
}

void from_json(const nlohmann::json& j, BackboneConfig& cfg) {
  cfg.input_channels = j.at("input_channels").get<int>();
  cfg.channels = j.at("channels").get<std::vector<int>>();
}

ConvBackbone::ConvBackbone(BackboneConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.channels.empty() || cfg_.input_channels <= 0) {
    throw Error(ErrorCode::kConfig, "backbone needs at least one block");
  }
  int in = cfg_.input_channels;
  for (std::size_t i = 0; i < cfg_.channels.size(); ++i) {
    if (cfg_.channels[i] <= 0) throw Error(ErrorCode::kConfig, "block channels must be positive");
    convs_.emplace_back(in, cfg_.channels[i], "backbone.block" + std::to_string(i));
    in = cfg_.channels[i];
  }
}

void ConvBackbone::init(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0xBAC));
  for (auto& conv : convs_) conv.init(rng);
}

Vector ConvBackbone::forward(const Image& image, Trace* trace) const {
  if (image.channels != cfg_.input_channels) {
    throw Error(ErrorCode::kDimensionMismatch,
                "backbone expects " + std::to_string(cfg_.input_channels) + " channels, got " +
                    std::to_string(image.channels));
  }
  if (!image.all_finite()) throw Error(ErrorCode::kNonFinite, "non-finite input pixels");

  nn::FeatureMap map;
  map.height = image.height;
  map.width = image.width;
  map.data.resize(image.channels, static_cast<Eigen::Index>(image.height) * image.width);
  for (int c = 0; c < image.channels; ++c) {
    for (Eigen::Index i = 0; i < map.data.cols(); ++i) {
      map.data(c, i) = image.data[static_cast<std::size_t>(c * map.data.cols() + i)];
    }
  }

  if (trace) trace->blocks.assign(convs_.size(), {});
  Matrix scratch_cols;
  std::vector<Eigen::Index> scratch_argmax;
  for (std::size_t b = 0; b < convs_.size(); ++b) {
    if (map.height < 2 || map.width < 2) {
      throw Error(ErrorCode::kDimensionMismatch, "input too small for backbone depth");
    }
    Matrix& cols = trace ? trace->blocks[b].cols : scratch_cols;
    nn::FeatureMap conv = convs_[b].forward(map, cols);
    conv.data = conv.data.cwiseMax(0.0);
    std::vector<Eigen::Index>& argmax = trace ? trace->blocks[b].argmax : scratch_argmax;
    nn::FeatureMap pooled = nn::max_pool2(conv, argmax);
    if (trace) {
      trace->blocks[b].height = conv.height;
      trace->blocks[b].width = conv.width;
      trace->blocks[b].activated = std::move(conv.data);
    }
    map = std::move(pooled);
  }
  if (trace) {
    trace->out_height = map.height;
    trace->out_width = map.width;
  }
  return map.data.rowwise().mean();
}

void ConvBackbone::backward(const Trace& trace, const Vector& grad_features) {
  const Eigen::Index spatial = static_cast<Eigen::Index>(trace.out_height) * trace.out_width;
  Matrix grad = grad_features.replicate(1, spatial) / static_cast<double>(spatial);
  for (std::size_t b = convs_.size(); b-- > 0;) {
    const auto& bt = trace.blocks[b];
    Matrix grad_act = nn::max_pool2_backward(grad, bt.argmax, bt.activated.rows(), bt.activated.cols());
    grad_act = (bt.activated.array() > 0.0).select(grad_act, 0.0);
    grad = convs_[b].backward(bt.cols, grad_act, bt.height, bt.width, b > 0);
  }
}

std::vector<Parameter*> ConvBackbone::parameters() {
  std::vector<Parameter*> out;
  for (auto& conv : convs_) {
    out.push_back(&conv.weight);
    out.push_back(&conv.bias);
  }
  return out;
}

std::vector<const Parameter*> ConvBackbone::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& conv : convs_) {
    out.push_back(&conv.weight);
    out.push_back(&conv.bias);
  }
  return out;
}

ClassifierHead::ClassifierHead(int feature_dim)
    : weight("classifier.weight", kPathologyCount, feature_dim),
      bias("classifier.bias", kPathologyCount, 1) {}

void ClassifierHead::init(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0xC1A));
  const double bound = input_dim() > 0 ? 1.0 / std::sqrt(input_dim()) : 0.0;
  for (Eigen::Index i = 0; i < weight.value.size(); ++i) weight.value.data()[i] = rng.uniform(-bound, bound);
  for (Eigen::Index i = 0; i < bias.value.size(); ++i) bias.value.data()[i] = rng.uniform(-bound, bound);
}

Vector ClassifierHead::logits(const Vector& features) const {
  return weight.value * features + bias.value.col(0);
}

Vector ClassifierHead::probabilities(const Vector& features) const {
  return logits(features).unaryExpr([](double z) { return nn::sigmoid(z); });
}

Vector ClassifierHead::backward(const Vector& features, const Vector& grad_logits) {
  weight.grad.noalias() += grad_logits * features.transpose();
  bias.grad.col(0) += grad_logits;
  return weight.value.transpose() * grad_logits;
}

EmbeddingHead::EmbeddingHead(int feature_dim)
    : weight("embedding.weight", kEmbeddingDim, feature_dim),
      bias("embedding.bias", kEmbeddingDim, 1),
      slope("embedding.prelu_slope", 1, 1) {
  slope.value(0, 0) = kInitialSlope;
}

void EmbeddingHead::init(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0xE3B));
  const auto fan_in = weight.value.cols();
  const double bound = fan_in > 0 ? 1.0 / std::sqrt(static_cast<double>(fan_in)) : 0.0;
  for (Eigen::Index i = 0; i < weight.value.size(); ++i) weight.value.data()[i] = rng.uniform(-bound, bound);
  for (Eigen::Index i = 0; i < bias.value.size(); ++i) bias.value.data()[i] = rng.uniform(-bound, bound);
  slope.value(0, 0) = kInitialSlope;
}

Vector EmbeddingHead::forward(const Vector& features, Vector* pre_activation) const {
  Vector z = weight.value * features + bias.value.col(0);
  const double a = slope.value(0, 0);
  Vector out = z.unaryExpr([a](double x) { return nn::prelu(x, a); });
  if (pre_activation) *pre_activation = std::move(z);
  if (out.size() != kEmbeddingDim) {
    throw Error(ErrorCode::kDimensionMismatch, "embedding must have 128 dimensions");
  }
  return out;
}

Vector EmbeddingHead::backward(const Vector& features, const Vector& z, const Vector& grad_out) {
  const double a = slope.value(0, 0);
  Vector grad_z(z.size());
  double grad_slope = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (z[i] > 0) {
      grad_z[i] = grad_out[i];
    } else {
      grad_z[i] = a * grad_out[i];
      grad_slope += z[i] * grad_out[i];
    }
  }
  slope.grad(0, 0) += grad_slope;
  weight.grad.noalias() += grad_z * features.transpose();
  bias.grad.col(0) += grad_z;
  return weight.value.transpose() * grad_z;
}

std::vector<Parameter*> Model::parameters() {
  auto out = backbone.parameters();
  out.push_back(&classifier.weight);
  out.push_back(&classifier.bias);
  if (embedding) {
    out.push_back(&embedding->weight);
    out.push_back(&embedding->bias);
    out.push_back(&embedding->slope);
  }
  return out;
}

std::vector<const Parameter*> Model::parameters() const {
  auto out = backbone.parameters();
  out.push_back(&classifier.weight);
  out.push_back(&classifier.bias);
  if (embedding) {
    out.push_back(&embedding->weight);
    out.push_back(&embedding->bias);
    out.push_back(&embedding->slope);
  }
  return out;
}

std::vector<Parameter*> Model::embedding_parameters(bool include_backbone) {
  if (!embedding) throw Error(ErrorCode::kInvalidArgument, "model has no embedding head");
  std::vector<Parameter*> out;
  if (include_backbone) out = backbone.parameters();
  out.push_back(&embedding->weight);
  out.push_back(&embedding->bias);
  out.push_back(&embedding->slope);
  return out;
}

Model build_classifier(ConvBackbone backbone, ClassifierHead head, PreprocessConfig preprocess) {
  if (head.input_dim() != backbone.feature_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "classifier head expects " + std::to_string(head.input_dim()) +
                    " features, backbone produces " + std::to_string(backbone.feature_dim()));
  }
  preprocess.validate();
  return Model{std::move(backbone), std::move(head), std::nullopt, std::move(preprocess)};
}

Model swap_embedding_head(const Model& classifier, std::uint64_t seed) {
  Model out = classifier;
  out.embedding.emplace(classifier.backbone.feature_dim());
  out.embedding->init(seed);
  out.provenance["embedding_seed"] = seed;
  return out;
}

Vector embed_image(const Model& model, const Image& pixels) {
  if (!model.embedding) throw Error(ErrorCode::kInvalidArgument, "model has no embedding head");
  Vector features = model.backbone.forward(pixels);
  return model.embedding->forward(features);
}

Classification classify_image(const Model& model, const Image& pixels, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "threshold must lie in (0, 1)");
  }
  const Vector probs = model.classifier.probabilities(model.backbone.forward(pixels));
  Classification out;
  for (std::size_t p = 0; p < kPathologyCount; ++p) {
    out.probability[p] = probs[static_cast<Eigen::Index>(p)];
    out.positive[p] = out.probability[p] >= threshold;
  }
  return out;
}

}  // namespace tfsl
