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
#ifndef TFSL_TRAINER_H_
#define TFSL_TRAINER_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "tfsl/losses.h"
#include "tfsl/model.h"
#include "tfsl/nn/adam.h"
#include "tfsl/triplets.h"

namespace tfsl {

// Pixels by image id.
class ImageStore {
 public:
  ImageStore() = default;
  explicit ImageStore(std::span<const ImageRecord> records);

  void add(const std::string& id, Image pixels);
  bool contains(const std::string& id) const { return images_.count(id) > 0; }
  // Throws Error(kNotFound).
  const Image& get(const std::string& id) const;
  std::size_t size() const { return images_.size(); }

 private:
  std::unordered_map<std::string, Image> images_;
};

struct TrainConfig {
  int epochs = 5;
  double learning_rate = 1e-4;
  double weight_decay = 1e-5;
  double margin = 1.0;
  LossKind loss_kind = LossKind::kMarginRanking;
  int batch_size = 16;
  std::uint64_t seed = 0;
  bool backbone_trainable = true;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  // Throws Error(kConfig).
  void validate() const;
  nn::AdamConfig adam() const;
  // Hex digest of the canonical JSON form.
  std::string fingerprint() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

void to_json(nlohmann::json& j, const TrainConfig& cfg);
// Missing keys keep their defaults, so partial override documents parse.
void from_json(const nlohmann::json& j, TrainConfig& cfg);

struct TrainedEmbeddingModel {
  Model model;
  TrainConfig config;
  // Mean per-triplet loss of each epoch; length == config.epochs.
  std::vector<double> loss_trace;
  long optimizer_steps = 0;
  double wall_seconds = 0.0;
};

// Per-pathology triplet training: every batch embeds anchor, TP and TN,
// scores x1 = d(anchor, tp) and x2 = d(anchor, tn) with the configured loss
// (batch mean) and takes one Adam step. Throws Error(kEmptyInput) for no
// triplets, Error(kInvalidArgument) for mixed pathologies and
// Error(kNonFinite) if a loss is not finite.
TrainedEmbeddingModel train_tfsl(const Model& embedding_model, std::span<const ImageTriplet> triplets,
                                 const ImageStore& images, const TrainConfig& cfg);

// Same loop over triplets pooled across pathologies.
TrainedEmbeddingModel train_incremental(const Model& embedding_model,
                                        std::span<const ImageTriplet> triplets,
                                        const ImageStore& images, const TrainConfig& cfg);

struct ClassifierTrainConfig {
  int epochs = 24;
  double learning_rate = 1e-3;
  double weight_decay = 0.0;
  int batch_size = 16;
  std::uint64_t seed = 0;
};

void to_json(nlohmann::json& j, const ClassifierTrainConfig& cfg);

// Trains backbone + classifier head with binary cross-entropy over all 14
// outputs. Returns the per-epoch mean loss.
std::vector<double> pretrain_classifier(Model& model, std::span<const ImageRecord> records,
                                        const ClassifierTrainConfig& cfg);

// Subtracts bias_shift from every classifier logit, producing a
// conservative (false-negative heavy) baseline.
void weaken_classifier(Model& model, double bias_shift);

// Lowers each pathology's bias so that roughly `recall` of the calibration
// positives stay at or above the 0.5 threshold. Pathologies without
// calibration positives are left alone. Returns the shift per pathology.
std::array<double, kPathologyCount> weaken_to_recall(Model& model, std::span<const ImageRecord> calibration,
                                                     double recall);

// Fresh classifier with seeded parameters.
Model make_classifier(const BackboneConfig& backbone, const PreprocessConfig& preprocess,
                      std::uint64_t seed);

}  // namespace tfsl

#endif  // TFSL_TRAINER_H_
