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
#ifndef TFSL_PROTOTYPES_H_
#define TFSL_PROTOTYPES_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tfsl/inference_eval.h"
#include "tfsl/model.h"
#include "tfsl/trainer.h"

namespace tfsl {

// Mean embeddings of baseline-correct TP and TN support images.
struct PrototypeSet {
  PathologyId pathology{0};
  Vector tp_prototype;
  Vector tn_prototype;
  std::vector<std::string> tp_support;
  std::vector<std::string> tn_support;
};

// Samples up to support_size ids from each of the TP and TN cells (all of
// them when fewer) and averages their embeddings. Throws
// Error(kUnsatisfiableTriplet) when a pool is empty.
PrototypeSet compute_prototypes(const Model& model, const ConfusionPartition& partition,
                                PathologyId pathology, std::size_t support_size, std::uint64_t seed,
                                const ImageStore& images);

// true (positive) iff the embedding is strictly closer to the TP prototype.
bool decide_by_prototype(const Vector& embedding, const PrototypeSet& prototypes);

bool classify_by_prototype(const Model& model, const Image& anchor, const PrototypeSet& prototypes);

// Re-decides each validation anchor against its ground truth and moves it to
// the resulting cell. Training anchors are dropped from the pathology's
// cells; every other record is untouched. Throws Error(kInvalidArgument) if
// a validation anchor is not a failure.
ConfusionPartition reclassify_failures(const Model& model, const ConfusionPartition& partition,
                                       PathologyId pathology, const PrototypeSet& prototypes,
                                       std::span<const std::string> validation_anchors,
                                       std::span<const std::string> training_anchors,
                                       const ImageStore& images);

}  // namespace tfsl

#endif  // TFSL_PROTOTYPES_H_
