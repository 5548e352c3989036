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
#ifndef TFSL_TRIPLETS_H_
#define TFSL_TRIPLETS_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tfsl/inference_eval.h"

namespace tfsl {

// (false inference, true-positive reference, true-negative reference) for
// one pathology. checking_label is -1 for an FN anchor and +1 for an FP one.
struct ImageTriplet {
  std::string anchor_id;
  std::string tp_id;
  std::string tn_id;
  PathologyId pathology{0};
  int checking_label = 0;

  friend bool operator==(const ImageTriplet&, const ImageTriplet&) = default;
};

struct TripletDatasetConfig {
  // Anchors per pathology; every failure is used when fewer exist.
  std::size_t n_train = 150;
  std::uint64_t seed = 0;
};

// FN -> -1, FP -> +1; throws Error(kInvalidArgument) for TP/TN.
int checking_label_for(Cell cell);

// Anchors are drawn without replacement from FP ∪ FN; each triplet draws its
// TP and TN references uniformly with replacement. Throws
// Error(kUnsatisfiableTriplet) when the TP or TN pool is empty and
// Error(kEmptyInput) when there are no failures.
std::vector<ImageTriplet> build_training_triplets(const ConfusionPartition& partition,
                                                  PathologyId pathology,
                                                  const TripletDatasetConfig& cfg);

// One triplet per failure not in training_anchor_ids, in id order. Empty when
// training consumed every failure.
std::vector<ImageTriplet> build_validation_triplets(const ConfusionPartition& partition,
                                                    PathologyId pathology,
                                                    std::span<const std::string> training_anchor_ids,
                                                    const TripletDatasetConfig& cfg);

std::vector<std::string> anchor_ids(std::span<const ImageTriplet> triplets);

struct TripletSets {
  std::vector<ImageTriplet> train;
  std::vector<ImageTriplet> val;
};

// JSON-lines with keys anchor_id, tp_id, tn_id, pathology, checking_label and
// set ("train" | "val").
void write_triplets(const std::filesystem::path& path, const TripletSets& sets);
TripletSets read_triplets(const std::filesystem::path& path);

}  // namespace tfsl

#endif  // TFSL_TRIPLETS_H_
