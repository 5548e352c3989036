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
#ifndef TFSL_REPAIR_H_
#define TFSL_REPAIR_H_

#include <optional>
#include <string>
#include <vector>

#include "tfsl/inference_eval.h"
#include "tfsl/prototypes.h"
#include "tfsl/stats.h"
#include "tfsl/trainer.h"
#include "tfsl/triplets.h"

namespace tfsl {

enum class TrainMode { kTfsl, kIncremental };

std::string_view to_string(TrainMode mode);
TrainMode parse_train_mode(std::string_view text);

// Training and validation triplets for several pathologies. Pathologies with
// no failures or an empty reference pool are listed in `skipped` with the
// reason instead of failing the whole build.
struct TripletBuild {
  TripletSets sets;
  std::vector<std::pair<std::string, std::string>> skipped;
};

TripletBuild build_triplet_sets(const ConfusionPartition& partition,
                                std::span<const PathologyId> pathologies,
                                const TripletDatasetConfig& cfg);

// Triplets of one pathology from a mixed set.
TripletSets triplets_for(const TripletSets& sets, PathologyId pathology);
std::vector<PathologyId> pathologies_in(const TripletSets& sets);

// Evaluation population and outcome for one repaired model: training
// anchors are removed from `before`, and `after` is `before` with
// every validation anchor re-decided by prototype distance.
struct RepairEvaluation {
  ConfusionPartition before;
  ConfusionPartition after;
  std::vector<PrototypeSet> prototypes;
};

// Both sides start as the baseline partition.
RepairEvaluation start_evaluation(const ConfusionPartition& baseline);

// Applies one trained model to the listed pathologies, updating their cells
// in evaluation.before and evaluation.after. Other pathologies are left as
// they are. Prototype supports come from the baseline TP/TN cells.
void evaluate_repair(const Model& trained, const ConfusionPartition& baseline,
                     const TripletSets& triplets, std::span<const PathologyId> pathologies,
                     std::size_t support_size, std::uint64_t seed, const ImageStore& images,
                     RepairEvaluation& evaluation);

struct RepairOptions {
  TrainMode mode = TrainMode::kTfsl;
  TrainConfig train;
  TripletDatasetConfig triplets;
  std::size_t support_size = 64;
};

struct RepairedModel {
  std::vector<PathologyId> pathologies;
  TrainedEmbeddingModel trained;
  std::string checkpoint_id;
};

struct RepairOutcome {
  TripletBuild triplets;
  std::vector<RepairedModel> models;
  MetricsReport before;
  MetricsReport after;
  ReportComparison comparison;
};

// Trains one model per pathology (TFSL) or one pooled model (incremental),
// all starting from the same freshly swapped embedding head.
std::vector<RepairedModel> train_repair(const Model& baseline, const TripletSets& triplets,
                                        const ImageStore& images, TrainMode mode,
                                        const TrainConfig& cfg);

struct RepairReports {
  MetricsReport before;
  MetricsReport after;
  ReportComparison comparison;
};

// Prototype reclassification of the validation anchors with each model,
// then before/after reports and their comparison.
RepairReports evaluate_models(std::span<const RepairedModel> models, TrainMode mode,
                              const ConfusionPartition& baseline_partition, const TripletSets& triplets,
                              std::size_t support_size, std::uint64_t seed, const ImageStore& images,
                              const ReportProvenance& baseline_provenance);

// Triplet build -> training -> prototype reclassification -> comparison.
// TFSL mode trains one model per pathology; incremental mode trains one
// model on the pooled triplets. Throws Error(kEmptyInput) when no pathology
// yields training triplets.
RepairOutcome run_repair(const Model& baseline, const ConfusionPartition& baseline_partition,
                         std::span<const PathologyId> pathologies, const ImageStore& images,
                         const RepairOptions& options, const ReportProvenance& baseline_provenance);

// "tfsl:<hash>" style label for a set of repaired models.
std::string model_label(TrainMode mode, std::span<const RepairedModel> models);

}  // namespace tfsl

#endif  // TFSL_REPAIR_H_
