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
#include "tfsl/repair.h"

#include <algorithm>

#include "tfsl/checkpoint.h"
#include "tfsl/error.h"
#include "tfsl/hash.h"

namespace tfsl {

std::string_view to_string(TrainMode mode) {
  return mode == TrainMode::kTfsl ? "tfsl" : "incremental";
}

TrainMode parse_train_mode(std::string_view text) {
  if (text == "tfsl") return TrainMode::kTfsl;
  if (text == "incremental") return TrainMode::kIncremental;
  throw Error(ErrorCode::kInvalidArgument, "unknown train mode: " + std::string(text));
}

TripletBuild build_triplet_sets(const ConfusionPartition& partition,
                                std::span<const PathologyId> pathologies,
                                const TripletDatasetConfig& cfg) {
  TripletBuild build;
  for (PathologyId p : pathologies) {
    std::vector<ImageTriplet> train;
    try {
      train = build_training_triplets(partition, p, cfg);
    } catch (const Error& e) {
      if (pathologies.size() == 1 ||
          (e.code() != ErrorCode::kEmptyInput && e.code() != ErrorCode::kUnsatisfiableTriplet)) {
        throw;
      }
      build.skipped.emplace_back(std::string(p.name()), e.what());
      continue;
    }
    const auto anchors = anchor_ids(train);
    auto val = build_validation_triplets(partition, p, anchors, cfg);
    build.sets.train.insert(build.sets.train.end(), train.begin(), train.end());
    build.sets.val.insert(build.sets.val.end(), val.begin(), val.end());
  }
  return build;
}

TripletSets triplets_for(const TripletSets& sets, PathologyId pathology) {
  TripletSets out;
  for (const auto& t : sets.train) {
    if (t.pathology == pathology) out.train.push_back(t);
  }
  for (const auto& t : sets.val) {
    if (t.pathology == pathology) out.val.push_back(t);
  }
  return out;
}

std::vector<PathologyId> pathologies_in(const TripletSets& sets) {
  std::vector<PathologyId> out;
  for (const auto& t : sets.train) {
    if (std::find(out.begin(), out.end(), t.pathology) == out.end()) out.push_back(t.pathology);
  }
  std::sort(out.begin(), out.end());
  return out;
}

RepairEvaluation start_evaluation(const ConfusionPartition& baseline) {
  return {baseline, baseline, {}};
}

void evaluate_repair(const Model& trained, const ConfusionPartition& baseline,
                     const TripletSets& triplets, std::span<const PathologyId> pathologies,
                     std::size_t support_size, std::uint64_t seed, const ImageStore& images,
                     RepairEvaluation& evaluation) {
  for (PathologyId p : pathologies) {
    const TripletSets mine = triplets_for(triplets, p);
    const auto train_anchors = anchor_ids(mine.train);
    const auto val_anchors = anchor_ids(mine.val);

    PrototypeSet prototypes = compute_prototypes(trained, baseline, p, support_size, seed, images);
    ConfusionPartition after = reclassify_failures(trained, baseline, p, prototypes, val_anchors,
                                                   train_anchors, images);
    evaluation.before[p] = baseline[p];
    evaluation.before.exclude(p, train_anchors);
    evaluation.after[p] = after[p];
    evaluation.prototypes.push_back(std::move(prototypes));
  }
}

std::string model_label(TrainMode mode, std::span<const RepairedModel> models) {
  std::string label(to_string(mode));
  for (const auto& m : models) {
    label += ":";
    for (std::size_t i = 0; i < m.pathologies.size(); ++i) {
      if (i) label += "+";
      label += "P" + std::to_string(m.pathologies[i].index());
    }
  }
  return label;
}

std::vector<RepairedModel> train_repair(const Model& baseline, const TripletSets& triplets,
                                        const ImageStore& images, TrainMode mode,
                                        const TrainConfig& cfg) {
  cfg.validate();
  const auto trained_on = pathologies_in(triplets);
  if (trained_on.empty()) throw Error(ErrorCode::kEmptyInput, "no pathology produced training triplets");
  const Model initial = swap_embedding_head(baseline, cfg.seed);

  std::vector<RepairedModel> models;
  auto finish_model = [&](std::vector<PathologyId> ps, TrainedEmbeddingModel trained) {
    const std::string id = checkpoint_id(serialize_checkpoint(trained.model));
    models.push_back({std::move(ps), std::move(trained), id});
  };
  if (mode == TrainMode::kTfsl) {
    for (PathologyId p : trained_on) {
      const TripletSets mine = triplets_for(triplets, p);
      finish_model({p}, train_tfsl(initial, mine.train, images, cfg));
    }
  } else {
    finish_model(trained_on, train_incremental(initial, triplets.train, images, cfg));
  }
  return models;
}

RepairReports evaluate_models(std::span<const RepairedModel> models, TrainMode mode,
                              const ConfusionPartition& baseline_partition, const TripletSets& triplets,
                              std::size_t support_size, std::uint64_t seed, const ImageStore& images,
                              const ReportProvenance& baseline_provenance) {
  if (models.empty()) throw Error(ErrorCode::kEmptyInput, "no repaired models to evaluate");
  RepairEvaluation evaluation = start_evaluation(baseline_partition);
  Fnv1a ids;
  for (const auto& m : models) {
    evaluate_repair(m.trained.model, baseline_partition, triplets, m.pathologies, support_size, seed, images,
                    evaluation);
    ids.update(m.checkpoint_id);
  }
  ReportProvenance after_prov = baseline_provenance;
  after_prov.model = model_label(mode, models);
  after_prov.checkpoint_id = models.size() == 1 ? models.front().checkpoint_id : ids.hex();
  RepairReports out;
  out.before = build_report(evaluation.before, baseline_provenance);
  out.after = build_report(evaluation.after, after_prov);
  out.comparison = compare_reports(out.before, out.after);
  return out;
}

RepairOutcome run_repair(const Model& baseline, const ConfusionPartition& baseline_partition,
                         std::span<const PathologyId> pathologies, const ImageStore& images,
                         const RepairOptions& options, const ReportProvenance& baseline_provenance) {
  options.train.validate();
  RepairOutcome out;
  out.triplets = build_triplet_sets(baseline_partition, pathologies, options.triplets);
  out.models = train_repair(baseline, out.triplets.sets, images, options.mode, options.train);
  RepairReports reports = evaluate_models(out.models, options.mode, baseline_partition, out.triplets.sets,
                                          options.support_size, options.train.seed, images,
                                          baseline_provenance);
  out.before = std::move(reports.before);
  out.after = std::move(reports.after);
  out.comparison = std::move(reports.comparison);
  return out;
}

}  // namespace tfsl
