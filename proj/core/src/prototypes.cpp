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
#include "tfsl/prototypes.h"

#include <algorithm>

#include "tfsl/error.h"
#include "tfsl/losses.h"
#include "tfsl/random.h"

namespace tfsl {

namespace {

std::vector<std::string> sample_support(const std::set<std::string>& pool, std::size_t support_size,
                                        Rng& rng) {
  std::vector<std::string> ids(pool.begin(), pool.end());
  if (support_size > 0 && ids.size() > support_size) {
    rng.shuffle(ids);
    ids.resize(support_size);
    std::sort(ids.begin(), ids.end());
  }
  return ids;
}

Vector mean_embedding(const Model& model, const std::vector<std::string>& ids, const ImageStore& images) {
  Vector sum = Vector::Zero(kEmbeddingDim);
  for (const auto& id : ids) sum += embed_image(model, images.get(id));
  return sum / static_cast<double>(ids.size());
}

double distance(const Vector& a, const Vector& b) {
  return euclidean_distance({a.data(), static_cast<std::size_t>(a.size())},
                            {b.data(), static_cast<std::size_t>(b.size())});
}

}  // namespace

PrototypeSet compute_prototypes(const Model& model, const ConfusionPartition& partition,
                                PathologyId pathology, std::size_t support_size, std::uint64_t seed,
                                const ImageStore& images) {
  const CellSets& sets = partition[pathology];
  if (sets.tp.empty() || sets.tn.empty()) {
    throw Error(ErrorCode::kUnsatisfiableTriplet,
                "prototype support pool empty for " + std::string(pathology.name()));
  }
  Rng rng(derive_seed(seed, 0x9707 * 64 + pathology.index()));
  PrototypeSet out;
  out.pathology = pathology;
  out.tp_support = sample_support(sets.tp, support_size, rng);
  out.tn_support = sample_support(sets.tn, support_size, rng);
  out.tp_prototype = mean_embedding(model, out.tp_support, images);
  out.tn_prototype = mean_embedding(model, out.tn_support, images);
  return out;
}

bool decide_by_prototype(const Vector& embedding, const PrototypeSet& prototypes) {
  return distance(embedding, prototypes.tp_prototype) < distance(embedding, prototypes.tn_prototype);
}

bool classify_by_prototype(const Model& model, const Image& anchor, const PrototypeSet& prototypes) {
  return decide_by_prototype(embed_image(model, anchor), prototypes);
}

ConfusionPartition reclassify_failures(const Model& model, const ConfusionPartition& partition,
                                       PathologyId pathology, const PrototypeSet& prototypes,
                                       std::span<const std::string> validation_anchors,
                                       std::span<const std::string> training_anchors,
                                       const ImageStore& images) {
  ConfusionPartition out = partition;
  const CellSets& before = partition[pathology];
  for (const auto& id : validation_anchors) {
    const auto cell = before.find(id);
    if (!cell || !is_failure(*cell)) {
      throw Error(ErrorCode::kInvalidArgument,
                  id + " is not a failed inference for " + std::string(pathology.name()));
    }
  }
  out.exclude(pathology, training_anchors);
  for (const auto& id : validation_anchors) {
    const bool truth = truth_of(*before.find(id));
    const bool decision = classify_by_prototype(model, images.get(id), prototypes);
    out.move(pathology, id, cell_of(decision, truth));
  }
  return out;
}

}  // namespace tfsl
