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
#include "tfsl/triplets.h"

#include <algorithm>
#include <fstream>

#include "tfsl/error.h"
#include "tfsl/random.h"

namespace tfsl {

namespace {

constexpr std::uint64_t kTrainSalt = 0x7A11;
constexpr std::uint64_t kValSalt = 0x7A12;

struct Pools {
  std::vector<std::string> tp;
  std::vector<std::string> tn;
};

Pools reference_pools(const CellSets& sets, PathologyId pathology) {
  Pools pools{{sets.tp.begin(), sets.tp.end()}, {sets.tn.begin(), sets.tn.end()}};
  if (pools.tp.empty() || pools.tn.empty()) {
    throw Error(ErrorCode::kUnsatisfiableTriplet,
                "cannot build triplets for " + std::string(pathology.name()) + ": " +
                    (pools.tp.empty() ? "no true-positive references" : "no true-negative references"));
  }
  return pools;
}

ImageTriplet make_triplet(const CellSets& sets, const Pools& pools, PathologyId pathology,
                          const std::string& anchor, Rng& rng) {
  const Cell cell = sets.fn.count(anchor) ? Cell::kFN : Cell::kFP;
  ImageTriplet t;
  t.anchor_id = anchor;
  t.tp_id = pools.tp[rng.index(pools.tp.size())];
  t.tn_id = pools.tn[rng.index(pools.tn.size())];
  t.pathology = pathology;
  t.checking_label = checking_label_for(cell);
  return t;
}

}  // namespace

int checking_label_for(Cell cell) {
  switch (cell) {
    case Cell::kFN: return -1;
    case Cell::kFP: return 1;
    default:
      throw Error(ErrorCode::kInvalidArgument,
                  "only failed inferences (FP/FN) can anchor a triplet, got " + std::string(to_string(cell)));
  }
}

std::vector<ImageTriplet> build_training_triplets(const ConfusionPartition& partition,
                                                  PathologyId pathology,
                                                  const TripletDatasetConfig& cfg) {
  if (cfg.n_train == 0) throw Error(ErrorCode::kInvalidArgument, "n_train must be positive");
  const CellSets& sets = partition[pathology];
  std::vector<std::string> failed = sets.failed();
  if (failed.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no failed inferences for " + std::string(pathology.name()));
  }
  const Pools pools = reference_pools(sets, pathology);

  Rng rng(derive_seed(cfg.seed, kTrainSalt * 64 + pathology.index()));
  rng.shuffle(failed);
  failed.resize(std::min(cfg.n_train, failed.size()));

  std::vector<ImageTriplet> out;
  out.reserve(failed.size());
  for (const auto& anchor : failed) out.push_back(make_triplet(sets, pools, pathology, anchor, rng));
  return out;
}

std::vector<ImageTriplet> build_validation_triplets(const ConfusionPartition& partition,
                                                    PathologyId pathology,
                                                    std::span<const std::string> training_anchor_ids,
                                                    const TripletDatasetConfig& cfg) {
  const CellSets& sets = partition[pathology];
  std::vector<std::string> remaining;
  std::set<std::string> used(training_anchor_ids.begin(), training_anchor_ids.end());
  for (const auto& id : sets.failed()) {
    if (!used.count(id)) remaining.push_back(id);
  }
  if (remaining.empty()) return {};
  const Pools pools = reference_pools(sets, pathology);

  Rng rng(derive_seed(cfg.seed, kValSalt * 64 + pathology.index()));
  std::vector<ImageTriplet> out;
  out.reserve(remaining.size());
  for (const auto& anchor : remaining) out.push_back(make_triplet(sets, pools, pathology, anchor, rng));
  return out;
}

std::vector<std::string> anchor_ids(std::span<const ImageTriplet> triplets) {
  std::vector<std::string> out;
  out.reserve(triplets.size());
  for (const auto& t : triplets) out.push_back(t.anchor_id);
  return out;
}

void write_triplets(const std::filesystem::path& path, const TripletSets& sets) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  auto emit = [&](const std::vector<ImageTriplet>& ts, const char* set) {
    for (const auto& t : ts) {
      nlohmann::json j = {{"anchor_id", t.anchor_id},
                          {"tp_id", t.tp_id},
                          {"tn_id", t.tn_id},
                          {"pathology", std::string(t.pathology.name())},
                          {"checking_label", t.checking_label},
                          {"set", set}};
      out << j.dump() << '\n';
    }
  };
  emit(sets.train, "train");
  emit(sets.val, "val");
}

TripletSets read_triplets(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  TripletSets sets;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    ImageTriplet t;
    t.anchor_id = j.at("anchor_id").get<std::string>();
    t.tp_id = j.at("tp_id").get<std::string>();
    t.tn_id = j.at("tn_id").get<std::string>();
    t.pathology = PathologyId::parse(j.at("pathology").get<std::string>());
    t.checking_label = j.at("checking_label").get<int>();
    if (t.checking_label != -1 && t.checking_label != 1) {
      throw Error(ErrorCode::kInvalidArgument, "checking_label must be -1 or +1");
    }
    const auto set = j.at("set").get<std::string>();
    if (set == "train") {
      sets.train.push_back(std::move(t));
    } else if (set == "val") {
      sets.val.push_back(std::move(t));
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown triplet set: " + set);
    }
  }
  return sets;
}

}  // namespace tfsl
