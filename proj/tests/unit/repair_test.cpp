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

#include <gtest/gtest.h>

#include "tfsl/error.h"
#include "test_support.h"

namespace tfsl {
namespace {

class RepairTest : public ::testing::Test {
 protected:
  void SetUp() override {
    images_ = testing::tiny_dataset(60, 4);
    store_ = ImageStore(images_);
    partition_ = partition_confusion(testing::flipped_inference(images_, 2, 4));
    baseline_ = testing::tiny_classifier(9);
    prov_.model = "baseline";
    prov_.split_id = "split-x";
    opts_.train.epochs = 1;
    opts_.train.batch_size = 8;
    opts_.triplets.n_train = 6;
    opts_.support_size = 8;
  }

  std::vector<PathologyId> all_pathologies() const {
    auto all = PathologyId::all();
    return {all.begin(), all.end()};
  }

  std::vector<ImageRecord> images_;
  ImageStore store_;
  ConfusionPartition partition_;
  Model baseline_;
  ReportProvenance prov_;
  RepairOptions opts_;
};

TEST_F(RepairTest, TripletSetsSkipEmptyPathologies) {
  const auto ps = all_pathologies();
  const TripletBuild build = build_triplet_sets(partition_, ps, {6, 1});
  EXPECT_EQ(build.skipped.size(), kPathologyCount - 2);
  EXPECT_EQ(pathologies_in(build.sets), (std::vector<PathologyId>{PathologyId(0), PathologyId(1)}));
  EXPECT_EQ(triplets_for(build.sets, PathologyId(1)).train.size(), 6u);
  const std::vector<PathologyId> only = {PathologyId(5)};
  EXPECT_THROW(build_triplet_sets(partition_, only, {6, 1}), Error);
}

TEST_F(RepairTest, TfslTrainsOneModelPerPathology) {
  const RepairOutcome out = run_repair(baseline_, partition_, all_pathologies(), store_, opts_, prov_);
  ASSERT_EQ(out.models.size(), 2u);
  EXPECT_EQ(out.models[0].pathologies, std::vector<PathologyId>{PathologyId(0)});
  EXPECT_EQ(out.after.provenance.model, "tfsl:P0:P1");
  EXPECT_EQ(out.after.provenance.split_id, "split-x");
  EXPECT_NE(out.after.provenance.checkpoint_id, out.models[0].checkpoint_id);
  EXPECT_EQ(out.before.provenance.model, "baseline");

  for (int p = 0; p < 2; ++p) {
    const PathologyId id(static_cast<std::size_t>(p));
    const auto mine = triplets_for(out.triplets.sets, id);
    // Training anchors leave the evaluation population on both sides.
    const auto total = partition_[id].counts().total() - static_cast<std::int64_t>(mine.train.size());
    EXPECT_EQ(out.before.rows[p].counts.total(), total);
    EXPECT_EQ(out.after.rows[p].counts.total(), total);
    // Baseline-correct records are never touched.
    EXPECT_GE(out.after.rows[p].counts.tp, out.before.rows[p].counts.tp);
    EXPECT_GE(out.after.rows[p].counts.tn, out.before.rows[p].counts.tn);
  }
  EXPECT_EQ(out.comparison.rows.size(), kPathologyCount);
}

TEST_F(RepairTest, IncrementalPoolsIntoOneModel) {
  opts_.mode = TrainMode::kIncremental;
  const RepairOutcome out = run_repair(baseline_, partition_, all_pathologies(), store_, opts_, prov_);
  ASSERT_EQ(out.models.size(), 1u);
  EXPECT_EQ(out.models[0].pathologies.size(), 2u);
  EXPECT_EQ(out.after.provenance.model, "incremental:P0+P1");
  EXPECT_EQ(out.after.provenance.checkpoint_id, out.models[0].checkpoint_id);
}

TEST_F(RepairTest, DeterministicOutcome) {
  const auto a = run_repair(baseline_, partition_, all_pathologies(), store_, opts_, prov_);
  const auto b = run_repair(baseline_, partition_, all_pathologies(), store_, opts_, prov_);
  EXPECT_EQ(to_json(a.comparison), to_json(b.comparison));
  EXPECT_EQ(a.models[1].checkpoint_id, b.models[1].checkpoint_id);
}

TEST_F(RepairTest, NothingToLearnFrom) {
  const auto clean = partition_confusion(testing::flipped_inference(images_, 2, 1000000));
  // flip_every that large still flips image 0; drop it to leave no failures.
  ConfusionPartition none = clean;
  for (auto& cells : none.cells) {
    cells.fp.clear();
    cells.fn.clear();
  }
  try {
    run_repair(baseline_, none, all_pathologies(), store_, opts_, prov_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyInput);
  }
  EXPECT_THROW(train_repair(baseline_, TripletSets{}, store_, TrainMode::kTfsl, opts_.train), Error);
}

TEST(TrainModeTest, ParseRoundTrip) {
  EXPECT_EQ(parse_train_mode("tfsl"), TrainMode::kTfsl);
  EXPECT_EQ(parse_train_mode(to_string(TrainMode::kIncremental)), TrainMode::kIncremental);
  EXPECT_THROW(parse_train_mode("online"), Error);
}

}  // namespace
}  // namespace tfsl
