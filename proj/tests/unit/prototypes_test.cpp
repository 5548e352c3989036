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

#include <gtest/gtest.h>

#include "tfsl/error.h"
#include "test_support.h"

namespace tfsl {
namespace {

Vector random_vector(Rng& rng) {
  Vector v(kEmbeddingDim);
  for (int i = 0; i < kEmbeddingDim; ++i) v(i) = rng.normal();
  return v;
}

TEST(PrototypeDecisionTest, StrictlyCloserToTpIsPositive) {
  PrototypeSet set;
  set.tp_prototype = Vector::Zero(kEmbeddingDim);
  set.tn_prototype = Vector::Zero(kEmbeddingDim);
  set.tn_prototype(0) = 2.0;
  Vector e = Vector::Zero(kEmbeddingDim);
  e(0) = 0.9;
  EXPECT_TRUE(decide_by_prototype(e, set));
  e(0) = 1.0;
  EXPECT_FALSE(decide_by_prototype(e, set));
  e(0) = 1.1;
  EXPECT_FALSE(decide_by_prototype(e, set));
}

TEST(PrototypeDecisionTest, ScaleInvariantAndSwapFlips) {
  Rng rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    PrototypeSet set;
    set.tp_prototype = random_vector(rng);
    set.tn_prototype = random_vector(rng);
    const Vector e = random_vector(rng);
    const double c = rng.uniform(0.01, 100.0);
    PrototypeSet scaled = set;
    scaled.tp_prototype *= c;
    scaled.tn_prototype *= c;
    const bool d = decide_by_prototype(e, set);
    EXPECT_EQ(decide_by_prototype(c * e, scaled), d);
    PrototypeSet swapped = set;
    std::swap(swapped.tp_prototype, swapped.tn_prototype);
    EXPECT_EQ(decide_by_prototype(e, swapped), !d);
  }
}

class PrototypeTest : public ::testing::Test {
 protected:
  void SetUp() override {
    images_ = testing::tiny_dataset(50, 8);
    store_ = ImageStore(images_);
    partition_ = partition_confusion(testing::flipped_inference(images_, 2, 5));
    model_ = swap_embedding_head(testing::tiny_classifier(1), 2);
  }
  std::vector<ImageRecord> images_;
  ImageStore store_;
  ConfusionPartition partition_;
  Model model_;
};

TEST_F(PrototypeTest, MeansOfSampledSupport) {
  const PathologyId p0{0};
  const PrototypeSet set = compute_prototypes(model_, partition_, p0, 5, 9, store_);
  EXPECT_EQ(set.tp_support.size(), std::min<std::size_t>(5, partition_[p0].tp.size()));
  EXPECT_EQ(set.tn_support.size(), std::min<std::size_t>(5, partition_[p0].tn.size()));
  Vector sum = Vector::Zero(kEmbeddingDim);
  for (const auto& id : set.tp_support) {
    EXPECT_TRUE(partition_[p0].tp.count(id));
    sum += embed_image(model_, store_.get(id));
  }
  EXPECT_TRUE(set.tp_prototype.isApprox(sum / static_cast<double>(set.tp_support.size()), 1e-12));
  for (const auto& id : set.tn_support) EXPECT_TRUE(partition_[p0].tn.count(id));

  const PrototypeSet again = compute_prototypes(model_, partition_, p0, 5, 9, store_);
  EXPECT_EQ(again.tp_support, set.tp_support);
  const PrototypeSet all = compute_prototypes(model_, partition_, p0, 1000, 9, store_);
  EXPECT_EQ(all.tn_support.size(), partition_[p0].tn.size());
}

TEST_F(PrototypeTest, EmptyPoolIsUnsatisfiable) {
  ConfusionPartition empty = partition_;
  empty[PathologyId(0)].tp.clear();
  try {
    compute_prototypes(model_, empty, PathologyId(0), 5, 1, store_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsatisfiableTriplet);
  }
}

TEST_F(PrototypeTest, ReclassifyMovesValidationAndDropsTraining) {
  const PathologyId p0{0};
  const auto failed = partition_[p0].failed();
  ASSERT_GE(failed.size(), 4u);
  const std::vector<std::string> training(failed.begin(), failed.begin() + 2);
  const std::vector<std::string> validation(failed.begin() + 2, failed.end());
  const PrototypeSet set = compute_prototypes(model_, partition_, p0, 10, 1, store_);
  const ConfusionPartition out =
      reclassify_failures(model_, partition_, p0, set, validation, training, store_);

  for (const auto& id : training) EXPECT_FALSE(out[p0].find(id));
  for (const auto& id : validation) {
    const bool truth = truth_of(*partition_[p0].find(id));
    const bool decision = classify_by_prototype(model_, store_.get(id), set);
    EXPECT_EQ(out[p0].find(id), cell_of(decision, truth));
  }
  EXPECT_EQ(out[p0].counts().total() + 2, partition_[p0].counts().total());
  EXPECT_EQ(out[PathologyId(1)], partition_[PathologyId(1)]);
  for (const auto& id : partition_[p0].tp) EXPECT_TRUE(out[p0].tp.count(id));

  const std::vector<std::string> not_failure = {*partition_[p0].tp.begin()};
  EXPECT_THROW(reclassify_failures(model_, partition_, p0, set, not_failure, {}, store_), Error);
}

}  // namespace
}  // namespace tfsl
