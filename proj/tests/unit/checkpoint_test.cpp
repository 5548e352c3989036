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
#include "tfsl/checkpoint.h"

#include <fstream>

#include <gtest/gtest.h>

#include "tfsl/error.h"
#include "test_support.h"

namespace tfsl {
namespace {

Model sample_model() {
  Model model = swap_embedding_head(testing::tiny_classifier(3), 9);
  model.provenance["note"] = "unit";
  model.preprocess.normalize = true;
  return model;
}

ErrorCode load_error(std::span<const std::uint8_t> bytes) {
  try {
    deserialize_checkpoint(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "checkpoint accepted";
  return ErrorCode::kIo;
}

TEST(CheckpointTest, RoundTripIsExact) {
  const Model model = sample_model();
  const auto bytes = serialize_checkpoint(model);
  const Model back = deserialize_checkpoint(bytes);

  const auto a = model.parameters();
  const auto b = back.parameters();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i]->name, b[i]->name);
    EXPECT_EQ(a[i]->value, b[i]->value);
  }
  EXPECT_EQ(back.preprocess, model.preprocess);
  EXPECT_EQ(back.backbone.config(), model.backbone.config());
  EXPECT_EQ(back.provenance["note"], "unit");
  EXPECT_EQ(serialize_checkpoint(back), bytes);

  const auto records = testing::tiny_dataset(3, 2);
  for (const auto& r : records) {
    EXPECT_EQ(embed_image(model, r.pixels), embed_image(back, r.pixels));
  }
}

TEST(CheckpointTest, ClassifierWithoutEmbeddingRoundTrips) {
  const Model model = testing::tiny_classifier(5);
  const Model back = deserialize_checkpoint(serialize_checkpoint(model));
  EXPECT_FALSE(back.embedding);
  EXPECT_EQ(back.classifier.weight.value, model.classifier.weight.value);
}

TEST(CheckpointTest, IdIsContentHash) {
  const auto a = serialize_checkpoint(sample_model());
  const auto b = serialize_checkpoint(sample_model());
  EXPECT_EQ(checkpoint_id(a), checkpoint_id(b));
  EXPECT_EQ(checkpoint_id(a).size(), 16u);
  const auto c = serialize_checkpoint(swap_embedding_head(testing::tiny_classifier(3), 10));
  EXPECT_NE(checkpoint_id(a), checkpoint_id(c));
}

TEST(CheckpointTest, TruncatedAndFlippedAreCorrupt) {
  const auto bytes = serialize_checkpoint(sample_model());
  for (std::size_t keep : {std::size_t{0}, std::size_t{5}, std::size_t{20}, bytes.size() / 2, bytes.size() - 1}) {
    EXPECT_EQ(load_error(std::span(bytes).first(keep)), ErrorCode::kCorruptCheckpoint) << keep;
  }
  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x40;
  EXPECT_EQ(load_error(flipped), ErrorCode::kCorruptCheckpoint);
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_EQ(load_error(magic), ErrorCode::kCorruptCheckpoint);
}

TEST(CheckpointTest, OldVersionIsRejected) {
  auto bytes = serialize_checkpoint(sample_model());
  for (int i = 0; i < 4; ++i) bytes[8 + i] = 0;
  EXPECT_EQ(load_error(bytes), ErrorCode::kCheckpointVersion);
}

TEST(CheckpointTest, FileSaveAndLoad) {
  testing::TempDir dir;
  const Model model = sample_model();
  const std::string id = save_checkpoint(model, dir / "m.ckpt");
  EXPECT_EQ(id, checkpoint_id(serialize_checkpoint(model)));
  const Model back = load_checkpoint(dir / "m.ckpt");
  EXPECT_EQ(back.embedding->slope.value, model.embedding->slope.value);

  std::filesystem::resize_file(dir / "m.ckpt", 100);
  EXPECT_THROW(load_checkpoint(dir / "m.ckpt"), Error);
  try {
    load_checkpoint(dir / "missing.ckpt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

}  // namespace
}  // namespace tfsl
