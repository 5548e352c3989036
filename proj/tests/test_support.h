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
#ifndef TFSL_TESTS_TEST_SUPPORT_H_
#define TFSL_TESTS_TEST_SUPPORT_H_

#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "tfsl/inference_eval.h"
#include "tfsl/model.h"
#include "tfsl/random.h"
#include "tfsl/synthetic.h"
#include "tfsl/trainer.h"

namespace tfsl::testing {

// Removes itself on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("tfsl_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string image_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "img_%05zu", i);
  return buf;
}

// Inference records for one pathology with the given cell sizes; ids are
// img_00000, img_00001, ... in TP, FP, TN, FN order.
inline std::vector<InferenceRecord> records_with_cells(PathologyId p, int tp, int fp, int tn, int fn,
                                                       std::size_t first_id = 0) {
  std::vector<InferenceRecord> out;
  std::size_t next = first_id;
  auto add = [&](Cell c, int count) {
    for (int k = 0; k < count; ++k) {
      InferenceRecord r;
      r.image_id = image_name(next++);
      r.pathology = p;
      r.decision = decision_of(c);
      r.truth = truth_of(c);
      r.probability = r.decision ? 0.75 : 0.25;
      r.cell = c;
      out.push_back(r);
    }
  };
  add(Cell::kTP, tp);
  add(Cell::kFP, fp);
  add(Cell::kTN, tn);
  add(Cell::kFN, fn);
  return out;
}

// Random partition over n_images images; every pathology draws its own
// cell probabilities so some cells come out empty.
inline std::vector<InferenceRecord> random_records(Rng& rng, std::size_t n_images,
                                                   std::size_t n_pathologies = kPathologyCount) {
  std::vector<InferenceRecord> out;
  for (std::size_t p = 0; p < n_pathologies; ++p) {
    double w[4];
    double total = 0;
    for (double& x : w) {
      x = rng.uniform() < 0.15 ? 0.0 : rng.uniform();
      total += x;
    }
    if (total == 0) w[0] = total = 1.0;
    for (std::size_t i = 0; i < n_images; ++i) {
      double u = rng.uniform() * total;
      int c = 0;
      while (c < 3 && u >= w[c]) u -= w[c++];
      while (w[c] == 0.0) c = (c + 3) % 4;
      const Cell cell = static_cast<Cell>(c);
      InferenceRecord r;
      r.image_id = image_name(i);
      r.pathology = PathologyId(p);
      r.decision = decision_of(cell);
      r.truth = truth_of(cell);
      r.probability = r.decision ? 0.5 + 0.5 * rng.uniform() : 0.5 * rng.uniform();
      r.cell = cell;
      out.push_back(r);
    }
  }
  return out;
}

inline PreprocessConfig tiny_preprocess(int size = 16) {
  PreprocessConfig pp;
  pp.resize_to = size;
  pp.crop_to = size;
  return pp;
}

// 16x16 synthetic images; fast enough for training loops in unit tests.
inline std::vector<ImageRecord> tiny_dataset(std::size_t n, std::uint64_t seed, int n_pathologies = 2) {
  SyntheticSpec spec;
  spec.image_size = 16;
  spec.n_pathologies = n_pathologies;
  spec.marker_sigma = 1.5;
  spec.seed = seed;
  return generate_synthetic_dataset(spec, n);
}

inline BackboneConfig tiny_backbone() {
  BackboneConfig cfg;
  cfg.channels = {4, 8};
  return cfg;
}

inline Model tiny_classifier(std::uint64_t seed) { return make_classifier(tiny_backbone(), tiny_preprocess(), seed); }

// Inference records that agree with the labels except on every
// flip_every-th image, which becomes a failure.
inline std::vector<InferenceRecord> flipped_inference(const std::vector<ImageRecord>& images,
                                                      int n_pathologies, std::size_t flip_every) {
  std::vector<InferenceRecord> out;
  for (std::size_t i = 0; i < images.size(); ++i) {
    for (int p = 0; p < n_pathologies; ++p) {
      InferenceRecord r;
      r.image_id = images[i].image_id;
      r.pathology = PathologyId(static_cast<std::size_t>(p));
      r.truth = images[i].labels[p] == Label::kPositive;
      r.decision = (i + static_cast<std::size_t>(p)) % flip_every == 0 ? !r.truth : r.truth;
      r.probability = r.decision ? 0.8 : 0.2;
      r.cell = cell_of(r.decision, r.truth);
      out.push_back(r);
    }
  }
  return out;
}

}  // namespace tfsl::testing

#endif  // TFSL_TESTS_TEST_SUPPORT_H_
