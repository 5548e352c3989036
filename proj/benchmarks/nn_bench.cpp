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
#include <benchmark/benchmark.h>

#include "tfsl/model.h"
#include "tfsl/nn/layers.h"
#include "tfsl/random.h"
#include "tfsl/trainer.h"

namespace tfsl {
namespace {

void BM_Im2col(benchmark::State& state) {
  Rng rng(2);
  const int side = static_cast<int>(state.range(0));
  nn::FeatureMap map;
  map.height = side;
  map.width = side;
  map.data = nn::Matrix(8, side * side);
  for (Eigen::Index i = 0; i < map.data.size(); ++i) map.data.data()[i] = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(nn::im2col3x3(map));
}
BENCHMARK(BM_Im2col)->Arg(32)->Arg(64);

Model bench_model(int side) {
  PreprocessConfig pp;
  pp.resize_to = side;
  pp.crop_to = side;
  return swap_embedding_head(make_classifier(BackboneConfig{}, pp, 3), 4);
}

Image random_image(int side) {
  Rng rng(5);
  Image img(3, side, side);
  for (auto& v : img.data) v = static_cast<float>(rng.uniform());
  return img;
}

void BM_EmbedImage(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const Model model = bench_model(side);
  const Image img = random_image(side);
  for (auto _ : state) benchmark::DoNotOptimize(embed_image(model, img));
}
BENCHMARK(BM_EmbedImage)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ClassifyImage(benchmark::State& state) {
  PreprocessConfig pp;
  pp.resize_to = 64;
  pp.crop_to = 64;
  const Model model = make_classifier(BackboneConfig{}, pp, 3);
  const Image img = random_image(64);
  for (auto _ : state) benchmark::DoNotOptimize(classify_image(model, img));
}
BENCHMARK(BM_ClassifyImage)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace tfsl
