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
#include "tfsl/losses.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "tfsl/error.h"
#include "tfsl/random.h"

namespace tfsl {
namespace {

using nn::Vector;

Vector random_vector(Rng& rng, int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

TEST(LossTest, MarginRankingExamples) {
  EXPECT_EQ(margin_ranking_loss(0.5, 1.5, -1, 0.0), 0.0);
  EXPECT_EQ(margin_ranking_loss(2.0, 1.0, -1, 0.5), 1.5);
  EXPECT_EQ(margin_ranking_loss(0.7, 0.7, 1, 1.0), 1.0);
  EXPECT_EQ(margin_ranking_loss(0.7, 0.7, -1, 1.0), 1.0);
  EXPECT_THROW(margin_ranking_loss(1, 2, 0, 1.0), Error);
}

TEST(LossTest, MarginRankingMatchesLiteralOnRandomTuples) {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double x1 = rng.uniform(0, 5);
    const double x2 = rng.uniform(0, 5);
    const int y = rng.uniform() < 0.5 ? -1 : 1;
    const double margin = rng.uniform(0, 2);
    ASSERT_EQ(margin_ranking_loss(x1, x2, y, margin), std::max(0.0, -y * (x1 - x2) + margin));
  }
}

TEST(LossTest, TripletMarginExamples) {
  EXPECT_EQ(triplet_margin_loss(0.0, 2.0, 1.0), 0.0);
  EXPECT_EQ(triplet_margin_loss(2.0, 0.0, 1.0), 3.0);
  EXPECT_EQ(triplet_margin_loss(1.25, 1.25, 0.3), 0.3);
}

TEST(DistanceTest, ExamplesAndErrors) {
  const std::vector<double> a = {3, 4, 0};
  const std::vector<double> z = {0, 0, 0};
  EXPECT_EQ(euclidean_distance(a, z), 5.0);
  EXPECT_EQ(euclidean_distance(a, a), 0.0);
  const std::vector<double> short_v = {1, 2};
  try {
    euclidean_distance(a, short_v);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
  const std::vector<double> nan = {0, std::numeric_limits<double>::quiet_NaN(), 0};
  try {
    euclidean_distance(a, nan);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFinite);
  }
}

TEST(DistanceTest, SymmetricAndMatchesSummation) {
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const Vector a = random_vector(rng, 128);
    const Vector b = random_vector(rng, 128);
    double sum = 0;
    for (int k = 0; k < 128; ++k) sum += (a(k) - b(k)) * (a(k) - b(k));
    const std::span<const double> sa(a.data(), 128), sb(b.data(), 128);
    EXPECT_NEAR(euclidean_distance(sa, sb), std::sqrt(sum), 1e-12);
    EXPECT_EQ(euclidean_distance(sa, sb), euclidean_distance(sb, sa));
  }
}

TEST(TripletObjectiveTest, BothKindsAgreeUnderPositiveReferenceMapping) {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const Vector a = random_vector(rng, 16), p = random_vector(rng, 16), n = random_vector(rng, 16);
    const int y = i % 2 ? 1 : -1;
    const double margin = rng.uniform(0, 2);
    const auto mrl = triplet_objective(LossKind::kMarginRanking, a, p, n, y, margin);
    const auto tml = triplet_objective(LossKind::kTripletMargin, a, p, n, y, margin);
    EXPECT_NEAR(mrl.loss, tml.loss, 1e-12);
    EXPECT_TRUE(mrl.grad_anchor.isApprox(tml.grad_anchor, 1e-12) || mrl.loss == 0.0);
  }
}

TEST(TripletObjectiveTest, FlatSideHasZeroGradient) {
  Vector a = Vector::Zero(4), tp = Vector::Zero(4), tn = Vector::Zero(4);
  tp(0) = 0.1;
  tn(0) = 5.0;
  // FN anchor already much closer to the TP reference.
  const auto obj = triplet_objective(LossKind::kMarginRanking, a, tp, tn, -1, 1.0);
  EXPECT_EQ(obj.loss, 0.0);
  EXPECT_EQ(obj.grad_anchor.norm(), 0.0);
  EXPECT_EQ(obj.grad_tp.norm(), 0.0);
  const auto same = triplet_objective(LossKind::kMarginRanking, a, a, tn, 1, 1.0);
  EXPECT_TRUE(same.grad_tp.allFinite());
  EXPECT_TRUE(same.grad_anchor.allFinite());
}

TEST(TripletObjectiveTest, GradientMatchesFiniteDifferences) {
  Rng rng(4);
  int checked = 0;
  for (int i = 0; i < 60; ++i) {
    Vector a = random_vector(rng, 128), p = random_vector(rng, 128), n = random_vector(rng, 128);
    const int y = i % 2 ? 1 : -1;
    const double margin = rng.uniform(0, 2);
    const auto obj = triplet_objective(LossKind::kMarginRanking, a, p, n, y, margin);
    if (std::abs(-y * (obj.x1 - obj.x2) + margin) < 1e-3) continue;
    ++checked;
    for (Vector* v : {&a, &p, &n}) {
      const Vector& g = v == &a ? obj.grad_anchor : (v == &p ? obj.grad_tp : obj.grad_tn);
      for (int k = 0; k < 128; k += 9) {
        const double saved = (*v)(k);
        (*v)(k) = saved + 1e-4;
        const double up = triplet_objective(LossKind::kMarginRanking, a, p, n, y, margin).loss;
        (*v)(k) = saved - 1e-4;
        const double down = triplet_objective(LossKind::kMarginRanking, a, p, n, y, margin).loss;
        (*v)(k) = saved;
        const double fd = (up - down) / 2e-4;
        EXPECT_NEAR(g(k), fd, 1e-4 * std::max(1.0, std::abs(fd)));
      }
    }
  }
  EXPECT_GT(checked, 50);
}

TEST(LossKindTest, ParseRoundTrip) {
  for (LossKind k : {LossKind::kMarginRanking, LossKind::kTripletMargin}) {
    EXPECT_EQ(parse_loss_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_loss_kind("hinge"), Error);
}

}  // namespace
}  // namespace tfsl
