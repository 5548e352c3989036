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
#ifndef TFSL_LOSSES_H_
#define TFSL_LOSSES_H_

#include <span>
#include <string_view>

#include "tfsl/nn/layers.h"

namespace tfsl {

enum class LossKind { kMarginRanking, kTripletMargin };

std::string_view to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view text);

// ||a - b||_2. Throws Error(kDimensionMismatch) on unequal lengths and
// Error(kNonFinite) on non-finite entries.
double euclidean_distance(std::span<const double> a, std::span<const double> b);

// max(0, -y * (x1 - x2) + margin); y must be -1 or +1.
double margin_ranking_loss(double x1, double x2, int y, double margin);

// max(0, d_ap - d_an + margin).
double triplet_margin_loss(double d_ap, double d_an, double margin);

// Loss and its gradient with respect to the three embeddings of one triplet.
// x1 = d(anchor, tp), x2 = d(anchor, tn). For the triplet-margin kind the
// "positive" reference is the one the anchor should move toward: TP for an
// FN anchor (y = -1), TN for an FP anchor (y = +1). Gradients are zero on
// the flat side of the hinge and for zero-length differences.
struct TripletObjective {
  double loss = 0.0;
  double x1 = 0.0;
  double x2 = 0.0;
  nn::Vector grad_anchor;
  nn::Vector grad_tp;
  nn::Vector grad_tn;
};

TripletObjective triplet_objective(LossKind kind, const nn::Vector& anchor, const nn::Vector& tp,
                                   const nn::Vector& tn, int y, double margin);

}  // namespace tfsl

#endif  // TFSL_LOSSES_H_
