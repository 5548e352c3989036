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
#include <string>

#include "tfsl/error.h"

namespace tfsl {

std::string_view to_string(LossKind kind) {
  return kind == LossKind::kMarginRanking ? "margin_ranking" : "triplet_margin";
}

LossKind parse_loss_kind(std::string_view text) {
  if (text == "margin_ranking") return LossKind::kMarginRanking;
  if (text == "triplet_margin") return LossKind::kTripletMargin;
  throw Error(ErrorCode::kInvalidArgument, "unknown loss kind: " + std::string(text));
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "distance between vectors of length " +
                                                   std::to_string(a.size()) + " and " +
                                                   std::to_string(b.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
      throw Error(ErrorCode::kNonFinite, "non-finite embedding entry");
    }
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double margin_ranking_loss(double x1, double x2, int y, double margin) {
  if (y != -1 && y != 1) throw Error(ErrorCode::kInvalidArgument, "checking label must be -1 or +1");
  return std::max(0.0, -y * (x1 - x2) + margin);
}

double triplet_margin_loss(double d_ap, double d_an, double margin) {
  return std::max(0.0, d_ap - d_an + margin);
}

TripletObjective triplet_objective(LossKind kind, const nn::Vector& anchor, const nn::Vector& tp,
                                   const nn::Vector& tn, int y, double margin) {
  TripletObjective out;
  out.x1 = euclidean_distance({anchor.data(), static_cast<std::size_t>(anchor.size())},
                              {tp.data(), static_cast<std::size_t>(tp.size())});
  out.x2 = euclidean_distance({anchor.data(), static_cast<std::size_t>(anchor.size())},
                              {tn.data(), static_cast<std::size_t>(tn.size())});

  // dLoss/dx1 and dLoss/dx2 on the active side of the hinge.
  double g1 = 0.0;
  double g2 = 0.0;
  if (kind == LossKind::kMarginRanking) {
    out.loss = margin_ranking_loss(out.x1, out.x2, y, margin);
    if (-y * (out.x1 - out.x2) + margin > 0.0) {
      g1 = -y;
      g2 = y;
    }
  } else {
    if (y != -1 && y != 1) throw Error(ErrorCode::kInvalidArgument, "checking label must be -1 or +1");
    const bool tp_is_positive = y == -1;
    const double d_ap = tp_is_positive ? out.x1 : out.x2;
    const double d_an = tp_is_positive ? out.x2 : out.x1;
    out.loss = triplet_margin_loss(d_ap, d_an, margin);
    if (d_ap - d_an + margin > 0.0) {
      g1 = tp_is_positive ? 1.0 : -1.0;
      g2 = -g1;
    }
  }

  const nn::Vector u1 = out.x1 > 0.0 ? nn::Vector((anchor - tp) / out.x1) : nn::Vector::Zero(anchor.size());
  const nn::Vector u2 = out.x2 > 0.0 ? nn::Vector((anchor - tn) / out.x2) : nn::Vector::Zero(anchor.size());
  out.grad_anchor = g1 * u1 + g2 * u2;
  out.grad_tp = -g1 * u1;
  out.grad_tn = -g2 * u2;
  return out;
}

}  // namespace tfsl
