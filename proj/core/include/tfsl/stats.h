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
#ifndef TFSL_STATS_H_
#define TFSL_STATS_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tfsl/inference_eval.h"

namespace tfsl {

// I_x(a, b) by Lentz's continued fraction, using the symmetry
// I_x(a, b) = 1 - I_{1-x}(b, a) where the fraction converges faster.
// Absolute tolerance 1e-12.
double regularized_incomplete_beta(double a, double b, double x);

// CDF of Student's t with df degrees of freedom.
double student_t_cdf(double t, double df);

// Two-sided tail probability P(|T| >= |t|).
double student_t_two_sided_p(double t, double df);

struct TTestResult {
  double t_statistic = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 1.0;
  std::size_t n_pairs = 0;
  // All differences equal: zero (t = 0, p = 1) or a nonzero constant
  // (t = ±inf, p = 0).
  bool degenerate = false;
};

void to_json(nlohmann::json& j, const TTestResult& r);

// Dependent-samples t-test on d = a - b with the n - 1 sample deviation.
// Throws Error(kDimensionMismatch) on unequal lengths and
// Error(kInvalidArgument) when fewer than two pairs are given.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

struct MetricDelta {
  double before = 0.0;
  double after = 0.0;
  double delta = 0.0;
  // Either side flagged undefined; left out of the paired test.
  bool excluded = false;
};

struct PathologyDelta {
  PathologyId pathology{0};
  MetricDelta ppv;
  MetricDelta npv;
};

struct MetricTest {
  std::optional<TTestResult> result;
  std::string error;
  std::vector<std::string> excluded;
};

struct ReportComparison {
  ReportProvenance before;
  ReportProvenance after;
  std::vector<PathologyDelta> rows;
  MetricTest ppv_test;
  MetricTest npv_test;
};

// Per-pathology after - before deltas and a paired t-test per metric.
// Undefined cells are dropped pairwise; a test that ends up with fewer than
// two pairs carries an error string instead of a result. Throws
// Error(kConflict) when the reports come from different splits.
ReportComparison compare_reports(const MetricsReport& before, const MetricsReport& after);

// Report timestamps are left out so the document depends only on content.
nlohmann::json to_json(const ReportComparison& comparison);

std::string render_comparison_table(const ReportComparison& comparison);

}  // namespace tfsl

#endif  // TFSL_STATS_H_
