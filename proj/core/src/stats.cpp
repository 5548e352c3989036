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
#include "tfsl/stats.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "tfsl/error.h"

namespace tfsl {

namespace {

constexpr double kTiny = 1e-300;
constexpr double kEps = 1e-15;
constexpr int kMaxIterations = 10000;

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw Error(ErrorCode::kInvalidArgument, "incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorCode::kInvalidArgument, "incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw Error(ErrorCode::kInvalidArgument, "degrees of freedom must be positive");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  return regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

double student_t_cdf(double t, double df) {
  const double tail = 0.5 * student_t_two_sided_p(t, df);
  return t > 0.0 ? 1.0 - tail : tail;
}

void to_json(nlohmann::json& j, const TTestResult& r) {
  nlohmann::json t = r.t_statistic;
  if (std::isinf(r.t_statistic)) t = r.t_statistic > 0 ? "inf" : "-inf";
  j = {{"t_statistic", t},
       {"degrees_of_freedom", r.degrees_of_freedom},
       {"p_value", r.p_value},
       {"n_pairs", r.n_pairs},
       {"degenerate", r.degenerate}};
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "paired t-test needs equal-length vectors");
  }
  const std::size_t n = a.size();
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "paired t-test needs at least 2 pairs");

  std::vector<double> d(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = a[i] - b[i];
    mean += d[i];
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  TTestResult r;
  r.n_pairs = n;
  r.degrees_of_freedom = static_cast<int>(n - 1);
  if (sd == 0.0) {
    r.degenerate = true;
    if (mean == 0.0) {
      r.t_statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.t_statistic = mean > 0 ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
    }
    return r;
  }
  r.t_statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
  r.p_value = std::clamp(student_t_two_sided_p(r.t_statistic, r.degrees_of_freedom), 0.0, 1.0);
  return r;
}

namespace {

MetricDelta delta_of(const MetricValue& before, const MetricValue& after) {
  return {before.value, after.value, after.value - before.value, !before.defined || !after.defined};
}

MetricTest run_test(const std::vector<PathologyDelta>& rows, bool ppv) {
  MetricTest test;
  std::vector<double> after;
  std::vector<double> before;
  for (const auto& row : rows) {
    const MetricDelta& m = ppv ? row.ppv : row.npv;
    if (m.excluded) {
      test.excluded.emplace_back(row.pathology.name());
      continue;
    }
    after.push_back(m.after);
    before.push_back(m.before);
  }
  try {
    test.result = paired_t_test(after, before);
  } catch (const Error& e) {
    test.error = e.what();
  }
  return test;
}

nlohmann::json provenance_json(const ReportProvenance& p) {
  return {{"model", p.model}, {"checkpoint_id", p.checkpoint_id}, {"split_id", p.split_id}};
}

nlohmann::json test_json(const MetricTest& t) {
  nlohmann::json j = {{"excluded", t.excluded}};
  if (t.result) {
    j["result"] = *t.result;
  } else {
    j["result"] = nullptr;
    j["error"] = t.error;
  }
  return j;
}

}  // namespace

ReportComparison compare_reports(const MetricsReport& before, const MetricsReport& after) {
  if (before.provenance.split_id != after.provenance.split_id) {
    throw Error(ErrorCode::kConflict, "reports come from different splits (" +
                                          before.provenance.split_id + " vs " +
                                          after.provenance.split_id + ")");
  }
  ReportComparison out;
  out.before = before.provenance;
  out.after = after.provenance;
  for (std::size_t i = 0; i < kPathologyCount; ++i) {
    const auto& b = before.rows[i];
    const auto& a = after.rows[i];
    if (a.pathology != b.pathology) throw Error(ErrorCode::kConflict, "reports list different pathologies");
    out.rows.push_back({b.pathology, delta_of(b.ppv, a.ppv), delta_of(b.npv, a.npv)});
  }
  out.ppv_test = run_test(out.rows, true);
  out.npv_test = run_test(out.rows, false);
  return out;
}

nlohmann::json to_json(const ReportComparison& c) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : c.rows) {
    auto metric = [](const MetricDelta& m) {
      return nlohmann::json{{"before", m.before}, {"after", m.after}, {"delta", m.delta}, {"excluded", m.excluded}};
    };
    rows.push_back({{"pathology", std::string(row.pathology.name())},
                    {"ppv", metric(row.ppv)},
                    {"npv", metric(row.npv)}});
  }
  return {{"before", provenance_json(c.before)},
          {"after", provenance_json(c.after)},
          {"pathologies", std::move(rows)},
          {"ppv_test", test_json(c.ppv_test)},
          {"npv_test", test_json(c.npv_test)}};
}

std::string render_comparison_table(const ReportComparison& c) {
  std::ostringstream out;
  char line[200];
  std::snprintf(line, sizeof(line), "%-28s %8s %8s %8s   %8s %8s %8s\n", "Pathology", "PPV0", "PPV1",
                "dPPV", "NPV0", "NPV1", "dNPV");
  out << line;
  for (const auto& row : c.rows) {
    std::snprintf(line, sizeof(line), "%-28s %8s %8s %+8.2f   %8s %8s %+8.2f\n",
                  std::string(row.pathology.name()).c_str(), format_percent(row.ppv.before).c_str(),
                  format_percent(row.ppv.after).c_str(), row.ppv.delta,
                  format_percent(row.npv.before).c_str(), format_percent(row.npv.after).c_str(),
                  row.npv.delta);
    out << line;
  }
  auto summary = [&](const char* name, const MetricTest& t) {
    if (t.result) {
      std::snprintf(line, sizeof(line), "%s paired t-test: t=%.4f df=%d p=%.4g%s\n", name,
                    t.result->t_statistic, t.result->degrees_of_freedom, t.result->p_value,
                    t.result->degenerate ? " (degenerate)" : "");
    } else {
      std::snprintf(line, sizeof(line), "%s paired t-test: not computed (%s)\n", name, t.error.c_str());
    }
    out << line;
  };
  summary("PPV", c.ppv_test);
  summary("NPV", c.npv_test);
  return out.str();
}

}  // namespace tfsl
