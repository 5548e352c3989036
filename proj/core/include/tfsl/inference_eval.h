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
#ifndef TFSL_INFERENCE_EVAL_H_
#define TFSL_INFERENCE_EVAL_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tfsl/data_ingest.h"
#include "tfsl/model.h"
#include "tfsl/pathology.h"

namespace tfsl {

enum class Cell : std::uint8_t { kTP, kFP, kTN, kFN };

inline constexpr std::array<Cell, 4> kAllCells = {Cell::kTP, Cell::kFP, Cell::kTN, Cell::kFN};

// (pos,pos)=TP, (pos,neg)=FP, (neg,neg)=TN, (neg,pos)=FN.
constexpr Cell cell_of(bool decision_positive, bool truth_positive) {
  if (decision_positive) return truth_positive ? Cell::kTP : Cell::kFP;
  return truth_positive ? Cell::kFN : Cell::kTN;
}
constexpr bool is_failure(Cell c) { return c == Cell::kFP || c == Cell::kFN; }
// Ground truth implied by a cell.
constexpr bool truth_of(Cell c) { return c == Cell::kTP || c == Cell::kFN; }
constexpr bool decision_of(Cell c) { return c == Cell::kTP || c == Cell::kFP; }

std::string_view to_string(Cell cell);
Cell parse_cell(std::string_view text);

struct InferenceRecord {
  std::string image_id;
  PathologyId pathology{0};
  double probability = 0.0;
  bool decision = false;
  bool truth = false;
  Cell cell = Cell::kTN;
};

void to_json(nlohmann::json& j, const InferenceRecord& r);
void from_json(const nlohmann::json& j, InferenceRecord& r);

// One record per (image, pathology), images in input order.
std::vector<InferenceRecord> run_inference(const Model& model, std::span<const ImageRecord> records,
                                           double threshold = 0.5);

void write_inference_log(const std::filesystem::path& path, std::span<const InferenceRecord> records);
std::vector<InferenceRecord> read_inference_log(const std::filesystem::path& path);

struct CellCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const CellCounts&, const CellCounts&) = default;
};

// Image-id sets for one pathology.
struct CellSets {
  std::set<std::string> tp, fp, tn, fn;

  std::set<std::string>& operator[](Cell c);
  const std::set<std::string>& operator[](Cell c) const;

  // Sorted FP ∪ FN.
  std::vector<std::string> failed() const;
  // The cell holding id, if any.
  std::optional<Cell> find(const std::string& id) const;
  CellCounts counts() const;

  friend bool operator==(const CellSets&, const CellSets&) = default;
};

struct ConfusionPartition {
  std::array<CellSets, kPathologyCount> cells;

  CellSets& operator[](PathologyId p) { return cells[p.index()]; }
  const CellSets& operator[](PathologyId p) const { return cells[p.index()]; }

  // Removes ids from every cell of one pathology.
  void exclude(PathologyId p, std::span<const std::string> ids);
  // Moves an id to `to`; throws Error(kNotFound) when absent.
  void move(PathologyId p, const std::string& id, Cell to);

  friend bool operator==(const ConfusionPartition&, const ConfusionPartition&) = default;
};

nlohmann::json to_json(const ConfusionPartition& partition);

// Throws Error(kDuplicateRecord) on a repeated (image, pathology) pair.
ConfusionPartition partition_confusion(std::span<const InferenceRecord> records);

struct MetricValue {
  double value = 0.0;  // percentage in [0, 100]
  bool defined = false;
};

// 100 TP / (TP + FP); a zero denominator yields 0.0 flagged undefined.
// Throws Error(kInvalidArgument) on negative counts.
MetricValue compute_ppv(const CellCounts& counts);
// 100 TN / (TN + FN), same conventions.
MetricValue compute_npv(const CellCounts& counts);

struct PathologyMetrics {
  PathologyId pathology{0};
  CellCounts counts;
  MetricValue ppv;
  MetricValue npv;
};

struct ReportProvenance {
  std::string model;
  std::string checkpoint_id;
  std::string split_id;
  std::string timestamp;
};

// ISO-8601 UTC with milliseconds, e.g. "2026-01-02T03:04:05.006Z".
std::string utc_timestamp(std::int64_t epoch_ms);
std::int64_t now_ms();

struct MetricsReport {
  std::array<PathologyMetrics, kPathologyCount> rows;
  ReportProvenance provenance;
};

void to_json(nlohmann::json& j, const MetricsReport& report);
void from_json(const nlohmann::json& j, MetricsReport& report);

MetricsReport build_report(const ConfusionPartition& partition, ReportProvenance provenance = {});

// Two-decimal percentage, e.g. "88.63".
std::string format_percent(double value);

// Fixed-width text table: pathology, PPV, NPV, counts.
std::string render_report_table(const MetricsReport& report);

}  // namespace tfsl

#endif  // TFSL_INFERENCE_EVAL_H_
