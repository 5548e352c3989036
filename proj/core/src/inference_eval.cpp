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
#include "tfsl/inference_eval.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "tfsl/error.h"

namespace tfsl {

std::string_view to_string(Cell cell) {
  switch (cell) {
    case Cell::kTP: return "TP";
    case Cell::kFP: return "FP";
    case Cell::kTN: return "TN";
    case Cell::kFN: return "FN";
  }
  return "?";
}

Cell parse_cell(std::string_view text) {
  for (Cell c : kAllCells) {
    if (to_string(c) == text) return c;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown confusion cell: " + std::string(text));
}

void to_json(nlohmann::json& j, const InferenceRecord& r) {
  j = {{"image_id", r.image_id},
       {"pathology", std::string(r.pathology.name())},
       {"probability", r.probability},
       {"decision", r.decision ? "positive" : "negative"},
       {"truth", r.truth ? "positive" : "negative"},
       {"cell", std::string(to_string(r.cell))}};
}

void from_json(const nlohmann::json& j, InferenceRecord& r) {
  auto polarity = [](const std::string& s) {
    if (s == "positive") return true;
    if (s == "negative") return false;
    throw Error(ErrorCode::kInvalidArgument, "expected positive|negative, got " + s);
  };
  r.image_id = j.at("image_id").get<std::string>();
  r.pathology = PathologyId::parse(j.at("pathology").get<std::string>());
  r.probability = j.at("probability").get<double>();
  r.decision = polarity(j.at("decision").get<std::string>());
  r.truth = polarity(j.at("truth").get<std::string>());
  r.cell = parse_cell(j.at("cell").get<std::string>());
  if (r.cell != cell_of(r.decision, r.truth)) {
    throw Error(ErrorCode::kInvalidArgument, "inconsistent cell for " + r.image_id);
  }
}

std::vector<InferenceRecord> run_inference(const Model& model, std::span<const ImageRecord> records,
                                           double threshold) {
  std::vector<InferenceRecord> out;
  out.reserve(records.size() * kPathologyCount);
  for (const auto& rec : records) {
    const Classification cls = classify_image(model, rec.pixels, threshold);
    for (PathologyId p : PathologyId::all()) {
      InferenceRecord r;
      r.image_id = rec.image_id;
      r.pathology = p;
      r.probability = cls.probability[p.index()];
      r.decision = cls.positive[p.index()];
      r.truth = rec.positive(p);
      r.cell = cell_of(r.decision, r.truth);
      out.push_back(std::move(r));
    }
  }
  return out;
}

void write_inference_log(const std::filesystem::path& path, std::span<const InferenceRecord> records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  for (const auto& r : records) out << nlohmann::json(r).dump() << '\n';
}

std::vector<InferenceRecord> read_inference_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<InferenceRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(nlohmann::json::parse(line).get<InferenceRecord>());
  }
  return out;
}

std::set<std::string>& CellSets::operator[](Cell c) {
  switch (c) {
    case Cell::kTP: return tp;
    case Cell::kFP: return fp;
    case Cell::kTN: return tn;
    case Cell::kFN: break;
  }
  return fn;
}

const std::set<std::string>& CellSets::operator[](Cell c) const {
  return const_cast<CellSets&>(*this)[c];
}

std::vector<std::string> CellSets::failed() const {
  std::vector<std::string> out;
  std::set_union(fp.begin(), fp.end(), fn.begin(), fn.end(), std::back_inserter(out));
  return out;
}

std::optional<Cell> CellSets::find(const std::string& id) const {
  for (Cell c : kAllCells) {
    if ((*this)[c].count(id)) return c;
  }
  return std::nullopt;
}

CellCounts CellSets::counts() const {
  return {static_cast<std::int64_t>(tp.size()), static_cast<std::int64_t>(fp.size()),
          static_cast<std::int64_t>(tn.size()), static_cast<std::int64_t>(fn.size())};
}

void ConfusionPartition::exclude(PathologyId p, std::span<const std::string> ids) {
  CellSets& sets = (*this)[p];
  for (const auto& id : ids) {
    for (Cell c : kAllCells) sets[c].erase(id);
  }
}

void ConfusionPartition::move(PathologyId p, const std::string& id, Cell to) {
  CellSets& sets = (*this)[p];
  auto from = sets.find(id);
  if (!from) {
    throw Error(ErrorCode::kNotFound, id + " is not in the " + std::string(p.name()) + " partition");
  }
  sets[*from].erase(id);
  sets[to].insert(id);
}

nlohmann::json to_json(const ConfusionPartition& partition) {
  nlohmann::json j = nlohmann::json::object();
  for (PathologyId p : PathologyId::all()) {
    const CellSets& s = partition[p];
    nlohmann::json cells = nlohmann::json::object();
    for (Cell c : kAllCells) cells[std::string(to_string(c))] = s[c];
    j[std::string(p.name())] = std::move(cells);
  }
  return j;
}

ConfusionPartition partition_confusion(std::span<const InferenceRecord> records) {
  ConfusionPartition partition;
  for (const auto& r : records) {
    if (r.cell != cell_of(r.decision, r.truth)) {
      throw Error(ErrorCode::kInvalidArgument, "inconsistent cell for " + r.image_id);
    }
    CellSets& sets = partition[r.pathology];
    if (sets.find(r.image_id)) {
      throw Error(ErrorCode::kDuplicateRecord, "duplicate record (" + r.image_id + ", " +
                                                   std::string(r.pathology.name()) + ")");
    }
    sets[r.cell].insert(r.image_id);
  }
  return partition;
}

namespace {

MetricValue ratio(std::int64_t hit, std::int64_t miss) {
  if (hit < 0 || miss < 0) throw Error(ErrorCode::kInvalidArgument, "negative confusion counts");
  if (hit + miss == 0) return {0.0, false};
  return {100.0 * static_cast<double>(hit) / static_cast<double>(hit + miss), true};
}

}  // namespace

MetricValue compute_ppv(const CellCounts& counts) {
  if (counts.tn < 0 || counts.fn < 0) throw Error(ErrorCode::kInvalidArgument, "negative confusion counts");
  return ratio(counts.tp, counts.fp);
}

MetricValue compute_npv(const CellCounts& counts) {
  if (counts.tp < 0 || counts.fp < 0) throw Error(ErrorCode::kInvalidArgument, "negative confusion counts");
  return ratio(counts.tn, counts.fn);
}

MetricsReport build_report(const ConfusionPartition& partition, ReportProvenance provenance) {
  MetricsReport report;
  report.provenance = std::move(provenance);
  for (PathologyId p : PathologyId::all()) {
    PathologyMetrics& row = report.rows[p.index()];
    row.pathology = p;
    row.counts = partition[p].counts();
    row.ppv = compute_ppv(row.counts);
    row.npv = compute_npv(row.counts);
  }
  return report;
}

std::string format_percent(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  return buf;
}

void to_json(nlohmann::json& j, const MetricsReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"pathology", std::string(row.pathology.name())},
                    {"tp", row.counts.tp},
                    {"fp", row.counts.fp},
                    {"tn", row.counts.tn},
                    {"fn", row.counts.fn},
                    {"ppv", row.ppv.value},
                    {"npv", row.npv.value},
                    {"ppv_display", format_percent(row.ppv.value)},
                    {"npv_display", format_percent(row.npv.value)},
                    {"ppv_undefined", !row.ppv.defined},
                    {"npv_undefined", !row.npv.defined}});
  }
  j = {{"provenance",
        {{"model", report.provenance.model},
         {"checkpoint_id", report.provenance.checkpoint_id},
         {"split_id", report.provenance.split_id},
         {"timestamp", report.provenance.timestamp}}},
       {"pathologies", std::move(rows)}};
}

void from_json(const nlohmann::json& j, MetricsReport& report) {
  const auto& prov = j.at("provenance");
  report.provenance.model = prov.value("model", "");
  report.provenance.checkpoint_id = prov.value("checkpoint_id", "");
  report.provenance.split_id = prov.value("split_id", "");
  report.provenance.timestamp = prov.value("timestamp", "");
  const auto& rows = j.at("pathologies");
  if (rows.size() != kPathologyCount) {
    throw Error(ErrorCode::kInvalidArgument, "report must list all 14 pathologies");
  }
  for (const auto& row : rows) {
    PathologyId p = PathologyId::parse(row.at("pathology").get<std::string>());
    PathologyMetrics& m = report.rows[p.index()];
    m.pathology = p;
    m.counts = {row.at("tp").get<std::int64_t>(), row.at("fp").get<std::int64_t>(),
                row.at("tn").get<std::int64_t>(), row.at("fn").get<std::int64_t>()};
    m.ppv = {row.at("ppv").get<double>(), !row.at("ppv_undefined").get<bool>()};
    m.npv = {row.at("npv").get<double>(), !row.at("npv_undefined").get<bool>()};
  }
}

std::string render_report_table(const MetricsReport& report) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-28s %8s %8s %7s %7s %7s %7s\n", "Pathology", "PPV", "NPV",
                "TP", "FP", "TN", "FN");
  out << line;
  for (const auto& row : report.rows) {
    auto cell = [](const MetricValue& m) { return format_percent(m.value) + (m.defined ? "" : "*"); };
    std::snprintf(line, sizeof(line), "%-28s %8s %8s %7lld %7lld %7lld %7lld\n",
                  std::string(row.pathology.name()).c_str(), cell(row.ppv).c_str(),
                  cell(row.npv).c_str(), static_cast<long long>(row.counts.tp),
                  static_cast<long long>(row.counts.fp), static_cast<long long>(row.counts.tn),
                  static_cast<long long>(row.counts.fn));
    out << line;
  }
  out << "* empty denominator; reported as 0.00\n";
  return out.str();
}

std::string utc_timestamp(std::int64_t epoch_ms) {
  const std::time_t secs = static_cast<std::time_t>(epoch_ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(epoch_ms % 1000));
  return buf;
}

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace tfsl
