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
#include "tfsl/data_ingest.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "tfsl/error.h"
#include "tfsl/hash.h"
#include "tfsl/random.h"

namespace tfsl {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

// Blank, 0, 1 and -1 in any float spelling.
bool parse_label_cell(const std::string& raw, UncertainPolicy policy, Label& out) {
  std::string cell = trim(raw);
  if (cell.empty()) {
    out = Label::kNegative;
    return true;
  }
  double value = 0.0;
  auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || end != cell.data() + cell.size()) return false;
  if (value == 1.0) {
    out = Label::kPositive;
  } else if (value == 0.0) {
    out = Label::kNegative;
  } else if (value == -1.0) {
    out = policy == UncertainPolicy::kTreatAsPositive ? Label::kPositive : Label::kNegative;
  } else {
    return false;
  }
  return true;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

cv::Mat to_rgb_float(const cv::Mat& decoded) {
  double scale = 1.0;
  switch (decoded.depth()) {
    case CV_8U: scale = 1.0 / 255.0; break;
    case CV_16U: scale = 1.0 / 65535.0; break;
    case CV_32F: scale = 1.0; break;
    default:
      throw Error(ErrorCode::kDecode, "unsupported image bit depth");
  }
  cv::Mat rgb;
  switch (decoded.channels()) {
    case 1: cv::cvtColor(decoded, rgb, cv::COLOR_GRAY2RGB); break;
    case 3: cv::cvtColor(decoded, rgb, cv::COLOR_BGR2RGB); break;
    case 4: cv::cvtColor(decoded, rgb, cv::COLOR_BGRA2RGB); break;
    default:
      throw Error(ErrorCode::kDecode, "unsupported channel count");
  }
  cv::Mat out;
  rgb.convertTo(out, CV_32FC3, scale);
  return out;
}

Image finish(const cv::Mat& rgb, const PreprocessConfig& cfg) {
  cv::Mat resized;
  if (rgb.rows == cfg.resize_to && rgb.cols == cfg.resize_to) {
    resized = rgb;
  } else {
    int interp = (rgb.rows > cfg.resize_to || rgb.cols > cfg.resize_to) ? cv::INTER_AREA
                                                                          : cv::INTER_LINEAR;
    cv::resize(rgb, resized, cv::Size(cfg.resize_to, cfg.resize_to), 0, 0, interp);
  }
  const int offset = (cfg.resize_to - cfg.crop_to) / 2;
  cv::Mat cropped = resized(cv::Rect(offset, offset, cfg.crop_to, cfg.crop_to));

  Image image(3, cfg.crop_to, cfg.crop_to);
  for (int y = 0; y < cfg.crop_to; ++y) {
    const auto* row = cropped.ptr<cv::Vec3f>(y);
    for (int x = 0; x < cfg.crop_to; ++x) {
      for (int c = 0; c < 3; ++c) {
        float v = std::clamp(row[x][c], 0.0f, 1.0f);
        if (cfg.normalize) v = (v - cfg.mean[c]) / cfg.stddev[c];
        image.at(c, y, x) = v;
      }
    }
  }
  return image;
}

}  // namespace

UncertainPolicy parse_uncertain_policy(std::string_view text) {
  if (text == "negative" || text == "treat-as-negative") return UncertainPolicy::kTreatAsNegative;
  if (text == "positive" || text == "treat-as-positive") return UncertainPolicy::kTreatAsPositive;
  throw Error(ErrorCode::kInvalidArgument, "unknown uncertain-label policy: " + std::string(text));
}

std::string_view to_string(UncertainPolicy policy) {
  return policy == UncertainPolicy::kTreatAsPositive ? "treat-as-positive" : "treat-as-negative";
}

void PreprocessConfig::validate() const {
  if (resize_to <= 0 || crop_to <= 0) {
    throw Error(ErrorCode::kConfig, "preprocess sizes must be positive");
  }
  if (crop_to > resize_to) {
    throw Error(ErrorCode::kConfig, "crop_to (" + std::to_string(crop_to) +
                                        ") exceeds resize_to (" + std::to_string(resize_to) + ")");
  }
  if (crop_mode != "center") {
    throw Error(ErrorCode::kConfig, "unsupported crop mode: " + crop_mode);
  }
  if (normalize && std::any_of(stddev.begin(), stddev.end(), [](float s) { return !(s > 0); })) {
    throw Error(ErrorCode::kConfig, "normalization stddev must be positive");
  }
}

void to_json(nlohmann::json& j, const PreprocessConfig& cfg) {
  j = {{"resize_to", cfg.resize_to}, {"crop_to", cfg.crop_to},  {"crop_mode", cfg.crop_mode},
       {"normalize", cfg.normalize}, {"mean", cfg.mean},        {"stddev", cfg.stddev}};
}

void from_json(const nlohmann::json& j, PreprocessConfig& cfg) {
  cfg.resize_to = j.at("resize_to").get<int>();
  cfg.crop_to = j.at("crop_to").get<int>();
  cfg.crop_mode = j.value("crop_mode", std::string("center"));
  cfg.normalize = j.value("normalize", false);
  if (j.contains("mean")) cfg.mean = j.at("mean").get<std::array<float, 3>>();
  if (j.contains("stddev")) cfg.stddev = j.at("stddev").get<std::array<float, 3>>();
}

std::vector<ImageRecord> load_manifest(const std::filesystem::path& path, UncertainPolicy policy) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open manifest: " + path.string());

  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kManifestSchema, "manifest is empty: " + path.string());
  }
  const auto header = split_csv_line(line);
  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) column.emplace(trim(header[i]), i);

  auto require = [&](std::string_view name) {
    auto it = column.find(std::string(name));
    if (it == column.end()) {
      throw Error(ErrorCode::kManifestSchema, "manifest missing column \"" + std::string(name) + "\"");
    }
    return it->second;
  };
  const std::size_t path_col = require("Path");
  std::array<std::size_t, kPathologyCount> label_cols{};
  for (std::size_t p = 0; p < kPathologyCount; ++p) label_cols[p] = require(kPathologyNames[p]);

  const auto base = path.parent_path();
  std::vector<ImageRecord> records;
  // 1-based data row number, header excluded.
  std::size_t row = 1;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    ImageRecord rec;
    if (path_col >= cells.size() || trim(cells[path_col]).empty()) {
      throw Error(ErrorCode::kManifestRow, "row " + std::to_string(row) + ": missing Path");
    }
    rec.image_id = trim(cells[path_col]);
    rec.source = (base / rec.image_id).string();
    for (std::size_t p = 0; p < kPathologyCount; ++p) {
      const std::string cell = label_cols[p] < cells.size() ? cells[label_cols[p]] : std::string();
      if (!parse_label_cell(cell, policy, rec.labels[p])) {
        throw Error(ErrorCode::kManifestRow,
                    "row " + std::to_string(row) + ": unparseable label \"" + cell +
                        "\" in column \"" + std::string(kPathologyNames[p]) + "\"");
      }
    }
    records.push_back(std::move(rec));
    ++row;
  }
  return records;
}

void write_manifest(const std::filesystem::path& path, std::span<const ImageRecord> records) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write manifest: " + path.string());
  out << "Path";
  for (auto name : kPathologyNames) out << ',' << name;
  out << '\n';
  for (const auto& rec : records) {
    out << csv_escape(rec.image_id);
    for (Label l : rec.labels) {
      out << ',';
      switch (l) {
        case Label::kPositive: out << "1.0"; break;
        case Label::kNegative: out << "0.0"; break;
        case Label::kUncertain: out << "-1.0"; break;
      }
    }
    out << '\n';
  }
}

Image preprocess_image(std::span<const std::uint8_t> raw, const PreprocessConfig& cfg) {
  cfg.validate();
  if (raw.empty()) throw Error(ErrorCode::kDecode, "empty image buffer");
  cv::Mat buffer(1, static_cast<int>(raw.size()), CV_8UC1, const_cast<std::uint8_t*>(raw.data()));
  cv::Mat decoded = cv::imdecode(buffer, cv::IMREAD_UNCHANGED);
  if (decoded.empty()) throw Error(ErrorCode::kDecode, "undecodable image bytes");
  return finish(to_rgb_float(decoded), cfg);
}

Image preprocess_image(const Image& decoded, const PreprocessConfig& cfg) {
  cfg.validate();
  if (decoded.channels != 1 && decoded.channels != 3) {
    throw Error(ErrorCode::kDecode, "expected a 1- or 3-channel image");
  }
  cv::Mat rgb(decoded.height, decoded.width, CV_32FC3);
  for (int y = 0; y < decoded.height; ++y) {
    auto* row = rgb.ptr<cv::Vec3f>(y);
    for (int x = 0; x < decoded.width; ++x) {
      for (int c = 0; c < 3; ++c) row[x][c] = decoded.at(decoded.channels == 3 ? c : 0, y, x);
    }
  }
  return finish(rgb, cfg);
}

void load_images(std::span<ImageRecord> records, const PreprocessConfig& cfg) {
  for (auto& rec : records) {
    std::ifstream in(rec.source, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot open image: " + rec.source);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    try {
      rec.pixels = preprocess_image(bytes, cfg);
    } catch (const Error& e) {
      throw Error(e.code(), rec.image_id + ": " + e.what());
    }
  }
}

void to_json(nlohmann::json& j, const DatasetSplit& split) {
  j = {{"split_id", split.split_id}, {"train_ids", split.train_ids}, {"eval_ids", split.eval_ids}};
}

void from_json(const nlohmann::json& j, DatasetSplit& split) {
  split.split_id = j.at("split_id").get<std::string>();
  split.train_ids = j.at("train_ids").get<std::vector<std::string>>();
  split.eval_ids = j.at("eval_ids").get<std::vector<std::string>>();
}

DatasetSplit split_dataset(std::span<const ImageRecord> records, SplitFractions fractions,
                           std::uint64_t seed) {
  if (records.empty()) throw Error(ErrorCode::kEmptyInput, "cannot split an empty dataset");
  if (fractions.train < 0 || fractions.eval < 0 ||
      std::abs(fractions.train + fractions.eval - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "split fractions must be non-negative and sum to 1");
  }
  std::vector<std::string> ids;
  ids.reserve(records.size());
  for (const auto& r : records) ids.push_back(r.image_id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw Error(ErrorCode::kDuplicateRecord, "duplicate image ids in dataset");
  }

  Fnv1a h;
  h.update("split:" + std::to_string(seed) + ":" + std::to_string(fractions.train));
  for (const auto& id : ids) h.update(id + "\n");

  Rng rng(seed);
  rng.shuffle(ids);
  const auto n_train = static_cast<std::size_t>(std::llround(fractions.train * ids.size()));

  DatasetSplit split;
  split.split_id = h.hex();
  split.train_ids.assign(ids.begin(), ids.begin() + n_train);
  split.eval_ids.assign(ids.begin() + n_train, ids.end());
  std::sort(split.train_ids.begin(), split.train_ids.end());
  std::sort(split.eval_ids.begin(), split.eval_ids.end());
  return split;
}

std::vector<ImageRecord> select_records(std::span<const ImageRecord> records,
                                        std::span<const std::string> ids) {
  std::unordered_map<std::string_view, const ImageRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.image_id, &r);
  std::vector<ImageRecord> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(ErrorCode::kNotFound, "unknown image id: " + id);
    out.push_back(*it->second);
  }
  return out;
}

}  // namespace tfsl
