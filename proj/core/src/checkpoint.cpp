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
#include "tfsl/checkpoint.h"

#include <cstring>
#include <fstream>
#include <iterator>

#include "tfsl/error.h"
#include "tfsl/hash.h"

namespace tfsl {

namespace {

constexpr char kMagic[8] = {'T', 'F', 'S', 'L', 'C', 'K', 'P', 'T'};

class Writer {
 public:
  template <typename T>
  void put(T value) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
    bytes.insert(bytes.end(), p, p + sizeof(T));
  }
  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    bytes.insert(bytes.end(), p, p + n);
  }
  std::vector<std::uint8_t> bytes;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    T value;
    std::memcpy(&value, take(sizeof(T)), sizeof(T));
    return value;
  }
  const std::uint8_t* take(std::size_t n) {
    if (n > bytes_.size() - pos_) throw Error(ErrorCode::kCorruptCheckpoint, "checkpoint truncated");
    const auto* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

nlohmann::json metadata_for(const Model& model) {
  return {{"format_version", kCheckpointFormatVersion},
          {"head_kind", model.embedding ? "embedding" : "classifier"},
          {"backbone", model.backbone.config()},
          {"feature_dim", model.backbone.feature_dim()},
          {"preprocess", model.preprocess},
          {"provenance", model.provenance}};
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Model& model) {
  Writer w;
  w.put_bytes(kMagic, sizeof(kMagic));
  w.put(kCheckpointFormatVersion);
  const std::string meta = metadata_for(model).dump();
  w.put(static_cast<std::uint64_t>(meta.size()));
  w.put_bytes(meta.data(), meta.size());

  const auto params = model.parameters();
  w.put(static_cast<std::uint32_t>(params.size()));
  for (const Parameter* p : params) {
    w.put(static_cast<std::uint32_t>(p->name.size()));
    w.put_bytes(p->name.data(), p->name.size());
    w.put(static_cast<std::uint32_t>(p->value.rows()));
    w.put(static_cast<std::uint32_t>(p->value.cols()));
    w.put_bytes(p->value.data(), sizeof(double) * static_cast<std::size_t>(p->value.size()));
  }
  Fnv1a h;
  h.update(w.bytes);
  w.put(h.digest());
  return std::move(w.bytes);
}

std::string checkpoint_id(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof(std::uint64_t)) throw Error(ErrorCode::kCorruptCheckpoint, "checkpoint truncated");
  Fnv1a h;
  h.update(bytes.first(bytes.size() - sizeof(std::uint64_t)));
  return h.hex();
}

Model deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const auto* magic = r.take(sizeof(kMagic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorCode::kCorruptCheckpoint, "not a checkpoint file");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointFormatVersion) {
    throw Error(ErrorCode::kCheckpointVersion,
                "checkpoint format version " + std::to_string(version) + " unsupported (reader is " +
                    std::to_string(kCheckpointFormatVersion) + ")");
  }
  if (bytes.size() < sizeof(kMagic) + 4 + 8) throw Error(ErrorCode::kCorruptCheckpoint, "checkpoint truncated");
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + bytes.size() - 8, 8);
  Fnv1a h;
  h.update(bytes.first(bytes.size() - 8));
  if (h.digest() != stored) throw Error(ErrorCode::kCorruptCheckpoint, "checkpoint checksum mismatch");

  const auto meta_len = r.get<std::uint64_t>();
  if (meta_len > r.remaining()) throw Error(ErrorCode::kCorruptCheckpoint, "checkpoint truncated");
  const auto* meta_ptr = reinterpret_cast<const char*>(r.take(meta_len));
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_ptr, meta_ptr + meta_len);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptCheckpoint, std::string("bad checkpoint metadata: ") + e.what());
  }

  Model model{ConvBackbone(meta.at("backbone").get<BackboneConfig>()),
              ClassifierHead(meta.at("feature_dim").get<int>()), std::nullopt,
              meta.at("preprocess").get<PreprocessConfig>(), meta.value("provenance", nlohmann::json::object())};
  if (meta.at("head_kind") == "embedding") model.embedding.emplace(model.backbone.feature_dim());

  auto params = model.parameters();
  const auto count = r.get<std::uint32_t>();
  if (count != params.size()) throw Error(ErrorCode::kCorruptCheckpoint, "tensor count mismatch");
  for (Parameter* p : params) {
    const auto name_len = r.get<std::uint32_t>();
    const auto* name = reinterpret_cast<const char*>(r.take(name_len));
    if (std::string_view(name, name_len) != p->name) {
      throw Error(ErrorCode::kCorruptCheckpoint, "unexpected tensor " + std::string(name, name_len));
    }
    const auto rows = r.get<std::uint32_t>();
    const auto cols = r.get<std::uint32_t>();
    if (rows != p->value.rows() || cols != p->value.cols()) {
      throw Error(ErrorCode::kCorruptCheckpoint, "tensor shape mismatch for " + p->name);
    }
    std::memcpy(p->value.data(), r.take(sizeof(double) * rows * cols), sizeof(double) * rows * cols);
  }
  if (r.remaining() != 8) throw Error(ErrorCode::kCorruptCheckpoint, "trailing bytes in checkpoint");
  return model;
}

std::string save_checkpoint(const Model& model, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write checkpoint: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write: " + path.string());
  return checkpoint_id(bytes);
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open checkpoint: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace tfsl
