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
#include "tfsl/trainer.h"

#include <algorithm>
#include <chrono>
#include <functional>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tfsl/error.h"
#include "tfsl/hash.h"
#include "tfsl/random.h"

namespace tfsl {

ImageStore::ImageStore(std::span<const ImageRecord> records) {
  for (const auto& r : records) add(r.image_id, r.pixels);
}

void ImageStore::add(const std::string& id, Image pixels) { images_[id] = std::move(pixels); }

const Image& ImageStore::get(const std::string& id) const {
  auto it = images_.find(id);
  if (it == images_.end()) throw Error(ErrorCode::kNotFound, "no pixels for image " + id);
  return it->second;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::kConfig, "epochs must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::kConfig, "learning_rate must be finite and non-negative");
  }
  if (!(weight_decay >= 0.0)) throw Error(ErrorCode::kConfig, "weight_decay must be >= 0");
  if (!(margin >= 0.0)) throw Error(ErrorCode::kConfig, "margin must be >= 0");
  if (batch_size < 1) throw Error(ErrorCode::kConfig, "batch_size must be >= 1");
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1 && epsilon > 0)) {
    throw Error(ErrorCode::kConfig, "invalid Adam hyperparameters");
  }
}

nn::AdamConfig TrainConfig::adam() const {
  return {learning_rate, weight_decay, beta1, beta2, epsilon};
}

std::string TrainConfig::fingerprint() const { return fnv1a_hex(nlohmann::json(*this).dump()); }

void to_json(nlohmann::json& j, const TrainConfig& cfg) {
  j = {{"epochs", cfg.epochs},
       {"learning_rate", cfg.learning_rate},
       {"weight_decay", cfg.weight_decay},
       {"margin", cfg.margin},
       {"loss_kind", std::string(to_string(cfg.loss_kind))},
       {"batch_size", cfg.batch_size},
       {"seed", cfg.seed},
       {"backbone_trainable", cfg.backbone_trainable},
       {"beta1", cfg.beta1},
       {"beta2", cfg.beta2},
       {"epsilon", cfg.epsilon}};
}

void from_json(const nlohmann::json& j, TrainConfig& cfg) {
  static const nlohmann::json kKnown = nlohmann::json(TrainConfig{});
  for (const auto& [key, value] : j.items()) {
    if (!kKnown.contains(key)) throw Error(ErrorCode::kInvalidArgument, "unknown train config key: " + key);
  }
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.weight_decay = j.value("weight_decay", cfg.weight_decay);
  cfg.margin = j.value("margin", cfg.margin);
  if (j.contains("loss_kind")) cfg.loss_kind = parse_loss_kind(j.at("loss_kind").get<std::string>());
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.backbone_trainable = j.value("backbone_trainable", cfg.backbone_trainable);
  cfg.beta1 = j.value("beta1", cfg.beta1);
  cfg.beta2 = j.value("beta2", cfg.beta2);
  cfg.epsilon = j.value("epsilon", cfg.epsilon);
}

namespace {

struct Forward {
  ConvBackbone::Trace trace;
  Vector features;
  Vector pre_activation;
  Vector embedding;
};

Forward forward(const Model& model, const Image& image, bool keep_trace) {
  Forward f;
  f.features = model.backbone.forward(image, keep_trace ? &f.trace : nullptr);
  f.embedding = model.embedding->forward(f.features, &f.pre_activation);
  return f;
}

void backward(Model& model, const Forward& f, const Vector& grad_embedding, bool backbone_trainable) {
  Vector grad_features = model.embedding->backward(f.features, f.pre_activation, grad_embedding);
  if (backbone_trainable) model.backbone.backward(f.trace, grad_features);
}

TrainedEmbeddingModel train_triplets(const Model& initial, std::span<const ImageTriplet> triplets,
                                     const ImageStore& images, const TrainConfig& cfg) {
  cfg.validate();
  if (triplets.empty()) throw Error(ErrorCode::kEmptyInput, "no training triplets");
  if (!initial.embedding) throw Error(ErrorCode::kInvalidArgument, "model has no embedding head");

  const auto started = std::chrono::steady_clock::now();
  TrainedEmbeddingModel out{initial, cfg, {}, 0, 0.0};
  Model& model = out.model;
  nn::Adam adam(model.embedding_parameters(cfg.backbone_trainable), cfg.adam());

  std::vector<std::size_t> order(triplets.size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(cfg.seed, 0x5EED0000ULL + static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const double scale = 1.0 / static_cast<double>(end - start);
      adam.zero_grad();
      for (std::size_t k = start; k < end; ++k) {
        const ImageTriplet& t = triplets[order[k]];
        const Forward a = forward(model, images.get(t.anchor_id), cfg.backbone_trainable);
        const Forward p = forward(model, images.get(t.tp_id), cfg.backbone_trainable);
        const Forward n = forward(model, images.get(t.tn_id), cfg.backbone_trainable);
        const TripletObjective obj =
            triplet_objective(cfg.loss_kind, a.embedding, p.embedding, n.embedding, t.checking_label, cfg.margin);
        if (!std::isfinite(obj.loss)) {
          std::ostringstream msg;
          msg << "non-finite loss at epoch " << epoch + 1 << ", anchor " << t.anchor_id
              << " (x1=" << obj.x1 << ", x2=" << obj.x2 << ")";
          throw Error(ErrorCode::kNonFinite, msg.str());
        }
        epoch_loss += obj.loss;
        if (obj.loss > 0.0) {
          backward(model, a, scale * obj.grad_anchor, cfg.backbone_trainable);
          backward(model, p, scale * obj.grad_tp, cfg.backbone_trainable);
          backward(model, n, scale * obj.grad_tn, cfg.backbone_trainable);
        }
      }
      adam.step();
    }
    out.loss_trace.push_back(epoch_loss / static_cast<double>(triplets.size()));
  }
  out.optimizer_steps = adam.steps();
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  model.provenance["train_config"] = cfg;
  model.provenance["train_fingerprint"] = cfg.fingerprint();
  return out;
}

}  // namespace

TrainedEmbeddingModel train_tfsl(const Model& embedding_model, std::span<const ImageTriplet> triplets,
                                 const ImageStore& images, const TrainConfig& cfg) {
  if (!triplets.empty()) {
    const PathologyId p = triplets.front().pathology;
    for (const auto& t : triplets) {
      if (t.pathology != p) {
        throw Error(ErrorCode::kInvalidArgument, "per-pathology training received mixed pathologies");
      }
    }
  }
  auto out = train_triplets(embedding_model, triplets, images, cfg);
  out.model.provenance["train_mode"] = "tfsl";
  return out;
}

TrainedEmbeddingModel train_incremental(const Model& embedding_model,
                                        std::span<const ImageTriplet> triplets,
                                        const ImageStore& images, const TrainConfig& cfg) {
  auto out = train_triplets(embedding_model, triplets, images, cfg);
  out.model.provenance["train_mode"] = "incremental";
  return out;
}

void to_json(nlohmann::json& j, const ClassifierTrainConfig& cfg) {
  j = {{"epochs", cfg.epochs},
       {"learning_rate", cfg.learning_rate},
       {"weight_decay", cfg.weight_decay},
       {"batch_size", cfg.batch_size},
       {"seed", cfg.seed}};
}

std::vector<double> pretrain_classifier(Model& model, std::span<const ImageRecord> records,
                                        const ClassifierTrainConfig& cfg) {
  if (records.empty()) throw Error(ErrorCode::kEmptyInput, "no training images");
  if (cfg.epochs < 1 || cfg.batch_size < 1 || !(cfg.learning_rate > 0)) {
    throw Error(ErrorCode::kConfig, "invalid classifier training config");
  }
  std::vector<Parameter*> params = model.backbone.parameters();
  params.push_back(&model.classifier.weight);
  params.push_back(&model.classifier.bias);
  nn::Adam adam(params, {cfg.learning_rate, cfg.weight_decay, 0.9, 0.999, 1e-8});

  std::vector<double> trace;
  std::vector<std::size_t> order(records.size());
  constexpr double kClamp = 1e-12;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(cfg.seed, 0xC1A55000ULL + static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const double scale = 1.0 / static_cast<double>(end - start);
      adam.zero_grad();
      for (std::size_t k = start; k < end; ++k) {
        const ImageRecord& rec = records[order[k]];
        ConvBackbone::Trace trace_b;
        const Vector features = model.backbone.forward(rec.pixels, &trace_b);
        const Vector probs = model.classifier.probabilities(features);
        Vector grad_logits(static_cast<Eigen::Index>(kPathologyCount));
        double loss = 0.0;
        for (std::size_t p = 0; p < kPathologyCount; ++p) {
          const double y = rec.labels[p] == Label::kPositive ? 1.0 : 0.0;
          const double q = std::clamp(probs[static_cast<Eigen::Index>(p)], kClamp, 1.0 - kClamp);
          loss -= y * std::log(q) + (1.0 - y) * std::log(1.0 - q);
          grad_logits[static_cast<Eigen::Index>(p)] = (probs[static_cast<Eigen::Index>(p)] - y) / kPathologyCount;
        }
        loss /= kPathologyCount;
        if (!std::isfinite(loss)) throw Error(ErrorCode::kNonFinite, "non-finite classifier loss");
        total += loss;
        const Vector grad_features = model.classifier.backward(features, scale * grad_logits);
        model.backbone.backward(trace_b, grad_features);
      }
      adam.step();
    }
    trace.push_back(total / static_cast<double>(records.size()));
  }
  model.provenance["classifier_training"] = cfg;
  return trace;
}

void weaken_classifier(Model& model, double bias_shift) {
  model.classifier.bias.value.array() -= bias_shift;
  model.provenance["bias_shift"] = bias_shift;
}

std::array<double, kPathologyCount> weaken_to_recall(Model& model, std::span<const ImageRecord> calibration,
                                                     double recall) {
  if (!(recall > 0.0 && recall <= 1.0)) throw Error(ErrorCode::kConfig, "recall must be in (0, 1]");
  std::array<std::vector<double>, kPathologyCount> positive_logits;
  for (const auto& rec : calibration) {
    const Vector logits = model.classifier.logits(model.backbone.forward(rec.pixels));
    for (std::size_t p = 0; p < kPathologyCount; ++p) {
      if (rec.labels[p] == Label::kPositive) positive_logits[p].push_back(logits[static_cast<Eigen::Index>(p)]);
    }
  }
  std::array<double, kPathologyCount> shifts{};
  for (std::size_t p = 0; p < kPathologyCount; ++p) {
    auto& v = positive_logits[p];
    if (v.empty()) continue;
    std::sort(v.begin(), v.end(), std::greater<>());
    // Keep the top ceil(recall * n) logits non-negative.
    const auto keep = static_cast<std::size_t>(std::ceil(recall * static_cast<double>(v.size())));
    const double cut = v[std::min(keep, v.size()) - 1];
    shifts[p] = std::max(0.0, cut);
    model.classifier.bias.value(static_cast<Eigen::Index>(p), 0) -= shifts[p];
  }
  model.provenance["weaken_recall"] = recall;
  model.provenance["bias_shifts"] = shifts;
  return shifts;
}

Model make_classifier(const BackboneConfig& backbone_cfg, const PreprocessConfig& preprocess,
                      std::uint64_t seed) {
  ConvBackbone backbone(backbone_cfg);
  backbone.init(seed);
  ClassifierHead head(backbone.feature_dim());
  head.init(seed);
  Model model = build_classifier(std::move(backbone), std::move(head), preprocess);
  model.provenance["init_seed"] = seed;
  return model;
}

}  // namespace tfsl
