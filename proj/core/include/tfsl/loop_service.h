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
#ifndef TFSL_LOOP_SERVICE_H_
#define TFSL_LOOP_SERVICE_H_

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "tfsl/inference_eval.h"
#include "tfsl/model.h"
#include "tfsl/repair.h"
#include "tfsl/trainer.h"

namespace tfsl {

enum class Verdict { kConfirmFP, kConfirmFN, kBaselineCorrect };

std::string_view to_string(Verdict verdict);
Verdict parse_verdict(std::string_view text);

struct RelabelEvent {
  // Client supplied for idempotent resubmission; generated when empty.
  std::string event_id;
  std::string image_id;
  PathologyId pathology{0};
  Verdict verdict = Verdict::kBaselineCorrect;
  std::string reviewer_id;
  // Milliseconds since the epoch; the service clock fills in zero.
  std::int64_t timestamp_ms = 0;
};

void to_json(nlohmann::json& j, const RelabelEvent& e);
void from_json(const nlohmann::json& j, RelabelEvent& e);

enum class JobStatus { kQueued, kRunning, kDone, kFailed };

std::string_view to_string(JobStatus status);

struct RetrainRequest {
  // nullopt retrains on every pathology.
  std::optional<PathologyId> pathology;
  TrainMode mode = TrainMode::kTfsl;
  TrainConfig config;
  std::size_t n_train = 150;
  std::size_t support_size = 64;

  friend bool operator==(const RetrainRequest&, const RetrainRequest&) = default;
};

void to_json(nlohmann::json& j, const RetrainRequest& r);
// Accepts {"pathology": NAME|"all", "mode", "config": {overrides},
// "n_train", "support_size"}; mode defaults to incremental for "all".
void from_json(const nlohmann::json& j, RetrainRequest& r);

struct RetrainJob {
  std::string job_id;
  RetrainRequest request;
  JobStatus status = JobStatus::kQueued;
  std::string error;
  // checkpoint_ids, report and comparison once done.
  nlohmann::json result;
  std::int64_t enqueued_at = 0;
  std::int64_t started_at = 0;
  std::int64_t finished_at = 0;
};

void to_json(nlohmann::json& j, const RetrainJob& job);

struct FailureItem {
  InferenceRecord baseline;
  bool effective_truth = false;
  Cell effective_cell = Cell::kTN;
  std::optional<Verdict> verdict;
};

struct FailurePage {
  std::vector<FailureItem> items;
  std::size_t page = 0;
  std::size_t page_size = 0;
  std::size_t total = 0;
};

void to_json(nlohmann::json& j, const FailurePage& page);

struct JobResult {
  std::vector<std::string> checkpoint_ids;
  MetricsReport report;
  nlohmann::json comparison;
};

struct JobContext {
  const Model& baseline;
  const ConfusionPartition& partition;
  const ImageStore& images;
  const ReportProvenance& baseline_provenance;
  const std::filesystem::path& checkpoint_dir;
};

using JobRunner = std::function<JobResult(const RetrainJob&, const JobContext&)>;

// Triplet build, training, reclassification and comparison via run_repair;
// checkpoints land in the context's checkpoint_dir.
JobResult run_repair_job(const RetrainJob& job, const JobContext& ctx);

struct ServiceInputs {
  Model baseline;
  std::vector<InferenceRecord> inference;
  ImageStore images;
  ReportProvenance baseline_provenance;
  std::int64_t baseline_timestamp_ms = 0;
};

struct ServiceOptions {
  // Holds events.jsonl, snapshot.json and checkpoints/.
  std::filesystem::path state_dir;
  bool start_worker = true;
  std::size_t default_page_size = 20;
  JobRunner runner = run_repair_job;
  std::function<std::int64_t()> clock;
};

// Human-in-the-loop state machine. All mutations are events appended to
// state_dir/events.jsonl; construction replays that log. A single worker
// thread executes retrain jobs one at a time.
class LoopService {
 public:
  LoopService(ServiceInputs inputs, ServiceOptions options);
  ~LoopService();

  LoopService(const LoopService&) = delete;
  LoopService& operator=(const LoopService&) = delete;

  // Pathologies with at least one evaluated record.
  std::vector<PathologyId> pathologies() const;

  // Effective FP ∪ FN for a pathology, sorted by image id; page is 0-based.
  FailurePage list_failures(PathologyId pathology, std::size_t page,
                            std::optional<std::size_t> page_size = std::nullopt) const;

  // Returns the event id. Resubmitting an identical event is a no-op;
  // reusing an id for different content is Error(kConflict).
  std::string submit_relabel(RelabelEvent event);

  // Throws Error(kEmptyInput) with no failures to learn from and
  // Error(kConflict) when an identical job is already queued.
  std::string enqueue_retrain(const RetrainRequest& request);

  RetrainJob job_status(const std::string& job_id) const;
  std::vector<RetrainJob> jobs() const;

  // {"report", "comparison"} for the most recent report; the comparison is
  // null for the baseline.
  nlohmann::json latest_report() const;

  const Image& image(const std::string& image_id) const;
  ConfusionPartition effective_partition() const;

  // Canonical dump of queue, relabels and partition; equal for a live
  // service and one rebuilt from its log.
  std::string state_json() const;

  // Blocks until nothing is queued or running.
  void wait_idle();
  // Stops the worker after the running job, if any, completes.
  void stop();

 private:
  struct RelabelKey {
    std::string image_id;
    std::size_t pathology;
    auto operator<=>(const RelabelKey&) const = default;
  };

  std::int64_t now() const;
  void append_event(const nlohmann::json& event);
  void apply_event(const nlohmann::json& event);
  void replay();
  ConfusionPartition effective_partition_locked() const;
  std::optional<Verdict> verdict_locked(const std::string& image_id, PathologyId p) const;
  void worker_loop();
  void write_snapshot_locked() const;

  ServiceInputs inputs_;
  ServiceOptions options_;
  ConfusionPartition baseline_partition_;
  std::map<RelabelKey, const InferenceRecord*> baseline_index_;
  MetricsReport baseline_report_;

  mutable std::shared_mutex mutex_;
  std::condition_variable_any work_cv_;
  std::condition_variable_any idle_cv_;
  std::ofstream log_;
  std::uint64_t event_seq_ = 0;
  std::map<std::string, RelabelEvent> relabels_;
  std::map<RelabelKey, std::string> effective_relabel_;
  std::vector<RetrainJob> jobs_;
  std::map<std::string, std::size_t> job_index_;
  bool stopping_ = false;
  std::thread worker_;
};

}  // namespace tfsl

#endif  // TFSL_LOOP_SERVICE_H_
