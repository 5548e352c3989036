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
#include "tfsl/loop_service.h"

#include <algorithm>
#include <cstdio>

#include "tfsl/checkpoint.h"
#include "tfsl/error.h"
#include "tfsl/hash.h"

namespace tfsl {


std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kConfirmFP: return "confirm-FP";
    case Verdict::kConfirmFN: return "confirm-FN";
    case Verdict::kBaselineCorrect: return "baseline-correct";
  }
  return "?";
}

Verdict parse_verdict(std::string_view text) {
  if (text == "confirm-FP") return Verdict::kConfirmFP;
  if (text == "confirm-FN") return Verdict::kConfirmFN;
  if (text == "baseline-correct") return Verdict::kBaselineCorrect;
  throw Error(ErrorCode::kInvalidArgument, "malformed verdict: " + std::string(text));
}

void to_json(nlohmann::json& j, const RelabelEvent& e) {
  j = {{"event_id", e.event_id},
       {"image_id", e.image_id},
       {"pathology", std::string(e.pathology.name())},
       {"verdict", std::string(to_string(e.verdict))},
       {"reviewer_id", e.reviewer_id},
       {"timestamp_ms", e.timestamp_ms}};
}

void from_json(const nlohmann::json& j, RelabelEvent& e) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "relabel event must be an object");
  e.event_id = j.value("event_id", "");
  if (!j.contains("image_id") || !j.contains("pathology") || !j.contains("verdict")) {
    throw Error(ErrorCode::kInvalidArgument, "relabel event needs image_id, pathology and verdict");
  }
  e.image_id = j.at("image_id").get<std::string>();
  e.pathology = PathologyId::parse(j.at("pathology").get<std::string>());
  e.verdict = parse_verdict(j.at("verdict").get<std::string>());
  e.reviewer_id = j.value("reviewer_id", "");
  e.timestamp_ms = j.value("timestamp_ms", std::int64_t{0});
}

std::string_view to_string(JobStatus status) {
  switch (status) {
    case JobStatus::kQueued: return "queued";
    case JobStatus::kRunning: return "running";
    case JobStatus::kDone: return "done";
    case JobStatus::kFailed: return "failed";
  }
  return "?";
}

namespace {

JobStatus parse_status(std::string_view text) {
  for (JobStatus s : {JobStatus::kQueued, JobStatus::kRunning, JobStatus::kDone, JobStatus::kFailed}) {
    if (to_string(s) == text) return s;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown job status: " + std::string(text));
}

}  // namespace

void to_json(nlohmann::json& j, const RetrainRequest& r) {
  j = {{"pathology", r.pathology ? std::string(r.pathology->name()) : std::string("all")},
       {"mode", std::string(to_string(r.mode))},
       {"config", r.config},
       {"n_train", r.n_train},
       {"support_size", r.support_size}};
}

void from_json(const nlohmann::json& j, RetrainRequest& r) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "retrain request must be an object");
  const std::string pathology = j.value("pathology", "all");
  if (pathology == "all") {
    r.pathology.reset();
    r.mode = TrainMode::kIncremental;
  } else {
    r.pathology = PathologyId::parse(pathology);
    r.mode = TrainMode::kTfsl;
  }
  if (j.contains("mode")) r.mode = parse_train_mode(j.at("mode").get<std::string>());
  if (j.contains("config")) {
    TrainConfig cfg = r.config;
    from_json(j.at("config"), cfg);
    r.config = cfg;
  }
  r.n_train = j.value("n_train", r.n_train);
  r.support_size = j.value("support_size", r.support_size);
}

void to_json(nlohmann::json& j, const RetrainJob& job) {
  j = {{"job_id", job.job_id},
       {"request", job.request},
       {"status", std::string(to_string(job.status))},
       {"enqueued_at", job.enqueued_at},
       {"started_at", job.started_at},
       {"finished_at", job.finished_at}};
  if (!job.error.empty()) j["error"] = job.error;
  if (!job.result.is_null()) j["result"] = job.result;
}

void to_json(nlohmann::json& j, const FailurePage& page) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& item : page.items) {
    items.push_back({{"image_id", item.baseline.image_id},
                     {"pathology", std::string(item.baseline.pathology.name())},
                     {"probability", item.baseline.probability},
                     {"decision", item.baseline.decision ? "positive" : "negative"},
                     {"truth", item.baseline.truth ? "positive" : "negative"},
                     {"baseline_cell", std::string(to_string(item.baseline.cell))},
                     {"effective_truth", item.effective_truth ? "positive" : "negative"},
                     {"cell", std::string(to_string(item.effective_cell))},
                     {"verdict", item.verdict ? nlohmann::json(std::string(to_string(*item.verdict)))
                                              : nlohmann::json(nullptr)}});
  }
  j = {{"items", std::move(items)},
       {"page", page.page},
       {"page_size", page.page_size},
       {"total", page.total}};
}

JobResult run_repair_job(const RetrainJob& job, const JobContext& ctx) {
  RepairOptions options;
  options.mode = job.request.mode;
  options.train = job.request.config;
  options.triplets.n_train = job.request.n_train;
  options.triplets.seed = job.request.config.seed;
  options.support_size = job.request.support_size;

  std::vector<PathologyId> pathologies;
  if (job.request.pathology) {
    pathologies.push_back(*job.request.pathology);
  } else {
    for (PathologyId p : PathologyId::all()) pathologies.push_back(p);
  }
  RepairOutcome outcome =
      run_repair(ctx.baseline, ctx.partition, pathologies, ctx.images, options, ctx.baseline_provenance);

  JobResult result;
  std::filesystem::create_directories(ctx.checkpoint_dir);
  for (const auto& m : outcome.models) {
    save_checkpoint(m.trained.model, ctx.checkpoint_dir / (m.checkpoint_id + ".ckpt"));
    result.checkpoint_ids.push_back(m.checkpoint_id);
  }
  result.report = outcome.after;
  result.comparison = to_json(outcome.comparison);
  return result;
}

LoopService::LoopService(ServiceInputs inputs, ServiceOptions options)
    : inputs_(std::move(inputs)), options_(std::move(options)) {
  baseline_partition_ = partition_confusion(inputs_.inference);
  for (const auto& r : inputs_.inference) baseline_index_[{r.image_id, r.pathology.index()}] = &r;
  ReportProvenance prov = inputs_.baseline_provenance;
  prov.timestamp = utc_timestamp(inputs_.baseline_timestamp_ms);
  baseline_report_ = build_report(baseline_partition_, prov);

  std::filesystem::create_directories(options_.state_dir / "checkpoints");
  replay();
  log_.open(options_.state_dir / "events.jsonl", std::ios::app);
  if (!log_) throw Error(ErrorCode::kIo, "cannot open event log in " + options_.state_dir.string());

  if (options_.start_worker) {
    std::unique_lock lock(mutex_);
    for (const auto& job : std::vector<RetrainJob>(jobs_)) {
      if (job.status == JobStatus::kRunning) {
        append_event({{"type", "job_finished"},
                      {"job_id", job.job_id},
                      {"status", "failed"},
                      {"error", "interrupted by service restart"},
                      {"timestamp_ms", now()}});
      }
    }
    lock.unlock();
    worker_ = std::thread([this] { worker_loop(); });
  }
}

LoopService::~LoopService() { stop(); }

std::int64_t LoopService::now() const { return options_.clock ? options_.clock() : now_ms(); }

void LoopService::append_event(const nlohmann::json& event) {
  nlohmann::json e = event;
  e["seq"] = event_seq_ + 1;
  apply_event(e);
  log_ << e.dump() << '\n';
  log_.flush();
  if (!log_) throw Error(ErrorCode::kIo, "event log write failed");
}

void LoopService::apply_event(const nlohmann::json& e) {
  const std::string type = e.at("type").get<std::string>();
  if (type == "relabel") {
    RelabelEvent ev = e.at("event").get<RelabelEvent>();
    const RelabelKey key{ev.image_id, ev.pathology.index()};
    auto it = effective_relabel_.find(key);
    if (it == effective_relabel_.end()) {
      effective_relabel_[key] = ev.event_id;
    } else {
      const RelabelEvent& cur = relabels_.at(it->second);
      if (std::tie(ev.timestamp_ms, ev.event_id) > std::tie(cur.timestamp_ms, cur.event_id)) {
        it->second = ev.event_id;
      }
    }
    relabels_[ev.event_id] = std::move(ev);
  } else if (type == "job_enqueued") {
    RetrainJob job;
    job.job_id = e.at("job_id").get<std::string>();
    job.request = e.at("request").get<RetrainRequest>();
    job.enqueued_at = e.at("timestamp_ms").get<std::int64_t>();
    job_index_[job.job_id] = jobs_.size();
    jobs_.push_back(std::move(job));
  } else if (type == "job_started") {
    for (const auto& j : jobs_) {
      if (j.status == JobStatus::kRunning) {
        throw Error(ErrorCode::kConflict, "second job started while " + j.job_id + " is running");
      }
    }
    RetrainJob& job = jobs_.at(job_index_.at(e.at("job_id").get<std::string>()));
    if (job.status != JobStatus::kQueued) throw Error(ErrorCode::kConflict, "job " + job.job_id + " not queued");
    job.status = JobStatus::kRunning;
    job.started_at = e.at("timestamp_ms").get<std::int64_t>();
  } else if (type == "job_finished") {
    RetrainJob& job = jobs_.at(job_index_.at(e.at("job_id").get<std::string>()));
    if (job.status != JobStatus::kRunning) throw Error(ErrorCode::kConflict, "job " + job.job_id + " not running");
    job.status = parse_status(e.at("status").get<std::string>());
    job.finished_at = e.at("timestamp_ms").get<std::int64_t>();
    job.error = e.value("error", "");
    job.result = e.value("result", nlohmann::json());
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown event type: " + type);
  }
  event_seq_ = std::max(event_seq_, e.at("seq").get<std::uint64_t>());
}

void LoopService::replay() {
  std::ifstream in(options_.state_dir / "events.jsonl");
  if (!in) return;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      apply_event(nlohmann::json::parse(line));
    } catch (const std::exception& ex) {
      throw Error(ErrorCode::kIo, "event log line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
}

std::vector<PathologyId> LoopService::pathologies() const {
  std::vector<PathologyId> out;
  for (PathologyId p : PathologyId::all()) {
    if (baseline_partition_[p].counts().total() > 0) out.push_back(p);
  }
  return out;
}

std::optional<Verdict> LoopService::verdict_locked(const std::string& image_id, PathologyId p) const {
  auto it = effective_relabel_.find({image_id, p.index()});
  if (it == effective_relabel_.end()) return std::nullopt;
  return relabels_.at(it->second).verdict;
}

ConfusionPartition LoopService::effective_partition_locked() const {
  ConfusionPartition partition = baseline_partition_;
  for (const auto& [key, event_id] : effective_relabel_) {
    const InferenceRecord& rec = *baseline_index_.at(key);
    const Verdict v = relabels_.at(event_id).verdict;
    const bool truth = v == Verdict::kConfirmFP   ? false
                       : v == Verdict::kConfirmFN ? true
                                                  : rec.decision;
    partition.move(rec.pathology, rec.image_id, cell_of(rec.decision, truth));
  }
  return partition;
}

ConfusionPartition LoopService::effective_partition() const {
  std::shared_lock lock(mutex_);
  return effective_partition_locked();
}

FailurePage LoopService::list_failures(PathologyId pathology, std::size_t page,
                                       std::optional<std::size_t> page_size) const {
  std::shared_lock lock(mutex_);
  const ConfusionPartition partition = effective_partition_locked();
  const auto failed = partition[pathology].failed();

  FailurePage out;
  out.page = page;
  out.page_size = page_size.value_or(options_.default_page_size);
  if (out.page_size == 0) throw Error(ErrorCode::kInvalidArgument, "page_size must be positive");
  out.total = failed.size();
  const std::size_t begin = std::min(failed.size(), page * out.page_size);
  const std::size_t end = std::min(failed.size(), begin + out.page_size);
  for (std::size_t i = begin; i < end; ++i) {
    const InferenceRecord& rec = *baseline_index_.at({failed[i], pathology.index()});
    FailureItem item;
    item.baseline = rec;
    item.effective_cell = *partition[pathology].find(failed[i]);
    item.effective_truth = truth_of(item.effective_cell);
    item.verdict = verdict_locked(failed[i], pathology);
    out.items.push_back(std::move(item));
  }
  return out;
}

std::string LoopService::submit_relabel(RelabelEvent event) {
  std::unique_lock lock(mutex_);
  auto rec_it = baseline_index_.find({event.image_id, event.pathology.index()});
  if (rec_it == baseline_index_.end()) {
    throw Error(ErrorCode::kNotFound, "unknown image " + event.image_id + " for " +
                                          std::string(event.pathology.name()));
  }
  const InferenceRecord& rec = *rec_it->second;
  if (event.verdict == Verdict::kConfirmFP && !rec.decision) {
    throw Error(ErrorCode::kInvalidArgument, "confirm-FP needs a positive baseline decision");
  }
  if (event.verdict == Verdict::kConfirmFN && rec.decision) {
    throw Error(ErrorCode::kInvalidArgument, "confirm-FN needs a negative baseline decision");
  }

  if (!event.event_id.empty()) {
    auto existing = relabels_.find(event.event_id);
    if (existing != relabels_.end()) {
      const RelabelEvent& old = existing->second;
      const bool same = old.image_id == event.image_id && old.pathology == event.pathology &&
                        old.verdict == event.verdict && old.reviewer_id == event.reviewer_id &&
                        (event.timestamp_ms == 0 || event.timestamp_ms == old.timestamp_ms);
      if (!same) throw Error(ErrorCode::kConflict, "event id " + event.event_id + " reused");
      return event.event_id;
    }
  }
  if (event.timestamp_ms == 0) event.timestamp_ms = now();
  if (event.event_id.empty()) {
    event.event_id = "rl-" + fnv1a_hex(nlohmann::json(event).dump() + std::to_string(event_seq_ + 1));
  }
  append_event({{"type", "relabel"}, {"event", event}});
  return event.event_id;
}

std::string LoopService::enqueue_retrain(const RetrainRequest& request) {
  request.config.validate();
  if (request.n_train == 0) throw Error(ErrorCode::kInvalidArgument, "n_train must be positive");
  std::unique_lock lock(mutex_);
  const ConfusionPartition partition = effective_partition_locked();
  bool any_failures = false;
  if (request.pathology) {
    any_failures = !partition[*request.pathology].failed().empty();
  } else {
    for (PathologyId p : PathologyId::all()) any_failures = any_failures || !partition[p].failed().empty();
  }
  if (!any_failures) throw Error(ErrorCode::kEmptyInput, "no failed inferences to retrain on");
  for (const auto& job : jobs_) {
    if (job.status == JobStatus::kQueued && job.request == request) {
      throw Error(ErrorCode::kConflict, "identical job " + job.job_id + " already queued");
    }
  }
  char id[32];
  std::snprintf(id, sizeof(id), "job-%06zu", jobs_.size() + 1);
  append_event({{"type", "job_enqueued"}, {"job_id", id}, {"request", request}, {"timestamp_ms", now()}});
  lock.unlock();
  work_cv_.notify_all();
  return id;
}

RetrainJob LoopService::job_status(const std::string& job_id) const {
  std::shared_lock lock(mutex_);
  auto it = job_index_.find(job_id);
  if (it == job_index_.end()) throw Error(ErrorCode::kNotFound, "unknown job " + job_id);
  return jobs_[it->second];
}

std::vector<RetrainJob> LoopService::jobs() const {
  std::shared_lock lock(mutex_);
  return jobs_;
}

nlohmann::json LoopService::latest_report() const {
  std::shared_lock lock(mutex_);
  const RetrainJob* latest = nullptr;
  for (const auto& job : jobs_) {
    if (job.status != JobStatus::kDone) continue;
    if (job.finished_at < inputs_.baseline_timestamp_ms) continue;
    if (!latest || job.finished_at >= latest->finished_at) latest = &job;
  }
  if (!latest) {
    return {{"source", "baseline"}, {"report", baseline_report_}, {"comparison", nullptr}};
  }
  return {{"source", latest->job_id},
          {"report", latest->result.at("report")},
          {"comparison", latest->result.at("comparison")}};
}

const Image& LoopService::image(const std::string& image_id) const { return inputs_.images.get(image_id); }

std::string LoopService::state_json() const {
  std::shared_lock lock(mutex_);
  nlohmann::json relabels = nlohmann::json::array();
  for (const auto& [id, ev] : relabels_) relabels.push_back(ev);
  nlohmann::json effective = nlohmann::json::array();
  for (const auto& [key, id] : effective_relabel_) {
    effective.push_back({{"image_id", key.image_id},
                         {"pathology", std::string(PathologyId(key.pathology).name())},
                         {"event_id", id}});
  }
  nlohmann::json state = {{"jobs", jobs_},
                          {"relabels", std::move(relabels)},
                          {"effective_relabels", std::move(effective)},
                          {"partition", to_json(effective_partition_locked())},
                          {"last_seq", event_seq_}};
  return state.dump();
}

void LoopService::write_snapshot_locked() const {
  nlohmann::json relabels = nlohmann::json::array();
  for (const auto& [id, ev] : relabels_) relabels.push_back(ev);
  nlohmann::json snapshot = {{"last_seq", event_seq_}, {"jobs", jobs_}, {"relabels", std::move(relabels)}};
  const auto tmp = options_.state_dir / "snapshot.json.tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << snapshot.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, options_.state_dir / "snapshot.json");
}

void LoopService::wait_idle() {
  if (!options_.start_worker) return;
  std::unique_lock lock(mutex_);
  idle_cv_.wait(lock, [this] {
    return stopping_ || std::none_of(jobs_.begin(), jobs_.end(), [](const RetrainJob& j) {
             return j.status == JobStatus::kQueued || j.status == JobStatus::kRunning;
           });
  });
}

void LoopService::stop() {
  {
    std::unique_lock lock(mutex_);
    stopping_ = true;
  }
  work_cv_.notify_all();
  idle_cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

void LoopService::worker_loop() {
  const auto checkpoint_dir = options_.state_dir / "checkpoints";
  for (;;) {
    std::unique_lock lock(mutex_);
    RetrainJob* next = nullptr;
    work_cv_.wait(lock, [&] {
      if (stopping_) return true;
      for (auto& job : jobs_) {
        if (job.status == JobStatus::kQueued) {
          next = &job;
          return true;
        }
      }
      return false;
    });
    if (stopping_) return;

    const std::string job_id = next->job_id;
    append_event({{"type", "job_started"}, {"job_id", job_id}, {"timestamp_ms", now()}});
    const RetrainJob job = jobs_[job_index_.at(job_id)];
    const ConfusionPartition partition = effective_partition_locked();
    lock.unlock();

    nlohmann::json finished = {{"type", "job_finished"}, {"job_id", job_id}};
    try {
      const JobContext ctx{inputs_.baseline, partition, inputs_.images, inputs_.baseline_provenance,
                           checkpoint_dir};
      JobResult result = options_.runner(job, ctx);
      finished["status"] = "done";
      finished["result"] = {{"checkpoint_ids", result.checkpoint_ids},
                            {"report", result.report},
                            {"comparison", result.comparison}};
    } catch (const Error& e) {
      finished["status"] = "failed";
      finished["error"] = std::string(error_code_name(e.code())) + ": " + e.what();
    } catch (const std::exception& e) {
      finished["status"] = "failed";
      finished["error"] = std::string("internal: ") + e.what();
    }

    lock.lock();
    const std::int64_t ts = now();
    finished["timestamp_ms"] = ts;
    if (finished.contains("result")) {
      finished["result"]["report"]["provenance"]["timestamp"] = utc_timestamp(ts);
    }
    append_event(finished);
    write_snapshot_locked();
    lock.unlock();
    idle_cv_.notify_all();
  }
}

}  // namespace tfsl
