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
#include "tfsl_cli.h"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tfsl/checkpoint.h"
#include "tfsl/data_ingest.h"
#include "tfsl/error.h"
#include "tfsl/http_api.h"
#include "tfsl/inference_eval.h"
#include "tfsl/repair.h"
#include "tfsl/stats.h"
#include "tfsl/synthetic.h"
#include "tfsl/trainer.h"
#include "tfsl/triplets.h"

namespace tfsl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "missing " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kIo, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

// Resolves --run, falling back to the newest run under --runs-dir.
struct RunSelector {
  std::string run;
  std::string runs_dir = "runs";

  fs::path resolve() const {
    fs::path dir = run.empty() ? latest_run(runs_dir) : fs::path(run);
    if (!fs::exists(dir / "run.json")) throw Error(ErrorCode::kNotFound, "not a run directory: " + dir.string());
    return dir;
  }
};

struct Run {
  fs::path dir;
  json meta;
  DatasetSplit split;

  PreprocessConfig preprocess() const { return meta.at("preprocess").get<PreprocessConfig>(); }
  UncertainPolicy policy() const { return parse_uncertain_policy(meta.at("uncertain_policy").get<std::string>()); }

  std::vector<ImageRecord> records(const std::vector<std::string>& ids) const {
    const auto all = load_manifest(meta.at("manifest").get<std::string>(), policy());
    auto selected = select_records(all, ids);
    load_images(selected, preprocess());
    return selected;
  }
};

Run open_run(const fs::path& dir) {
  Run run{dir, read_json(dir / "run.json"), {}};
  run.split = read_json(dir / "split.json").get<DatasetSplit>();
  return run;
}

// --seed falls back to the seed the run was created with.
std::uint64_t seed_for(const Run& run, const std::optional<std::uint64_t>& seed) {
  return seed ? *seed : run.meta.at("seed").get<std::uint64_t>();
}

std::vector<PathologyId> parse_pathologies(const std::string& text) {
  if (text == "all") {
    const auto all = PathologyId::all();
    return {all.begin(), all.end()};
  }
  return {PathologyId::parse(text)};
}

ReportProvenance baseline_provenance(const Run& run) {
  return read_json(run.dir / "reports" / "baseline.json").get<MetricsReport>().provenance;
}

json models_manifest(const std::vector<RepairedModel>& models, const TrainConfig& cfg) {
  json list = json::array();
  for (const auto& m : models) {
    json ps = json::array();
    for (PathologyId p : m.pathologies) ps.push_back(std::string(p.name()));
    list.push_back({{"checkpoint_id", m.checkpoint_id},
                    {"pathologies", ps},
                    {"loss_trace", m.trained.loss_trace},
                    {"optimizer_steps", m.trained.optimizer_steps}});
  }
  return {{"models", list}, {"train_config", cfg}};
}

std::vector<RepairedModel> load_models(const fs::path& dir) {
  const json manifest = read_json(dir / "models.json");
  std::vector<RepairedModel> models;
  for (const auto& entry : manifest.at("models")) {
    RepairedModel m;
    m.checkpoint_id = entry.at("checkpoint_id").get<std::string>();
    for (const auto& name : entry.at("pathologies")) m.pathologies.push_back(PathologyId::parse(name.get<std::string>()));
    m.trained.model = load_checkpoint(dir / (m.checkpoint_id + ".ckpt"));
    m.trained.loss_trace = entry.at("loss_trace").get<std::vector<double>>();
    models.push_back(std::move(m));
  }
  return models;
}

std::string run_dir_name(std::uint64_t seed) {
  std::string ts = utc_timestamp(now_ms());
  // 2026-01-02T03:04:05.006Z -> 20260102T030405006Z
  ts.erase(std::remove_if(ts.begin(), ts.end(), [](char c) { return c == '-' || c == ':' || c == '.'; }),
           ts.end());
  return ts + "_seed" + std::to_string(seed);
}

// --- subcommands -----------------------------------------------------------

struct SynthArgs {
  std::string out_dir;
  std::string runs_dir = "runs";
  std::size_t n_images = 1200;
  int n_pathologies = 2;
  int image_size = 64;
  std::uint64_t seed = 0;
};

void write_synthetic(const SynthArgs& a, const fs::path& dir) {
  SyntheticSpec spec;
  spec.n_pathologies = a.n_pathologies;
  spec.image_size = a.image_size;
  spec.seed = a.seed;
  const auto records = generate_synthetic_dataset(spec, a.n_images);
  write_synthetic_dataset(dir, spec, records);

  // Pixel statistics of the generator: background around 0.4, markers up
  // to about 0.9.
  PreprocessConfig pp;
  pp.resize_to = a.image_size;
  pp.crop_to = a.image_size;
  pp.normalize = true;
  pp.mean = {0.4f, 0.4f, 0.4f};
  pp.stddev = {0.15f, 0.15f, 0.15f};
  write_json(dir / "preprocess.json", pp);
}

struct IngestArgs {
  std::string manifest;
  std::string runs_dir = "runs";
  std::string uncertain_policy = "treat-as-negative";
  std::string preprocess;
  double train_fraction = 0.3;
  std::uint64_t seed = 0;
};

fs::path cmd_ingest(const IngestArgs& a, std::ostream& out) {
  const fs::path manifest = fs::absolute(a.manifest);
  const UncertainPolicy policy = parse_uncertain_policy(a.uncertain_policy);
  PreprocessConfig pp;
  const fs::path pp_path = a.preprocess.empty() ? manifest.parent_path() / "preprocess.json" : fs::path(a.preprocess);
  if (!a.preprocess.empty() || fs::exists(pp_path)) pp = read_json(pp_path).get<PreprocessConfig>();
  pp.validate();
  if (!(a.train_fraction > 0.0 && a.train_fraction < 1.0)) {
    throw Error(ErrorCode::kConfig, "train fraction must be in (0, 1)");
  }

  auto records = load_manifest(manifest, policy);
  // Decode everything once so unreadable images fail here, not mid-training.
  load_images(records, pp);
  const DatasetSplit split = split_dataset(records, {a.train_fraction, 1.0 - a.train_fraction}, a.seed);

  fs::path dir = fs::path(a.runs_dir) / run_dir_name(a.seed);
  for (int k = 2; fs::exists(dir); ++k) dir = fs::path(a.runs_dir) / (run_dir_name(a.seed) + "_" + std::to_string(k));
  fs::create_directories(dir);
  write_json(dir / "run.json", {{"manifest", manifest.string()},
                                {"uncertain_policy", std::string(to_string(policy))},
                                {"preprocess", pp},
                                {"seed", a.seed},
                                {"records", records.size()}});
  write_json(dir / "split.json", split);
  out << dir.string() << '\n';
  return dir;
}

// With --out only the dataset is written. Without it a run directory is
// created, the dataset goes to <run>/data and is ingested under the same seed.
void cmd_synth(const SynthArgs& a, std::ostream& out) {
  if (!a.out_dir.empty()) {
    write_synthetic(a, a.out_dir);
    out << (fs::path(a.out_dir) / "manifest.csv").string() << '\n';
    return;
  }
  const fs::path staging = fs::path(a.runs_dir) / (".synth_" + run_dir_name(a.seed));
  write_synthetic(a, staging);
  IngestArgs ingest;
  ingest.manifest = (staging / "manifest.csv").string();
  ingest.runs_dir = a.runs_dir;
  ingest.seed = a.seed;
  std::ostringstream sink;
  const fs::path run = cmd_ingest(ingest, sink);
  fs::rename(staging, run / "data");
  json meta = read_json(run / "run.json");
  meta["manifest"] = fs::absolute(run / "data" / "manifest.csv").string();
  write_json(run / "run.json", meta);
  out << run.string() << '\n';
}

struct BaselineArgs {
  RunSelector run;
  std::string checkpoint;
  int epochs = ClassifierTrainConfig{}.epochs;
  double learning_rate = ClassifierTrainConfig{}.learning_rate;
  double recall = 0.1;
  std::optional<double> bias_shift;
  double threshold = 0.5;
  std::optional<std::uint64_t> seed;
};

void cmd_baseline(const BaselineArgs& a, std::ostream& out) {
  const Run run = open_run(a.run.resolve());
  Model model;
  if (!a.checkpoint.empty()) {
    model = load_checkpoint(a.checkpoint);
    if (a.bias_shift) weaken_classifier(model, *a.bias_shift);
  } else {
    const auto train = run.records(run.split.train_ids);
    const std::uint64_t seed = seed_for(run, a.seed);
    model = make_classifier(BackboneConfig{}, run.preprocess(), seed);
    ClassifierTrainConfig cfg;
    cfg.epochs = a.epochs;
    cfg.learning_rate = a.learning_rate;
    cfg.seed = seed;
    pretrain_classifier(model, train, cfg);
    if (a.bias_shift) {
      weaken_classifier(model, *a.bias_shift);
    } else {
      weaken_to_recall(model, train, a.recall);
    }
  }
  const std::string ckpt_id = save_checkpoint(model, run.dir / "baseline.ckpt");

  const auto eval = run.records(run.split.eval_ids);
  const auto inference = run_inference(model, eval, a.threshold);
  write_inference_log(run.dir / "inference.jsonl", inference);
  const MetricsReport report =
      build_report(partition_confusion(inference), {"baseline", ckpt_id, run.split.split_id, utc_timestamp(now_ms())});
  write_json(run.dir / "reports" / "baseline.json", report);
  out << render_report_table(report);
}

struct TripletArgs {
  RunSelector run;
  std::size_t n_train = 150;
  std::string pathology = "all";
  std::optional<std::uint64_t> seed;
};

void cmd_triplets(const TripletArgs& a, std::ostream& out) {
  const Run run = open_run(a.run.resolve());
  const auto partition = partition_confusion(read_inference_log(run.dir / "inference.jsonl"));
  TripletDatasetConfig cfg;
  cfg.n_train = a.n_train;
  cfg.seed = seed_for(run, a.seed);
  const TripletBuild build = build_triplet_sets(partition, parse_pathologies(a.pathology), cfg);
  write_triplets(run.dir / "triplets.jsonl", build.sets);

  json skipped = json::array();
  for (const auto& [name, reason] : build.skipped) skipped.push_back({{"pathology", name}, {"reason", reason}});
  json per = json::object();
  for (PathologyId p : pathologies_in(build.sets)) {
    const TripletSets mine = triplets_for(build.sets, p);
    per[std::string(p.name())] = {{"train", mine.train.size()}, {"val", mine.val.size()}};
  }
  const json summary = {{"n_train", a.n_train}, {"seed", cfg.seed}, {"pathologies", per}, {"skipped", skipped}};
  write_json(run.dir / "triplets_summary.json", summary);
  out << summary.dump(2) << '\n';
}

struct TrainArgs {
  RunSelector run;
  std::string mode = "tfsl";
  std::string pathology = "all";
  std::string config;
  TrainConfig train;
  std::optional<std::uint64_t> seed;
};

void cmd_train(const TrainArgs& a, std::ostream& out) {
  const Run run = open_run(a.run.resolve());
  TrainConfig cfg = a.train;
  cfg.seed = seed_for(run, a.seed);
  if (!a.config.empty()) from_json(read_json(a.config), cfg);
  cfg.validate();
  const TrainMode mode = parse_train_mode(a.mode);

  const TripletSets all = read_triplets(run.dir / "triplets.jsonl");
  TripletSets chosen;
  for (PathologyId p : parse_pathologies(a.pathology)) {
    const TripletSets mine = triplets_for(all, p);
    chosen.train.insert(chosen.train.end(), mine.train.begin(), mine.train.end());
    chosen.val.insert(chosen.val.end(), mine.val.begin(), mine.val.end());
  }
  if (chosen.train.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no training triplets for pathology '" + a.pathology + "'");
  }

  const Model baseline = load_checkpoint(run.dir / "baseline.ckpt");
  const auto eval = run.records(run.split.eval_ids);
  const ImageStore images(eval);
  const auto models = train_repair(baseline, chosen, images, mode, cfg);

  const fs::path dir = run.dir / "models" / std::string(to_string(mode));
  fs::remove_all(dir);
  fs::create_directories(dir);
  for (const auto& m : models) save_checkpoint(m.trained.model, dir / (m.checkpoint_id + ".ckpt"));
  const json manifest = models_manifest(models, cfg);
  write_json(dir / "models.json", manifest);
  out << manifest.dump(2) << '\n';
}

struct EvalArgs {
  RunSelector run;
  std::string mode = "tfsl";
  std::size_t support_size = 64;
  std::optional<std::uint64_t> seed;
};

MetricsReport evaluate_mode(const Run& run, TrainMode mode, std::size_t support_size, std::uint64_t seed) {
  const std::string mode_name(to_string(mode));
  const auto models = load_models(run.dir / "models" / mode_name);
  const auto partition = partition_confusion(read_inference_log(run.dir / "inference.jsonl"));
  const TripletSets triplets = read_triplets(run.dir / "triplets.jsonl");
  const auto eval = run.records(run.split.eval_ids);
  const ImageStore images(eval);

  ReportProvenance prov = baseline_provenance(run);
  RepairReports reports = evaluate_models(models, mode, partition, triplets, support_size, seed, images, prov);
  reports.after.provenance.timestamp = utc_timestamp(now_ms());
  write_json(run.dir / "reports" / (mode_name + "_before.json"), reports.before);
  write_json(run.dir / "reports" / (mode_name + "_after.json"), reports.after);
  return reports.after;
}

void cmd_eval(const EvalArgs& a, std::ostream& out) {
  const Run run = open_run(a.run.resolve());
  out << render_report_table(
      evaluate_mode(run, parse_train_mode(a.mode), a.support_size, seed_for(run, a.seed)));
}

struct CompareArgs {
  RunSelector run;
  std::string mode = "all";
  std::size_t support_size = 64;
  std::optional<std::uint64_t> seed;
};

void cmd_compare(const CompareArgs& a, std::ostream& out) {
  const Run run = open_run(a.run.resolve());
  const fs::path reports = run.dir / "reports";
  std::vector<std::string> modes;
  if (a.mode == "all") {
    for (const char* m : {"tfsl", "incremental"}) {
      if (fs::exists(run.dir / "models" / m / "models.json")) modes.emplace_back(m);
    }
    if (modes.empty()) throw Error(ErrorCode::kNotFound, "no trained models in " + run.dir.string());
  } else {
    modes.emplace_back(to_string(parse_train_mode(a.mode)));
  }
  // Trained but not yet evaluated modes are evaluated with default settings.
  for (const auto& m : modes) {
    if (!fs::exists(reports / (m + "_after.json"))) {
      evaluate_mode(run, parse_train_mode(m), a.support_size, seed_for(run, a.seed));
    }
  }

  std::vector<std::pair<std::string, ReportComparison>> docs;
  for (const auto& m : modes) {
    const auto before = read_json(reports / (m + "_before.json")).get<MetricsReport>();
    const auto after = read_json(reports / (m + "_after.json")).get<MetricsReport>();
    docs.emplace_back(m, compare_reports(before, after));
  }
  if (modes.size() == 2) {
    // Incremental as the reference, TFSL as the treatment.
    const auto incremental = read_json(reports / "incremental_after.json").get<MetricsReport>();
    const auto tfsl = read_json(reports / "tfsl_after.json").get<MetricsReport>();
    docs.emplace_back("tfsl_vs_incremental", compare_reports(incremental, tfsl));
  }
  for (const auto& [name, comparison] : docs) {
    const fs::path path = run.dir / "comparisons" / (name + ".json");
    fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::trunc);
    f << to_json(comparison).dump(2) << '\n';
    out << "== " << name << " (" << path.string() << ")\n" << render_comparison_table(comparison);
  }
}

struct ServeArgs {
  RunSelector run;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string state_dir;
  std::size_t page_size = 20;
  std::optional<std::uint64_t> seed;
};

void cmd_serve(const ServeArgs& a, std::ostream& out) {
  const fs::path dir = a.run.resolve();
  ServiceOptions options;
  options.state_dir = a.state_dir.empty() ? dir / "service" : fs::path(a.state_dir);
  options.default_page_size = a.page_size;
  LoopService service(load_service_inputs(dir), options);
  HttpServer server(service);
  const int port = server.bind(a.host, a.port);
  out << json{{"listening", a.host + ":" + std::to_string(port)}}.dump() << std::endl;
  server.serve();
}

void add_run_options(CLI::App* cmd, RunSelector& sel) {
  cmd->add_option("--run", sel.run, "Run directory (default: newest under --runs-dir)");
  cmd->add_option("--runs-dir", sel.runs_dir, "Directory holding run directories");
}

}  // namespace

fs::path latest_run(const fs::path& runs_dir) {
  std::optional<fs::path> best;
  if (fs::is_directory(runs_dir)) {
    for (const auto& entry : fs::directory_iterator(runs_dir)) {
      if (!entry.is_directory() || !fs::exists(entry.path() / "run.json")) continue;
      if (!best || entry.path().filename() > best->filename()) best = entry.path();
    }
  }
  if (!best) throw Error(ErrorCode::kNotFound, "no run directories under " + runs_dir.string());
  return *best;
}

ServiceInputs load_service_inputs(const fs::path& run_dir) {
  const Run run = open_run(run_dir);
  ServiceInputs inputs;
  inputs.baseline = load_checkpoint(run.dir / "baseline.ckpt");
  inputs.inference = read_inference_log(run.dir / "inference.jsonl");
  const auto eval = run.records(run.split.eval_ids);
  inputs.images = ImageStore(eval);
  inputs.baseline_provenance = baseline_provenance(run);
  inputs.baseline_timestamp_ms = static_cast<std::int64_t>(
      std::chrono::duration_cast<std::chrono::milliseconds>(
          fs::last_write_time(run.dir / "reports" / "baseline.json").time_since_epoch())
          .count());
  return inputs;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Triplet few-shot repair of chest X-ray classifiers"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Write a synthetic CheXpert-format dataset");
  c_synth->add_option("--out", synth.out_dir, "Write only the dataset to this directory");
  c_synth->add_option("--runs-dir", synth.runs_dir, "Where the run directory is created");
  c_synth->add_option("--n-images", synth.n_images, "Number of images")->check(CLI::PositiveNumber);
  c_synth->add_option("--n-pathologies", synth.n_pathologies, "Pathologies with markers")->check(CLI::Range(1, 14));
  c_synth->add_option("--image-size", synth.image_size, "Side length in pixels")->check(CLI::Range(8, 1024));
  c_synth->add_option("--seed", synth.seed, "Random seed");

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Validate a manifest, split it and create a run directory");
  c_ingest->add_option("--manifest", ingest.manifest, "CheXpert-format CSV")->required();
  c_ingest->add_option("--runs-dir", ingest.runs_dir, "Where run directories are created");
  c_ingest->add_option("--uncertain-policy", ingest.uncertain_policy, "treat-as-negative | treat-as-positive");
  c_ingest->add_option("--preprocess", ingest.preprocess, "Preprocessing JSON");
  c_ingest->add_option("--train-fraction", ingest.train_fraction, "Fraction of images for classifier training");
  c_ingest->add_option("--seed", ingest.seed, "Split seed");

  BaselineArgs baseline;
  auto* c_baseline = app.add_subcommand("baseline", "Train or load the baseline and run inference");
  add_run_options(c_baseline, baseline.run);
  c_baseline->add_option("--checkpoint", baseline.checkpoint, "Use this classifier instead of training one");
  c_baseline->add_option("--epochs", baseline.epochs, "Classifier training epochs")->check(CLI::PositiveNumber);
  c_baseline->add_option("--lr", baseline.learning_rate, "Classifier learning rate");
  c_baseline->add_option("--recall", baseline.recall, "Weaken the classifier to this training recall");
  c_baseline->add_option("--bias-shift", baseline.bias_shift, "Weaken by a fixed logit shift instead");
  c_baseline->add_option("--threshold", baseline.threshold, "Decision threshold");
  c_baseline->add_option("--seed", baseline.seed, "Random seed (default: the run's seed)");

  TripletArgs triplets;
  auto* c_triplets = app.add_subcommand("triplets", "Build training and validation triplets");
  add_run_options(c_triplets, triplets.run);
  c_triplets->add_option("--n,--n-train", triplets.n_train, "Training triplets per pathology")->check(CLI::PositiveNumber);
  c_triplets->add_option("--pathology", triplets.pathology, "Pathology name, index or 'all'");
  c_triplets->add_option("--seed", triplets.seed, "Random seed (default: the run's seed)");

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Triplet-train embedding models");
  add_run_options(c_train, train.run);
  c_train->add_option("--mode", train.mode, "tfsl | incremental")->check(CLI::IsMember({"tfsl", "incremental"}));
  c_train->add_option("--pathology", train.pathology, "Pathology name, index or 'all'");
  c_train->add_option("--config", train.config, "TrainConfig JSON; keys present override the flags");
  c_train->add_option("--epochs", train.train.epochs, "Epochs");
  c_train->add_option("--lr", train.train.learning_rate, "Adam learning rate");
  c_train->add_option("--wd", train.train.weight_decay, "Weight decay");
  c_train->add_option("--margin", train.train.margin, "Loss margin");
  c_train->add_option("--batch-size", train.train.batch_size, "Triplets per batch");
  std::string loss_kind(to_string(train.train.loss_kind));
  c_train->add_option("--loss", loss_kind, "margin_ranking | triplet_margin");
  c_train->add_option("--seed", train.seed, "Random seed (default: the run's seed)");

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Reclassify validation failures with trained models");
  add_run_options(c_eval, eval.run);
  c_eval->add_option("--mode", eval.mode, "tfsl | incremental")->check(CLI::IsMember({"tfsl", "incremental"}));
  c_eval->add_option("--support-size", eval.support_size, "Prototype support images per cell")
      ->check(CLI::PositiveNumber);
  c_eval->add_option("--seed", eval.seed, "Random seed (default: the run's seed)");

  CompareArgs compare;
  auto* c_compare = app.add_subcommand("compare", "Write before/after comparison documents");
  add_run_options(c_compare, compare.run);
  c_compare->add_option("--mode", compare.mode, "tfsl | incremental | all")
      ->check(CLI::IsMember({"tfsl", "incremental", "all"}));
  c_compare->add_option("--support-size", compare.support_size, "Prototype support size when evaluating")
      ->check(CLI::PositiveNumber);
  c_compare->add_option("--seed", compare.seed, "Random seed (default: the run's seed)");

  ServeArgs serve;
  auto* c_serve = app.add_subcommand("serve", "Serve the review API over HTTP");
  add_run_options(c_serve, serve.run);
  c_serve->add_option("--host", serve.host, "Bind address");
  c_serve->add_option("--port", serve.port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  c_serve->add_option("--state-dir", serve.state_dir, "Event log directory (default: <run>/service)");
  c_serve->add_option("--page-size", serve.page_size, "Default failures page size")->check(CLI::PositiveNumber);
  c_serve->add_option("--seed", serve.seed, "Unused; accepted for uniformity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (c_synth->parsed()) cmd_synth(synth, out);
    if (c_ingest->parsed()) cmd_ingest(ingest, out);
    if (c_baseline->parsed()) cmd_baseline(baseline, out);
    if (c_triplets->parsed()) cmd_triplets(triplets, out);
    if (c_train->parsed()) {
      train.train.loss_kind = parse_loss_kind(loss_kind);
      cmd_train(train, out);
    }
    if (c_eval->parsed()) cmd_eval(eval, out);
    if (c_compare->parsed()) cmd_compare(compare, out);
    if (c_serve->parsed()) cmd_serve(serve, out);
  } catch (const Error& e) {
    err << json{{"error", {{"code", std::string(error_code_name(e.code()))}, {"message", e.what()}}}}.dump()
        << '\n';
    return kExitPipelineError;
  } catch (const std::exception& e) {
    err << json{{"error", {{"code", "internal"}, {"message", e.what()}}}}.dump() << '\n';
    return kExitPipelineError;
  }
  return kExitOk;
}

}  // namespace tfsl::cli
