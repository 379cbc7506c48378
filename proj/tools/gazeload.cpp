#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gazeload/dataset.hpp"
#include "gazeload/error.hpp"
#include "gazeload/eval.hpp"
#include "gazeload/forest.hpp"
#include "gazeload/ivt.hpp"
#include "gazeload/mlp.hpp"
#include "gazeload/pipeline.hpp"
#include "gazeload/preprocess.hpp"
#include "gazeload/serve.hpp"
#include "gazeload/session_io.hpp"
#include "gazeload/stream.hpp"
#include "gazeload/synth.hpp"
#include "gazeload/version.hpp"

namespace fs = std::filesystem;
using namespace gazeload;

namespace {

std::string fmt_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
  out.close();
  if (!out) throw GazeError(ErrorCode::IoError, "cannot write " + path);
}

// Reproduction record written next to every command's outputs; `rerun`
// replays the stored argv. No timestamps, so identical runs write identical
// bytes.
void write_cmd_manifest(const std::string& path, const std::string& subcommand,
                        const std::vector<std::string>& argv,
                        const std::vector<std::string>& inputs,
                        const std::vector<std::string>& outputs, uint64_t seed) {
  nlohmann::ordered_json m;
  m["tool"] = "gazeload";
  m["version"] = kVersion;
  m["subcommand"] = subcommand;
  m["argv"] = argv;
  m["seed"] = seed;
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  write_text_file(path, m.dump(2) + "\n");
}

std::string sniff_magic(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GazeError(ErrorCode::IoError, "cannot open " + path);
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4) throw GazeError(ErrorCode::IoError, "file too short: " + path);
  return std::string(magic, 4);
}

ForestGrid resolve_grid(const std::string& spec) {
  if (spec.empty() || spec == "full") return default_grid();
  if (spec == "small") return reduced_grid();
  return parse_grid_file(spec);
}

// Flag bundles shared by the session-consuming subcommands.
struct SessionFlags {
  std::vector<std::string> ins;
  std::vector<std::string> manifests;
};

struct SignalFlags {
  double cutoff_hz = 4.0;
  double ivt_threshold = 30.0;
  double min_fixation_ms = 60.0;
  double merge_gap_ms = 75.0;
  double merge_angle_deg = 0.5;

  PreprocessConfig preprocess() const {
    PreprocessConfig p;
    p.cutoff_hz = cutoff_hz;
    return p;
  }
  IvtConfig ivt() const {
    IvtConfig c;
    c.velocity_threshold_deg_s = ivt_threshold;
    c.min_fixation_ms = min_fixation_ms;
    c.max_gap_ms = merge_gap_ms;
    c.merge_angle_deg = merge_angle_deg;
    return c;
  }
};

void add_signal_flags(CLI::App* sub, SignalFlags& f) {
  sub->add_option("--cutoff-hz", f.cutoff_hz, "low-pass cutoff frequency")
      ->capture_default_str();
  sub->add_option("--ivt-threshold", f.ivt_threshold, "fixation velocity threshold, deg/s")
      ->capture_default_str();
  sub->add_option("--min-fixation-ms", f.min_fixation_ms, "minimum fixation duration")
      ->capture_default_str();
  sub->add_option("--merge-gap-ms", f.merge_gap_ms,
                  "max gap between merged fixation candidates (0 disables merging)")
      ->capture_default_str();
  sub->add_option("--merge-angle-deg", f.merge_angle_deg,
                  "max centroid separation between merged candidates")
      ->capture_default_str();
}

void require_paired_inputs(const SessionFlags& io) {
  if (io.ins.size() != io.manifests.size())
    throw CLI::ValidationError("--in and --manifest must be given the same number of times");
  if (io.ins.empty()) throw CLI::ValidationError("at least one --in/--manifest pair is required");
}

int run_cli(const std::vector<std::string>& args);

// ---------------------------------------------------------------- synth ---

struct SynthCmd {
  std::string out_dir;
  size_t n_low = 10, n_high = 10;
  double effect = 1.0;
  double duration_s = 60.0;
  double sampling_hz = 200.0;
  uint64_t seed = 7;
  bool truth = true;
};

int cmd_synth(const SynthCmd& o, const std::vector<std::string>& argv) {
  CohortConfig cfg;
  cfg.n_low = o.n_low;
  cfg.n_high = o.n_high;
  cfg.effect = o.effect;
  cfg.seed = o.seed;
  cfg.base.duration_s = o.duration_s;
  cfg.base.sampling_hz = o.sampling_hz;

  fs::create_directories(o.out_dir);
  std::vector<std::string> outputs;
  for (const auto& s : generate_cohort(cfg)) {
    const std::string& pid = s.session.meta.participant_id;
    std::string csv = o.out_dir + "/" + pid + ".csv";
    std::string manifest = o.out_dir + "/" + pid + ".manifest.txt";
    save_session(s.session, csv, manifest);
    outputs.push_back(pid + ".csv");
    outputs.push_back(pid + ".manifest.txt");
    if (o.truth) {
      save_fixations_csv(s.truth, o.out_dir + "/" + pid + ".truth.csv");
      outputs.push_back(pid + ".truth.csv");
    }
  }
  write_cmd_manifest(o.out_dir + "/run_manifest.json", "synth", argv, {}, outputs, o.seed);
  std::printf("wrote %zu sessions to %s\n", cfg.n_low + cfg.n_high, o.out_dir.c_str());
  return 0;
}

// ----------------------------------------------------------- preprocess ---

struct PreprocessCmd {
  std::string in, manifest, out;
  SignalFlags sig;
};

int cmd_preprocess(const PreprocessCmd& o, const std::vector<std::string>& argv) {
  GazeSession session = trim_pre_task(load_session(o.in, o.manifest));
  PupilChannels pupil = preprocess_pupil(session, o.sig.preprocess());
  std::string body = "timestamp_us,left_pupil,right_pupil\n";
  for (size_t i = 0; i < session.samples.size(); ++i) {
    body += std::to_string(session.samples[i].timestamp_us);
    body += ',';
    body += fmt_double(pupil.left[i]);
    body += ',';
    body += fmt_double(pupil.right[i]);
    body += '\n';
  }
  write_text_file(o.out, body);
  write_cmd_manifest(o.out + ".run.json", "preprocess", argv, {o.in, o.manifest}, {o.out}, 0);
  return 0;
}

// ------------------------------------------------------------ fixations ---

struct FixationsCmd {
  std::string in, manifest, out;
  SignalFlags sig;
};

int cmd_fixations(const FixationsCmd& o, const std::vector<std::string>& argv) {
  GazeSession session = trim_pre_task(load_session(o.in, o.manifest));
  PupilChannels pupil = preprocess_pupil(session, o.sig.preprocess());
  auto events = detect_fixations(session, pupil, o.sig.ivt());
  save_fixations_csv(events, o.out);
  write_cmd_manifest(o.out + ".run.json", "fixations", argv, {o.in, o.manifest}, {o.out}, 0);
  std::printf("%zu fixations -> %s\n", events.size(), o.out.c_str());
  return 0;
}

// -------------------------------------------------------------- dataset ---

struct DatasetCmd {
  SessionFlags io;
  SignalFlags sig;
  size_t window_len = 2000, stride = 500;
  std::string mode = "flatten";
  std::string out;
  std::string csv_out;
  std::string split_mode;  // empty = no split
  double test_fraction = 0.2;
  std::string out_train, out_test;
  uint64_t seed = 7;
};

int cmd_dataset(const DatasetCmd& o, const std::vector<std::string>& argv) {
  require_paired_inputs(o.io);
  WindowConfig wcfg;
  wcfg.window_len = o.window_len;
  wcfg.stride = o.stride;
  wcfg.input_mode = o.mode == "summary" ? InputMode::Summary : InputMode::Flatten;

  WindowedDataset all;
  all.mode = wcfg.input_mode;
  for (size_t i = 0; i < o.io.ins.size(); ++i) {
    GazeSession session = trim_pre_task(load_session(o.io.ins[i], o.io.manifests[i]));
    PupilChannels pupil = preprocess_pupil(session, o.sig.preprocess());
    auto events = detect_fixations(session, pupil, o.sig.ivt());
    auto channels = sample_aligned_channels(session, events);
    int label = binarize_tlx(session.meta.tlx_mental);
    append_dataset(all, make_windows(channels, label, session.meta.participant_id, wcfg));
  }

  std::vector<std::string> outputs;
  save_dataset(all, o.out);
  outputs.push_back(o.out);
  if (!o.csv_out.empty()) {
    export_dataset_csv(all, o.csv_out);
    outputs.push_back(o.csv_out);
  }
  if (!o.split_mode.empty()) {
    SplitMode mode = o.split_mode == "subject" ? SplitMode::SubjectWise : SplitMode::WindowRandom;
    auto [train, test] = split(all, mode, o.test_fraction, o.seed);
    save_dataset(train, o.out_train);
    save_dataset(test, o.out_test);
    outputs.push_back(o.out_train);
    outputs.push_back(o.out_test);
    std::printf("%zu windows -> %zu train / %zu test\n", all.rows(), train.rows(), test.rows());
  } else {
    std::printf("%zu windows x %zu features -> %s\n", all.rows(), all.inputs.cols, o.out.c_str());
  }
  std::vector<std::string> inputs = o.io.ins;
  inputs.insert(inputs.end(), o.io.manifests.begin(), o.io.manifests.end());
  write_cmd_manifest(o.out + ".run.json", "dataset", argv, inputs, outputs, o.seed);
  return 0;
}

// ------------------------------------------------------------ train-mlp ---

struct TrainMlpCmd {
  std::string data, out;
  std::vector<size_t> hidden = {256, 128, 64, 32, 16};
  double lr = 0.00001;
  size_t epochs = 500;
  size_t batch = 256;
  uint64_t seed = 7;
};

int cmd_train_mlp(const TrainMlpCmd& o, const std::vector<std::string>& argv) {
  WindowedDataset train = load_dataset(o.data);
  MlpConfig cfg;
  cfg.hidden_sizes = o.hidden;
  cfg.learning_rate = o.lr;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch;
  cfg.seed = o.seed;
  MlpModel model = mlp_train(train, cfg);
  save_mlp(model, o.out);
  write_cmd_manifest(o.out + ".run.json", "train-mlp", argv, {o.data}, {o.out}, o.seed);
  std::printf("trained on %zu rows; final loss %s, accuracy %s -> %s\n", train.rows(),
              fmt_double(model.epoch_loss.back()).c_str(),
              fmt_double(model.epoch_accuracy.back()).c_str(), o.out.c_str());
  return 0;
}

// ------------------------------------------------------------- train-rf ---

struct TrainRfCmd {
  std::string data, out, grid, scores;
  size_t folds = 3;
  uint64_t seed = 7;
};

int cmd_train_rf(const TrainRfCmd& o, const std::vector<std::string>& argv) {
  WindowedDataset train = load_dataset(o.data);
  ForestGrid grid = resolve_grid(o.grid);
  GridSearchResult result = grid_search(train, grid, o.folds, o.seed);
  save_forest(result.model, o.out);
  std::string scores = o.scores;
  if (scores.empty())
    scores = (fs::path(o.out).parent_path() / "grid_scores.csv").string();
  export_grid_csv(result.scores, scores);
  write_cmd_manifest(o.out + ".run.json", "train-rf", argv, {o.data}, {o.out, scores}, o.seed);
  std::printf("searched %zu combinations; best %zu with cv accuracy %s -> %s\n",
              result.scores.size(), result.best_index,
              fmt_double(result.scores[result.best_index].mean_accuracy).c_str(), o.out.c_str());
  return 0;
}

// ------------------------------------------------------------- evaluate ---

struct EvaluateCmd {
  std::string model, data, csv_out;
  double threshold = 0.5;
};

int cmd_evaluate(const EvaluateCmd& o, const std::vector<std::string>& argv) {
  WindowedDataset test = load_dataset(o.data);
  std::string magic = sniff_magic(o.model);
  EvalReport report;
  if (magic == "GLMN") {
    report = evaluate(load_mlp(o.model), test, o.threshold);
  } else if (magic == "GLRF") {
    report = evaluate(load_forest(o.model), test);
  } else {
    throw GazeError(ErrorCode::IoError, "unrecognized model format in " + o.model);
  }
  std::fputs(report_table({report}).c_str(), stdout);
  if (!o.csv_out.empty()) {
    write_text_file(o.csv_out, report_csv({report}));
    write_cmd_manifest(o.csv_out + ".run.json", "evaluate", argv, {o.model, o.data}, {o.csv_out},
                       0);
  }
  return 0;
}

// ---------------------------------------------------------------- serve ---

struct ServeCmd {
  std::string model;
  std::string address = "stdio";
  size_t window_len = 2000, stride = 500;
  double sampling_hz = 200.0;
  SignalFlags sig;
};

int cmd_serve(const ServeCmd& o) {
  StreamConfig cfg;
  cfg.window_len = o.window_len;
  cfg.stride = o.stride;
  cfg.sampling_hz = o.sampling_hz;
  cfg.cutoff_hz = o.sig.cutoff_hz;
  cfg.ivt = o.sig.ivt();
  return serve_forever(o.address, o.model, cfg);
}

// ------------------------------------------------------------- pipeline ---

struct PipelineCmd {
  bool synthetic = false;
  size_t n_low = 10, n_high = 10;
  double effect = 1.0;
  double duration_s = 120.0;
  SessionFlags io;
  SignalFlags sig;
  size_t window_len = 2000, stride = 500;
  std::string split_mode = "window";
  double test_fraction = 0.2;
  size_t epochs = 500;
  double lr = 0.00001;
  size_t batch = 256;
  std::string grid = "small";
  size_t folds = 3;
  double threshold = 0.5;
  uint64_t seed = 7;
  std::string out_dir = "gazeload-run";
};

int cmd_pipeline(const PipelineCmd& o, const std::vector<std::string>& argv) {
  PipelineConfig cfg;
  cfg.synthetic = o.synthetic;
  if (o.synthetic) {
    cfg.cohort.n_low = o.n_low;
    cfg.cohort.n_high = o.n_high;
    cfg.cohort.effect = o.effect;
    cfg.cohort.base.duration_s = o.duration_s;
  } else {
    require_paired_inputs(o.io);
    for (size_t i = 0; i < o.io.ins.size(); ++i)
      cfg.inputs.emplace_back(o.io.ins[i], o.io.manifests[i]);
  }
  cfg.preprocess = o.sig.preprocess();
  cfg.ivt = o.sig.ivt();
  cfg.window.window_len = o.window_len;
  cfg.window.stride = o.stride;
  cfg.split_mode = o.split_mode == "subject" ? SplitMode::SubjectWise : SplitMode::WindowRandom;
  cfg.test_fraction = o.test_fraction;
  cfg.mlp.epochs = o.epochs;
  cfg.mlp.learning_rate = o.lr;
  cfg.mlp.batch_size = o.batch;
  cfg.rf_grid = resolve_grid(o.grid);
  cfg.folds = o.folds;
  cfg.threshold = o.threshold;
  cfg.seed = o.seed;
  cfg.out_dir = o.out_dir;
  cfg.argv = argv;

  PipelineResult result = run_pipeline(cfg);
  std::printf("train %zu / test %zu windows\n", result.train_rows, result.test_rows);
  std::fputs(report_table({result.mlp_report, result.rf_report}).c_str(), stdout);
  std::printf("outputs in %s\n", o.out_dir.c_str());
  return 0;
}

// ---------------------------------------------------------------- rerun ---

int cmd_rerun(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw GazeError(ErrorCode::IoError, "cannot open " + manifest_path);
  nlohmann::json m = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (m.is_discarded() || !m.is_object() || !m.contains("argv") || !m["argv"].is_array())
    throw GazeError(ErrorCode::IoError, "not a run manifest: " + manifest_path);
  std::vector<std::string> argv;
  for (const auto& a : m["argv"]) {
    if (!a.is_string())
      throw GazeError(ErrorCode::IoError, "not a run manifest: " + manifest_path);
    argv.push_back(a.get<std::string>());
  }
  if (!argv.empty() && argv[0] == "rerun")
    throw GazeError(ErrorCode::InvalidConfig, "manifest argv may not start with rerun");
  return run_cli(argv);
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"gaze-based cognitive load estimation toolkit"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  app.set_version_flag("--version", kVersion);

  SynthCmd synth_opts;
  auto* synth = app.add_subcommand("synth", "generate a labeled synthetic gaze cohort");
  synth->add_option("--out-dir", synth_opts.out_dir, "output directory")->required();
  synth->add_option("--n-low", synth_opts.n_low, "low-load participants")->capture_default_str();
  synth->add_option("--n-high", synth_opts.n_high, "high-load participants")
      ->capture_default_str();
  synth->add_option("--effect", synth_opts.effect, "class separation multiplier (0 = none)")
      ->capture_default_str();
  synth->add_option("--duration-s", synth_opts.duration_s, "session length")
      ->capture_default_str();
  synth->add_option("--sampling-hz", synth_opts.sampling_hz, "sampling rate")
      ->capture_default_str();
  synth->add_option("--seed", synth_opts.seed, "cohort seed")->capture_default_str();
  synth->add_flag("!--no-truth", synth_opts.truth, "skip ground-truth fixation files");

  PreprocessCmd pre_opts;
  auto* pre = app.add_subcommand("preprocess", "denoise and normalize pupil channels");
  pre->add_option("--in", pre_opts.in, "session CSV")->required();
  pre->add_option("--manifest", pre_opts.manifest, "session manifest")->required();
  pre->add_option("--out", pre_opts.out, "output CSV")->required();
  add_signal_flags(pre, pre_opts.sig);

  FixationsCmd fix_opts;
  auto* fix = app.add_subcommand("fixations", "detect fixation events");
  fix->add_option("--in", fix_opts.in, "session CSV")->required();
  fix->add_option("--manifest", fix_opts.manifest, "session manifest")->required();
  fix->add_option("--out", fix_opts.out, "fixation CSV")->required();
  add_signal_flags(fix, fix_opts.sig);

  DatasetCmd ds_opts;
  auto* ds = app.add_subcommand("dataset", "window sessions into a training dataset");
  ds->add_option("--in", ds_opts.io.ins, "session CSV (repeatable)")->required();
  ds->add_option("--manifest", ds_opts.io.manifests, "session manifest (repeatable)")->required();
  ds->add_option("--out", ds_opts.out, "dataset file")->required();
  ds->add_option("--csv", ds_opts.csv_out, "also export rows as CSV");
  ds->add_option("--window-len", ds_opts.window_len, "window length, samples")
      ->capture_default_str();
  ds->add_option("--stride", ds_opts.stride, "window stride, samples")->capture_default_str();
  ds->add_option("--mode", ds_opts.mode, "row layout")
      ->check(CLI::IsMember({"flatten", "summary"}))
      ->capture_default_str();
  auto* ds_split = ds->add_option("--split", ds_opts.split_mode, "also write a train/test split")
                       ->check(CLI::IsMember({"window", "subject"}));
  ds->add_option("--test-fraction", ds_opts.test_fraction, "test share")->capture_default_str();
  auto* ds_train = ds->add_option("--out-train", ds_opts.out_train, "train dataset file");
  auto* ds_test = ds->add_option("--out-test", ds_opts.out_test, "test dataset file");
  ds_split->needs(ds_train)->needs(ds_test);
  ds_train->needs(ds_split);
  ds_test->needs(ds_split);
  ds->add_option("--seed", ds_opts.seed, "split seed")->capture_default_str();
  add_signal_flags(ds, ds_opts.sig);

  TrainMlpCmd mlp_opts;
  auto* tmlp = app.add_subcommand("train-mlp", "train the neural classifier");
  tmlp->add_option("--data", mlp_opts.data, "training dataset")->required();
  tmlp->add_option("--out", mlp_opts.out, "model file")->required();
  tmlp->add_option("--hidden", mlp_opts.hidden, "hidden layer sizes")
      ->delimiter(',')
      ->capture_default_str();
  tmlp->add_option("--epochs", mlp_opts.epochs, "training epochs")->capture_default_str();
  tmlp->add_option("--lr", mlp_opts.lr, "learning rate")->capture_default_str();
  tmlp->add_option("--batch", mlp_opts.batch, "batch size")->capture_default_str();
  tmlp->add_option("--seed", mlp_opts.seed, "init and shuffle seed")->capture_default_str();

  TrainRfCmd rf_opts;
  auto* trf = app.add_subcommand("train-rf", "grid-search and train the forest classifier");
  trf->add_option("--data", rf_opts.data, "training dataset")->required();
  trf->add_option("--out", rf_opts.out, "model file")->required();
  trf->add_option("--grid", rf_opts.grid, "grid file, or 'full' / 'small'")
      ->capture_default_str();
  trf->add_option("--scores", rf_opts.scores, "grid score CSV (default: next to --out)");
  trf->add_option("--folds", rf_opts.folds, "cross-validation folds")->capture_default_str();
  trf->add_option("--seed", rf_opts.seed, "search seed")->capture_default_str();

  EvaluateCmd ev_opts;
  auto* ev = app.add_subcommand("evaluate", "score a model on a labeled dataset");
  ev->add_option("--model", ev_opts.model, "model file (either family)")->required();
  ev->add_option("--data", ev_opts.data, "labeled dataset")->required();
  ev->add_option("--threshold", ev_opts.threshold, "decision threshold (neural model)")
      ->capture_default_str();
  ev->add_option("--csv", ev_opts.csv_out, "also write the metric row as CSV");

  ServeCmd sv_opts;
  auto* sv = app.add_subcommand("serve", "stream samples through a model");
  sv->add_option("--model", sv_opts.model, "model file")->required();
  sv->add_option("--address", sv_opts.address, "host:port, or 'stdio'")->capture_default_str();
  sv->add_option("--window-len", sv_opts.window_len, "window length, samples")
      ->capture_default_str();
  sv->add_option("--stride", sv_opts.stride, "emit stride, samples")->capture_default_str();
  sv->add_option("--sampling-hz", sv_opts.sampling_hz, "nominal sampling rate")
      ->capture_default_str();
  add_signal_flags(sv, sv_opts.sig);

  PipelineCmd pl_opts;
  auto* pl = app.add_subcommand("pipeline", "run the full chain and report both models");
  pl->add_flag("--synthetic", pl_opts.synthetic, "generate the cohort instead of loading files");
  pl->add_option("--n-low", pl_opts.n_low, "low-load participants (synthetic)")
      ->capture_default_str();
  pl->add_option("--n-high", pl_opts.n_high, "high-load participants (synthetic)")
      ->capture_default_str();
  pl->add_option("--effect", pl_opts.effect, "class separation multiplier (synthetic)")
      ->capture_default_str();
  pl->add_option("--duration-s", pl_opts.duration_s, "session length (synthetic)")
      ->capture_default_str();
  pl->add_option("--in", pl_opts.io.ins, "session CSV (repeatable)");
  pl->add_option("--manifest", pl_opts.io.manifests, "session manifest (repeatable)");
  pl->add_option("--window-len", pl_opts.window_len, "window length, samples")
      ->capture_default_str();
  pl->add_option("--stride", pl_opts.stride, "window stride, samples")->capture_default_str();
  pl->add_option("--split", pl_opts.split_mode, "train/test split unit")
      ->check(CLI::IsMember({"window", "subject"}))
      ->capture_default_str();
  pl->add_option("--test-fraction", pl_opts.test_fraction, "test share")->capture_default_str();
  pl->add_option("--epochs", pl_opts.epochs, "neural training epochs")->capture_default_str();
  pl->add_option("--lr", pl_opts.lr, "neural learning rate")->capture_default_str();
  pl->add_option("--batch", pl_opts.batch, "neural batch size")->capture_default_str();
  pl->add_option("--grid", pl_opts.grid, "forest grid: file, 'full' or 'small'")
      ->capture_default_str();
  pl->add_option("--folds", pl_opts.folds, "cross-validation folds")->capture_default_str();
  pl->add_option("--threshold", pl_opts.threshold, "neural decision threshold")
      ->capture_default_str();
  pl->add_option("--seed", pl_opts.seed, "master seed")->capture_default_str();
  pl->add_option("--out-dir", pl_opts.out_dir, "output directory")->capture_default_str();
  add_signal_flags(pl, pl_opts.sig);

  std::string rerun_manifest;
  auto* rr = app.add_subcommand("rerun", "replay a command from its run manifest");
  rr->add_option("--manifest", rerun_manifest, "run_manifest.json / *.run.json path")->required();

  std::vector<const char*> cargv;
  cargv.push_back("gazeload");
  for (const auto& a : args) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_opts, args);
    if (pre->parsed()) return cmd_preprocess(pre_opts, args);
    if (fix->parsed()) return cmd_fixations(fix_opts, args);
    if (ds->parsed()) return cmd_dataset(ds_opts, args);
    if (tmlp->parsed()) return cmd_train_mlp(mlp_opts, args);
    if (trf->parsed()) return cmd_train_rf(rf_opts, args);
    if (ev->parsed()) return cmd_evaluate(ev_opts, args);
    if (sv->parsed()) return cmd_serve(sv_opts);
    if (pl->parsed()) return cmd_pipeline(pl_opts, args);
    if (rr->parsed()) return cmd_rerun(rerun_manifest);
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  } catch (const GazeError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args);
}
