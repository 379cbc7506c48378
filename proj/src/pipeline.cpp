#include "gazeload/pipeline.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "gazeload/error.hpp"
#include "gazeload/log.hpp"
#include "gazeload/rng.hpp"
#include "gazeload/session_io.hpp"
#include "gazeload/version.hpp"

namespace gazeload {

namespace {

using nlohmann::ordered_json;

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
  out.close();
  if (!out) throw GazeError(ErrorCode::IoError, "cannot write " + path);
}

const char* max_features_name(MaxFeatures m) {
  switch (m) {
    case MaxFeatures::Sqrt: return "sqrt";
    case MaxFeatures::Log2: return "log2";
    default: return "all";
  }
}

ordered_json grid_json(const ForestGrid& g) {
  ordered_json j;
  j["n_trees"] = g.n_trees;
  j["max_depth"] = g.max_depth;
  j["min_samples_split"] = g.min_samples_split;
  j["min_samples_leaf"] = g.min_samples_leaf;
  std::vector<std::string> mf;
  for (auto m : g.max_features) mf.push_back(max_features_name(m));
  j["max_features"] = mf;
  j["bootstrap"] = g.bootstrap;
  return j;
}

ordered_json config_json(const PipelineConfig& cfg) {
  ordered_json j;
  j["synthetic"] = cfg.synthetic;
  if (cfg.synthetic) {
    ordered_json c;
    c["n_low"] = cfg.cohort.n_low;
    c["n_high"] = cfg.cohort.n_high;
    c["effect"] = cfg.cohort.effect;
    c["duration_s"] = cfg.cohort.base.duration_s;
    c["sampling_hz"] = cfg.cohort.base.sampling_hz;
    c["pupil_base_mm"] = cfg.cohort.base.pupil_base_mm;
    c["pupil_cl_shift_mm"] = cfg.cohort.base.pupil_cl_shift_mm;
    c["fixation_dur_mean_ms"] = cfg.cohort.base.fixation_dur_mean_ms;
    c["fixation_dur_mean_high_ms"] = cfg.cohort.fixation_dur_mean_high_ms;
    c["fixation_dur_sd_ms"] = cfg.cohort.base.fixation_dur_sd_ms;
    c["noise_sd_mm"] = cfg.cohort.base.noise_sd_mm;
    j["cohort"] = c;
  }
  j["cutoff_hz"] = cfg.preprocess.cutoff_hz;
  j["max_gap_interp_ms"] = cfg.preprocess.max_gap_interp_ms;
  j["ivt_threshold_deg_s"] = cfg.ivt.velocity_threshold_deg_s;
  j["min_fixation_ms"] = cfg.ivt.min_fixation_ms;
  j["merge_gap_ms"] = cfg.ivt.max_gap_ms;
  j["merge_angle_deg"] = cfg.ivt.merge_angle_deg;
  j["window_len"] = cfg.window.window_len;
  j["stride"] = cfg.window.stride;
  j["input_mode"] = cfg.window.input_mode == InputMode::Flatten ? "flatten" : "summary";
  j["split"] = cfg.split_mode == SplitMode::WindowRandom ? "window" : "subject";
  j["test_fraction"] = cfg.test_fraction;
  ordered_json m;
  m["hidden_sizes"] = cfg.mlp.hidden_sizes;
  m["learning_rate"] = cfg.mlp.learning_rate;
  m["epochs"] = cfg.mlp.epochs;
  m["batch_size"] = cfg.mlp.batch_size;
  j["mlp"] = m;
  j["rf_grid"] = grid_json(cfg.rf_grid);
  j["folds"] = cfg.folds;
  j["threshold"] = cfg.threshold;
  j["seed"] = cfg.seed;
  return j;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  auto path = [&cfg](const char* name) { return cfg.out_dir + "/" + name; };

  std::vector<GazeSession> sessions;
  std::vector<std::string> input_files;
  if (cfg.synthetic) {
    CohortConfig cohort = cfg.cohort;
    cohort.seed = cfg.seed;
    for (auto& s : generate_cohort(cohort)) sessions.push_back(std::move(s.session));
  } else {
    if (cfg.inputs.empty())
      throw GazeError(ErrorCode::EmptySet, "pipeline needs --synthetic or input sessions");
    for (const auto& [csv, manifest] : cfg.inputs) {
      sessions.push_back(trim_pre_task(load_session(csv, manifest)));
      input_files.push_back(csv);
      input_files.push_back(manifest);
    }
  }

  WindowedDataset all;
  all.mode = cfg.window.input_mode;
  size_t skipped = 0;
  for (const auto& session : sessions) {
    PupilChannels pupil = preprocess_pupil(session, cfg.preprocess);
    auto events = detect_fixations(session, pupil, cfg.ivt);
    auto channels = sample_aligned_channels(session, events);
    int label = binarize_tlx(session.meta.tlx_mental);
    try {
      append_dataset(all, make_windows(channels, label, session.meta.participant_id, cfg.window));
    } catch (const GazeError& e) {
      if (e.code() != ErrorCode::SessionTooShort) throw;
      log::warn("session %s shorter than one window, skipped",
                session.meta.participant_id.c_str());
      ++skipped;
    }
  }
  if (all.rows() == 0)
    throw GazeError(ErrorCode::EmptySet, "no session is long enough for one window");
  log::info("windowed dataset: %zu rows x %zu features (%zu sessions skipped)", all.rows(),
            all.inputs.cols, skipped);

  auto [train, test] = split(all, cfg.split_mode, cfg.test_fraction, mix_seed(cfg.seed, 101));

  MlpConfig mlp_cfg = cfg.mlp;
  mlp_cfg.seed = mix_seed(cfg.seed, 102);
  MlpModel mlp = mlp_train(train, mlp_cfg);
  log::info("mlp trained: final epoch loss %.6f", mlp.epoch_loss.empty() ? 0.0 : mlp.epoch_loss.back());

  GridSearchResult rf = grid_search(train, cfg.rf_grid, cfg.folds, mix_seed(cfg.seed, 103));
  log::info("forest grid search done: best combination %zu, cv accuracy %.4f", rf.best_index,
            rf.scores[rf.best_index].mean_accuracy);

  PipelineResult result;
  result.mlp_report = evaluate(mlp, test, cfg.threshold, "MLP", "test");
  result.rf_report = evaluate(rf.model, test, "RF", "test");
  result.train_rows = train.rows();
  result.test_rows = test.rows();
  result.best_grid_index = rf.best_index;
  result.best_grid_accuracy = rf.scores[rf.best_index].mean_accuracy;

  save_dataset(all, path("dataset.glds"));
  save_mlp(mlp, path("mlp.glmn"));
  save_forest(rf.model, path("rf.glrf"));
  export_grid_csv(rf.scores, path("grid_scores.csv"));
  std::vector<EvalReport> reports = {result.mlp_report, result.rf_report};
  write_text(path("report.csv"), report_csv(reports));
  write_text(path("report.txt"), report_table(reports));

  ordered_json manifest;
  manifest["tool"] = "gazeload";
  manifest["version"] = kVersion;
  manifest["subcommand"] = "pipeline";
  manifest["argv"] = cfg.argv;
  manifest["seed"] = cfg.seed;
  manifest["inputs"] = input_files;
  manifest["outputs"] = {"dataset.glds", "mlp.glmn",   "rf.glrf",
                         "grid_scores.csv", "report.csv", "report.txt"};
  manifest["config"] = config_json(cfg);
  write_text(path("run_manifest.json"), manifest.dump(2) + "\n");

  return result;
}

}  // namespace gazeload
