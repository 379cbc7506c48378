#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gazeload/dataset.hpp"
#include "gazeload/eval.hpp"
#include "gazeload/forest.hpp"
#include "gazeload/ivt.hpp"
#include "gazeload/mlp.hpp"
#include "gazeload/preprocess.hpp"
#include "gazeload/synth.hpp"

namespace gazeload {

// End-to-end run: sessions -> preprocess -> fixations -> windowed dataset ->
// split -> MLP + grid-searched forest -> evaluation.
//
// Every random choice derives from `seed` (cohort generation, split, weight
// init, epoch shuffles, tree seeds), so one seed pins the entire run.
struct PipelineConfig {
  // Data source: generate a cohort, or load recorded (csv, manifest) pairs.
  bool synthetic = true;
  CohortConfig cohort;
  std::vector<std::pair<std::string, std::string>> inputs;

  PreprocessConfig preprocess;
  IvtConfig ivt;
  WindowConfig window;
  SplitMode split_mode = SplitMode::WindowRandom;
  double test_fraction = 0.2;
  MlpConfig mlp;  // mlp.seed is derived from `seed`, not read from here
  // Default is the small grid: the full 486-combination sweep belongs to the
  // standalone forest-training command, not the end-to-end run.
  ForestGrid rf_grid = reduced_grid();
  size_t folds = 3;
  double threshold = 0.5;  // MLP decision threshold at evaluation time
  uint64_t seed = 7;
  std::string out_dir = "gazeload-run";
  std::vector<std::string> argv;  // recorded in the run manifest for reruns

  // Synthetic sessions default to 120 s so the windowed dataset is large
  // enough to train on at the standard window length.
  PipelineConfig() { cohort.base.duration_s = 120.0; }
};

struct PipelineResult {
  EvalReport mlp_report;
  EvalReport rf_report;
  size_t train_rows = 0;
  size_t test_rows = 0;
  size_t best_grid_index = 0;
  double best_grid_accuracy = 0.0;
};

// Runs the chain and writes dataset.glds, mlp.glmn, rf.glrf, grid_scores.csv,
// report.csv, report.txt and run_manifest.json into out_dir. Identical
// configs produce byte-identical files (manifests embed no timestamps).
PipelineResult run_pipeline(const PipelineConfig& cfg);

}  // namespace gazeload
