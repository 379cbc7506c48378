#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gazeload/forest.hpp"
#include "gazeload/ivt.hpp"
#include "gazeload/mlp.hpp"
#include "gazeload/types.hpp"

namespace gazeload {

// Configuration for online (sample-by-sample) inference.
//
// The online path mirrors the batch pipeline but substitutes causal
// equivalents where the batch algorithm needs future samples:
//
//   * Denoising uses a one-pole low-pass smoother with alpha derived from
//     cutoff_hz instead of the batch spectral filter (which is non-causal).
//   * Pupil normalization uses the running min/max seen so far, with the
//     denominator floored at min_norm_range_mm to keep early samples stable.
//   * Fixation grouping labels each sample one step late (the velocity that
//     labels sample i is computed when sample i+1 arrives) and does not merge
//     events across gaps, because a merge decision can arrive after a window
//     containing the unmerged events was already emitted.
//   * The duration channel is normalized by the longest fixation seen so far
//     rather than the whole-session maximum.
//
// These substitutions make online windows drift slightly from batch windows
// early in a session; the difference shrinks as the running statistics
// converge. Tests quantify the gap on synthetic sessions.
struct StreamConfig {
  size_t window_len = 2000;        // samples per inference window
  size_t stride = 500;             // samples between consecutive windows
  double sampling_hz = 200.0;
  double cutoff_hz = 4.0;          // one-pole smoother knee
  double min_norm_range_mm = 0.5;  // floor for the running min/max range
  IvtConfig ivt;                   // velocity threshold + min duration
};

struct Prediction {
  double p_high = 0.0;        // probability of the high-load class
  int label = 0;              // thresholded class decision
  int64_t window_end_us = 0;  // timestamp of the newest sample in the window
  int64_t latency_us = 0;     // wall time spent producing this prediction
};

// Wraps either model family behind one inference call. The file format is
// detected from the leading magic bytes.
class Predictor {
 public:
  static Predictor load(const std::string& path);
  static Predictor from_mlp(MlpModel model);
  static Predictor from_forest(ForestModel model);

  size_t input_dim() const;
  // Probability of class 1 for one feature row of input_dim() values.
  double probability(const double* row) const;
  // Class decision for a probability from this model. The tree ensemble
  // breaks an exactly tied vote toward class 0; the neural net thresholds
  // at 0.5 inclusive.
  int label_for(double p) const;

 private:
  std::shared_ptr<const MlpModel> mlp_;
  std::shared_ptr<const ForestModel> forest_;
};

// Incremental session state: push samples in timestamp order, receive a
// prediction whenever a full window boundary is crossed.
class StreamSession {
 public:
  StreamSession(StreamConfig cfg, std::shared_ptr<const Predictor> model);

  // Feeds one sample. Throws GazeError{OutOfOrderSample} if the timestamp
  // does not strictly increase; session state is untouched in that case.
  // Returns a prediction when this sample completes a window.
  std::optional<Prediction> push_sample(const GazeSample& s);

  size_t samples_seen() const { return count_; }
  // Ring-buffer slots currently in use (bounded by window_len).
  size_t buffered() const;

 private:
  struct EyeSmoother {
    bool init = false;
    double y = 0.0;
    double mn = 0.0;
    double mx = 0.0;
  };

  double smooth_and_normalize(EyeSmoother& eye, bool valid, double raw) const;
  void label_previous(const GazeSample& s);
  void close_run();

  StreamConfig cfg_;
  std::shared_ptr<const Predictor> model_;
  double alpha_ = 1.0;

  size_t count_ = 0;  // samples accepted so far
  int64_t last_ts_ = 0;
  EyeSmoother left_, right_;

  // Previous sample's cyclopean direction, for the one-step-late velocity.
  bool prev_dir_ok_ = false;
  Vec3 prev_dir_{};

  // Ring buffers indexed by sample counter modulo window_len.
  std::vector<double> pupil_ring_;  // normalized binocular pupil per sample
  std::vector<double> ch1_ring_;    // duration channel (carry-forward)
  std::vector<double> ch2_ring_;    // fixation mean-pupil channel

  double carry_ch1_ = 0.0;
  double carry_ch2_ = 0.0;

  // Open fixation run: samples labeled fixation, not yet terminated.
  bool run_open_ = false;
  size_t run_first_ = 0;  // counter of the first sample in the run
  int64_t run_first_ts_ = 0;
  int64_t run_last_ts_ = 0;
  double run_pupil_sum_ = 0.0;
  size_t run_count_ = 0;

  double max_fix_dur_ms_ = 0.0;  // longest accepted fixation so far

  std::vector<double> row_;  // scratch for the flattened window
};

}  // namespace gazeload
