#include "gazeload/stream.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "gazeload/error.hpp"

namespace gazeload {

Predictor Predictor::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GazeError(ErrorCode::IoError, "cannot open model: " + path);
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4) throw GazeError(ErrorCode::IoError, "model file too short: " + path);
  std::string tag(magic, 4);
  in.close();
  if (tag == "GLMN") return from_mlp(load_mlp(path));
  if (tag == "GLRF") return from_forest(load_forest(path));
  throw GazeError(ErrorCode::IoError, "unrecognized model format in " + path);
}

Predictor Predictor::from_mlp(MlpModel model) {
  Predictor p;
  p.mlp_ = std::make_shared<const MlpModel>(std::move(model));
  return p;
}

Predictor Predictor::from_forest(ForestModel model) {
  Predictor p;
  p.forest_ = std::make_shared<const ForestModel>(std::move(model));
  return p;
}

size_t Predictor::input_dim() const {
  if (mlp_) return mlp_->input_dim;
  if (forest_) return forest_->n_features;
  throw GazeError(ErrorCode::InvalidConfig, "empty predictor");
}

double Predictor::probability(const double* row) const {
  if (mlp_) {
    std::vector<double> x(row, row + mlp_->input_dim);
    return mlp_forward(*mlp_, x);
  }
  if (forest_) return forest_vote_fraction(*forest_, row);
  throw GazeError(ErrorCode::InvalidConfig, "empty predictor");
}

int Predictor::label_for(double p) const {
  if (mlp_) return p >= 0.5 ? 1 : 0;
  // Tree vote: strictly more than half the trees, so an exact tie stays 0.
  return p > 0.5 ? 1 : 0;
}

StreamSession::StreamSession(StreamConfig cfg, std::shared_ptr<const Predictor> model)
    : cfg_(cfg), model_(std::move(model)) {
  if (cfg_.window_len == 0 || cfg_.stride == 0)
    throw GazeError(ErrorCode::InvalidConfig, "window_len and stride must be positive");
  if (!(cfg_.sampling_hz > 0) || !(cfg_.cutoff_hz > 0))
    throw GazeError(ErrorCode::InvalidConfig, "sampling_hz and cutoff_hz must be positive");
  if (!model_) throw GazeError(ErrorCode::InvalidConfig, "stream session needs a model");
  if (model_->input_dim() != 2 * cfg_.window_len)
    throw GazeError(ErrorCode::DimensionMismatch,
                    "model expects " + std::to_string(model_->input_dim()) +
                        " inputs, window provides " + std::to_string(2 * cfg_.window_len));
  alpha_ = 1.0 - std::exp(-2.0 * std::numbers::pi * cfg_.cutoff_hz / cfg_.sampling_hz);
  alpha_ = std::min(alpha_, 1.0);
  pupil_ring_.assign(cfg_.window_len, 0.0);
  ch1_ring_.assign(cfg_.window_len, 0.0);
  ch2_ring_.assign(cfg_.window_len, 0.0);
  row_.assign(2 * cfg_.window_len, 0.0);
}

size_t StreamSession::buffered() const { return std::min(count_, cfg_.window_len); }

double StreamSession::smooth_and_normalize(EyeSmoother& eye, bool valid, double raw) const {
  // An invalid sample holds the previous smoothed value (the batch path
  // interpolates across the gap instead); before the first valid sample the
  // channel reads 0.
  if (valid) {
    if (!eye.init) {
      eye.init = true;
      eye.y = raw;
      eye.mn = raw;
      eye.mx = raw;
    } else {
      eye.y += alpha_ * (raw - eye.y);
      eye.mn = std::min(eye.mn, eye.y);
      eye.mx = std::max(eye.mx, eye.y);
    }
  }
  if (!eye.init) return 0.0;
  double range = std::max(eye.mx - eye.mn, cfg_.min_norm_range_mm);
  return (eye.y - eye.mn) / range;
}

void StreamSession::close_run() {
  run_open_ = false;
  double dur_ms = static_cast<double>(run_last_ts_ - run_first_ts_) / 1000.0;
  if (dur_ms < cfg_.ivt.min_fixation_ms) return;  // too short: leave the carry alone
  max_fix_dur_ms_ = std::max(max_fix_dur_ms_, dur_ms);
  carry_ch1_ = dur_ms / max_fix_dur_ms_;
  carry_ch2_ = run_count_ > 0 ? run_pupil_sum_ / static_cast<double>(run_count_) : 0.0;
  // Samples inside the run were stored with the previous carry; rewrite every
  // slot from the run's start that is still live. count_ here is the index of
  // the sample being pushed (already stored).
  size_t lo = run_first_;
  if (count_ + 1 > cfg_.window_len) lo = std::max(lo, count_ + 1 - cfg_.window_len);
  for (size_t g = lo; g <= count_; ++g) {
    ch1_ring_[g % cfg_.window_len] = carry_ch1_;
    ch2_ring_[g % cfg_.window_len] = carry_ch2_;
  }
}

void StreamSession::label_previous(const GazeSample& s) {
  // The velocity that labels sample count_-1 spans [count_-1, count_].
  auto cur = s.cyclopean_dir();
  bool fixation = false;
  bool usable = prev_dir_ok_ && cur.has_value();
  if (usable) {
    double dt_s = static_cast<double>(s.timestamp_us - last_ts_) / 1e6;
    double v = angle_deg(prev_dir_, *cur) / dt_s;
    fixation = v < cfg_.ivt.velocity_threshold_deg_s;
  }
  size_t prev = count_ - 1;
  if (fixation) {
    if (!run_open_) {
      run_open_ = true;
      run_first_ = prev;
      run_first_ts_ = last_ts_;
      run_pupil_sum_ = 0.0;
      run_count_ = 0;
    }
    run_last_ts_ = last_ts_;
    run_pupil_sum_ += pupil_ring_[prev % cfg_.window_len];
    ++run_count_;
  } else if (run_open_) {
    close_run();
  }
}

std::optional<Prediction> StreamSession::push_sample(const GazeSample& s) {
  auto t0 = std::chrono::steady_clock::now();
  if (count_ > 0 && s.timestamp_us <= last_ts_)
    throw GazeError(ErrorCode::OutOfOrderSample,
                    "timestamp " + std::to_string(s.timestamp_us) + " not after " +
                        std::to_string(last_ts_));

  double nl = smooth_and_normalize(left_, s.left_valid, s.left_pupil_mm);
  double nr = smooth_and_normalize(right_, s.right_valid, s.right_pupil_mm);
  double np = 0.0;
  int eyes = (left_.init ? 1 : 0) + (right_.init ? 1 : 0);
  if (eyes > 0) np = (left_.init ? nl : 0.0) + (right_.init ? nr : 0.0);
  if (eyes > 0) np /= static_cast<double>(eyes);

  size_t slot = count_ % cfg_.window_len;
  pupil_ring_[slot] = np;
  ch1_ring_[slot] = carry_ch1_;
  ch2_ring_[slot] = carry_ch2_;

  if (count_ > 0) label_previous(s);

  auto cur = s.cyclopean_dir();
  prev_dir_ok_ = cur.has_value();
  if (cur) prev_dir_ = *cur;
  last_ts_ = s.timestamp_us;
  ++count_;

  if (count_ < cfg_.window_len || (count_ - cfg_.window_len) % cfg_.stride != 0)
    return std::nullopt;

  const size_t w = cfg_.window_len;
  for (size_t j = 0; j < w; ++j) {
    size_t g = count_ - w + j;
    row_[j] = ch1_ring_[g % w];
    row_[w + j] = ch2_ring_[g % w];
  }
  Prediction out;
  out.p_high = model_->probability(row_.data());
  out.label = model_->label_for(out.p_high);
  out.window_end_us = s.timestamp_us;
  out.latency_us = std::chrono::duration_cast<std::chrono::microseconds>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return out;
}

}  // namespace gazeload
