#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gazeload/preprocess.hpp"
#include "gazeload/types.hpp"

namespace gazeload {

struct IvtConfig {
  double velocity_threshold_deg_s = 30.0;
  double min_fixation_ms = 60.0;  // inclusive: exactly 60 ms is kept
  // Candidate runs separated by less than max_gap_ms whose centroids differ
  // by less than merge_angle_deg are merged. max_gap_ms = 0 disables merging.
  double max_gap_ms = 75.0;
  double merge_angle_deg = 0.5;
};

enum class PointLabel : uint8_t { Fixation, Saccade, Invalid };

struct FixationEvent {
  int64_t start_us = 0;
  int64_t end_us = 0;
  double duration_ms = 0.0;  // (end_us - start_us) / 1000
  Vec3 centroid_dir{0, 0, 1};
  double mean_pupil = 0.0;  // binocular mean over in-run samples
  // Inclusive sample index range into the session.
  std::pair<size_t, size_t> sample_range{0, 0};
};

// v[i] = angle(cyclopean[i], cyclopean[i+1]) / dt in deg/s, length N-1.
// Entries touching a sample with no usable eye are NaN. Throws TooFewSamples.
std::vector<double> angular_velocity(const GazeSession& session);

// Sample i takes the label of velocity i; the last sample inherits its
// predecessor's label. v < threshold -> Fixation, v >= threshold -> Saccade,
// non-finite -> Invalid.
std::vector<PointLabel> classify_points(const std::vector<double>& velocities,
                                        const IvtConfig& cfg);

// Groups maximal Fixation runs into events: a single left-to-right pass
// merges the accumulated candidate with the next run when the gap between
// them is under max_gap_ms and their centroids are within merge_angle_deg;
// candidates shorter than min_fixation_ms are then dropped. Event pupil
// means are taken from the preprocessed channels. Throws LengthMismatch.
std::vector<FixationEvent> group_fixations(const GazeSession& session,
                                           const std::vector<PointLabel>& labels,
                                           const PupilChannels& pupil, const IvtConfig& cfg);

// Order-preserving (duration_ms, mean_pupil) projection.
std::vector<std::pair<double, double>> fixation_features(const std::vector<FixationEvent>& events);

// One event per line: start_us,end_us,duration_ms,mean_pupil,centroid_x,centroid_y,centroid_z
inline constexpr const char* kFixationCsvHeader =
    "start_us,end_us,duration_ms,mean_pupil,centroid_x,centroid_y,centroid_z";
void save_fixations_csv(const std::vector<FixationEvent>& events, const std::string& path);
std::vector<FixationEvent> load_fixations_csv(const std::string& path);

// Convenience: velocity -> classify -> group on an already-preprocessed session.
std::vector<FixationEvent> detect_fixations(const GazeSession& session,
                                            const PupilChannels& pupil, const IvtConfig& cfg);

}  // namespace gazeload
