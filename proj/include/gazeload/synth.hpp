#pragma once

#include <cstdint>
#include <vector>

#include "gazeload/ivt.hpp"
#include "gazeload/types.hpp"

namespace gazeload {

// Generator for alternating fixation/saccade gaze streams with a controllable
// class effect. Fixation durations are log-normal with the configured mean
// and a FIXED ABSOLUTE standard deviation: a class that fixates longer
// therefore has a relatively tighter duration distribution, which is a signal
// that survives per-session 0-1 normalization downstream. Every stochastic
// concern (durations, saccade geometry, jitter, pupil noise) has its own
// seed-derived stream, so changing cl_label alone shifts the pupil level and
// nothing else. Deliberately absent: per-session randomness that is constant
// within a session but varies across sessions (drift phase, duration
// extremes). Such terms fingerprint sessions, and any split that mixes
// windows of one session across train and test would convert fingerprints
// into spurious class signal.
struct SynthConfig {
  double duration_s = 60.0;
  double sampling_hz = 200.0;
  int cl_label = 0;                    // 0 = low load, 1 = high load
  double pupil_base_mm = 3.0;
  double pupil_cl_shift_mm = 0.5;      // added when cl_label = 1
  double fixation_dur_mean_ms = 250.0; // 250 low / 400 high by convention
  double fixation_dur_sd_ms = 60.0;    // absolute, class-independent
  double saccade_dur_ms = 40.0;
  double noise_sd_mm = 0.05;
  // Slow sinusoidal drift amplitude. Deliberately large relative to the
  // noise: the per-session 0-1 normalization downstream divides by the
  // realized signal range, and when that range is dominated by the shared
  // deterministic drift the normalizer is nearly identical across sessions
  // instead of a per-session fingerprint.
  double pupil_drift_mm = 0.4;
  double pupil_drift_hz = 0.2;
  double jitter_deg = 0.05;            // max per-sample offset from the fixation center
  double saccade_amp_min_deg = 5.0;
  double saccade_amp_max_deg = 20.0;
  uint64_t seed = 0;
};

// Generated session plus the fixation episodes exactly as emitted. Truth
// events use raw-millimeter pupil means (detection-side events are in
// normalized units); episodes cut short by the session end are recorded only
// if at least 60 ms made it out.
struct SynthSession {
  GazeSession session;
  std::vector<FixationEvent> truth;
};

SynthSession generate_session(const SynthConfig& cfg);

struct CohortConfig {
  size_t n_low = 10;
  size_t n_high = 10;
  double effect = 1.0;  // multiplies the pupil shift and the duration-mean gap
  uint64_t seed = 7;
  SynthConfig base;     // low-class template; per-participant fields derived
  double fixation_dur_mean_high_ms = 400.0;
};

// Low-label participants come first (P01..), then high. Participant k's
// session depends only on (seed, k): generation order is irrelevant.
// tlx_mental is sampled from {1..4} for low and {5..7} for high.
std::vector<SynthSession> generate_cohort(const CohortConfig& cfg);

}  // namespace gazeload
