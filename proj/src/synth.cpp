#include "gazeload/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "gazeload/rng.hpp"

namespace gazeload {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

// Rodrigues rotation of v around unit axis k by angle_deg.
Vec3 rotate(const Vec3& v, const Vec3& k, double angle_deg) {
  const double a = angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(a), s = std::sin(a);
  const Vec3 kxv = cross(k, v);
  const double kdv = k.dot(v);
  return Vec3{v.x * c + kxv.x * s + k.x * kdv * (1 - c),
              v.y * c + kxv.y * s + k.y * kdv * (1 - c),
              v.z * c + kxv.z * s + k.z * kdv * (1 - c)}
      .normalized();
}

// A unit vector perpendicular to dir, at phase angle phi in dir's tangent plane.
Vec3 tangent_axis(const Vec3& dir, double phi) {
  const Vec3 helper = std::abs(dir.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
  const Vec3 t1 = cross(dir, helper).normalized();
  const Vec3 t2 = cross(dir, t1).normalized();
  return (t1 * std::cos(phi) + t2 * std::sin(phi)).normalized();
}

// Log-normal parameters from an arithmetic mean and absolute sd.
void lognormal_params(double mean, double sd, double& mu, double& sigma) {
  const double cv2 = (sd / mean) * (sd / mean);
  sigma = std::sqrt(std::log1p(cv2));
  mu = std::log(mean) - 0.5 * sigma * sigma;
}

}  // namespace

SynthSession generate_session(const SynthConfig& cfg) {
  // One independent stream per stochastic concern: the class label must alter
  // nothing but the pupil level term.
  Rng dur_rng(mix_seed(cfg.seed, 1));
  Rng sacc_rng(mix_seed(cfg.seed, 2));
  Rng jitter_rng(mix_seed(cfg.seed, 3));
  Rng noise_rng(mix_seed(cfg.seed, 4));

  const double hz = cfg.sampling_hz;
  const int64_t dt_us = static_cast<int64_t>(std::llround(1e6 / hz));
  const size_t n_total = static_cast<size_t>(cfg.duration_s * hz);
  const size_t n_sacc = std::max<size_t>(1, static_cast<size_t>(std::llround(
                                                cfg.saccade_dur_ms / 1000.0 * hz)));
  double mu, sigma;
  lognormal_params(cfg.fixation_dur_mean_ms, cfg.fixation_dur_sd_ms, mu, sigma);

  const double pupil_level =
      cfg.pupil_base_mm + (cfg.cl_label == 1 ? cfg.pupil_cl_shift_mm : 0.0);

  SynthSession out;
  out.session.meta.participant_id = "SYNTH";
  out.session.meta.tlx_mental = cfg.cl_label == 1 ? 6 : 2;
  out.session.meta.tutorial_start_us = 0;
  out.session.meta.sampling_hz = hz;
  out.session.samples.reserve(n_total);

  Vec3 center{0, 0, 1};
  size_t emitted = 0;
  auto emit = [&](const Vec3& dir) {
    GazeSample s;
    s.timestamp_us = static_cast<int64_t>(emitted) * dt_us;
    const double t_s = static_cast<double>(s.timestamp_us) / 1e6;
    // The drift term is deterministic and shared by every session: a
    // per-session random phase would be a session fingerprint, and with a
    // window-level split such fingerprints masquerade as class signal.
    const double drift = cfg.pupil_drift_mm * std::sin(kTwoPi * cfg.pupil_drift_hz * t_s);
    s.left_dir = dir;
    s.right_dir = dir;
    s.left_pupil_mm = pupil_level + drift + cfg.noise_sd_mm * noise_rng.normal();
    s.right_pupil_mm = pupil_level + drift + cfg.noise_sd_mm * noise_rng.normal();
    s.left_valid = true;
    s.right_valid = true;
    out.session.samples.push_back(s);
    ++emitted;
  };

  // Durations are clamped below at 70 ms (detection trims one boundary
  // sample, so this keeps every episode above the 60 ms floor) and above at
  // +2 log-sigmas. A typical session hits the upper clamp several times, so
  // the session's maximum duration — the downstream channel normalizer — is
  // the same for every session of a class instead of a per-session extreme
  // that a window-level split could use as a fingerprint.
  const double dur_cap_ms = std::max(70.0, std::exp(mu + 2.0 * sigma));

  while (emitted < n_total) {
    const double dur_ms = std::clamp(std::exp(dur_rng.normal(mu, sigma)), 70.0, dur_cap_ms);
    const size_t n_fix = std::max<size_t>(1, static_cast<size_t>(std::llround(dur_ms * hz / 1000.0)));
    const size_t first = emitted;
    for (size_t k = 0; k < n_fix && emitted < n_total; ++k) {
      const double theta = cfg.jitter_deg * jitter_rng.uniform();
      const Vec3 axis = tangent_axis(center, kTwoPi * jitter_rng.uniform());
      emit(rotate(center, axis, theta));
    }
    const size_t last = emitted - 1;
    const double emitted_ms = static_cast<double>(static_cast<int64_t>(last - first) * dt_us) / 1000.0;
    if (emitted_ms >= 60.0) {
      FixationEvent e;
      e.start_us = static_cast<int64_t>(first) * dt_us;
      e.end_us = static_cast<int64_t>(last) * dt_us;
      e.duration_ms = static_cast<double>(e.end_us - e.start_us) / 1000.0;
      e.centroid_dir = center;
      double psum = 0.0;
      for (size_t i = first; i <= last; ++i)
        psum += 0.5 * (out.session.samples[i].left_pupil_mm +
                       out.session.samples[i].right_pupil_mm);
      e.mean_pupil = psum / static_cast<double>(last - first + 1);
      e.sample_range = {first, last};
      out.truth.push_back(e);
    }
    if (emitted >= n_total) break;

    // Saccade episode: sweep to a new center in n_sacc equal angular steps,
    // with both endpoints strictly off the plateau positions so every step,
    // including entry and exit, exceeds the velocity threshold.
    const double amp =
        sacc_rng.uniform(cfg.saccade_amp_min_deg, cfg.saccade_amp_max_deg);
    const Vec3 axis = tangent_axis(center, kTwoPi * sacc_rng.uniform());
    const Vec3 start = center;
    for (size_t k = 0; k < n_sacc && emitted < n_total; ++k) {
      const double f = static_cast<double>(k + 1) / static_cast<double>(n_sacc + 1);
      emit(rotate(start, axis, amp * f));
    }
    center = rotate(start, axis, amp);
  }
  return out;
}

std::vector<SynthSession> generate_cohort(const CohortConfig& cfg) {
  std::vector<SynthSession> out;
  out.reserve(cfg.n_low + cfg.n_high);
  const double mean_gap = cfg.fixation_dur_mean_high_ms - cfg.base.fixation_dur_mean_ms;
  for (size_t k = 0; k < cfg.n_low + cfg.n_high; ++k) {
    const bool high = k >= cfg.n_low;
    SynthConfig sc = cfg.base;
    sc.cl_label = high ? 1 : 0;
    sc.seed = mix_seed(cfg.seed, 1000 + k);
    sc.pupil_cl_shift_mm = cfg.base.pupil_cl_shift_mm * cfg.effect;
    if (high) sc.fixation_dur_mean_ms = cfg.base.fixation_dur_mean_ms + mean_gap * cfg.effect;

    SynthSession s = generate_session(sc);
    Rng tlx_rng(mix_seed(cfg.seed, 500 + k));
    s.session.meta.tlx_mental =
        high ? 5 + static_cast<int>(tlx_rng.bounded(3)) : 1 + static_cast<int>(tlx_rng.bounded(4));
    char id[16];
    std::snprintf(id, sizeof(id), "P%02zu", k + 1);
    s.session.meta.participant_id = id;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace gazeload
