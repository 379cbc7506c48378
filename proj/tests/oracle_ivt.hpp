// Shared brute-force reference implementations and stream generators for the
// fixation-extraction tests. Everything here is deliberately written in a
// different shape from the production code (full rescans instead of running
// accumulators) so the two can only agree by computing the same thing.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include "gazeload/ivt.hpp"
#include "gazeload/preprocess.hpp"
#include "gazeload/rng.hpp"
#include "gazeload/types.hpp"

namespace oracle {

using namespace gazeload;

// Directions along one great circle: angle(dir(a), dir(b)) == |a - b| exactly.
inline Vec3 dir_at(double theta_deg, double phi_rad = 0.0) {
  double t = theta_deg * std::numbers::pi / 180.0;
  return {std::sin(t) * std::cos(phi_rad), std::sin(t) * std::sin(phi_rad), std::cos(t)};
}

struct StreamBuilder {
  GazeSession session;
  PupilChannels pupil;
  int64_t dt_us = 5000;

  void add(double theta_deg, bool left_valid = true, bool right_valid = true,
           double pupil_left = 0.5, double pupil_right = 0.5) {
    GazeSample g;
    g.timestamp_us = static_cast<int64_t>(session.samples.size()) * dt_us;
    g.left_dir = g.right_dir = dir_at(theta_deg);
    g.left_pupil_mm = pupil_left;
    g.right_pupil_mm = pupil_right;
    g.left_valid = left_valid;
    g.right_valid = right_valid;
    session.samples.push_back(g);
    pupil.left.push_back(pupil_left);
    pupil.right.push_back(pupil_right);
  }
};

// ---------------------------------------------------------------------------
// Brute-force reference for group_fixations: a direct run scan, then merging
// as a separate pass over whole run groups with sums recomputed from scratch.
// Structurally unlike the production single-pass accumulator.

struct RefRun {
  size_t first, last;
};

inline std::vector<RefRun> ref_scan_runs(const std::vector<PointLabel>& labels) {
  std::vector<RefRun> runs;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != PointLabel::Fixation) continue;
    if (i == 0 || labels[i - 1] != PointLabel::Fixation)
      runs.push_back({i, i});
    else
      runs.back().last = i;
  }
  return runs;
}

inline Vec3 ref_dir_sum(const GazeSession& s, const std::vector<PointLabel>& labels, size_t first,
                        size_t last) {
  Vec3 sum{0, 0, 0};
  for (size_t i = first; i <= last; ++i) {
    if (labels[i] != PointLabel::Fixation) continue;
    if (auto d = s.samples[i].cyclopean_dir()) sum = sum + *d;
  }
  return sum;
}

inline Vec3 ref_centroid(const Vec3& sum) {
  return sum.norm() < 1e-12 ? Vec3{0, 0, 1} : sum.normalized();
}

inline std::vector<FixationEvent> ref_group(const GazeSession& s,
                                            const std::vector<PointLabel>& labels,
                                            const PupilChannels& pupil, const IvtConfig& cfg) {
  std::vector<RefRun> runs = ref_scan_runs(labels);

  // Merge pass: group runs left to right. The group's centroid is recomputed
  // over every sample of every run already in the group.
  std::vector<std::pair<size_t, size_t>> groups;  // inclusive run-index ranges
  for (size_t r = 0; r < runs.size(); ++r) {
    bool merged = false;
    if (!groups.empty()) {
      auto& g = groups.back();
      const RefRun& tail = runs[g.second];
      double gap_ms = static_cast<double>(s.samples[runs[r].first].timestamp_us -
                                          s.samples[tail.last].timestamp_us) /
                      1000.0;
      Vec3 gsum{0, 0, 0};
      for (size_t q = g.first; q <= g.second; ++q)
        gsum = gsum + ref_dir_sum(s, labels, runs[q].first, runs[q].last);
      Vec3 rsum = ref_dir_sum(s, labels, runs[r].first, runs[r].last);
      if (gap_ms < cfg.max_gap_ms &&
          angle_deg(ref_centroid(gsum), ref_centroid(rsum)) < cfg.merge_angle_deg) {
        g.second = r;
        merged = true;
      }
    }
    if (!merged) groups.emplace_back(r, r);
  }

  std::vector<FixationEvent> events;
  for (auto [ga, gb] : groups) {
    size_t first = runs[ga].first;
    size_t last = runs[gb].last;
    FixationEvent e;
    e.start_us = s.samples[first].timestamp_us;
    e.end_us = s.samples[last].timestamp_us;
    e.duration_ms = static_cast<double>(e.end_us - e.start_us) / 1000.0;
    if (e.duration_ms < cfg.min_fixation_ms) continue;
    Vec3 sum{0, 0, 0};
    double psum = 0;
    size_t count = 0;
    for (size_t q = ga; q <= gb; ++q) {
      for (size_t i = runs[q].first; i <= runs[q].last; ++i) {
        if (labels[i] != PointLabel::Fixation) continue;
        if (auto d = s.samples[i].cyclopean_dir()) sum = sum + *d;
        psum += 0.5 * (pupil.left[i] + pupil.right[i]);
        ++count;
      }
    }
    e.centroid_dir = ref_centroid(sum);
    e.mean_pupil = count > 0 ? psum / static_cast<double>(count) : 0.0;
    e.sample_range = {first, last};
    events.push_back(e);
  }
  return events;
}

// Doctest-free comparison used by the acceptance binary; the module test keeps
// its own assertion-per-field variant for better failure messages.
inline bool events_equal(const std::vector<FixationEvent>& got,
                         const std::vector<FixationEvent>& want) {
  if (got.size() != want.size()) return false;
  auto close_enough = [](double a, double b) {
    return std::fabs(a - b) <= 1e-12 * (1.0 + std::max(std::fabs(a), std::fabs(b)));
  };
  for (size_t i = 0; i < got.size(); ++i) {
    if (got[i].start_us != want[i].start_us) return false;
    if (got[i].end_us != want[i].end_us) return false;
    if (got[i].sample_range != want[i].sample_range) return false;
    if (got[i].duration_ms != want[i].duration_ms) return false;
    if (!close_enough(got[i].mean_pupil, want[i].mean_pupil)) return false;
    if (!close_enough(got[i].centroid_dir.x, want[i].centroid_dir.x)) return false;
    if (!close_enough(got[i].centroid_dir.y, want[i].centroid_dir.y)) return false;
    if (!close_enough(got[i].centroid_dir.z, want[i].centroid_dir.z)) return false;
  }
  return true;
}

// Randomized stream with realistic structure: plateaus, saccades, blinks,
// spikes, and occasional monocular stretches. Geometry stays clear of the
// 0.5-degree merge boundary so float noise cannot flip decisions.
inline StreamBuilder random_stream(uint64_t seed) {
  Rng rng(seed);
  StreamBuilder b;
  b.dt_us = 3000 + static_cast<int64_t>(rng.bounded(3)) * 2000;  // 3, 5 or 7 ms
  size_t target = 30 + rng.bounded(300);
  double theta = rng.uniform(0.0, 20.0);
  double pl = rng.uniform(0.2, 0.8), pr = rng.uniform(0.2, 0.8);

  auto emit = [&](double th, bool lv = true, bool rv = true) {
    pl = std::clamp(pl + rng.uniform(-0.01, 0.01), 0.0, 1.0);
    pr = std::clamp(pr + rng.uniform(-0.01, 0.01), 0.0, 1.0);
    b.add(th, lv, rv, pl, pr);
  };

  while (b.session.samples.size() < target) {
    switch (rng.bounded(5)) {
      case 0: {  // plateau
        size_t len = 3 + rng.bounded(40);
        for (size_t i = 0; i < len; ++i) emit(theta);
        break;
      }
      case 1: {  // fast sweep to a far plateau (> 2 degrees)
        size_t len = 1 + rng.bounded(5);
        double step = rng.uniform(2.5, 6.0) * (rng.uniform() < 0.5 ? 1.0 : -1.0);
        for (size_t i = 0; i < len; ++i) {
          theta += step;
          emit(theta);
        }
        break;
      }
      case 2: {  // blink: both eyes out, position held
        size_t len = 1 + rng.bounded(3);
        for (size_t i = 0; i < len; ++i) emit(theta, false, false);
        break;
      }
      case 3: {  // spike: one sample far out and straight back
        emit(theta + 3.0);
        emit(theta);
        break;
      }
      default: {  // monocular stretch at the same plateau
        size_t len = 1 + rng.bounded(6);
        bool left = rng.uniform() < 0.5;
        for (size_t i = 0; i < len; ++i) emit(theta, left, !left);
        break;
      }
    }
  }
  // Classification needs at least two samples.
  while (b.session.samples.size() < 2) emit(theta);
  return b;
}

// Fully random labels and geometry: exercises grouping on label patterns that
// velocity classification could never produce.
inline void random_label_case(uint64_t seed, GazeSession& session, PupilChannels& pupil,
                              std::vector<PointLabel>& labels) {
  Rng rng(seed);
  size_t n = 2 + rng.bounded(99);
  int64_t ts = 0;
  for (size_t i = 0; i < n; ++i) {
    GazeSample g;
    ts += 1000 + static_cast<int64_t>(rng.bounded(9000));
    g.timestamp_us = ts;
    g.left_dir = Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    if (g.left_dir.norm() < 1e-3) g.left_dir = Vec3{0, 0, 1};
    g.left_dir = g.left_dir.normalized();
    g.right_dir = Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    if (g.right_dir.norm() < 1e-3) g.right_dir = Vec3{0, 0, 1};
    g.right_dir = g.right_dir.normalized();
    uint64_t v = rng.bounded(20);
    g.left_valid = v < 17;
    g.right_valid = v >= 2 && v < 19;
    g.left_pupil_mm = rng.uniform(0.0, 1.0);
    g.right_pupil_mm = rng.uniform(0.0, 1.0);
    session.samples.push_back(g);
    pupil.left.push_back(g.left_pupil_mm);
    pupil.right.push_back(g.right_pupil_mm);
    uint64_t l = rng.bounded(20);
    labels.push_back(l < 11 ? PointLabel::Fixation
                            : (l < 17 ? PointLabel::Saccade : PointLabel::Invalid));
  }
}

}  // namespace oracle
