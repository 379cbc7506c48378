#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace gazeload {

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }

  Vec3 normalized() const {
    double n = norm();
    if (n == 0) return {0, 0, 0};
    return {x / n, y / n, z / n};
  }
};

// Angle between two directions in degrees, via acos of the clamped dot of the
// normalized vectors.
inline double angle_deg(const Vec3& a, const Vec3& b) {
  double d = a.normalized().dot(b.normalized());
  d = std::max(-1.0, std::min(1.0, d));
  return std::acos(d) * 180.0 / std::numbers::pi;
}

// One timestamped binocular gaze + pupil measurement.
struct GazeSample {
  int64_t timestamp_us = 0;
  Vec3 left_dir, right_dir;     // unit gaze directions when the eye is valid
  double left_pupil_mm = 0, right_pupil_mm = 0;
  bool left_valid = false, right_valid = false;

  // Mean-of-eyes direction; monocular fallback when one eye is invalid,
  // nothing when both are out.
  std::optional<Vec3> cyclopean_dir() const {
    if (left_valid && right_valid) return (left_dir + right_dir).normalized();
    if (left_valid) return left_dir.normalized();
    if (right_valid) return right_dir.normalized();
    return std::nullopt;
  }
};

struct SessionMeta {
  std::string participant_id;
  int tlx_mental = 1;            // NASA-TLX mental demand, 1..7
  int64_t tutorial_start_us = 0; // data strictly before this marker is discarded
  double sampling_hz = 200.0;
};

struct GazeSession {
  SessionMeta meta;
  std::vector<GazeSample> samples;
};

}  // namespace gazeload
