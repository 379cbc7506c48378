#include "gazeload/ivt.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "gazeload/error.hpp"

namespace gazeload {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  std::array<char, 32> buf;
  auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), p);
}

struct Candidate {
  size_t first = 0;
  size_t last = 0;  // inclusive
  Vec3 dir_sum{0, 0, 0};
  double pupil_sum = 0.0;
  size_t fix_count = 0;

  Vec3 centroid() const {
    const double n = dir_sum.norm();
    if (n < 1e-12) return Vec3{0, 0, 1};
    return dir_sum * (1.0 / n);
  }
};

}  // namespace

std::vector<double> angular_velocity(const GazeSession& session) {
  const auto& s = session.samples;
  if (s.size() < 2)
    throw GazeError(ErrorCode::TooFewSamples, "angular_velocity needs at least 2 samples");
  std::vector<double> v(s.size() - 1, kNaN);
  std::optional<Vec3> prev = s[0].cyclopean_dir();
  for (size_t i = 0; i + 1 < s.size(); ++i) {
    std::optional<Vec3> next = s[i + 1].cyclopean_dir();
    if (prev && next) {
      const double dt_s = static_cast<double>(s[i + 1].timestamp_us - s[i].timestamp_us) / 1e6;
      v[i] = angle_deg(*prev, *next) / dt_s;
    }
    prev = next;
  }
  return v;
}

std::vector<PointLabel> classify_points(const std::vector<double>& velocities,
                                        const IvtConfig& cfg) {
  if (velocities.empty()) return {};
  std::vector<PointLabel> labels(velocities.size() + 1);
  for (size_t i = 0; i < velocities.size(); ++i) {
    const double v = velocities[i];
    if (!std::isfinite(v))
      labels[i] = PointLabel::Invalid;
    else
      labels[i] = v < cfg.velocity_threshold_deg_s ? PointLabel::Fixation : PointLabel::Saccade;
  }
  labels.back() = labels[labels.size() - 2];
  return labels;
}

std::vector<FixationEvent> group_fixations(const GazeSession& session,
                                           const std::vector<PointLabel>& labels,
                                           const PupilChannels& pupil, const IvtConfig& cfg) {
  const auto& s = session.samples;
  if (labels.size() != s.size() || pupil.left.size() != s.size() ||
      pupil.right.size() != s.size())
    throw GazeError(ErrorCode::LengthMismatch, "group_fixations: labels/channels vs samples");

  auto make_candidate = [&](size_t first, size_t last) {
    Candidate c;
    c.first = first;
    c.last = last;
    for (size_t i = first; i <= last; ++i) {
      if (labels[i] != PointLabel::Fixation) continue;
      if (auto d = s[i].cyclopean_dir()) c.dir_sum = c.dir_sum + *d;
      c.pupil_sum += 0.5 * (pupil.left[i] + pupil.right[i]);
      ++c.fix_count;
    }
    return c;
  };

  // Maximal Fixation runs, merged left-to-right into the accumulated
  // candidate while gap and centroid-angle conditions hold.
  std::vector<Candidate> merged;
  size_t i = 0;
  while (i < s.size()) {
    if (labels[i] != PointLabel::Fixation) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j + 1 < s.size() && labels[j + 1] == PointLabel::Fixation) ++j;
    Candidate run = make_candidate(i, j);
    if (!merged.empty()) {
      Candidate& cur = merged.back();
      const double gap_ms =
          static_cast<double>(s[run.first].timestamp_us - s[cur.last].timestamp_us) / 1000.0;
      if (gap_ms < cfg.max_gap_ms &&
          angle_deg(cur.centroid(), run.centroid()) < cfg.merge_angle_deg) {
        cur.last = run.last;
        cur.dir_sum = cur.dir_sum + run.dir_sum;
        cur.pupil_sum += run.pupil_sum;
        cur.fix_count += run.fix_count;
        i = j + 1;
        continue;
      }
    }
    merged.push_back(run);
    i = j + 1;
  }

  std::vector<FixationEvent> events;
  for (const Candidate& c : merged) {
    FixationEvent e;
    e.start_us = s[c.first].timestamp_us;
    e.end_us = s[c.last].timestamp_us;
    e.duration_ms = static_cast<double>(e.end_us - e.start_us) / 1000.0;
    if (e.duration_ms < cfg.min_fixation_ms) continue;
    e.centroid_dir = c.centroid();
    e.mean_pupil = c.fix_count > 0 ? c.pupil_sum / static_cast<double>(c.fix_count) : 0.0;
    e.sample_range = {c.first, c.last};
    events.push_back(e);
  }
  return events;
}

std::vector<std::pair<double, double>> fixation_features(
    const std::vector<FixationEvent>& events) {
  std::vector<std::pair<double, double>> out;
  out.reserve(events.size());
  for (const FixationEvent& e : events) out.emplace_back(e.duration_ms, e.mean_pupil);
  return out;
}

void save_fixations_csv(const std::vector<FixationEvent>& events, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw GazeError(ErrorCode::IoError, "cannot open for write: " + path);
  out << kFixationCsvHeader << '\n';
  for (const FixationEvent& e : events) {
    out << e.start_us << ',' << e.end_us << ',' << fmt(e.duration_ms) << ',' << fmt(e.mean_pupil)
        << ',' << fmt(e.centroid_dir.x) << ',' << fmt(e.centroid_dir.y) << ','
        << fmt(e.centroid_dir.z) << '\n';
  }
  if (!out) throw GazeError(ErrorCode::IoError, "write failed: " + path);
}

std::vector<FixationEvent> load_fixations_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GazeError(ErrorCode::IoError, "cannot open: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kFixationCsvHeader)
    throw GazeError(ErrorCode::MissingColumn, "bad fixation csv header in " + path);
  std::vector<FixationEvent> events;
  size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row;
    FixationEvent e;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    auto field = [&](auto& v) {
      auto [np, ec] = std::from_chars(p, end, v);
      if (ec != std::errc())
        throw GazeError(ErrorCode::BadRow, "fixation csv row " + std::to_string(row));
      p = np < end && *np == ',' ? np + 1 : np;
    };
    field(e.start_us);
    field(e.end_us);
    field(e.duration_ms);
    field(e.mean_pupil);
    field(e.centroid_dir.x);
    field(e.centroid_dir.y);
    field(e.centroid_dir.z);
    events.push_back(e);
  }
  return events;
}

std::vector<FixationEvent> detect_fixations(const GazeSession& session,
                                            const PupilChannels& pupil, const IvtConfig& cfg) {
  std::vector<double> v = angular_velocity(session);
  std::vector<PointLabel> labels = classify_points(v, cfg);
  return group_fixations(session, labels, pupil, cfg);
}

}  // namespace gazeload
