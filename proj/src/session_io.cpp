#include "gazeload/session_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "gazeload/error.hpp"

namespace gazeload {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string trim_ws(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_f64(const std::string& s, size_t row) {
  double v;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw GazeError(ErrorCode::BadRow, "row " + std::to_string(row) + ": bad number '" + s + "'");
  return v;
}

int64_t parse_i64(const std::string& s, size_t row) {
  int64_t v;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw GazeError(ErrorCode::BadRow, "row " + std::to_string(row) + ": bad integer '" + s + "'");
  return v;
}

bool parse_valid_flag(const std::string& s, size_t row) {
  if (s == "0") return false;
  if (s == "1") return true;
  throw GazeError(ErrorCode::BadRow,
                  "row " + std::to_string(row) + ": valid flag must be 0 or 1, got '" + s + "'");
}

std::string format_f64(double v) {
  std::array<char, 32> buf;
  auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), p);
}

}  // namespace

SessionMeta load_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw GazeError(ErrorCode::IoError, "cannot open manifest: " + manifest_path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    line = trim_ws(line);
    if (line.empty() || line[0] == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw GazeError(ErrorCode::BadManifest, "expected key=value, got '" + line + "'");
    kv[trim_ws(line.substr(0, eq))] = trim_ws(line.substr(eq + 1));
  }
  for (const char* key : {"participant_id", "tlx_mental", "tutorial_start_us"})
    if (!kv.count(key)) throw GazeError(ErrorCode::BadManifest, std::string("missing key ") + key);

  SessionMeta meta;
  meta.participant_id = kv["participant_id"];
  try {
    meta.tlx_mental = std::stoi(kv["tlx_mental"]);
    meta.tutorial_start_us = std::stoll(kv["tutorial_start_us"]);
    meta.sampling_hz = kv.count("sampling_hz") ? std::stod(kv["sampling_hz"]) : 200.0;
  } catch (const std::exception&) {
    throw GazeError(ErrorCode::BadManifest, "unparseable numeric value in " + manifest_path);
  }
  if (meta.tlx_mental < 1 || meta.tlx_mental > 7)
    throw GazeError(ErrorCode::BadManifest,
                    "tlx_mental must be in [1,7], got " + std::to_string(meta.tlx_mental));
  if (!(meta.sampling_hz > 0))
    throw GazeError(ErrorCode::BadManifest, "sampling_hz must be positive");
  return meta;
}

GazeSession load_session(const std::string& csv_path, const std::string& manifest_path) {
  GazeSession session;
  session.meta = load_manifest(manifest_path);

  std::ifstream in(csv_path);
  if (!in) throw GazeError(ErrorCode::IoError, "cannot open csv: " + csv_path);

  std::string line;
  if (!std::getline(in, line)) throw GazeError(ErrorCode::MissingColumn, "empty csv: " + csv_path);
  std::vector<std::string> header = split_csv_line(trim_ws(line));
  const std::vector<std::string> wanted = split_csv_line(kGazeCsvHeader);
  std::vector<size_t> col(wanted.size());
  for (size_t w = 0; w < wanted.size(); ++w) {
    bool found = false;
    for (size_t h = 0; h < header.size(); ++h)
      if (trim_ws(header[h]) == wanted[w]) {
        col[w] = h;
        found = true;
        break;
      }
    if (!found) throw GazeError(ErrorCode::MissingColumn, wanted[w] + " in " + csv_path);
  }

  size_t row = 0;
  while (std::getline(in, line)) {
    line = trim_ws(line);
    if (line.empty()) continue;
    ++row;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() < header.size())
      throw GazeError(ErrorCode::BadRow, "row " + std::to_string(row) + ": too few fields");
    GazeSample s;
    s.timestamp_us = parse_i64(f[col[0]], row);
    s.left_dir = {parse_f64(f[col[1]], row), parse_f64(f[col[2]], row), parse_f64(f[col[3]], row)};
    s.right_dir = {parse_f64(f[col[4]], row), parse_f64(f[col[5]], row), parse_f64(f[col[6]], row)};
    s.left_pupil_mm = parse_f64(f[col[7]], row);
    s.right_pupil_mm = parse_f64(f[col[8]], row);
    s.left_valid = parse_valid_flag(f[col[9]], row);
    s.right_valid = parse_valid_flag(f[col[10]], row);
    if (!session.samples.empty() && s.timestamp_us <= session.samples.back().timestamp_us)
      throw GazeError(ErrorCode::NonMonotonicTimestamp,
                      "at row " + std::to_string(row) + " (" + std::to_string(s.timestamp_us) +
                          " after " + std::to_string(session.samples.back().timestamp_us) + ")");
    session.samples.push_back(s);
  }
  return session;
}

void save_session(const GazeSession& session, const std::string& csv_path,
                  const std::string& manifest_path) {
  {
    std::ofstream out(csv_path);
    if (!out) throw GazeError(ErrorCode::IoError, "cannot open for write: " + csv_path);
    out << kGazeCsvHeader << '\n';
    for (const GazeSample& s : session.samples) {
      out << s.timestamp_us << ',' << format_f64(s.left_dir.x) << ',' << format_f64(s.left_dir.y)
          << ',' << format_f64(s.left_dir.z) << ',' << format_f64(s.right_dir.x) << ','
          << format_f64(s.right_dir.y) << ',' << format_f64(s.right_dir.z) << ','
          << format_f64(s.left_pupil_mm) << ',' << format_f64(s.right_pupil_mm) << ','
          << (s.left_valid ? '1' : '0') << ',' << (s.right_valid ? '1' : '0') << '\n';
    }
    if (!out) throw GazeError(ErrorCode::IoError, "write failed: " + csv_path);
  }
  std::ofstream out(manifest_path);
  if (!out) throw GazeError(ErrorCode::IoError, "cannot open for write: " + manifest_path);
  out << "participant_id=" << session.meta.participant_id << '\n'
      << "tlx_mental=" << session.meta.tlx_mental << '\n'
      << "tutorial_start_us=" << session.meta.tutorial_start_us << '\n'
      << "sampling_hz=" << format_f64(session.meta.sampling_hz) << '\n';
  if (!out) throw GazeError(ErrorCode::IoError, "write failed: " + manifest_path);
}

GazeSession trim_pre_task(const GazeSession& session) {
  GazeSession out;
  out.meta = session.meta;
  const int64_t marker = session.meta.tutorial_start_us;
  size_t first = 0;
  while (first < session.samples.size() && session.samples[first].timestamp_us < marker) ++first;
  if (first == session.samples.size())
    throw GazeError(ErrorCode::EmptyAfterTrim,
                    "tutorial_start_us " + std::to_string(marker) + " is past the last sample");
  const int64_t base = session.samples[first].timestamp_us;
  out.samples.reserve(session.samples.size() - first);
  for (size_t i = first; i < session.samples.size(); ++i) {
    GazeSample s = session.samples[i];
    s.timestamp_us -= base;
    out.samples.push_back(s);
  }
  out.meta.tutorial_start_us = 0;
  return out;
}

std::vector<bool> validity_mask(const GazeSession& session) {
  std::vector<bool> mask(session.samples.size());
  for (size_t i = 0; i < session.samples.size(); ++i)
    mask[i] = session.samples[i].left_valid && session.samples[i].right_valid;
  return mask;
}

}  // namespace gazeload
