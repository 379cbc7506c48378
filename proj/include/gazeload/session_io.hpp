#pragma once

#include <string>
#include <vector>

#include "gazeload/types.hpp"

namespace gazeload {

// Gaze CSV columns, in canonical order. Header row is required; column order
// in the file is free because loading maps by name.
inline constexpr const char* kGazeCsvHeader =
    "timestamp_us,left_dir_x,left_dir_y,left_dir_z,right_dir_x,right_dir_y,right_dir_z,"
    "left_pupil_mm,right_pupil_mm,left_valid,right_valid";

SessionMeta load_manifest(const std::string& manifest_path);

// Parses a session from its CSV + manifest pair. Timestamp ordering is
// enforced, not repaired: a non-monotonic row raises NonMonotonicTimestamp
// with its 1-based data row index.
GazeSession load_session(const std::string& csv_path, const std::string& manifest_path);

// Writes the pair back out. Doubles are printed shortest-round-trip so
// load(save(s)) reproduces s bit-identically.
void save_session(const GazeSession& session, const std::string& csv_path,
                  const std::string& manifest_path);

// Drops samples strictly before meta.tutorial_start_us (the marker sample
// itself is kept), re-bases timestamps to start at 0, and zeroes the marker
// so trimming is idempotent.
GazeSession trim_pre_task(const GazeSession& session);

// Per-sample left_valid AND right_valid.
std::vector<bool> validity_mask(const GazeSession& session);

}  // namespace gazeload
