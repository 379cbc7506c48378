#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gazeload/ivt.hpp"
#include "gazeload/matrix.hpp"
#include "gazeload/types.hpp"

namespace gazeload {

enum class InputMode : uint8_t { Flatten = 0, Summary = 1 };

struct WindowConfig {
  size_t window_len = 2000;  // samples
  size_t stride = 500;       // samples
  InputMode input_mode = InputMode::Flatten;
};

struct WindowedDataset {
  Matrix inputs;                    // one row per window
  std::vector<int> labels;          // 0 = low, 1 = high
  std::vector<std::string> groups;  // participant id per row
  InputMode mode = InputMode::Flatten;

  size_t rows() const { return inputs.rows; }
};

// NASA-TLX mental demand to binary label: 1..4 -> 0, 5..7 -> 1.
// Throws OutOfRange outside [1, 7].
int binarize_tlx(int score);

struct AlignedChannels {
  std::vector<double> ch1;  // fixation duration / session max duration
  std::vector<double> ch2;  // fixation mean pupil (normalized units)
};

// Per-sample channels: inside fixation k both channels carry that event's
// values; samples after a fixation carry the most recent event's values;
// samples before the first fixation are zero. With no events at all both
// channels are all-zero.
AlignedChannels sample_aligned_channels(const GazeSession& session,
                                        const std::vector<FixationEvent>& events);

// Windows start at 0, stride, 2*stride, ... while start + window_len <= N.
// Flatten rows are [ch1 window || ch2 window]; Summary rows are
// mean/std/min/max per channel (8 values). Throws SessionTooShort.
WindowedDataset make_windows(const AlignedChannels& channels, int label,
                             const std::string& group, const WindowConfig& cfg);

// Row-wise concatenation; width and mode must agree.
void append_dataset(WindowedDataset& dst, const WindowedDataset& src);

enum class SplitMode { WindowRandom, SubjectWise };

// WindowRandom: stratified-by-label random row split. SubjectWise: whole
// participants go to one side, chosen greedily per label class so both sides
// keep both classes; DegenerateSplit when that is impossible.
std::pair<WindowedDataset, WindowedDataset> split(const WindowedDataset& dataset, SplitMode mode,
                                                  double test_fraction, uint64_t seed);

// Binary container, magic "GLDS". Round-trips bit-exactly.
void save_dataset(const WindowedDataset& dataset, const std::string& path);
WindowedDataset load_dataset(const std::string& path);

// Inspection export: label,group,f0,f1,...
void export_dataset_csv(const WindowedDataset& dataset, const std::string& path);

}  // namespace gazeload
