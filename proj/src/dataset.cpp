#include "gazeload/dataset.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include "gazeload/binio.hpp"
#include "gazeload/error.hpp"
#include "gazeload/kernels.hpp"
#include "gazeload/rng.hpp"

namespace gazeload {
namespace {

constexpr char kDatasetMagic[5] = "GLDS";
constexpr uint32_t kDatasetVersion = 1;

WindowedDataset take_rows(const WindowedDataset& src, const std::vector<size_t>& rows) {
  WindowedDataset out;
  out.mode = src.mode;
  out.inputs = Matrix(rows.size(), src.inputs.cols);
  out.labels.reserve(rows.size());
  out.groups.reserve(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    const size_t r = rows[i];
    std::copy(src.inputs.row_ptr(r), src.inputs.row_ptr(r) + src.inputs.cols,
              out.inputs.row_ptr(i));
    out.labels.push_back(src.labels[r]);
    out.groups.push_back(src.groups[r]);
  }
  return out;
}

}  // namespace

int binarize_tlx(int score) {
  if (score < 1 || score > 7)
    throw GazeError(ErrorCode::OutOfRange, "tlx score " + std::to_string(score));
  return score <= 4 ? 0 : 1;
}

AlignedChannels sample_aligned_channels(const GazeSession& session,
                                        const std::vector<FixationEvent>& events) {
  const size_t n = session.samples.size();
  AlignedChannels ch;
  ch.ch1.assign(n, 0.0);
  ch.ch2.assign(n, 0.0);
  if (events.empty()) return ch;

  double max_dur = 0.0;
  for (const FixationEvent& e : events) max_dur = std::max(max_dur, e.duration_ms);

  size_t next_event = 0;
  double cur1 = 0.0, cur2 = 0.0;
  for (size_t i = 0; i < n; ++i) {
    while (next_event < events.size() && i >= events[next_event].sample_range.first) {
      cur1 = max_dur > 0.0 ? events[next_event].duration_ms / max_dur : 0.0;
      cur2 = events[next_event].mean_pupil;
      ++next_event;
    }
    ch.ch1[i] = cur1;
    ch.ch2[i] = cur2;
  }
  return ch;
}

WindowedDataset make_windows(const AlignedChannels& channels, int label,
                             const std::string& group, const WindowConfig& cfg) {
  if (cfg.window_len < 1 || cfg.stride < 1 || cfg.stride > cfg.window_len)
    throw GazeError(ErrorCode::InvalidConfig, "window_len >= stride >= 1 required");
  if (channels.ch1.size() != channels.ch2.size())
    throw GazeError(ErrorCode::LengthMismatch, "channel lengths differ");
  const size_t n = channels.ch1.size();
  const size_t w = cfg.window_len;
  if (n < w)
    throw GazeError(ErrorCode::SessionTooShort, std::to_string(n) + " samples, window " +
                                                    std::to_string(w));
  const size_t count = (n - w) / cfg.stride + 1;
  const size_t width = cfg.input_mode == InputMode::Flatten ? 2 * w : 8;

  WindowedDataset ds;
  ds.mode = cfg.input_mode;
  ds.inputs = Matrix(count, width);
  ds.labels.assign(count, label);
  ds.groups.assign(count, group);

  for (size_t r = 0; r < count; ++r) {
    const size_t start = r * cfg.stride;
    double* row = ds.inputs.row_ptr(r);
    if (cfg.input_mode == InputMode::Flatten) {
      std::copy(channels.ch1.begin() + static_cast<ptrdiff_t>(start),
                channels.ch1.begin() + static_cast<ptrdiff_t>(start + w), row);
      std::copy(channels.ch2.begin() + static_cast<ptrdiff_t>(start),
                channels.ch2.begin() + static_cast<ptrdiff_t>(start + w), row + w);
    } else {
      auto summarize = [&](const std::vector<double>& c, double* dst) {
        const double* x = c.data() + start;
        const double mean = active_kernels().reduce_sum(w, x) / static_cast<double>(w);
        double acc = 0.0;
        for (size_t i = 0; i < w; ++i) acc += (x[i] - mean) * (x[i] - mean);
        double mn, mx;
        active_kernels().reduce_min_max(w, x, &mn, &mx);
        dst[0] = mean;
        dst[1] = std::sqrt(acc / static_cast<double>(w));
        dst[2] = mn;
        dst[3] = mx;
      };
      summarize(channels.ch1, row);
      summarize(channels.ch2, row + 4);
    }
  }
  return ds;
}

void append_dataset(WindowedDataset& dst, const WindowedDataset& src) {
  if (dst.rows() == 0) {
    dst = src;
    return;
  }
  if (dst.inputs.cols != src.inputs.cols || dst.mode != src.mode)
    throw GazeError(ErrorCode::DimensionMismatch, "append_dataset: width/mode mismatch");
  Matrix merged(dst.rows() + src.rows(), dst.inputs.cols);
  std::copy(dst.inputs.a.begin(), dst.inputs.a.end(), merged.a.begin());
  std::copy(src.inputs.a.begin(), src.inputs.a.end(),
            merged.a.begin() + static_cast<ptrdiff_t>(dst.inputs.size()));
  dst.inputs = std::move(merged);
  dst.labels.insert(dst.labels.end(), src.labels.begin(), src.labels.end());
  dst.groups.insert(dst.groups.end(), src.groups.begin(), src.groups.end());
}

std::pair<WindowedDataset, WindowedDataset> split(const WindowedDataset& dataset, SplitMode mode,
                                                  double test_fraction, uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw GazeError(ErrorCode::InvalidConfig, "test_fraction must be in (0, 1)");
  std::vector<size_t> test_rows;

  if (mode == SplitMode::WindowRandom) {
    for (int cls = 0; cls < 2; ++cls) {
      std::vector<size_t> rows;
      for (size_t i = 0; i < dataset.rows(); ++i)
        if (dataset.labels[i] == cls) rows.push_back(i);
      Rng rng(mix_seed(seed, static_cast<uint64_t>(cls)));
      rng.shuffle(rows);
      const size_t n_test = static_cast<size_t>(
          std::llround(static_cast<double>(rows.size()) * test_fraction));
      test_rows.insert(test_rows.end(), rows.begin(),
                       rows.begin() + static_cast<ptrdiff_t>(n_test));
    }
  } else {
    // Whole participants per side; fill each class's test quota greedily from
    // a seed-shuffled group order.
    std::vector<std::string> group_order;
    std::map<std::string, std::vector<size_t>> group_rows;
    for (size_t i = 0; i < dataset.rows(); ++i) {
      auto [it, inserted] = group_rows.try_emplace(dataset.groups[i]);
      if (inserted) group_order.push_back(dataset.groups[i]);
      it->second.push_back(i);
    }
    for (int cls = 0; cls < 2; ++cls) {
      std::vector<std::string> cls_groups;
      size_t cls_rows = 0;
      for (const std::string& g : group_order) {
        const auto& rows = group_rows[g];
        if (dataset.labels[rows.front()] == cls) {
          cls_groups.push_back(g);
          cls_rows += rows.size();
        }
      }
      if (cls_rows == 0) continue;  // absent class caught below
      if (cls_groups.size() < 2)
        throw GazeError(ErrorCode::DegenerateSplit,
                        "class " + std::to_string(cls) + " has fewer than 2 participants");
      Rng rng(mix_seed(seed, 16 + static_cast<uint64_t>(cls)));
      rng.shuffle(cls_groups);
      const double target = static_cast<double>(cls_rows) * test_fraction;
      size_t taken = 0;
      // Take shuffled groups while that moves the class's test row count
      // closer to its quota, always leaving at least one group in train.
      for (size_t gi = 0; gi + 1 < cls_groups.size(); ++gi) {
        const auto& rows = group_rows[cls_groups[gi]];
        const double before = std::abs(static_cast<double>(taken) - target);
        const double after = std::abs(static_cast<double>(taken + rows.size()) - target);
        if (after > before) break;
        test_rows.insert(test_rows.end(), rows.begin(), rows.end());
        taken += rows.size();
      }
    }
  }

  std::sort(test_rows.begin(), test_rows.end());
  std::vector<bool> in_test(dataset.rows(), false);
  for (size_t r : test_rows) in_test[r] = true;
  std::vector<size_t> train_rows;
  for (size_t i = 0; i < dataset.rows(); ++i)
    if (!in_test[i]) train_rows.push_back(i);

  auto has_both = [&](const std::vector<size_t>& rows) {
    bool c0 = false, c1 = false;
    for (size_t r : rows) (dataset.labels[r] == 0 ? c0 : c1) = true;
    return c0 && c1;
  };
  if (mode == SplitMode::SubjectWise && (!has_both(train_rows) || !has_both(test_rows)))
    throw GazeError(ErrorCode::DegenerateSplit, "a split side would hold a single class");

  return {take_rows(dataset, train_rows), take_rows(dataset, test_rows)};
}

void save_dataset(const WindowedDataset& dataset, const std::string& path) {
  BinWriter w(path);
  w.magic(kDatasetMagic);
  w.u32(kDatasetVersion);
  w.u64(dataset.rows());
  w.u64(dataset.inputs.cols);
  w.u8(static_cast<uint8_t>(dataset.mode));
  w.f64_array(dataset.inputs.a.data(), dataset.inputs.size());
  for (int l : dataset.labels) w.u8(static_cast<uint8_t>(l));
  // group-name table: unique names in first-appearance order + per-row index
  std::vector<std::string> names;
  std::map<std::string, uint32_t> index;
  for (const std::string& g : dataset.groups)
    if (index.try_emplace(g, static_cast<uint32_t>(names.size())).second) names.push_back(g);
  w.u64(names.size());
  for (const std::string& n : names) w.str(n);
  for (const std::string& g : dataset.groups) w.u32(index.at(g));
  w.close();
}

WindowedDataset load_dataset(const std::string& path) {
  BinReader r(path);
  r.expect_magic(kDatasetMagic);
  const uint32_t version = r.u32();
  if (version != kDatasetVersion)
    throw GazeError(ErrorCode::IoError, "unsupported dataset version " + std::to_string(version));
  WindowedDataset ds;
  const uint64_t rows = r.u64();
  const uint64_t cols = r.u64();
  ds.mode = static_cast<InputMode>(r.u8());
  ds.inputs = Matrix(rows, cols);
  r.f64_array(ds.inputs.a.data(), ds.inputs.size());
  ds.labels.resize(rows);
  for (uint64_t i = 0; i < rows; ++i) ds.labels[i] = r.u8();
  const uint64_t n_names = r.u64();
  std::vector<std::string> names(n_names);
  for (auto& n : names) n = r.str();
  ds.groups.resize(rows);
  for (uint64_t i = 0; i < rows; ++i) {
    const uint32_t gi = r.u32();
    if (gi >= n_names) throw GazeError(ErrorCode::IoError, "dataset group index out of range");
    ds.groups[i] = names[gi];
  }
  return ds;
}

void export_dataset_csv(const WindowedDataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw GazeError(ErrorCode::IoError, "cannot open for write: " + path);
  out << "label,group";
  for (size_t c = 0; c < dataset.inputs.cols; ++c) out << ",f" << c;
  out << '\n';
  std::array<char, 32> buf;
  for (size_t r = 0; r < dataset.rows(); ++r) {
    out << dataset.labels[r] << ',' << dataset.groups[r];
    for (size_t c = 0; c < dataset.inputs.cols; ++c) {
      auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), dataset.inputs.at(r, c));
      out << ',';
      out.write(buf.data(), p - buf.data());
    }
    out << '\n';
  }
  if (!out) throw GazeError(ErrorCode::IoError, "write failed: " + path);
}

}  // namespace gazeload
