#include "gazeload/preprocess.hpp"

#include <cmath>
#include <complex>
#include <utility>

#include "gazeload/error.hpp"
#include "gazeload/fft.hpp"
#include "gazeload/kernels.hpp"
#include "gazeload/session_io.hpp"

namespace gazeload {
namespace {

void require_finite(const std::vector<double>& signal, const char* who) {
  for (double v : signal)
    if (!std::isfinite(v)) throw GazeError(ErrorCode::NaNInput, who);
}

// Linearly fills invalid runs between valid anchors; edge runs extend the
// nearest valid value. Returns [start, end) index pairs of interior gaps
// whose anchor-to-anchor span exceeds max_gap_ms, which become denoising
// segment boundaries.
std::vector<std::pair<size_t, size_t>> fill_gaps(std::vector<double>& x,
                                                 const std::vector<bool>& valid,
                                                 const std::vector<int64_t>& ts,
                                                 double max_gap_ms) {
  const size_t n = x.size();
  std::vector<std::pair<size_t, size_t>> long_gaps;
  size_t i = 0;
  while (i < n) {
    if (valid[i]) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < n && !valid[j]) ++j;  // invalid run [i, j)
    const bool has_prev = i > 0;
    const bool has_next = j < n;
    if (has_prev && has_next) {
      const double t0 = static_cast<double>(ts[i - 1]);
      const double t1 = static_cast<double>(ts[j]);
      const double v0 = x[i - 1];
      const double v1 = x[j];
      for (size_t k = i; k < j; ++k) {
        const double f = (static_cast<double>(ts[k]) - t0) / (t1 - t0);
        x[k] = v0 + f * (v1 - v0);
      }
      if ((t1 - t0) / 1000.0 > max_gap_ms) long_gaps.emplace_back(i, j);
    } else if (has_prev) {
      for (size_t k = i; k < j; ++k) x[k] = x[i - 1];
    } else if (has_next) {
      for (size_t k = i; k < j; ++k) x[k] = x[j];
    } else {
      for (size_t k = i; k < j; ++k) x[k] = 0.0;  // no valid sample anywhere
    }
    i = j;
  }
  return long_gaps;
}

void denoise_segments(std::vector<double>& x,
                      const std::vector<std::pair<size_t, size_t>>& long_gaps,
                      double sampling_hz, double cutoff_hz) {
  size_t seg_start = 0;
  auto run = [&](size_t b, size_t e) {
    if (e - b < 2) return;  // length-1 segment is pure DC, nothing to filter
    std::vector<double> seg(x.begin() + static_cast<ptrdiff_t>(b),
                            x.begin() + static_cast<ptrdiff_t>(e));
    seg = lowpass_denoise(seg, sampling_hz, cutoff_hz);
    std::copy(seg.begin(), seg.end(), x.begin() + static_cast<ptrdiff_t>(b));
  };
  for (const auto& [gb, ge] : long_gaps) {
    run(seg_start, gb);
    seg_start = ge;
  }
  run(seg_start, x.size());
}

}  // namespace

std::vector<double> lowpass_denoise(const std::vector<double>& signal, double sampling_hz,
                                    double cutoff_hz) {
  if (signal.empty()) throw GazeError(ErrorCode::EmptySignal, "lowpass_denoise");
  require_finite(signal, "lowpass_denoise");
  if (!(cutoff_hz > 0.0) || cutoff_hz >= sampling_hz / 2.0)
    throw GazeError(ErrorCode::CutoffAboveNyquist,
                    "cutoff must lie in (0, " + std::to_string(sampling_hz / 2.0) + ") Hz");
  if (signal.size() == 1) return signal;

  const size_t n = signal.size();
  std::vector<std::complex<double>> spec = dft_forward(signal);
  for (size_t k = 0; k < n; ++k) {
    const size_t folded = k <= n - k ? k : n - k;  // min(k, n-k): |frequency| index
    const double freq = static_cast<double>(folded) * sampling_hz / static_cast<double>(n);
    if (freq > cutoff_hz) spec[k] = 0.0;
  }
  return dft_inverse_real(spec);
}

std::vector<double> minmax_normalize(const std::vector<double>& signal) {
  require_finite(signal, "minmax_normalize");
  if (signal.empty()) return {};
  double mn, mx;
  active_kernels().reduce_min_max(signal.size(), signal.data(), &mn, &mx);
  std::vector<double> out(signal.size());
  if (mx == mn) return out;  // zero range -> all zeros
  const double d = mx - mn;
  // (x - mn) / d rather than fma(x, 1/d, -mn/d): the direct form provably
  // stays inside [0, 1] in floating point.
  for (size_t i = 0; i < signal.size(); ++i) out[i] = (signal[i] - mn) / d;
  return out;
}

PupilChannels preprocess_pupil(const GazeSession& session, const PreprocessConfig& cfg) {
  const size_t n = session.samples.size();
  std::vector<int64_t> ts(n);
  std::vector<bool> left_valid(n), right_valid(n);
  PupilChannels ch;
  ch.left.resize(n);
  ch.right.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const GazeSample& s = session.samples[i];
    ts[i] = s.timestamp_us;
    ch.left[i] = s.left_pupil_mm;
    ch.right[i] = s.right_pupil_mm;
    left_valid[i] = s.left_valid;
    right_valid[i] = s.right_valid;
  }
  const double hz = session.meta.sampling_hz;
  auto process = [&](std::vector<double>& x, const std::vector<bool>& valid) {
    auto long_gaps = fill_gaps(x, valid, ts, cfg.max_gap_interp_ms);
    denoise_segments(x, long_gaps, hz, cfg.cutoff_hz);
    if (cfg.normalize_scope == NormalizeScope::PerSession) x = minmax_normalize(x);
  };
  process(ch.left, left_valid);
  process(ch.right, right_valid);
  return ch;
}

void normalize_pooled(std::vector<std::vector<double>*> channels) {
  double mn = 0.0, mx = 0.0;
  bool first = true;
  for (const auto* c : channels) {
    if (c->empty()) continue;
    double cmn, cmx;
    active_kernels().reduce_min_max(c->size(), c->data(), &cmn, &cmx);
    if (first) {
      mn = cmn;
      mx = cmx;
      first = false;
    } else {
      mn = std::min(mn, cmn);
      mx = std::max(mx, cmx);
    }
  }
  if (first) return;
  const double d = mx - mn;
  for (auto* c : channels)
    for (double& v : *c) v = d == 0.0 ? 0.0 : (v - mn) / d;
}

}  // namespace gazeload
