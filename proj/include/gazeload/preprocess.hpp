#pragma once

#include <vector>

#include "gazeload/types.hpp"

namespace gazeload {

enum class NormalizeScope { PerSession, Global };

struct PreprocessConfig {
  double cutoff_hz = 4.0;
  NormalizeScope normalize_scope = NormalizeScope::PerSession;
  // Invalid-sample gaps no longer than this are linearly interpolated before
  // denoising; longer gaps split the channel into segments that are denoised
  // independently (the gap itself stays linearly filled, un-denoised).
  double max_gap_interp_ms = 500.0;
};

// Zeroes every spectral bin with |frequency| > cutoff_hz (conjugate pairs
// together, so the inverse stays real) and returns the filtered signal at the
// original length. Throws EmptySignal, NaNInput, CutoffAboveNyquist.
std::vector<double> lowpass_denoise(const std::vector<double>& signal, double sampling_hz,
                                    double cutoff_hz);

// (x - min) / (max - min); a zero-range signal maps to all zeros so downstream
// models always see finite values. Throws NaNInput.
std::vector<double> minmax_normalize(const std::vector<double>& signal);

struct PupilChannels {
  std::vector<double> left;
  std::vector<double> right;
};

// Gap-fill -> low-pass denoise -> min-max normalize, per pupil channel.
// Under Global scope the normalization step is skipped here; call
// normalize_pooled over the whole corpus afterwards.
PupilChannels preprocess_pupil(const GazeSession& session, const PreprocessConfig& cfg);

// Min-max normalization with min/max pooled across all passed channels;
// used for NormalizeScope::Global.
void normalize_pooled(std::vector<std::vector<double>*> channels);

}  // namespace gazeload
