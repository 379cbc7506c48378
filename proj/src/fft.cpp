#include "gazeload/fft.hpp"

#include <cmath>
#include <numbers>

#include "gazeload/error.hpp"

namespace gazeload {
namespace {

using cd = std::complex<double>;

bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Iterative radix-2 Cooley-Tukey, in place. n must be a power of two.
void fft_pow2(std::vector<cd>& a, bool inverse) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    cd wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      cd w(1.0, 0.0);
      for (size_t j = 0; j < len / 2; ++j) {
        cd u = a[i + j];
        cd v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// Bluestein chirp-z: expresses an arbitrary-length DFT as a convolution that
// a padded power-of-two FFT can evaluate. The k^2 phase is reduced mod 2n in
// integer arithmetic so large indices lose no precision.
std::vector<cd> bluestein(const std::vector<cd>& x, bool inverse) {
  const size_t n = x.size();
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<cd> chirp(n);
  for (size_t k = 0; k < n; ++k) {
    uint64_t m = (static_cast<uint64_t>(k) * k) % (2 * n);
    double ang = sign * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n);
    chirp[k] = cd(std::cos(ang), std::sin(ang));
  }
  const size_t m = next_pow2(2 * n - 1);
  std::vector<cd> a(m, cd(0, 0)), b(m, cd(0, 0));
  for (size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
  b[0] = std::conj(chirp[0]);
  for (size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);
  fft_pow2(a, false);
  fft_pow2(b, false);
  for (size_t k = 0; k < m; ++k) a[k] *= b[k];
  fft_pow2(a, true);
  std::vector<cd> out(n);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (size_t k = 0; k < n; ++k) out[k] = a[k] * inv_m * chirp[k];
  return out;
}

std::vector<cd> transform(std::vector<cd> x, bool inverse) {
  if (x.empty()) throw GazeError(ErrorCode::EmptySignal, "transform of empty signal");
  if (x.size() == 1) return x;
  if (is_pow2(x.size())) {
    fft_pow2(x, inverse);
    return x;
  }
  return bluestein(x, inverse);
}

}  // namespace

std::vector<cd> dft_forward(std::span<const double> signal) {
  if (signal.empty()) throw GazeError(ErrorCode::EmptySignal, "dft_forward of empty signal");
  std::vector<cd> x(signal.size());
  for (size_t i = 0; i < signal.size(); ++i) x[i] = cd(signal[i], 0.0);
  return transform(std::move(x), false);
}

std::vector<cd> dft_forward_complex(std::vector<cd> x) { return transform(std::move(x), false); }

std::vector<cd> dft_inverse(std::span<const cd> spectrum) {
  std::vector<cd> x(spectrum.begin(), spectrum.end());
  x = transform(std::move(x), true);
  const double inv_n = 1.0 / static_cast<double>(x.size());
  for (cd& v : x) v *= inv_n;
  return x;
}

std::vector<double> dft_inverse_real(std::span<const cd> spectrum) {
  std::vector<cd> x = dft_inverse(spectrum);
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = x[i].real();
  return out;
}

}  // namespace gazeload
