#include <cmath>
#include <cstddef>

#include "gazeload/kernels.hpp"

// Reference implementations of the kernel contract. Every loop mirrors the
// lane structure of a 256-bit register so wider variants land on identical
// bits. std::fma is the correctly-rounded single-rounding form matching the
// hardware fused instructions.

namespace gazeload {
namespace {

double dot_scalar(size_t n, const double* x, const double* y) {
  double lane[4] = {0, 0, 0, 0};
  size_t n4 = n & ~size_t(3);
  for (size_t i = 0; i < n4; i += 4) {
    lane[0] = std::fma(x[i], y[i], lane[0]);
    lane[1] = std::fma(x[i + 1], y[i + 1], lane[1]);
    lane[2] = std::fma(x[i + 2], y[i + 2], lane[2]);
    lane[3] = std::fma(x[i + 3], y[i + 3], lane[3]);
  }
  for (size_t i = n4; i < n; ++i) lane[i - n4] = std::fma(x[i], y[i], lane[i - n4]);
  return (lane[0] + lane[2]) + (lane[1] + lane[3]);
}

double reduce_sum_scalar(size_t n, const double* x) {
  double lane[4] = {0, 0, 0, 0};
  size_t n4 = n & ~size_t(3);
  for (size_t i = 0; i < n4; i += 4) {
    lane[0] += x[i];
    lane[1] += x[i + 1];
    lane[2] += x[i + 2];
    lane[3] += x[i + 3];
  }
  for (size_t i = n4; i < n; ++i) lane[i - n4] += x[i];
  return (lane[0] + lane[2]) + (lane[1] + lane[3]);
}

void reduce_min_max_scalar(size_t n, const double* x, double* mn, double* mx) {
  double lo[4], hi[4];
  for (int j = 0; j < 4; ++j) {
    lo[j] = HUGE_VAL;
    hi[j] = -HUGE_VAL;
  }
  size_t n4 = n & ~size_t(3);
  for (size_t i = 0; i < n4; i += 4) {
    for (size_t j = 0; j < 4; ++j) {
      double v = x[i + j];
      lo[j] = lo[j] < v ? lo[j] : v;
      hi[j] = hi[j] > v ? hi[j] : v;
    }
  }
  for (size_t i = n4; i < n; ++i) {
    double v = x[i];
    size_t j = i - n4;
    lo[j] = lo[j] < v ? lo[j] : v;
    hi[j] = hi[j] > v ? hi[j] : v;
  }
  double l02 = lo[0] < lo[2] ? lo[0] : lo[2];
  double l13 = lo[1] < lo[3] ? lo[1] : lo[3];
  *mn = l02 < l13 ? l02 : l13;
  double h02 = hi[0] > hi[2] ? hi[0] : hi[2];
  double h13 = hi[1] > hi[3] ? hi[1] : hi[3];
  *mx = h02 > h13 ? h02 : h13;
}

void axpy_scalar(size_t n, double a, const double* x, double* y) {
  for (size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void scale_shift_scalar(size_t n, double a, double b, const double* x, double* y) {
  for (size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[i], b);
}

// Row-blocked over j so B is walked row-major; each C element still sees a
// single k-ascending fma chain started at zero.
void gemm_scalar(size_t m, size_t k, size_t n, const double* A, size_t lda,
                 const double* B, size_t ldb, double* C, size_t ldc) {
  constexpr size_t JB = 8;
  double acc[JB];
  for (size_t i = 0; i < m; ++i) {
    const double* a = A + i * lda;
    for (size_t j0 = 0; j0 < n; j0 += JB) {
      size_t jn = (n - j0 < JB) ? n - j0 : JB;
      for (size_t j = 0; j < jn; ++j) acc[j] = 0.0;
      for (size_t kk = 0; kk < k; ++kk) {
        double av = a[kk];
        const double* b = B + kk * ldb + j0;
        for (size_t j = 0; j < jn; ++j) acc[j] = std::fma(av, b[j], acc[j]);
      }
      double* c = C + i * ldc + j0;
      for (size_t j = 0; j < jn; ++j) c[j] += acc[j];
    }
  }
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k = {
      "scalar",        dot_scalar,         reduce_sum_scalar, reduce_min_max_scalar,
      axpy_scalar,     scale_shift_scalar, gemm_scalar,
  };
  return k;
}

}  // namespace gazeload
