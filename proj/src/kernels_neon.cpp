#include <arm_neon.h>

#include <cmath>
#include <cstddef>

#include "gazeload/kernels.hpp"

// NEON (aarch64) variant. A 128-bit register holds two lanes, so the
// contract's four accumulator lanes live in a register pair: acc_a = lanes
// 0,1 and acc_b = lanes 2,3.

namespace gazeload {
namespace {

inline double combine_sum(float64x2_t a, float64x2_t b) {
  double l0 = vgetq_lane_f64(a, 0), l1 = vgetq_lane_f64(a, 1);
  double l2 = vgetq_lane_f64(b, 0), l3 = vgetq_lane_f64(b, 1);
  return (l0 + l2) + (l1 + l3);
}

double dot_neon(size_t n, const double* x, const double* y) {
  float64x2_t a = vdupq_n_f64(0.0), b = vdupq_n_f64(0.0);
  size_t n4 = n & ~size_t(3);
  for (size_t i = 0; i < n4; i += 4) {
    a = vfmaq_f64(a, vld1q_f64(x + i), vld1q_f64(y + i));
    b = vfmaq_f64(b, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  if (n4 == n) return combine_sum(a, b);
  double lane[4] = {vgetq_lane_f64(a, 0), vgetq_lane_f64(a, 1), vgetq_lane_f64(b, 0),
                    vgetq_lane_f64(b, 1)};
  for (size_t i = n4; i < n; ++i) lane[i - n4] = std::fma(x[i], y[i], lane[i - n4]);
  return (lane[0] + lane[2]) + (lane[1] + lane[3]);
}

double reduce_sum_neon(size_t n, const double* x) {
  float64x2_t a = vdupq_n_f64(0.0), b = vdupq_n_f64(0.0);
  size_t n4 = n & ~size_t(3);
  for (size_t i = 0; i < n4; i += 4) {
    a = vaddq_f64(a, vld1q_f64(x + i));
    b = vaddq_f64(b, vld1q_f64(x + i + 2));
  }
  if (n4 == n) return combine_sum(a, b);
  double lane[4] = {vgetq_lane_f64(a, 0), vgetq_lane_f64(a, 1), vgetq_lane_f64(b, 0),
                    vgetq_lane_f64(b, 1)};
  for (size_t i = n4; i < n; ++i) lane[i - n4] += x[i];
  return (lane[0] + lane[2]) + (lane[1] + lane[3]);
}

void reduce_min_max_neon(size_t n, const double* x, double* mn, double* mx) {
  float64x2_t lo_a = vdupq_n_f64(HUGE_VAL), lo_b = vdupq_n_f64(HUGE_VAL);
  float64x2_t hi_a = vdupq_n_f64(-HUGE_VAL), hi_b = vdupq_n_f64(-HUGE_VAL);
  size_t n4 = n & ~size_t(3);
  for (size_t i = 0; i < n4; i += 4) {
    float64x2_t va = vld1q_f64(x + i), vb = vld1q_f64(x + i + 2);
    lo_a = vminq_f64(lo_a, va);
    lo_b = vminq_f64(lo_b, vb);
    hi_a = vmaxq_f64(hi_a, va);
    hi_b = vmaxq_f64(hi_b, vb);
  }
  double lo[4] = {vgetq_lane_f64(lo_a, 0), vgetq_lane_f64(lo_a, 1), vgetq_lane_f64(lo_b, 0),
                  vgetq_lane_f64(lo_b, 1)};
  double hi[4] = {vgetq_lane_f64(hi_a, 0), vgetq_lane_f64(hi_a, 1), vgetq_lane_f64(hi_b, 0),
                  vgetq_lane_f64(hi_b, 1)};
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

void axpy_neon(size_t n, double a, const double* x, double* y) {
  float64x2_t va = vdupq_n_f64(a);
  size_t n2 = n & ~size_t(1);
  for (size_t i = 0; i < n2; i += 2)
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (size_t i = n2; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void scale_shift_neon(size_t n, double a, double b, const double* x, double* y) {
  float64x2_t va = vdupq_n_f64(a), vb = vdupq_n_f64(b);
  size_t n2 = n & ~size_t(1);
  for (size_t i = 0; i < n2; i += 2)
    vst1q_f64(y + i, vfmaq_f64(vb, va, vld1q_f64(x + i)));
  for (size_t i = n2; i < n; ++i) y[i] = std::fma(a, x[i], b);
}

inline void mk1x8(size_t k, const double* A, const double* B, size_t ldb, double* C) {
  float64x2_t c0 = vdupq_n_f64(0.0), c1 = vdupq_n_f64(0.0);
  float64x2_t c2 = vdupq_n_f64(0.0), c3 = vdupq_n_f64(0.0);
  for (size_t kk = 0; kk < k; ++kk) {
    const double* b = B + kk * ldb;
    float64x2_t a = vdupq_n_f64(A[kk]);
    c0 = vfmaq_f64(c0, a, vld1q_f64(b));
    c1 = vfmaq_f64(c1, a, vld1q_f64(b + 2));
    c2 = vfmaq_f64(c2, a, vld1q_f64(b + 4));
    c3 = vfmaq_f64(c3, a, vld1q_f64(b + 6));
  }
  vst1q_f64(C, vaddq_f64(vld1q_f64(C), c0));
  vst1q_f64(C + 2, vaddq_f64(vld1q_f64(C + 2), c1));
  vst1q_f64(C + 4, vaddq_f64(vld1q_f64(C + 4), c2));
  vst1q_f64(C + 6, vaddq_f64(vld1q_f64(C + 6), c3));
}

void gemm_neon(size_t m, size_t k, size_t n, const double* A, size_t lda,
               const double* B, size_t ldb, double* C, size_t ldc) {
  size_t j0 = 0;
  for (; j0 + 8 <= n; j0 += 8)
    for (size_t i = 0; i < m; ++i) mk1x8(k, A + i * lda, B + j0, ldb, C + i * ldc + j0);
  if (j0 < n) {
    size_t jn = n - j0;
    double acc[8];
    for (size_t i = 0; i < m; ++i) {
      const double* a = A + i * lda;
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

const Kernels& neon_kernels() {
  static const Kernels k = {
      "neon",      dot_neon,         reduce_sum_neon, reduce_min_max_neon,
      axpy_neon,   scale_shift_neon, gemm_neon,
  };
  return k;
}

}  // namespace gazeload
