#include <cmath>
#include <cstddef>
#include <immintrin.h>

#include "gazeload/kernels.hpp"

// AVX2+FMA variant. One ymm register is exactly the four-lane accumulator of
// the kernel contract, so the only care needed is the final combine order and
// keeping tails on the same lane assignment as the scalar reference.

namespace gazeload {
namespace {

inline double combine_sum(__m256d acc) {
  __m128d lo = _mm256_castpd256_pd128(acc);      // lanes 0,1
  __m128d hi = _mm256_extractf128_pd(acc, 1);    // lanes 2,3
  __m128d s = _mm_add_pd(lo, hi);                // (l0+l2, l1+l3)
  return _mm_cvtsd_f64(s) + _mm_cvtsd_f64(_mm_unpackhi_pd(s, s));
}

double dot_avx2(size_t n, const double* x, const double* y) {
  __m256d acc = _mm256_setzero_pd();
  size_t n4 = n & ~size_t(3);
  for (size_t i = 0; i < n4; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  if (n4 == n) return combine_sum(acc);
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (size_t i = n4; i < n; ++i) lane[i - n4] = std::fma(x[i], y[i], lane[i - n4]);
  return (lane[0] + lane[2]) + (lane[1] + lane[3]);
}

double reduce_sum_avx2(size_t n, const double* x) {
  __m256d acc = _mm256_setzero_pd();
  size_t n4 = n & ~size_t(3);
  for (size_t i = 0; i < n4; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  if (n4 == n) return combine_sum(acc);
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (size_t i = n4; i < n; ++i) lane[i - n4] += x[i];
  return (lane[0] + lane[2]) + (lane[1] + lane[3]);
}

void reduce_min_max_avx2(size_t n, const double* x, double* mn, double* mx) {
  __m256d vlo = _mm256_set1_pd(HUGE_VAL);
  __m256d vhi = _mm256_set1_pd(-HUGE_VAL);
  size_t n4 = n & ~size_t(3);
  for (size_t i = 0; i < n4; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    vlo = _mm256_min_pd(vlo, v);
    vhi = _mm256_max_pd(vhi, v);
  }
  alignas(32) double lo[4], hi[4];
  _mm256_store_pd(lo, vlo);
  _mm256_store_pd(hi, vhi);
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

void axpy_avx2(size_t n, double a, const double* x, double* y) {
  __m256d va = _mm256_set1_pd(a);
  size_t n4 = n & ~size_t(3);
  for (size_t i = 0; i < n4; i += 4) {
    __m256d r = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, r);
  }
  for (size_t i = n4; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void scale_shift_avx2(size_t n, double a, double b, const double* x, double* y) {
  __m256d va = _mm256_set1_pd(a);
  __m256d vb = _mm256_set1_pd(b);
  size_t n4 = n & ~size_t(3);
  for (size_t i = 0; i < n4; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vb));
  for (size_t i = n4; i < n; ++i) y[i] = std::fma(a, x[i], b);
}

// 4x8 register-blocked microkernel, k unblocked so each C element is one fma
// chain. B's eight-column stripe stays hot in L2 across the i sweep.
inline void mk4x8(size_t k, const double* A, size_t lda, const double* B, size_t ldb,
                  double* C, size_t ldc) {
  __m256d c00 = _mm256_setzero_pd(), c01 = _mm256_setzero_pd();
  __m256d c10 = _mm256_setzero_pd(), c11 = _mm256_setzero_pd();
  __m256d c20 = _mm256_setzero_pd(), c21 = _mm256_setzero_pd();
  __m256d c30 = _mm256_setzero_pd(), c31 = _mm256_setzero_pd();
  for (size_t kk = 0; kk < k; ++kk) {
    const double* b = B + kk * ldb;
    __m256d b0 = _mm256_loadu_pd(b);
    __m256d b1 = _mm256_loadu_pd(b + 4);
    __m256d a0 = _mm256_set1_pd(A[kk]);
    __m256d a1 = _mm256_set1_pd(A[lda + kk]);
    __m256d a2 = _mm256_set1_pd(A[2 * lda + kk]);
    __m256d a3 = _mm256_set1_pd(A[3 * lda + kk]);
    c00 = _mm256_fmadd_pd(a0, b0, c00);
    c01 = _mm256_fmadd_pd(a0, b1, c01);
    c10 = _mm256_fmadd_pd(a1, b0, c10);
    c11 = _mm256_fmadd_pd(a1, b1, c11);
    c20 = _mm256_fmadd_pd(a2, b0, c20);
    c21 = _mm256_fmadd_pd(a2, b1, c21);
    c30 = _mm256_fmadd_pd(a3, b0, c30);
    c31 = _mm256_fmadd_pd(a3, b1, c31);
  }
  _mm256_storeu_pd(C, _mm256_add_pd(_mm256_loadu_pd(C), c00));
  _mm256_storeu_pd(C + 4, _mm256_add_pd(_mm256_loadu_pd(C + 4), c01));
  _mm256_storeu_pd(C + ldc, _mm256_add_pd(_mm256_loadu_pd(C + ldc), c10));
  _mm256_storeu_pd(C + ldc + 4, _mm256_add_pd(_mm256_loadu_pd(C + ldc + 4), c11));
  _mm256_storeu_pd(C + 2 * ldc, _mm256_add_pd(_mm256_loadu_pd(C + 2 * ldc), c20));
  _mm256_storeu_pd(C + 2 * ldc + 4, _mm256_add_pd(_mm256_loadu_pd(C + 2 * ldc + 4), c21));
  _mm256_storeu_pd(C + 3 * ldc, _mm256_add_pd(_mm256_loadu_pd(C + 3 * ldc), c30));
  _mm256_storeu_pd(C + 3 * ldc + 4, _mm256_add_pd(_mm256_loadu_pd(C + 3 * ldc + 4), c31));
}

inline void mk1x8(size_t k, const double* A, const double* B, size_t ldb, double* C) {
  __m256d c0 = _mm256_setzero_pd(), c1 = _mm256_setzero_pd();
  for (size_t kk = 0; kk < k; ++kk) {
    const double* b = B + kk * ldb;
    __m256d a = _mm256_set1_pd(A[kk]);
    c0 = _mm256_fmadd_pd(a, _mm256_loadu_pd(b), c0);
    c1 = _mm256_fmadd_pd(a, _mm256_loadu_pd(b + 4), c1);
  }
  _mm256_storeu_pd(C, _mm256_add_pd(_mm256_loadu_pd(C), c0));
  _mm256_storeu_pd(C + 4, _mm256_add_pd(_mm256_loadu_pd(C + 4), c1));
}

void gemm_avx2(size_t m, size_t k, size_t n, const double* A, size_t lda,
               const double* B, size_t ldb, double* C, size_t ldc) {
  size_t j0 = 0;
  for (; j0 + 8 <= n; j0 += 8) {
    size_t i = 0;
    for (; i + 4 <= m; i += 4)
      mk4x8(k, A + i * lda, lda, B + j0, ldb, C + i * ldc + j0, ldc);
    for (; i < m; ++i) mk1x8(k, A + i * lda, B + j0, ldb, C + i * ldc + j0);
  }
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

const Kernels& avx2_kernels() {
  static const Kernels k = {
      "avx2",      dot_avx2,         reduce_sum_avx2, reduce_min_max_avx2,
      axpy_avx2,   scale_shift_avx2, gemm_avx2,
  };
  return k;
}

}  // namespace gazeload
