#pragma once

#include <cstddef>
#include <string>
#include <vector>

// Data-parallel inner loops behind the numeric modules, with one fixed
// evaluation-order contract so every variant produces bit-identical doubles:
//
//   * dot / reduce_sum: four-lane striped accumulation. Lane j owns elements
//     j, j+4, j+8, ... of the main block; tail elements n&~3 .. n-1 fold into
//     lanes 0.. in order. Final combine is (l0 + l2) + (l1 + l3), which is
//     what a 256-bit register reduction does naturally.
//   * dot uses fma(x, y, acc) per element; reduce_sum uses plain adds.
//   * reduce_min_max uses the same striping with (acc < x ? acc : x) lane
//     semantics; inputs must be NaN-free.
//   * gemm: C[i,j] += chain, where chain starts at 0 and applies
//     fma(A[i,k], B[k,j], chain) for k ascending; one rounding at the final
//     add into C. Any blocking must preserve that per-element chain.
//   * axpy / scale_shift are elementwise fma, order-free by construction.
//
// The scalar variant is the reference; SIMD variants are equivalence-tested
// against it bitwise. Selection happens once at startup from CPU features,
// overridable with GAZELOAD_SIMD=scalar|avx2|neon|auto.

namespace gazeload {

struct Kernels {
  const char* name;

  double (*dot)(size_t n, const double* x, const double* y);
  double (*reduce_sum)(size_t n, const double* x);
  void (*reduce_min_max)(size_t n, const double* x, double* mn, double* mx);
  // y[i] = fma(a, x[i], y[i])
  void (*axpy)(size_t n, double a, const double* x, double* y);
  // y[i] = fma(a, x[i], b)
  void (*scale_shift)(size_t n, double a, double b, const double* x, double* y);
  // row-major C(m x n) += A(m x k) * B(k x n) with leading dimensions
  void (*gemm)(size_t m, size_t k, size_t n, const double* A, size_t lda,
               const double* B, size_t ldb, double* C, size_t ldc);
};

const Kernels& scalar_kernels();

// All variants compiled into this binary (scalar first).
const std::vector<const Kernels*>& compiled_kernels();

// Variants the current CPU can actually run.
std::vector<const Kernels*> runnable_kernels();

// The selected variant (cached after first call).
const Kernels& active_kernels();

std::string active_kernel_name();

}  // namespace gazeload
