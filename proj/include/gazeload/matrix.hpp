#pragma once

#include <cstddef>
#include <vector>

#include "gazeload/error.hpp"
#include "gazeload/kernels.hpp"

namespace gazeload {

// Dense row-major matrix of doubles. Deliberately minimal: storage plus the
// handful of products the models need, all routed through the kernel layer so
// results are identical regardless of the selected SIMD variant.
struct Matrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(size_t r, size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& at(size_t r, size_t c) { return a[r * cols + c]; }
  double at(size_t r, size_t c) const { return a[r * cols + c]; }
  double* row_ptr(size_t r) { return a.data() + r * cols; }
  const double* row_ptr(size_t r) const { return a.data() + r * cols; }
  size_t size() const { return a.size(); }
};

// C += A * B
inline void gemm_accumulate(Matrix& C, const Matrix& A, const Matrix& B) {
  if (A.cols != B.rows || C.rows != A.rows || C.cols != B.cols)
    throw GazeError(ErrorCode::DimensionMismatch, "gemm: incompatible shapes");
  active_kernels().gemm(A.rows, A.cols, B.cols, A.a.data(), A.cols, B.a.data(), B.cols,
                        C.a.data(), C.cols);
}

inline Matrix matmul(const Matrix& A, const Matrix& B) {
  Matrix C(A.rows, B.cols);
  gemm_accumulate(C, A, B);
  return C;
}

inline Matrix transpose(const Matrix& A) {
  Matrix T(A.cols, A.rows);
  for (size_t r = 0; r < A.rows; ++r)
    for (size_t c = 0; c < A.cols; ++c) T.at(c, r) = A.at(r, c);
  return T;
}

}  // namespace gazeload
