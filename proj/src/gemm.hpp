#pragma once

#include <Eigen/Dense>

extern "C" void dgemm_(const char* transa, const char* transb, const int* m, const int* n, const int* k,
                       const double* alpha, const double* a, const int* lda, const double* b, const int* ldb,
                       const double* beta, double* c, const int* ldc);

namespace dualkpca::detail {

// One-time probe: true when the system BLAS multiplies correctly. Some
// OpenBLAS builds select a broken kernel on certain virtual CPUs.
bool blas_ok();

// C = A * B through the system BLAS. Eigen's own kernels are used for small
// products, where call overhead dominates.
inline void gemm(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, Eigen::MatrixXd& c) {
  c.resize(a.rows(), b.cols());
  if (a.rows() * a.cols() < 64 * 64 || a.size() == 0 || b.size() == 0 || !blas_ok()) {
    c.noalias() = a * b;
    return;
  }
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(b.cols());
  const int k = static_cast<int>(a.cols());
  const double one = 1.0;
  const double zero = 0.0;
  dgemm_("N", "N", &m, &n, &k, &one, a.data(), &m, b.data(), &k, &zero, c.data(), &m);
}

inline Eigen::MatrixXd gemm(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd c;
  gemm(a, b, c);
  return c;
}

}  // namespace dualkpca::detail
