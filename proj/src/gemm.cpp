#include "gemm.hpp"

#include <cstdio>
#include <cstdlib>

namespace dualkpca::detail {

namespace {

bool probe() {
  // Shapes that exercise the skinny and square paths of the BLAS kernels.
  const Eigen::Index n = 600;
  const Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(n, n, [](Eigen::Index i, Eigen::Index j) {
    return std::sin(0.37 * static_cast<double>(i) + 1.3 * static_cast<double>(j));
  });
  for (Eigen::Index k : {Eigen::Index{8}, n}) {
    const Eigen::MatrixXd b = a.leftCols(k);
    const Eigen::MatrixXd ref = a.lazyProduct(b);
    Eigen::MatrixXd c(n, k);
    const int m = static_cast<int>(n);
    const int kk = static_cast<int>(k);
    const double one = 1.0;
    const double zero = 0.0;
    dgemm_("N", "N", &m, &kk, &m, &one, a.data(), &m, b.data(), &m, &zero, c.data(), &m);
    if (!((c - ref).norm() <= 1e-10 * ref.norm())) return false;
  }
  return true;
}

}  // namespace

bool blas_ok() {
  static const bool ok = [] {
    const bool good = probe();
    if (!good)
      std::fprintf(stderr,
                   "dualkpca: warning: system BLAS failed its self-check; using built-in kernels "
                   "(for OpenBLAS try OPENBLAS_CORETYPE=SkylakeX or Haswell)\n");
    return good;
  }();
  return ok;
}

}  // namespace dualkpca::detail
