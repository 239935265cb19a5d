#include "dualkpca/baselines.hpp"

#include "dualkpca/errors.hpp"
#include "dualkpca/objectives.hpp"
#include "gemm.hpp"

#include <lapacke.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>

namespace dualkpca {

namespace {

void fix_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index arg = 0;
    vectors.col(c).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, c) < 0.0) vectors.col(c) = -vectors.col(c);
  }
}

// Ascending (LAPACK order) -> descending.
EigPairs descending(const Eigen::VectorXd& vals, const Eigen::MatrixXd& vecs, Eigen::Index keep) {
  EigPairs out;
  out.values = vals.tail(keep).reverse();
  out.vectors = vecs.rightCols(keep).rowwise().reverse();
  fix_signs(out.vectors);
  return out;
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

}  // namespace

EigPairs full_eig(const Eigen::MatrixXd& g) {
  if (g.rows() != g.cols() || g.rows() == 0) throw DataError("G must be a nonempty square matrix");
  const auto n = static_cast<lapack_int>(g.rows());
  if (!detail::blas_ok()) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    if (es.info() != Eigen::Success) throw NumericError("eigendecomposition did not converge");
    return descending(es.eigenvalues(), es.eigenvectors(), g.rows());
  }
  Eigen::MatrixXd a = g;
  Eigen::VectorXd w(g.rows());
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, a.data(), n, w.data());
  if (info != 0) throw NumericError("dsyevd failed with info " + std::to_string(info));
  return descending(w, a, g.rows());
}

DualVariable h_from_pairs(const EigPairs& pairs) {
  return pairs.vectors * pairs.values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

DenseKpca kpca_dense_eig(const Eigen::MatrixXd& g, Eigen::Index s) {
  if (s < 1 || s > g.rows()) throw UsageError("number of components must lie in [1, n]");
  EigPairs all = full_eig(g);
  DenseKpca out;
  out.pairs.values = all.values.head(s);
  out.pairs.vectors = all.vectors.leftCols(s);
  out.h_svd = h_from_pairs(out.pairs);
  return out;
}

Eigen::MatrixXd clip_to_psd(const Eigen::MatrixXd& g) {
  const EigPairs all = full_eig(g);
  if (all.values.minCoeff() >= 0.0) return g;
  const Eigen::MatrixXd scaled = all.vectors * all.values.cwiseMax(0.0).asDiagonal();
  Eigen::MatrixXd out = detail::gemm(scaled, Eigen::MatrixXd(all.vectors.transpose()));
  return 0.5 * (out + out.transpose());
}

Eigen::VectorXd top_eigenvalues(const Eigen::MatrixXd& g, Eigen::Index s) {
  if (s < 1 || s > g.rows()) throw UsageError("number of components must lie in [1, n]");
  if (!detail::blas_ok()) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
    return es.eigenvalues().tail(s).reverse();
  }
  const auto n = static_cast<lapack_int>(g.rows());
  Eigen::MatrixXd a = g;
  Eigen::VectorXd w(g.rows());
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'U', n, a.data(), n, w.data());
  if (info != 0) throw NumericError("dsyevd failed with info " + std::to_string(info));
  return w.tail(s).reverse();
}

EigPairs rsvd(const Eigen::MatrixXd& g, Eigen::Index s, Eigen::Index oversamples, int power_iters,
              std::uint64_t seed) {
  if (g.rows() != g.cols() || g.rows() == 0) throw DataError("G must be a nonempty square matrix");
  if (s < 1 || s > g.rows()) throw UsageError("number of components must lie in [1, n]");
  if (oversamples < 0 || power_iters < 0) throw UsageError("oversamples and power iterations must be nonnegative");
  const Eigen::Index n = g.rows();
  const Eigen::Index width = std::min(n, s + oversamples);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd omega(n, width);
  for (Eigen::Index c = 0; c < width; ++c)
    for (Eigen::Index r = 0; r < n; ++r) omega(r, c) = normal(rng);

  Eigen::MatrixXd q = orthonormalize(detail::gemm(g, omega));
  for (int i = 0; i < power_iters; ++i) q = orthonormalize(detail::gemm(g, q));

  Eigen::MatrixXd gq = detail::gemm(g, q);
  Eigen::MatrixXd b = q.transpose() * gq;
  b = 0.5 * (b + b.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
  if (eig.info() != Eigen::Success) throw NumericError("rsvd: small eigenproblem failed");

  EigPairs ritz = descending(eig.eigenvalues(), eig.eigenvectors(), s);
  ritz.vectors = (q * ritz.vectors).eval();
  fix_signs(ritz.vectors);
  return ritz;
}

AdaptiveRsvd rsvd_adaptive(const Eigen::MatrixXd& g, Eigen::Index s, double delta, const Eigen::VectorXd& top_eigs,
                           std::uint64_t seed, const AdaptiveRsvdOptions& options) {
  if (!(delta > 0.0)) throw UsageError("rsvd_adaptive: delta must be positive");
  if (top_eigs.size() != s) throw UsageError("rsvd_adaptive: need s reference eigenvalues");
  const Eigen::Index cap = options.max_oversamples.value_or(std::max<Eigen::Index>(g.rows() - s, 0));
  AdaptiveRsvd out;
  Eigen::Index p = std::min(options.initial_oversamples, cap);
  while (true) {
    out.schedule.push_back(p);
    out.pairs = rsvd(g, s, p, options.power_iters, seed);
    out.oversamples = p;
    out.eta = dual_residual(g, h_from_pairs(out.pairs), top_eigs);
    if (out.eta < delta) return out;
    if (p >= cap) break;
    p = std::min(std::max<Eigen::Index>(2 * p, 1), cap);
  }
  throw ToleranceNotReached("rsvd_adaptive: tolerance " + std::to_string(delta) + " not reached with " +
                                std::to_string(p) + " oversamples (eta " + std::to_string(out.eta) + ")",
                            out.eta, p);
}

}  // namespace dualkpca
