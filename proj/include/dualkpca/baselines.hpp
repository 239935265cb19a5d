#pragma once

#include "dualkpca/dual_core.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace dualkpca {

/// Top-s eigenpairs: values decreasing, vectors n x s orthonormal columns.
struct EigPairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

/// Full symmetric eigendecomposition (LAPACK dsyevd), all n pairs sorted
/// decreasing, each vector signed so its largest-magnitude entry is positive.
EigPairs full_eig(const Eigen::MatrixXd& g);

/// H^svd = V_s sqrt(max(Lambda_s, 0)).
DualVariable h_from_pairs(const EigPairs& pairs);

struct DenseKpca {
  EigPairs pairs;
  DualVariable h_svd;
};

/// Reference KPCA through the full eigendecomposition of G.
DenseKpca kpca_dense_eig(const Eigen::MatrixXd& g, Eigen::Index s);

/// Nearest PSD matrix in Frobenius norm: negative eigenvalues set to zero.
Eigen::MatrixXd clip_to_psd(const Eigen::MatrixXd& g);

/// s largest eigenvalues of G (dense oracle).
Eigen::VectorXd top_eigenvalues(const Eigen::MatrixXd& g, Eigen::Index s);

/// Randomized range finder with a seeded n x (s+p) Gaussian sketch, q power
/// iterations (re-orthonormalized each pass), and Rayleigh-Ritz on the sketch.
EigPairs rsvd(const Eigen::MatrixXd& g, Eigen::Index s, Eigen::Index oversamples, int power_iters,
              std::uint64_t seed);

struct AdaptiveRsvd {
  EigPairs pairs;
  Eigen::Index oversamples = 0;
  double eta = 0.0;
  std::vector<Eigen::Index> schedule;  // every p tried, in order
};

struct AdaptiveRsvdOptions {
  Eigen::Index initial_oversamples = 10;
  int power_iters = 2;
  /// Upper bound on p; defaults to n - s, where the sketch spans R^n.
  std::optional<Eigen::Index> max_oversamples;
};

/// Doubles p from the initial value until eta(H_rsvd) < delta. Throws
/// ToleranceNotReached if the cap is reached first.
AdaptiveRsvd rsvd_adaptive(const Eigen::MatrixXd& g, Eigen::Index s, double delta, const Eigen::VectorXd& top_eigs,
                           std::uint64_t seed, const AdaptiveRsvdOptions& options = {});

}  // namespace dualkpca
