#pragma once

#include <Eigen/Dense>

namespace dualkpca {

struct ObjectiveSpec;

/// The n x s dual variable H.
using DualVariable = Eigen::MatrixXd;

/// M = U^T diag(values) U for a small symmetric M.
/// Rows of `rotation` are eigenvectors; values are in decreasing order.
struct SpectralDecomp {
  Eigen::MatrixXd rotation;
  Eigen::VectorXd values;

  Eigen::MatrixXd reconstruct() const;
  /// U^T diag(f(values)) U for an elementwise f given as a vector.
  Eigen::MatrixXd apply(const Eigen::VectorXd& diag) const;
};

/// Symmetric eigendecomposition with a fixed convention: eigenvalues
/// decreasing (ties keep solver order), each eigenvector signed so that its
/// largest-magnitude component is positive.
SpectralDecomp sym_eig_small(const Eigen::MatrixXd& m);

/// Everything derived from one G*H product: the quantities pi and its
/// gradient share.
struct DualEvaluation {
  Eigen::MatrixXd gh;       // G H
  SpectralDecomp spectrum;  // of H^T G H
  double pi = 0.0;          // sum_i sqrt(max(lambda_i, 0))
};

DualEvaluation evaluate_dual(const Eigen::MatrixXd& g, const DualVariable& h);

/// Eigenvalue floor below which the gradient of pi is refused.
double singularity_floor(const SpectralDecomp& spectrum);

/// pi(H) = Tr sqrt(H^T G H).
double pi(const Eigen::MatrixXd& g, const DualVariable& h);

struct PiGradient {
  Eigen::MatrixXd gradient;
  SpectralDecomp spectrum;
};

/// grad pi(H) = G H U^T diag(1/sqrt(lambda)) U. Throws SingularityError when
/// lambda_min(H^T G H) is at or below singularity_floor().
PiGradient grad_pi(const Eigen::MatrixXd& g, const DualVariable& h);
Eigen::MatrixXd grad_pi(const DualEvaluation& eval);

/// 1/2 |H|_F^2 + Psi*(H) - pi(H); +inf when H violates a Huber ball.
double dual_cost(const Eigen::MatrixXd& g, const DualVariable& h, const ObjectiveSpec& objective);
double dual_cost(const DualEvaluation& eval, const DualVariable& h, const ObjectiveSpec& objective);

/// Optimal square-loss dual cost -1/2 sum of the s largest eigenvalues.
double optimal_dual_cost(const Eigen::VectorXd& top_eigs);

/// eta = |d(H) - d_opt| / |d_opt| for the square-loss dual cost d.
double dual_residual(const Eigen::MatrixXd& g, const DualVariable& h, const Eigen::VectorXd& top_eigs);
double dual_residual(double square_cost, const Eigen::VectorXd& top_eigs);

/// |H H^T H - G H|_F / |G H|_F, zero exactly at critical points of the
/// reconstruction cost 1/4 |G - H H^T|_F^2.
double check_critical_point(const Eigen::MatrixXd& g, const DualVariable& h);

}  // namespace dualkpca
