#include "dualkpca/dual_core.hpp"

#include "dualkpca/errors.hpp"
#include "dualkpca/objectives.hpp"
#include "gemm.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace dualkpca {

Eigen::MatrixXd SpectralDecomp::reconstruct() const { return apply(values); }

Eigen::MatrixXd SpectralDecomp::apply(const Eigen::VectorXd& diag) const {
  return rotation.transpose() * diag.asDiagonal() * rotation;
}

SpectralDecomp sym_eig_small(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw UsageError("sym_eig_small: matrix must be square and nonempty");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw NumericError("sym_eig_small: matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) throw NumericError("sym_eig_small: eigensolver failed");
  const auto s = m.rows();
  const auto& vals = solver.eigenvalues();
  const auto& vecs = solver.eigenvectors();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(s));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return vals(a) > vals(b); });

  SpectralDecomp out;
  out.values.resize(s);
  out.rotation.resize(s, s);
  for (Eigen::Index k = 0; k < s; ++k) {
    const auto src = order[static_cast<std::size_t>(k)];
    Eigen::VectorXd v = vecs.col(src);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    out.values(k) = vals(src);
    out.rotation.row(k) = v.transpose();
  }
  return out;
}

DualEvaluation evaluate_dual(const Eigen::MatrixXd& g, const DualVariable& h) {
  if (g.rows() != g.cols() || g.rows() != h.rows())
    throw DataError("shape mismatch between G (" + std::to_string(g.rows()) + "x" + std::to_string(g.cols()) +
                    ") and H (" + std::to_string(h.rows()) + "x" + std::to_string(h.cols()) + ")");
  if (h.cols() == 0) throw UsageError("H needs at least one column");
  DualEvaluation eval;
  detail::gemm(g, h, eval.gh);
  Eigen::MatrixXd m = h.transpose() * eval.gh;
  m = 0.5 * (m + m.transpose()).eval();
  eval.spectrum = sym_eig_small(m);
  eval.pi = eval.spectrum.values.cwiseMax(0.0).cwiseSqrt().sum();
  return eval;
}

double singularity_floor(const SpectralDecomp& spectrum) {
  return 1e-12 * std::max(spectrum.values(0), 1.0);
}

double pi(const Eigen::MatrixXd& g, const DualVariable& h) { return evaluate_dual(g, h).pi; }

Eigen::MatrixXd grad_pi(const DualEvaluation& eval) {
  const auto& spec = eval.spectrum;
  const double lmin = spec.values(spec.values.size() - 1);
  if (!(lmin > singularity_floor(spec))) {
    std::ostringstream msg;
    msg << "H^T G H is singular: smallest eigenvalue " << lmin << " is at or below the floor "
        << singularity_floor(spec);
    throw SingularityError(msg.str(), lmin);
  }
  Eigen::VectorXd inv_sqrt = spec.values.cwiseSqrt().cwiseInverse();
  return eval.gh * spec.apply(inv_sqrt);
}

PiGradient grad_pi(const Eigen::MatrixXd& g, const DualVariable& h) {
  auto eval = evaluate_dual(g, h);
  auto grad = grad_pi(eval);
  return {std::move(grad), std::move(eval.spectrum)};
}

double dual_cost(const DualEvaluation& eval, const DualVariable& h, const ObjectiveSpec& objective) {
  const double penalty = psi_star_value(objective, h);
  if (std::isinf(penalty)) return std::numeric_limits<double>::infinity();
  return 0.5 * h.squaredNorm() + penalty - eval.pi;
}

double dual_cost(const Eigen::MatrixXd& g, const DualVariable& h, const ObjectiveSpec& objective) {
  return dual_cost(evaluate_dual(g, h), h, objective);
}

double optimal_dual_cost(const Eigen::VectorXd& top_eigs) { return -0.5 * top_eigs.sum(); }

double dual_residual(double square_cost, const Eigen::VectorXd& top_eigs) {
  const double d_opt = optimal_dual_cost(top_eigs);
  if (d_opt == 0.0) throw NumericError("optimal dual cost is zero (degenerate Gram matrix)");
  return std::abs(square_cost - d_opt) / std::abs(d_opt);
}

double dual_residual(const Eigen::MatrixXd& g, const DualVariable& h, const Eigen::VectorXd& top_eigs) {
  if (top_eigs.size() != h.cols())
    throw UsageError("dual_residual: need one reference eigenvalue per column of H");
  return dual_residual(dual_cost(g, h, ObjectiveSpec{}), top_eigs);
}

double check_critical_point(const Eigen::MatrixXd& g, const DualVariable& h) {
  Eigen::MatrixXd gh = detail::gemm(g, h);
  const double denom = gh.norm();
  if (denom == 0.0) throw NumericError("check_critical_point: G H is zero");
  Eigen::MatrixXd hth = h.transpose() * h;
  return (h * hth - gh).norm() / denom;
}

}  // namespace dualkpca
