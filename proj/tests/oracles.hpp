#pragma once

// Reference computations used by the tests. Each one is written from the
// mathematical definition with plain Eigen and avoids the library routine it
// is compared against.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

namespace oracle {

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

// Random PSD matrix B B^T of the given rank.
inline Eigen::MatrixXd random_psd(Eigen::Index n, Eigen::Index rank, std::uint64_t seed) {
  const Eigen::MatrixXd b = gaussian_matrix(n, rank, seed);
  Eigen::MatrixXd g = b * b.transpose();
  return 0.5 * (g + g.transpose());
}

// Eigenvalues of a symmetric matrix in decreasing order.
inline Eigen::VectorXd eigenvalues_desc(const Eigen::MatrixXd& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  return es.eigenvalues().reverse();
}

inline Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

// Sum of singular values.
inline double nuclear_norm(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues().sum();
}

// Rank-s spectral projector sum_{i<=s} lambda_i v_i v_i^T of a symmetric G.
inline Eigen::MatrixXd top_part(const Eigen::MatrixXd& g, Eigen::Index s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  const Eigen::MatrixXd v = es.eigenvectors().rightCols(s);
  return v * es.eigenvalues().tail(s).asDiagonal() * v.transpose();
}

// Central finite differences of a scalar function of a matrix.
inline Eigen::MatrixXd finite_difference(const std::function<double(const Eigen::MatrixXd&)>& f,
                                         const Eigen::MatrixXd& x, double step) {
  Eigen::MatrixXd grad(x.rows(), x.cols());
  Eigen::MatrixXd probe = x;
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double h = step * std::max(1.0, std::abs(x(i, j)));
      probe(i, j) = x(i, j) + h;
      const double up = f(probe);
      probe(i, j) = x(i, j) - h;
      const double down = f(probe);
      probe(i, j) = x(i, j);
      grad(i, j) = (up - down) / (2.0 * h);
    }
  return grad;
}

// Bisection for the root of a nonincreasing function on [lo, hi].
inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Projection onto {x : |x|_1 <= r} from the KKT conditions: the solution is
// sign(v) max(|v| - theta, 0) with theta >= 0 the root of sum max(|v|-theta,0) = r.
inline Eigen::VectorXd l1_ball(const Eigen::VectorXd& v, double r) {
  if (v.lpNorm<1>() <= r) return v;
  const Eigen::VectorXd a = v.cwiseAbs();
  const double theta =
      bisect([&](double t) { return (a.array() - t).max(0.0).sum() - r; }, 0.0, a.maxCoeff());
  Eigen::VectorXd x(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) x(i) = std::copysign(std::max(a(i) - theta, 0.0), v(i));
  return x;
}

// Projection onto {H : sum_i |h_i| <= r}: shrink every row norm by the same
// theta (KKT of the group constraint), found by bisection.
inline Eigen::MatrixXd row_norm_ball(const Eigen::MatrixXd& y, double r) {
  const Eigen::VectorXd norms = y.rowwise().norm();
  if (norms.sum() <= r) return y;
  const double theta =
      bisect([&](double t) { return (norms.array() - t).max(0.0).sum() - r; }, 0.0, norms.maxCoeff());
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(y.rows(), y.cols());
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    if (norms(i) > theta) x.row(i) = y.row(i) * ((norms(i) - theta) / norms(i));
  return x;
}

// prox of Psi for each objective, written directly from Psi.
inline Eigen::MatrixXd soft_threshold(const Eigen::MatrixXd& y, double t) {
  return y.unaryExpr([t](double v) { return std::copysign(std::max(std::abs(v) - t, 0.0), v); });
}

inline Eigen::MatrixXd clip(const Eigen::MatrixXd& y, double t) {
  return y.unaryExpr([t](double v) { return std::clamp(v, -t, t); });
}

// prox of kappa * max_i |h_i|: rows with norm above a level t are pulled down
// to t, with t chosen so the removed norm mass equals kappa.
inline Eigen::MatrixXd prox_max_row_norm(const Eigen::MatrixXd& y, double kappa) {
  const Eigen::VectorXd norms = y.rowwise().norm();
  if (norms.sum() <= kappa) return Eigen::MatrixXd::Zero(y.rows(), y.cols());
  const double t =
      bisect([&](double level) { return (norms.array() - level).max(0.0).sum() - kappa; }, 0.0, norms.maxCoeff());
  Eigen::MatrixXd z = y;
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    if (norms(i) > t) z.row(i) *= t / norms(i);
  return z;
}

// Projection of each row onto the Euclidean ball of radius eps.
inline Eigen::MatrixXd row_ball(const Eigen::MatrixXd& y, double eps) {
  Eigen::MatrixXd z = y;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const double nrm = y.row(i).norm();
    if (nrm > eps) z.row(i) *= eps / nrm;
  }
  return z;
}

// Spearman correlation computed on ranks without tie handling (test inputs
// are distinct).
inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace oracle
