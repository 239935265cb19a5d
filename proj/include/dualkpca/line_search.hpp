#pragma once

#include <Eigen/Dense>

#include <functional>

namespace dualkpca {

struct LineSearchParams {
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_steps = 25;
  double initial_step = 1.0;
  double max_step = 1e10;

  void validate() const;
};

enum class LineSearchStatus { converged, stalled };

struct LineSearchResult {
  LineSearchStatus status = LineSearchStatus::stalled;
  double step = 0.0;
  double value = 0.0;
  Eigen::VectorXd gradient;  // at x + step * direction
  int evaluations = 0;  // f calls, including f(x) when the caller did not supply it
};

/// Returns f(x) and writes grad f(x). May throw SingularityError; the line
/// search treats such points as having infinite cost.
using CostGradientFn = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

/// Bracketing-and-zoom search for a step satisfying the strong Wolfe
/// conditions
///   f(x + a d) <= f(x) + c1 a <g, d>,   |<grad f(x + a d), d>| <= c2 |<g, d>|.
/// Throws UsageError when d is not a descent direction. On budget exhaustion
/// the result is `stalled` and carries the best sufficient-decrease point
/// seen (step 0 if none).
LineSearchResult line_search_strong_wolfe(const CostGradientFn& f, const Eigen::VectorXd& x, double fx,
                                          const Eigen::VectorXd& gx, const Eigen::VectorXd& direction,
                                          const LineSearchParams& params = {});

LineSearchResult line_search_strong_wolfe(const CostGradientFn& f, const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& direction, const LineSearchParams& params = {});

}  // namespace dualkpca
