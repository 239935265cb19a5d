#pragma once

#include "dualkpca/dual_core.hpp"
#include "dualkpca/objectives.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dualkpca {

enum class Termination { tolerance, gradient, stalled, max_iters };
std::string to_string(Termination t);

struct SolveConfig {
  double tol = 1e-8;
  int max_iters = 500;
  int lbfgs_memory = 10;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_linesearch_steps = 25;
  std::uint64_t seed = 0;
  /// Top-s eigenvalues of G. When set, eta is traced and the solvers stop
  /// as soon as eta < tol (benchmark mode).
  std::optional<Eigen::VectorXd> benchmark_eigs;
  /// Starting point; overrides the seeded standard-normal draw.
  std::optional<DualVariable> initial;

  void validate() const;
  /// DCA defaults: same as above but with max_iters = 1000.
  static SolveConfig dca_defaults();
};

struct SolveReport {
  int iterations = 0;
  std::vector<double> cost_trace;  // iterations + 1 entries
  std::vector<double> eta_trace;   // empty outside benchmark mode
  double wall_seconds = 0.0;
  Termination termination = Termination::max_iters;
  int restarts = 0;  // re-seeded starts after a singular initial point
};

nlohmann::json to_json(const SolveReport& report);

struct SolveResult {
  DualVariable h;
  SolveReport report;
};

/// H^0 with i.i.d. N(0,1) entries drawn from `seed`.
DualVariable standard_normal_init(Eigen::Index n, Eigen::Index s, std::uint64_t seed);

/// Minimizes 1/2 Tr(H^T H) - pi(H) with L-BFGS (two-loop recursion) and a
/// strong-Wolfe line search.
SolveResult lbfgs_solve(const Eigen::MatrixXd& g, Eigen::Index s, const SolveConfig& config = {});

/// DCA for 1/2 |H|^2 + Psi*(H) - pi(H):  H <- prox_{Psi*}(grad pi(H)).
/// Stops when the cost changes by less than machine epsilon * max(1, |cost|).
SolveResult dca_solve(const Eigen::MatrixXd& g, Eigen::Index s, const ObjectiveSpec& objective,
                      const SolveConfig& config = SolveConfig::dca_defaults());

}  // namespace dualkpca
