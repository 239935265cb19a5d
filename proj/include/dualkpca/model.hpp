#pragma once

#include "dualkpca/data_io.hpp"
#include "dualkpca/dual_core.hpp"
#include "dualkpca/kernels.hpp"
#include "dualkpca/objectives.hpp"
#include "dualkpca/solvers.hpp"

#include <filesystem>
#include <memory>
#include <optional>

namespace dualkpca {

enum class SolverChoice { automatic, lbfgs, dca };

struct FitOptions {
  SolveConfig config;
  SolverChoice solver = SolverChoice::automatic;
  double jitter = 0.0;  // theta for center_gram; 0 disables
  /// Config for the square-loss pre-solve that resolves kappa_max for
  /// relative Huber radii. Defaults to `config` with a tight tolerance.
  std::optional<SolveConfig> presolve_config;
};

/// A fitted kernel PCA model. Immutable after fit.
struct KpcaModel {
  KernelSpec kernel;  // bandwidth resolved
  ObjectiveSpec objective;
  std::shared_ptr<const Dataset> training;  // null for precomputed Gram fits
  std::uint64_t fingerprint = 0;
  Eigen::Index n = 0;
  CenteringStats stats;
  DualVariable h;            // n x s
  SpectralDecomp spectrum;   // of H^T G H
  Eigen::MatrixXd coefficients;  // A = H U^T diag(lambda)^{-1/2} U
  SolveReport report;
  std::optional<double> kappa_max;  // set when the radius was relative

  Eigen::Index components() const noexcept { return h.cols(); }
};

/// Builds the centered Gram matrix, solves (square -> L-BFGS unless DCA is
/// forced, other objectives -> DCA), and stores the spectral factors.
KpcaModel fit(std::shared_ptr<const Dataset> data, const KernelSpec& kernel, const ObjectiveRequest& objective,
              Eigen::Index s, const FitOptions& options = {});

/// Same, on a caller-built centered Gram matrix. Projection of new points
/// then requires project_kernel_rows.
KpcaModel fit_gram(const GramMatrix& centered, const ObjectiveRequest& objective, Eigen::Index s,
                   const FitOptions& options = {});

/// Wraps an already-solved H into a model (checks projectability).
KpcaModel make_model(const GramMatrix& centered, DualVariable h, ObjectiveSpec objective);

/// A = H U^T diag(lambda)^{-1/2} U, so that A^T G A = I_s.
Eigen::MatrixXd recover_primal_coefficients(const KpcaModel& model);

/// Projections onto the principal directions, one row per probe point:
/// Kc H U^T diag(lambda)^{-1/2} U with Kc the centered kernel rows.
Eigen::MatrixXd project(const KpcaModel& model, const Dataset& batch);
Eigen::VectorXd project(const KpcaModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Projections from uncentered kernel rows k(x, x_i) (m x n).
Eigen::MatrixXd project_kernel_rows(const KpcaModel& model, const Eigen::MatrixXd& kernel_rows);

/// Mean over points of max(0, kc(x,x) - |project(x)|^2): squared distance in
/// feature space between phi(x) (centered) and its projection.
double reconstruction_error(const KpcaModel& model, const Dataset& data);

struct SparsityMetrics {
  double zero_rows_pct = 0.0;
  double zero_entries_pct = 0.0;
};

/// An entry counts as zero when |h| < rel_tol * max|H|; a row when all of its
/// entries do. All-zero H reports 100/100.
SparsityMetrics sparsity_metrics(const Eigen::MatrixXd& h, double rel_tol = 1e-9);

/// Model file: one JSON header line followed by H as CSV.
void save_model(const KpcaModel& model, const std::filesystem::path& path);

/// Loads a model file. `training` must match the stored fingerprint for
/// data-based kernels; pass nullptr for precomputed Gram models.
KpcaModel load_model(const std::filesystem::path& path, std::shared_ptr<const Dataset> training);

inline constexpr const char* kModelFormat = "dualkpca-model/1";

}  // namespace dualkpca
