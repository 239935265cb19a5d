#pragma once

#include "dualkpca/data_io.hpp"
#include "dualkpca/kernels.hpp"
#include "dualkpca/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dualkpca {

inline constexpr const char* kReportVersion = "1";

// ---------------------------------------------------------------- bench

struct BenchOptions {
  std::string task = "task";
  Eigen::Index components = 20;
  double delta = 1e-2;
  int repeats = 1;
  std::vector<std::string> solvers{"eig", "rsvd", "lbfgs"};
  std::uint64_t seed = 0;
  int power_iters = 2;
  std::optional<Eigen::Index> max_oversamples;
  /// When set, the final H of every solver is written to <dir>/H_<solver>.csv.
  std::optional<std::filesystem::path> dump_dir;
};

struct BenchRow {
  std::string task;
  Eigen::Index n = 0;
  std::string solver;
  double delta = 0.0;
  double wall_seconds = 0.0;  // mean over samples
  std::vector<double> samples;
  long iterations = 0;  // oversamples for rsvd, 0 for eig
  double eta = 0.0;
  bool converged = false;
  std::optional<double> speedup_vs_rsvd;  // t(rsvd) / t(solver)
};

/// Times each solver to eta < delta on a centered Gram matrix. The dense
/// eigendecomposition is computed once as the eta oracle.
std::vector<BenchRow> run_bench(const Eigen::MatrixXd& g, const BenchOptions& options);
void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out);

// ---------------------------------------------------------------- spectrum

struct SpectrumOptions {
  std::vector<double> c_grid{0.01, 0.1, 0.5};
  Eigen::Index n = 500;
  Eigen::Index components = 20;
  double delta = 1e-4;
  std::uint64_t seed = 0;
  int power_iters = 2;
  int max_iters = 2000;
};

struct SpectrumRow {
  double c = 0.0;
  long lbfgs_iters = 0;
  long rsvd_oversamples = 0;
  long extra_lbfgs_iters = 0;  // relative to the row with the fewest oversamples
  long extra_oversamples = 0;
  double lbfgs_eta = 0.0;
  double rsvd_eta = 0.0;
  bool lbfgs_converged = false;
};

std::vector<SpectrumRow> run_spectrum(const SpectrumOptions& options);
void write_spectrum_csv(const std::vector<SpectrumRow>& rows, std::ostream& out);

// ---------------------------------------------------------------- robust

struct RobustOptions {
  double omega = 0.08;
  std::vector<double> tau_grid{10, 25, 50, 75, 100};
  double test_split = 0.2;
  std::vector<std::string> objectives{"square", "huber1:xmax:0.6", "huber2:xmax:0.8"};
  Eigen::Index components = 2;
  KernelSpec kernel{KernelFamily::gaussian, 1.0};
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct RobustRow {
  double tau = 0.0;
  std::string objective;
  double kappa = 0.0;  // resolved radius, 0 for square
  double reconstruction_error = 0.0;
  std::string status = "ok";
};

/// Contaminates the training split, fits every objective, and scores the
/// clean test split by feature-space reconstruction error.
std::vector<RobustRow> run_robust(const Dataset& data, const RobustOptions& options);
void write_robust_csv(const std::vector<RobustRow>& rows, std::ostream& out);

// ---------------------------------------------------------------- sparse

struct SparseOptions {
  ObjectiveKind kind = ObjectiveKind::eps_row2;
  std::vector<double> eps_grid{0.0, 0.1, 0.15, 0.2, 0.25, 0.3};
  std::vector<Eigen::Index> components_grid{5};
  /// An unset bandwidth resolves to sqrt(d * v) (sigma_rule at scale 1): the
  /// 0.1 factor suited to the Laplace kernel makes a Gaussian Gram nearly I.
  KernelSpec kernel{KernelFamily::gaussian, std::nullopt};
  std::uint64_t seed = 0;
  int max_iters = 1000;
  int jobs = 1;
};

struct SparseRow {
  double eps = 0.0;
  Eigen::Index components = 0;
  double sparsity_pct = 0.0;  // zero rows (eps2) or zero entries (epsinf)
  double zero_rows_pct = 0.0;
  double zero_entries_pct = 0.0;
  double error_ratio = 0.0;  // reconstruction error / square-loss error
  int iterations = 0;
  std::string status = "ok";
};

/// Sweeps eps and s; the square-loss reference is DCA from the same seed.
std::vector<SparseRow> run_sparse(const Dataset& data, const SparseOptions& options);
void write_sparse_csv(const std::vector<SparseRow>& rows, std::ostream& out);

/// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& a, const std::vector<double>& b);

/// Runs fn(i) for i in [0, count) on up to `jobs` threads.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace dualkpca
