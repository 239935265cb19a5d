#pragma once

#include "dualkpca/data_io.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>

namespace dualkpca {

enum class KernelFamily { linear, gaussian, laplace, precomputed };

/// Kernel choice. `sigma` empty means "auto": resolved by sigma_rule at fit
/// time and frozen into the model.
struct KernelSpec {
  KernelFamily family = KernelFamily::gaussian;
  std::optional<double> sigma;

  bool resolved() const noexcept;
  void validate() const;
};

KernelSpec parse_kernel(const std::string& family, const std::string& sigma = "auto");
std::string to_string(KernelFamily family);

/// linear: <x,y>; gaussian: exp(-|x-y|^2 / (2 sigma^2)); laplace: exp(-|x-y| / (2 sigma^2)).
double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y);

/// sigma = scale * sqrt(d * v), v the mean per-coordinate sample variance.
double sigma_rule(const Dataset& data, double scale = 0.1);

/// Fills in an `auto` bandwidth from the data; no-op for resolved specs.
KernelSpec resolve(const KernelSpec& spec, const Dataset& data);

struct CenteringStats {
  Eigen::VectorXd column_means;  // of the uncentered Gram matrix
  double grand_mean = 0.0;
};

/// Symmetric n x n kernel matrix plus its centering state.
struct GramMatrix {
  Eigen::MatrixXd entries;
  bool centered = false;
  std::optional<CenteringStats> stats;  // set once centered
  double jitter = 0.0;                  // diagonal shift added after centering

  Eigen::Index n() const noexcept { return entries.rows(); }
};

/// Uncentered Gram matrix. Only the upper triangle is evaluated; the lower
/// triangle is mirrored so the result is exactly symmetric.
GramMatrix gram(const Dataset& data, const KernelSpec& spec);

/// Cross-kernel matrix K(i, j) = k(probe_i, train_j), m x n, uncentered.
Eigen::MatrixXd cross_kernel(const Dataset& train, const Dataset& probe, const KernelSpec& spec);

/// Self-kernel values k(x_i, x_i).
Eigen::VectorXd self_kernel(const Dataset& data, const KernelSpec& spec);

/// Double centering J G J with J = I - 11^T/n. `jitter_theta` > 0 adds
/// theta * mean(diag) * I afterwards.
GramMatrix center_gram(const GramMatrix& g, double jitter_theta = 0.0);

/// Centers rows of a cross-kernel matrix with the training statistics:
/// k(x,x_i) - mean_j k(x,x_j) - colmean_i + grandmean.
Eigen::MatrixXd center_rows(const Eigen::MatrixXd& cross, const CenteringStats& stats);

/// Centered kernel row of a single point against the training set.
Eigen::VectorXd kernel_row(const CenteringStats& stats, const KernelSpec& spec,
                           const Dataset& train, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Centered self-kernel k(x,x) - 2 mean_j k(x,x_j) + grandmean for each probe row.
Eigen::VectorXd centered_self_kernel(const Eigen::MatrixXd& cross, const Eigen::VectorXd& self,
                                     const CenteringStats& stats);

/// Precomputed n x n Gram matrix from CSV. Rejects asymmetry above
/// 1e-8 * max|entry|, then symmetrizes.
GramMatrix load_precomputed_gram(const std::filesystem::path& path);
GramMatrix precomputed_gram(Eigen::MatrixXd entries);

}  // namespace dualkpca
