#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace dualkpca {

using DenseRows = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// A set of n samples in R^d, stored densely or as sparse rows.
/// Immutable once built; share through const references or shared_ptr.
class Dataset {
 public:
  explicit Dataset(DenseRows values, std::optional<std::vector<double>> labels = std::nullopt);
  explicit Dataset(SparseRows values, std::optional<std::vector<double>> labels = std::nullopt);

  std::size_t n() const noexcept { return n_; }
  std::size_t d() const noexcept { return d_; }
  bool is_sparse() const noexcept { return std::holds_alternative<SparseRows>(values_); }

  const DenseRows& dense() const;    // throws if sparse
  const SparseRows& sparse() const;  // throws if dense
  DenseRows to_dense() const;

  const std::optional<std::vector<double>>& labels() const noexcept { return labels_; }

  /// Subset of rows, in the given order.
  Dataset select_rows(const std::vector<std::size_t>& rows) const;

  /// 64-bit FNV-1a digest over shape and nonzero entries; used to pair a
  /// saved model with the training data it was fitted on.
  std::uint64_t fingerprint() const;

 private:
  std::variant<DenseRows, SparseRows> values_;
  std::optional<std::vector<double>> labels_;
  std::size_t n_ = 0;
  std::size_t d_ = 0;
};

/// Parses LIBSVM text (`<label> <idx>:<val> ...`, 1-based ascending indices).
/// `d_override` fixes the dimension instead of inferring the max index.
Dataset parse_libsvm(std::istream& in, std::optional<std::size_t> d_override = std::nullopt);
Dataset load_libsvm(const std::filesystem::path& path,
                    std::optional<std::size_t> d_override = std::nullopt);
void serialize_libsvm(const Dataset& data, std::ostream& out);

/// Rectangular numeric CSV. A non-numeric first row is treated as a header;
/// `label_column` names (by header) or numbers (0-based) the label column.
Dataset parse_csv(std::istream& in, std::optional<std::string> label_column = std::nullopt);
Dataset load_csv(const std::filesystem::path& path,
                 std::optional<std::string> label_column = std::nullopt);

/// Dense numeric matrix from CSV (no labels; an optional header row is skipped).
Eigen::MatrixXd load_matrix_csv(const std::filesystem::path& path);
/// Writes a header row `<prefix>1,<prefix>2,...` then the rows at full precision.
void write_matrix_csv(const Eigen::MatrixXd& m, std::ostream& out, const std::string& column_prefix = "c");

/// n samples with i.i.d. standard-normal coordinates.
Dataset gen_synth_gaussian(std::size_t n, std::size_t d, std::uint64_t seed);

/// Iris-scale stand-in: 3 labelled Gaussian classes of `per_class` rows in
/// 4 features, with the per-class means and spreads of Fisher's Iris data.
Dataset gen_iris_like(std::uint64_t seed, std::size_t per_class = 50);

/// G = 0.01 (X + X^T) + U D U^T with D_ii = exp(-c i), i = 1..n, X standard
/// normal and U a seeded random orthogonal matrix. Symmetric by construction.
Eigen::MatrixXd gen_controlled_spectrum_gram(std::size_t n, double c, std::uint64_t seed);

/// Seeded random orthogonal matrix from the QR factorization of a Gaussian
/// matrix, with the signs of R's diagonal folded into Q.
Eigen::MatrixXd random_orthogonal(std::size_t n, std::uint64_t seed);

struct Contamination {
  Dataset data;
  std::vector<std::size_t> corrupted_rows;  // ascending
  std::vector<double> multipliers;          // parallel to corrupted_rows
};

/// Replaces floor(omega n) distinct rows x_i with b_i x_i, b_i ~ N(0, tau^2).
Contamination contaminate(const Dataset& data, double omega, double tau, std::uint64_t seed);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded train/test split. Stratified by label when labels exist.
Split train_test_split(const Dataset& data, double test_fraction, std::uint64_t seed);

/// Loads `path` by format name: "libsvm", "csv", or "gram" is rejected here
/// (precomputed Gram matrices go through kernels::load_precomputed_gram).
Dataset load_dataset(const std::filesystem::path& path, const std::string& format,
                     std::optional<std::string> label_column = std::nullopt);

}  // namespace dualkpca
