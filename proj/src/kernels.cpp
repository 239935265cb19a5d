#include "dualkpca/kernels.hpp"

#include "dualkpca/errors.hpp"

#include <cmath>

namespace dualkpca {

namespace {

double sparse_dot(const SparseRows& a, Eigen::Index i, const SparseRows& b, Eigen::Index j) {
  SparseRows::InnerIterator ia(a, i);
  SparseRows::InnerIterator ib(b, j);
  double acc = 0.0;
  while (ia && ib) {
    if (ia.col() == ib.col()) {
      acc += ia.value() * ib.value();
      ++ia;
      ++ib;
    } else if (ia.col() < ib.col()) {
      ++ia;
    } else {
      ++ib;
    }
  }
  return acc;
}

Eigen::VectorXd sparse_sq_norms(const SparseRows& a) {
  Eigen::VectorXd out(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) out(i) = sparse_dot(a, i, a, i);
  return out;
}

double apply_family(const KernelSpec& spec, double dot, double sq_dist) {
  switch (spec.family) {
    case KernelFamily::linear:
      return dot;
    case KernelFamily::gaussian:
      return std::exp(-sq_dist / (2.0 * *spec.sigma * *spec.sigma));
    case KernelFamily::laplace:
      return std::exp(-std::sqrt(sq_dist) / (2.0 * *spec.sigma * *spec.sigma));
    case KernelFamily::precomputed:
      break;
  }
  throw UsageError("precomputed kernels cannot be evaluated on data");
}

// Evaluates k(a_i, b_j) for two row stores. Dense pairs are computed from
// explicit differences; anything sparse goes through |a|^2 + |b|^2 - 2<a,b>.
class PairEvaluator {
 public:
  PairEvaluator(const Dataset& a, const Dataset& b, const KernelSpec& spec) : spec_(spec) {
    if (a.d() != b.d())
      throw DataError("dimension mismatch: " + std::to_string(a.d()) + " vs " + std::to_string(b.d()));
    spec_.validate();
    if (!spec_.resolved()) throw UsageError("kernel bandwidth must be resolved before evaluation");
    if (!a.is_sparse() && !b.is_sparse()) {
      da_ = &a.dense();
      db_ = &b.dense();
    } else {
      sa_ = a.is_sparse() ? a.sparse() : SparseRows(a.dense().sparseView());
      sb_ = b.is_sparse() ? b.sparse() : SparseRows(b.dense().sparseView());
      na_ = sparse_sq_norms(sa_);
      nb_ = sparse_sq_norms(sb_);
    }
  }

  double operator()(Eigen::Index i, Eigen::Index j) const {
    if (da_) {
      const auto d = da_->cols();
      const double* x = da_->data() + i * d;
      const double* y = db_->data() + j * d;
      if (spec_.family == KernelFamily::linear) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < d; ++k) acc += x[k] * y[k];
        return acc;
      }
      double acc = 0.0;
      for (Eigen::Index k = 0; k < d; ++k) {
        const double t = x[k] - y[k];
        acc += t * t;
      }
      return apply_family(spec_, 0.0, acc);
    }
    const double dot = sparse_dot(sa_, i, sb_, j);
    const double sq = std::max(0.0, na_(i) + nb_(j) - 2.0 * dot);
    return apply_family(spec_, dot, sq);
  }

 private:
  KernelSpec spec_;
  const DenseRows* da_ = nullptr;
  const DenseRows* db_ = nullptr;
  SparseRows sa_, sb_;
  Eigen::VectorXd na_, nb_;
};

Dataset single_row(const Eigen::Ref<const Eigen::VectorXd>& x) {
  DenseRows row(1, x.size());
  row.row(0) = x.transpose();
  return Dataset(std::move(row));
}

}  // namespace

bool KernelSpec::resolved() const noexcept {
  return family == KernelFamily::linear || family == KernelFamily::precomputed || sigma.has_value();
}

void KernelSpec::validate() const {
  if (family == KernelFamily::precomputed && sigma) throw UsageError("precomputed kernel takes no bandwidth");
  if (sigma && !(*sigma > 0.0 && std::isfinite(*sigma))) throw UsageError("kernel bandwidth must be positive");
}

KernelSpec parse_kernel(const std::string& family, const std::string& sigma) {
  KernelSpec spec;
  if (family == "linear") {
    spec.family = KernelFamily::linear;
  } else if (family == "gaussian") {
    spec.family = KernelFamily::gaussian;
  } else if (family == "laplace") {
    spec.family = KernelFamily::laplace;
  } else if (family == "precomputed") {
    spec.family = KernelFamily::precomputed;
    return spec;
  } else {
    throw UsageError("unknown kernel '" + family + "'");
  }
  if (spec.family != KernelFamily::linear && sigma != "auto") {
    try {
      std::size_t used = 0;
      spec.sigma = std::stod(sigma, &used);
      if (used != sigma.size()) throw std::invalid_argument(sigma);
    } catch (const std::exception&) {
      throw UsageError("invalid bandwidth '" + sigma + "'");
    }
  }
  spec.validate();
  return spec;
}

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::linear: return "linear";
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::laplace: return "laplace";
    case KernelFamily::precomputed: return "precomputed";
  }
  return "unknown";
}

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size())
    throw DataError("dimension mismatch: " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  spec.validate();
  if (!spec.resolved()) throw UsageError("kernel bandwidth must be resolved before evaluation");
  return apply_family(spec, x.dot(y), (x - y).squaredNorm());
}

double sigma_rule(const Dataset& data, double scale) {
  if (!(scale > 0.0)) throw UsageError("sigma rule scale must be positive");
  if (data.n() < 2) throw DataError("sigma rule needs at least two samples");
  const auto n = static_cast<double>(data.n());
  const auto d = static_cast<Eigen::Index>(data.d());
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(d);
  if (data.is_sparse()) {
    const auto& s = data.sparse();
    for (Eigen::Index r = 0; r < s.outerSize(); ++r)
      for (SparseRows::InnerIterator it(s, r); it; ++it) {
        sum(it.col()) += it.value();
        sumsq(it.col()) += it.value() * it.value();
      }
  } else {
    const auto& m = data.dense();
    Eigen::RowVectorXd mean = m.colwise().mean();
    // Two-pass variance for dense data.
    Eigen::VectorXd var = (m.rowwise() - mean).colwise().squaredNorm().transpose() / (n - 1.0);
    const double v = var.mean();
    if (!(v > 0.0)) throw DataError("sigma rule: training data has zero variance");
    return scale * std::sqrt(static_cast<double>(d) * v);
  }
  Eigen::VectorXd var = (sumsq - sum.cwiseProduct(sum) / n) / (n - 1.0);
  const double v = var.cwiseMax(0.0).mean();
  if (!(v > 0.0)) throw DataError("sigma rule: training data has zero variance");
  return scale * std::sqrt(static_cast<double>(d) * v);
}

KernelSpec resolve(const KernelSpec& spec, const Dataset& data) {
  if (spec.resolved()) return spec;
  KernelSpec out = spec;
  out.sigma = sigma_rule(data);
  return out;
}

GramMatrix gram(const Dataset& data, const KernelSpec& spec) {
  PairEvaluator eval(data, data, spec);
  const auto n = static_cast<Eigen::Index>(data.n());
  GramMatrix g;
  g.entries.resize(n, n);
  const bool unit_diag = spec.family != KernelFamily::linear;
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) g.entries(i, j) = eval(i, j);
    g.entries(j, j) = unit_diag ? 1.0 : eval(j, j);
  }
  g.entries.triangularView<Eigen::StrictlyLower>() = g.entries.transpose();
  return g;
}

Eigen::MatrixXd cross_kernel(const Dataset& train, const Dataset& probe, const KernelSpec& spec) {
  PairEvaluator eval(probe, train, spec);
  Eigen::MatrixXd k(static_cast<Eigen::Index>(probe.n()), static_cast<Eigen::Index>(train.n()));
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < k.rows(); ++i)
    for (Eigen::Index j = 0; j < k.cols(); ++j) k(i, j) = eval(i, j);
  return k;
}

Eigen::VectorXd self_kernel(const Dataset& data, const KernelSpec& spec) {
  PairEvaluator eval(data, data, spec);
  Eigen::VectorXd out(static_cast<Eigen::Index>(data.n()));
  for (Eigen::Index i = 0; i < out.size(); ++i)
    out(i) = spec.family == KernelFamily::linear ? eval(i, i) : 1.0;
  return out;
}

GramMatrix center_gram(const GramMatrix& g, double jitter_theta) {
  if (!(jitter_theta >= 0.0)) throw UsageError("jitter must be nonnegative");
  const auto n = g.n();
  const auto& a = g.entries;
  CenteringStats stats;
  stats.column_means = a.colwise().mean().transpose();
  stats.grand_mean = stats.column_means.mean();

  GramMatrix out;
  out.entries.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i <= j; ++i)
      out.entries(i, j) = a(i, j) - stats.column_means(i) - stats.column_means(j) + stats.grand_mean;
  out.entries.triangularView<Eigen::StrictlyLower>() = out.entries.transpose();
  out.centered = true;
  // Recentering keeps the original statistics: J (J G J) J = J G J.
  out.stats = g.centered && g.stats ? g.stats : std::optional<CenteringStats>(std::move(stats));
  if (jitter_theta > 0.0) {
    out.jitter = jitter_theta * out.entries.diagonal().mean();
    out.entries.diagonal().array() += out.jitter;
  }
  return out;
}

Eigen::MatrixXd center_rows(const Eigen::MatrixXd& cross, const CenteringStats& stats) {
  if (cross.cols() != stats.column_means.size())
    throw DataError("kernel rows have " + std::to_string(cross.cols()) + " columns, expected " +
                    std::to_string(stats.column_means.size()));
  Eigen::VectorXd row_means = cross.rowwise().mean();
  Eigen::MatrixXd out = cross;
  out.colwise() -= row_means;
  out.rowwise() -= stats.column_means.transpose();
  out.array() += stats.grand_mean;
  return out;
}

Eigen::VectorXd kernel_row(const CenteringStats& stats, const KernelSpec& spec, const Dataset& train,
                           const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (static_cast<std::size_t>(x.size()) != train.d())
    throw DataError("dimension mismatch: " + std::to_string(x.size()) + " vs " + std::to_string(train.d()));
  Eigen::MatrixXd cross = cross_kernel(train, single_row(x), spec);
  return center_rows(cross, stats).row(0).transpose();
}

Eigen::VectorXd centered_self_kernel(const Eigen::MatrixXd& cross, const Eigen::VectorXd& self,
                                     const CenteringStats& stats) {
  Eigen::VectorXd row_means = cross.rowwise().mean();
  return (self - 2.0 * row_means).array() + stats.grand_mean;
}

GramMatrix precomputed_gram(Eigen::MatrixXd entries) {
  if (entries.rows() != entries.cols() || entries.rows() == 0)
    throw DataError("precomputed Gram matrix must be square and nonempty");
  const double scale = entries.cwiseAbs().maxCoeff();
  const double asym = (entries - entries.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8 * scale)
    throw DataError("precomputed Gram matrix is not symmetric (max asymmetry " + std::to_string(asym) + ")");
  GramMatrix g;
  g.entries = 0.5 * (entries + entries.transpose());
  return g;
}

GramMatrix load_precomputed_gram(const std::filesystem::path& path) {
  return precomputed_gram(load_matrix_csv(path));
}

}  // namespace dualkpca
