#include "doctest.h"

#include "dualkpca/baselines.hpp"
#include "dualkpca/data_io.hpp"
#include "dualkpca/errors.hpp"
#include "dualkpca/kernels.hpp"
#include "dualkpca/model.hpp"

#include "../oracles.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace dualkpca;

namespace {

std::shared_ptr<const Dataset> synth(std::size_t n, std::size_t d, std::uint64_t seed) {
  return std::make_shared<const Dataset>(gen_synth_gaussian(n, d, seed));
}

const KernelSpec kRbf{KernelFamily::gaussian, 1.5};

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("dualkpca_test_" + name);
}

}  // namespace

TEST_CASE("fit: projections of the training points span the top eigenspace") {
  const auto data = synth(150, 4, 1);
  const KpcaModel m = fit(data, kRbf, parse_objective("square"), 4);
  const Eigen::MatrixXd g = center_gram(gram(*data, kRbf)).entries;
  const Eigen::MatrixXd p = project(m, *data);
  const Eigen::MatrixXd top = oracle::top_part(g, 4);
  CHECK((p * p.transpose() - top).norm() <= 1e-4 * top.norm());
  // Training projections equal G A.
  CHECK((p - g * m.coefficients).norm() <= 1e-8 * p.norm());
}

TEST_CASE("fit: principal directions are orthonormal in feature space") {
  const auto data = synth(100, 3, 2);
  const KpcaModel m = fit(data, kRbf, parse_objective("square"), 3);
  const Eigen::MatrixXd g = center_gram(gram(*data, kRbf)).entries;
  const Eigen::MatrixXd a = m.coefficients;
  CHECK((a.transpose() * g * a - Eigen::MatrixXd::Identity(3, 3)).norm() <= 1e-8);
}

TEST_CASE("fit: captured variance equals the top eigenvalues") {
  const auto data = synth(120, 3, 3);
  const KpcaModel m = fit(data, kRbf, parse_objective("square"), 3);
  const Eigen::MatrixXd g = center_gram(gram(*data, kRbf)).entries;
  const Eigen::VectorXd ev = oracle::eigenvalues_desc(g).head(3);
  // A is a rotated basis of the top subspace, so only the total is invariant.
  const Eigen::VectorXd var = project(m, *data).colwise().squaredNorm().transpose();
  CHECK(var.sum() == doctest::Approx(ev.sum()).epsilon(1e-6));
}

TEST_CASE("make_model on the toy gives A = (1/2, 0)") {
  GramMatrix g;
  g.entries = Eigen::MatrixXd::Zero(2, 2);
  g.entries(0, 0) = 4;
  g.entries(1, 1) = 1;
  g.centered = true;
  g.stats = CenteringStats{Eigen::VectorXd::Zero(2), 0.0};
  Eigen::MatrixXd h(2, 1);
  h << 2, 0;
  const KpcaModel m = make_model(g, h, ObjectiveSpec::square());
  CHECK(m.coefficients(0, 0) == doctest::Approx(0.5));
  CHECK(m.coefficients(1, 0) == 0.0);
}

TEST_CASE("unprojectable models are refused") {
  GramMatrix g;
  g.entries = Eigen::MatrixXd::Identity(2, 2);
  g.entries(1, 1) = 0.0;
  g.centered = true;
  g.stats = CenteringStats{Eigen::VectorXd::Zero(2), 0.0};
  Eigen::MatrixXd h(2, 1);
  h << 0, 1;
  CHECK_THROWS_AS(make_model(g, h, ObjectiveSpec::square()), SingularityError);
  CHECK_THROWS_AS(make_model(GramMatrix{}, h, ObjectiveSpec::square()), UsageError);
}

TEST_CASE("reconstruction error: vanishes at full rank and decreases with s") {
  const auto data = synth(25, 3, 4);
  const GramMatrix centered = center_gram(gram(*data, kRbf));
  double previous = std::numeric_limits<double>::infinity();
  for (Eigen::Index s : {1, 3, 6, 12}) {
    KpcaModel m = make_model(centered, kpca_dense_eig(centered.entries, s).h_svd, ObjectiveSpec::square());
    m.kernel = kRbf;
    m.training = data;
    const double e = reconstruction_error(m, *data);
    CHECK(e <= previous + 1e-12);
    previous = e;
  }
  // The centered Gram has rank n - 1.
  KpcaModel full = make_model(centered, kpca_dense_eig(centered.entries, 24).h_svd, ObjectiveSpec::square());
  full.kernel = kRbf;
  full.training = data;
  CHECK(reconstruction_error(full, *data) <= 1e-8);
}

TEST_CASE("reconstruction error matches the feature-space oracle for a linear kernel") {
  // Linear kernel: feature space is R^d, error is the PCA residual.
  const auto data = synth(60, 4, 5);
  const KernelSpec lin{KernelFamily::linear, std::nullopt};
  const KpcaModel m = fit(data, lin, parse_objective("square"), 2);
  Eigen::MatrixXd x = data->dense();
  x.rowwise() -= x.colwise().mean();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x.transpose() * x);
  const Eigen::MatrixXd v = es.eigenvectors().rightCols(2);
  const double expected = (x - x * v * v.transpose()).rowwise().squaredNorm().mean();
  CHECK(reconstruction_error(m, *data) == doctest::Approx(expected).epsilon(1e-5));
}

TEST_CASE("sparsity_metrics") {
  Eigen::MatrixXd h(4, 2);
  h << 1, 0, 0, 0, 0, 2, 1e-12, 0;
  const SparsityMetrics s = sparsity_metrics(h);
  CHECK(s.zero_rows_pct == 50.0);
  CHECK(s.zero_entries_pct == 75.0);
  const SparsityMetrics z = sparsity_metrics(Eigen::MatrixXd::Zero(3, 2));
  CHECK(z.zero_rows_pct == 100.0);
  CHECK(z.zero_entries_pct == 100.0);
  CHECK(sparsity_metrics(Eigen::MatrixXd::Ones(3, 2)).zero_entries_pct == 0.0);
}

TEST_CASE("save and load round trip") {
  const auto data = synth(40, 3, 6);
  const KpcaModel m = fit(data, KernelSpec{KernelFamily::gaussian, std::nullopt}, parse_objective("square"), 2);
  const auto path = temp_file("model.txt");
  save_model(m, path);

  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  CHECK(first.find(kModelFormat) != std::string::npos);

  const KpcaModel back = load_model(path, data);
  CHECK(back.kernel.sigma == m.kernel.sigma);
  CHECK((back.h - m.h).norm() <= 1e-14 * m.h.norm());
  const Eigen::MatrixXd p1 = project(m, *data);
  const Eigen::MatrixXd p2 = project(back, *data);
  CHECK((p1 - p2).norm() <= 1e-12 * p1.norm());

  CHECK_THROWS_AS(load_model(path, synth(40, 3, 7)), DataError);
  CHECK_THROWS_AS(load_model(path, nullptr), UsageError);
  CHECK_THROWS_AS(load_model(temp_file("missing.txt"), data), DataError);
  std::filesystem::remove(path);
}

TEST_CASE("relative Huber radius records kappa_max") {
  const auto data = synth(60, 3, 8);
  const KpcaModel m = fit(data, kRbf, parse_objective("huber1:xmax:0.5"), 2);
  REQUIRE(m.kappa_max.has_value());
  CHECK(m.objective.kappa == doctest::Approx(0.5 * *m.kappa_max));
  CHECK(m.h.cwiseAbs().maxCoeff() <= m.objective.kappa * (1 + 1e-12));
  const KpcaModel sq = fit(data, kRbf, parse_objective("square"), 2);
  CHECK(*m.kappa_max == doctest::Approx(sq.h.cwiseAbs().maxCoeff()).epsilon(1e-3));
}

TEST_CASE("fit validation") {
  const auto data = synth(20, 2, 9);
  CHECK_THROWS_AS(fit(nullptr, kRbf, parse_objective("square"), 1), UsageError);
  CHECK_THROWS_AS(fit(data, KernelSpec{KernelFamily::precomputed, std::nullopt}, parse_objective("square"), 1),
                  UsageError);
  FitOptions opt;
  opt.solver = SolverChoice::lbfgs;
  CHECK_THROWS_AS(fit(data, kRbf, parse_objective("eps2:0.1"), 1, opt), UsageError);
}
