#include "doctest.h"

#include "dualkpca/data_io.hpp"
#include "dualkpca/errors.hpp"
#include "dualkpca/experiments.hpp"
#include "dualkpca/kernels.hpp"

#include "../oracles.hpp"

#include <atomic>
#include <cmath>
#include <set>
#include <sstream>

using namespace dualkpca;

namespace {

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("spearman") {
  CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
  // Monotone but nonlinear.
  CHECK(spearman({1, 2, 3, 4, 5}, {1, 8, 27, 64, 125}) == doctest::Approx(1.0));
  // Ties get average ranks: equals Pearson of the rank vectors.
  const std::vector<double> a{1, 2, 2, 3}, b{1, 3, 2, 4};
  CHECK(spearman(a, b) == doctest::Approx(oracle::pearson({1, 2.5, 2.5, 4}, {1, 3, 2, 4})));
  CHECK(spearman({1, 1, 1}, {1, 2, 3}) == 0.0);
}

TEST_CASE("parallel_for visits each index once") {
  for (int jobs : {1, 3, 8}) {
    std::vector<std::atomic<int>> hits(37);
    parallel_for(hits.size(), jobs, [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) CHECK(h.load() == 1);
  }
}

TEST_CASE("bench: every solver reaches delta on a small Gram") {
  const Eigen::MatrixXd g =
      center_gram(gram(gen_synth_gaussian(200, 5, 1), KernelSpec{KernelFamily::gaussian, 2.0})).entries;
  BenchOptions opt;
  opt.components = 5;
  opt.delta = 1e-3;
  opt.solvers = {"eig", "rsvd", "lbfgs", "dca"};
  const auto rows = run_bench(g, opt);
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    CHECK(r.converged);
    CHECK(r.eta < 1e-3);
    CHECK(r.samples.size() == 1);
  }
  CHECK(rows[0].eta < 1e-12);
  std::ostringstream csv;
  write_bench_csv(rows, csv);
  CHECK(first_line(csv.str()) == "task,n,solver,delta,wall_seconds,iterations,eta,converged,speedup_vs_rsvd,samples");
  CHECK(line_count(csv.str()) == 5);

  opt.solvers = {"power"};
  CHECK_THROWS_AS(run_bench(g, opt), UsageError);
}

TEST_CASE("spectrum: small run") {
  SpectrumOptions opt;
  opt.n = 150;
  opt.components = 5;
  opt.delta = 1e-3;
  opt.c_grid = {0.05, 0.5};
  const auto rows = run_spectrum(opt);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.lbfgs_converged);
    CHECK(r.lbfgs_eta < 1e-3);
    CHECK(r.rsvd_eta < 1e-3);
    CHECK(r.extra_oversamples >= 0);
  }
  std::ostringstream csv;
  write_spectrum_csv(rows, csv);
  CHECK(first_line(csv.str()) ==
        "c,lbfgs_iters,rsvd_oversamples,extra_lbfgs_iters,extra_oversamples,lbfgs_eta,rsvd_eta,lbfgs_converged");
}

TEST_CASE("robust: without contamination all objectives agree") {
  const Dataset data = gen_iris_like(0);
  RobustOptions opt;
  opt.omega = 0.0;
  opt.tau_grid = {10};
  const auto rows = run_robust(data, opt);
  REQUIRE(rows.size() == 3);
  double lo = rows[0].reconstruction_error, hi = lo;
  for (const auto& r : rows) {
    CHECK(r.status == "ok");
    lo = std::min(lo, r.reconstruction_error);
    hi = std::max(hi, r.reconstruction_error);
  }
  CHECK((hi - lo) <= 0.01 * lo);
  CHECK(rows[0].kappa == 0.0);
  CHECK(rows[1].kappa > 0.0);
  std::ostringstream csv;
  write_robust_csv(rows, csv);
  CHECK(first_line(csv.str()) == "tau,objective,kappa,reconstruction_error,status");
}

TEST_CASE("robust: jobs do not change results") {
  const Dataset data = gen_iris_like(1, 20);
  RobustOptions opt;
  opt.tau_grid = {25, 75};
  const auto serial = run_robust(data, opt);
  opt.jobs = 4;
  const auto threaded = run_robust(data, opt);
  REQUIRE(serial.size() == threaded.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].objective == threaded[i].objective);
    CHECK(serial[i].reconstruction_error == threaded[i].reconstruction_error);
  }
}

TEST_CASE("sparse: eps = 0 matches the square loss, sparsity grows with eps") {
  const Dataset data = gen_synth_gaussian(200, 8, 0);
  SparseOptions opt;
  opt.eps_grid = {0.0, 0.2, 0.4};
  opt.components_grid = {3};
  const auto rows = run_sparse(data, opt);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].error_ratio == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rows[0].sparsity_pct == 0.0);
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].status == "ok") CHECK(rows[i].sparsity_pct >= rows[i - 1].sparsity_pct);
  std::ostringstream csv;
  write_sparse_csv(rows, csv);
  CHECK(first_line(csv.str()) == "eps,s,sparsity_pct,zero_rows_pct,zero_entries_pct,error_ratio,iterations,status");

  opt.kind = ObjectiveKind::huber_l1;
  CHECK_THROWS_AS(run_sparse(data, opt), UsageError);
}
