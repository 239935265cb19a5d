// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Tolerances are fixed here and must not be loosened to pass.

#include "dualkpca/baselines.hpp"
#include "dualkpca/data_io.hpp"
#include "dualkpca/dual_core.hpp"
#include "dualkpca/experiments.hpp"
#include "dualkpca/kernels.hpp"
#include "dualkpca/model.hpp"
#include "dualkpca/objectives.hpp"
#include "dualkpca/solvers.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

using namespace dualkpca;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Eigen::MatrixXd centered_rbf(std::size_t n, std::size_t d, double sigma, std::uint64_t seed) {
  return center_gram(gram(gen_synth_gaussian(n, d, seed), KernelSpec{KernelFamily::gaussian, sigma})).entries;
}

bool converged(const SolveReport& r) {
  return r.termination == Termination::tolerance || r.termination == Termination::gradient;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// 1 ---------------------------------------------------------------------------
Outcome oracle_equivalence() {
  constexpr double kCostTol = 1e-6;
  constexpr double kProjTol = 1e-4;
  const auto data = std::make_shared<const Dataset>(gen_synth_gaussian(300, 5, 1));
  const KernelSpec kernel{KernelFamily::gaussian, 2.0};
  const Eigen::MatrixXd g = center_gram(gram(*data, kernel)).entries;
  const Eigen::VectorXd ev = oracle::eigenvalues_desc(g);
  const auto t0 = Clock::now();
  const SolveResult r = lbfgs_solve(g, 5);
  const double secs = since(t0);
  const double cost_err = rel(r.report.cost_trace.back(), -0.5 * ev.head(5).sum());

  const KpcaModel m = fit(data, kernel, parse_objective("square"), 5);
  const Eigen::MatrixXd p = project(m, *data);
  const Eigen::MatrixXd top = oracle::top_part(g, 5);
  const double proj_err = (p * p.transpose() - top).norm() / top.norm();
  return {cost_err <= kCostTol && proj_err <= kProjTol,
          "cost rel " + fmt("%.2e", cost_err) + ", PP^T rel " + fmt("%.2e", proj_err) + ", " + fmt("%.2fs", secs)};
}

// 2 ---------------------------------------------------------------------------
Outcome gradient_fd() {
  constexpr double kTol = 1e-5;
  double worst = 0.0;
  int checked = 0;
  for (std::uint64_t seed = 0; checked < 20; ++seed) {
    const Eigen::Index n = 5 + static_cast<Eigen::Index>(seed % 10) * 5;  // 5..50
    const Eigen::Index s = 1 + static_cast<Eigen::Index>(seed % 4);
    const Eigen::MatrixXd g = oracle::random_psd(n, n, 1000 + seed);
    const Eigen::MatrixXd h = oracle::gaussian_matrix(n, s, 2000 + seed);
    const Eigen::VectorXd ev = oracle::eigenvalues_desc(h.transpose() * g * h);
    if (ev(s - 1) < 1e-6 * ev(0)) continue;
    ++checked;
    const Eigen::MatrixXd fd = oracle::finite_difference([&](const Eigen::MatrixXd& x) { return pi(g, x); }, h, 1e-6);
    const Eigen::MatrixXd an = grad_pi(g, h).gradient;
    worst = std::max(worst, (fd - an).norm() / an.norm());
  }
  return {worst <= kTol, "worst rel " + fmt("%.2e", worst) + " over 20 instances"};
}

// 3 ---------------------------------------------------------------------------
Outcome nuclear_norm() {
  constexpr double kTol = 1e-8;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(seed * 47 % 48);  // 3..50
    const Eigen::Index s = 1 + static_cast<Eigen::Index>(seed % 5);
    const Eigen::MatrixXd g = oracle::random_psd(n, 1 + n / (1 + seed % 3), 300 + seed);
    const Eigen::MatrixXd h = oracle::gaussian_matrix(n, s, 400 + seed);
    const double expected = oracle::nuclear_norm(oracle::psd_sqrt(g) * h);
    worst = std::max(worst, rel(pi(g, h), expected));
  }
  return {worst <= kTol, "worst rel " + fmt("%.2e", worst)};
}

// 4 ---------------------------------------------------------------------------
Outcome moreau() {
  constexpr double kTol = 1e-12;
  const ObjectiveSpec specs[] = {ObjectiveSpec::huber_l1(0.7), ObjectiveSpec::huber_row2(1.9),
                                 ObjectiveSpec::eps_linf(0.4), ObjectiveSpec::eps_row2(0.8)};
  double worst = 0.0;
  for (const auto& spec : specs)
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const Eigen::MatrixXd y = 2.0 * oracle::gaussian_matrix(1 + seed % 12, 1 + seed % 4, 7000 + seed);
      Eigen::MatrixXd prox_psi;
      switch (spec.kind) {
        case ObjectiveKind::huber_l1: prox_psi = oracle::soft_threshold(y, spec.kappa); break;
        case ObjectiveKind::huber_row2: prox_psi = oracle::prox_max_row_norm(y, spec.kappa); break;
        case ObjectiveKind::eps_linf: prox_psi = oracle::clip(y, spec.eps); break;
        default: prox_psi = oracle::row_ball(y, spec.eps); break;
      }
      worst = std::max(worst, (prox_psi + prox_psi_star(spec, y) - y).cwiseAbs().maxCoeff());
    }
  return {worst <= kTol, "worst abs " + fmt("%.2e", worst) + " over 4 x 100"};
}

// 5 ---------------------------------------------------------------------------
Outcome projections() {
  constexpr double kTol = 1e-8;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(seed % 8);
    const double r = 0.1 + static_cast<double>(seed % 9) * 0.4;
    const Eigen::VectorXd v = 3.0 * oracle::gaussian_matrix(m, 1, 9000 + seed).col(0);
    worst = std::max(worst, (project_l1_ball(v, r) - oracle::l1_ball(v, r)).cwiseAbs().maxCoeff());
    const Eigen::MatrixXd y = oracle::gaussian_matrix(m, 1 + static_cast<Eigen::Index>(seed % 8), 9500 + seed);
    worst = std::max(worst, (project_row_norm_ball(y, r) - oracle::row_norm_ball(y, r)).cwiseAbs().maxCoeff());
  }
  return {worst <= kTol, "worst abs " + fmt("%.2e", worst)};
}

ObjectiveSpec spec_for(int k, double scale) {
  switch (k) {
    case 0: return ObjectiveSpec::square();
    case 1: return ObjectiveSpec::huber_l1(0.3 * scale);
    case 2: return ObjectiveSpec::huber_row2(3.0 * scale);
    case 3: return ObjectiveSpec::eps_linf(0.02 * scale);
    default: return ObjectiveSpec::eps_row2(0.05 * scale);
  }
}

// 6 ---------------------------------------------------------------------------
Outcome dca_descent() {
  constexpr double kSlack = 1e-10;
  double worst = -std::numeric_limits<double>::infinity();
  int runs = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::MatrixXd g = centered_rbf(80, 4, 1.5, 100 + seed);
    for (int k = 0; k < 5; ++k) {
      SolveConfig cfg = SolveConfig::dca_defaults();
      cfg.seed = seed;
      const SolveResult r = dca_solve(g, 3, spec_for(k, 1.0 + 0.1 * static_cast<double>(seed)), cfg);
      const auto& c = r.report.cost_trace;
      for (std::size_t i = 1; i < c.size(); ++i)
        if (std::isfinite(c[i - 1])) worst = std::max(worst, c[i] - c[i - 1]);
      ++runs;
    }
  }
  return {worst <= kSlack, "largest step increase " + fmt("%.2e", worst) + " over " + std::to_string(runs) + " runs"};
}

// 7 ---------------------------------------------------------------------------
Outcome criticality() {
  constexpr double kTol = 1e-4;
  double worst = 0.0;
  int count = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::MatrixXd g = centered_rbf(100 + 20 * seed, 3 + seed % 4, 1.0 + 0.2 * static_cast<double>(seed), seed);
    SolveConfig lb;
    lb.seed = seed;
    SolveConfig dc = SolveConfig::dca_defaults();
    dc.seed = seed;
    for (const SolveResult& r : {lbfgs_solve(g, 4, lb), dca_solve(g, 4, ObjectiveSpec::square(), dc)})
      if (converged(r.report)) {
        worst = std::max(worst, check_critical_point(g, r.h));
        ++count;
      }
  }
  return {count > 0 && worst <= kTol, "worst " + fmt("%.2e", worst) + " over " + std::to_string(count) + " converged runs"};
}

// 8 ---------------------------------------------------------------------------
Outcome reductions() {
  constexpr double kTol = 1e-8;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Eigen::MatrixXd g = centered_rbf(80, 4, 1.5, 200 + seed);
    SolveConfig cfg = SolveConfig::dca_defaults();
    cfg.seed = seed;
    const SolveResult sq = dca_solve(g, 3, ObjectiveSpec::square(), cfg);
    const double ref = sq.report.cost_trace.back();
    std::vector<ObjectiveSpec> specs{ObjectiveSpec::eps_linf(0.0), ObjectiveSpec::eps_row2(0.0)};
    for (auto kind : {ObjectiveKind::huber_l1, ObjectiveKind::huber_row2}) {
      const double kmax = kappa_max(kind, sq.h);
      for (double f : {1.0, 1.5, 3.0}) specs.push_back(ObjectiveSpec{kind, f * kmax, 0.0});
    }
    for (const auto& spec : specs) worst = std::max(worst, rel(dca_solve(g, 3, spec, cfg).report.cost_trace.back(), ref));
  }
  return {worst <= kTol, "worst final-cost rel " + fmt("%.2e", worst)};
}

// 9 ---------------------------------------------------------------------------
Outcome sparsity_trend() {
  constexpr double kRho = 0.9;
  constexpr double kUnitTol = 1e-6;
  constexpr double kSparsity = 40.0;
  constexpr double kErrorCeiling = 1.25;
  const auto t0 = Clock::now();
  SparseOptions opt;
  const auto rows = run_sparse(gen_synth_gaussian(1000, 20, 0), opt);
  std::vector<double> eps, zero;
  bool unit = false, point = false;
  std::ostringstream trace;
  for (const auto& r : rows) {
    eps.push_back(r.eps);
    zero.push_back(r.zero_rows_pct);
    if (r.eps == 0.0) unit = std::abs(r.error_ratio - 1.0) <= kUnitTol;
    if (r.status == "ok" && r.zero_rows_pct >= kSparsity && r.error_ratio <= kErrorCeiling) point = true;
    trace << ' ' << r.eps << ':' << fmt("%.1f%%", r.zero_rows_pct) << '/' << fmt("%.3f", r.error_ratio);
  }
  const double rho = spearman(eps, zero);
  return {rho >= kRho && unit && point,
          "rho " + fmt("%.3f", rho) + (unit ? "" : ", eps=0 ratio off") + (point ? "" : ", no 40%/1.25 point") +
              "; eps:zero-rows/ratio" + trace.str() + ", " + fmt("%.1fs", since(t0))};
}

// 10 --------------------------------------------------------------------------
Outcome robustness() {
  constexpr int kNeeded = 4;
  int wins = 0;
  std::ostringstream trace;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RobustOptions opt;
    opt.omega = 0.08;
    opt.tau_grid = {100};
    opt.objectives = {"square", "huber1:xmax:0.6", "huber2:xmax:0.8"};
    opt.seed = seed;
    opt.jobs = 3;
    const auto rows = run_robust(gen_iris_like(seed), opt);
    const double sq = rows[0].reconstruction_error;
    bool win = true;
    for (std::size_t i = 1; i < rows.size(); ++i)
      win = win && rows[i].status == "ok" && rows[i].reconstruction_error <= sq;
    wins += win ? 1 : 0;
    trace << " [" << fmt("%.4f", sq) << ' ' << fmt("%.4f", rows[1].reconstruction_error) << ' '
          << fmt("%.4f", rows[2].reconstruction_error) << ']';
  }
  return {wins >= kNeeded, std::to_string(wins) + "/5 seeds; square/huber1/huber2 errors" + trace.str()};
}

// 11 --------------------------------------------------------------------------
Outcome speed() {
  const Dataset data = gen_synth_gaussian(8000, 50, 0);
  const KernelSpec kernel = resolve(KernelSpec{KernelFamily::laplace, std::nullopt}, data);
  const Eigen::MatrixXd g = center_gram(gram(data, kernel)).entries;
  BenchOptions opt;
  opt.components = 20;
  opt.delta = 1e-2;
  opt.solvers = {"eig", "lbfgs", "rsvd"};
  opt.max_oversamples = 640;
  const auto rows = run_bench(g, opt);
  const BenchRow& eig = rows[0];
  const BenchRow& lb = rows[1];
  const BenchRow& rs = rows[2];
  std::string info = rs.converged ? "rsvd " + fmt("%.2fs", rs.wall_seconds) + " (" +
                                        fmt("%.2fx", rs.wall_seconds / lb.wall_seconds) + " vs lbfgs)"
                                  : "rsvd did not reach delta within 640 oversamples";
  return {lb.converged && lb.wall_seconds < eig.wall_seconds,
          "lbfgs " + fmt("%.2fs", lb.wall_seconds) + " vs eig " + fmt("%.2fs", eig.wall_seconds) + "; " + info};
}

// 12 --------------------------------------------------------------------------
Outcome spectrum() {
  constexpr double kIterRatio = 3.0;
  SpectrumOptions opt;
  opt.c_grid = {0.01, 0.1, 0.5};
  opt.n = 500;
  opt.components = 20;
  opt.delta = 1e-4;
  const auto rows = run_spectrum(opt);
  // rows follow c_grid: oversamples must strictly decrease as c grows.
  bool strict = true;
  for (std::size_t i = 1; i < rows.size(); ++i) strict = strict && rows[i].rsvd_oversamples < rows[i - 1].rsvd_oversamples;
  long lo = rows[0].lbfgs_iters, hi = lo;
  bool all_converged = true;
  std::ostringstream trace;
  for (const auto& r : rows) {
    lo = std::min(lo, r.lbfgs_iters);
    hi = std::max(hi, r.lbfgs_iters);
    all_converged = all_converged && r.lbfgs_converged;
    trace << " c=" << r.c << ":p=" << r.rsvd_oversamples << ",it=" << r.lbfgs_iters;
  }
  const double ratio = static_cast<double>(hi) / static_cast<double>(std::max(lo, 1L));
  return {strict && all_converged && ratio < kIterRatio,
          std::string(strict ? "" : "oversamples not strictly increasing; ") + "lbfgs ratio " + fmt("%.2f", ratio) +
              ";" + trace.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"oracle equivalence", oracle_equivalence},
      {"gradient vs finite differences", gradient_fd},
      {"nuclear-norm identity", nuclear_norm},
      {"Moreau decomposition", moreau},
      {"projection oracles", projections},
      {"DCA descent", dca_descent},
      {"criticality certificate", criticality},
      {"reductions to the square loss", reductions},
      {"sparsity trend", sparsity_trend},
      {"robustness direction", robustness},
      {"speed direction", speed},
      {"spectrum robustness direction", spectrum},
  };
  // Optional argument: run a single criterion by number.
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (only && id != only) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s  %2d  %-32s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str(),
                since(t0));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
