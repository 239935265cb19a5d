#include "dualkpca/experiments.hpp"

#include "dualkpca/baselines.hpp"
#include "dualkpca/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

namespace dualkpca {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

KpcaModel model_on_data(const GramMatrix& centered, DualVariable h, const ObjectiveSpec& objective,
                        std::shared_ptr<const Dataset> data, const KernelSpec& kernel) {
  KpcaModel m = make_model(centered, std::move(h), objective);
  m.kernel = kernel;
  m.fingerprint = data->fingerprint();
  m.training = std::move(data);
  return m;
}

}  // namespace

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw UsageError("spearman: need two equal-length samples");
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double ma = mean(ra), mb = mean(rb);
  double num_ = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    num_ += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  if (da == 0.0 || db == 0.0) return 0.0;
  return num_ / std::sqrt(da * db);
}

// ---------------------------------------------------------------- bench

std::vector<BenchRow> run_bench(const Eigen::MatrixXd& g, const BenchOptions& opt) {
  if (opt.repeats < 1) throw UsageError("repeats must be at least 1");
  if (!(opt.delta > 0.0)) throw UsageError("delta must be positive");
  const Eigen::Index s = opt.components;
  if (s < 1 || s > g.rows()) throw UsageError("components must lie in [1, n]");

  auto dump = [&](const std::string& solver, const DualVariable& h) {
    if (!opt.dump_dir) return;
    std::filesystem::create_directories(*opt.dump_dir);
    std::ofstream out(*opt.dump_dir / ("H_" + solver + ".csv"));
    write_matrix_csv(h, out, "h");
  };

  // Oracle: one full eigendecomposition, reused as the first eig sample.
  auto t0 = Clock::now();
  DenseKpca oracle = kpca_dense_eig(g, s);
  const double oracle_seconds = seconds_since(t0);
  const Eigen::VectorXd& top = oracle.pairs.values;

  std::vector<BenchRow> rows;
  for (const auto& solver : opt.solvers) {
    BenchRow row;
    row.task = opt.task;
    row.n = g.rows();
    row.solver = solver;
    row.delta = opt.delta;
    row.converged = true;
    for (int r = 0; r < opt.repeats; ++r) {
      const std::uint64_t seed = opt.seed + static_cast<std::uint64_t>(r);
      if (solver == "eig") {
        double secs = oracle_seconds;
        DualVariable h = oracle.h_svd;
        if (r > 0) {
          t0 = Clock::now();
          h = kpca_dense_eig(g, s).h_svd;
          secs = seconds_since(t0);
        }
        row.samples.push_back(secs);
        row.eta = dual_residual(g, h, top);
        if (r + 1 == opt.repeats) dump(solver, h);
      } else if (solver == "rsvd") {
        AdaptiveRsvdOptions ro;
        ro.power_iters = opt.power_iters;
        ro.max_oversamples = opt.max_oversamples;
        t0 = Clock::now();
        try {
          AdaptiveRsvd res = rsvd_adaptive(g, s, opt.delta, top, seed, ro);
          row.samples.push_back(seconds_since(t0));
          row.iterations = static_cast<long>(res.oversamples);
          row.eta = res.eta;
          if (r + 1 == opt.repeats) dump(solver, h_from_pairs(res.pairs));
        } catch (const ToleranceNotReached& e) {
          row.samples.push_back(seconds_since(t0));
          row.iterations = e.budget_used();
          row.eta = e.residual();
          row.converged = false;
        }
      } else if (solver == "lbfgs" || solver == "dca") {
        SolveConfig cfg = solver == "dca" ? SolveConfig::dca_defaults() : SolveConfig{};
        cfg.tol = opt.delta;
        cfg.seed = seed;
        cfg.benchmark_eigs = top;
        if (solver == "lbfgs") cfg.max_iters = 5000;
        SolveResult res = solver == "lbfgs" ? lbfgs_solve(g, s, cfg) : dca_solve(g, s, ObjectiveSpec{}, cfg);
        row.samples.push_back(res.report.wall_seconds);
        row.iterations = res.report.iterations;
        row.eta = res.report.eta_trace.back();
        if (r + 1 == opt.repeats) dump(solver, res.h);
      } else {
        throw UsageError("unknown solver '" + solver + "'");
      }
      if (!(row.eta < opt.delta)) row.converged = false;
    }
    row.wall_seconds = mean(row.samples);
    rows.push_back(std::move(row));
  }

  auto rsvd_row = std::find_if(rows.begin(), rows.end(), [](const BenchRow& r) { return r.solver == "rsvd"; });
  if (rsvd_row != rows.end() && rsvd_row->converged)
    for (auto& row : rows)
      if (row.converged && row.wall_seconds > 0.0) row.speedup_vs_rsvd = rsvd_row->wall_seconds / row.wall_seconds;
  return rows;
}

void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out) {
  out << "task,n,solver,delta,wall_seconds,iterations,eta,converged,speedup_vs_rsvd,samples\n";
  for (const auto& r : rows) {
    out << r.task << ',' << r.n << ',' << r.solver << ',' << num(r.delta) << ',' << num(r.wall_seconds) << ','
        << r.iterations << ',' << num(r.eta) << ',' << (r.converged ? 1 : 0) << ','
        << (r.speedup_vs_rsvd ? num(*r.speedup_vs_rsvd) : "") << ',';
    for (std::size_t i = 0; i < r.samples.size(); ++i) out << (i ? ";" : "") << num(r.samples[i]);
    out << '\n';
  }
}

// ---------------------------------------------------------------- spectrum

std::vector<SpectrumRow> run_spectrum(const SpectrumOptions& opt) {
  if (opt.c_grid.empty()) throw UsageError("empty c grid");
  std::vector<SpectrumRow> rows;
  for (double c : opt.c_grid) {
    // 0.01(X + X^T) is indefinite at this scale; the solvers need a PSD Gram.
    const Eigen::MatrixXd g =
        clip_to_psd(gen_controlled_spectrum_gram(static_cast<std::size_t>(opt.n), c, opt.seed));
    const Eigen::VectorXd top = top_eigenvalues(g, opt.components);

    SolveConfig cfg;
    cfg.tol = opt.delta;
    cfg.seed = opt.seed;
    cfg.max_iters = opt.max_iters;
    cfg.benchmark_eigs = top;
    const SolveResult lb = lbfgs_solve(g, opt.components, cfg);

    AdaptiveRsvdOptions ro;
    ro.power_iters = opt.power_iters;
    const AdaptiveRsvd rs = rsvd_adaptive(g, opt.components, opt.delta, top, opt.seed, ro);

    SpectrumRow row;
    row.c = c;
    row.lbfgs_iters = lb.report.iterations;
    row.lbfgs_eta = lb.report.eta_trace.back();
    row.lbfgs_converged = row.lbfgs_eta < opt.delta;
    row.rsvd_oversamples = static_cast<long>(rs.oversamples);
    row.rsvd_eta = rs.eta;
    rows.push_back(row);
  }
  auto ref = std::min_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.rsvd_oversamples < b.rsvd_oversamples;
  });
  const SpectrumRow base = *ref;
  for (auto& r : rows) {
    r.extra_oversamples = r.rsvd_oversamples - base.rsvd_oversamples;
    r.extra_lbfgs_iters = r.lbfgs_iters - base.lbfgs_iters;
  }
  return rows;
}

void write_spectrum_csv(const std::vector<SpectrumRow>& rows, std::ostream& out) {
  out << "c,lbfgs_iters,rsvd_oversamples,extra_lbfgs_iters,extra_oversamples,lbfgs_eta,rsvd_eta,lbfgs_converged\n";
  for (const auto& r : rows)
    out << num(r.c) << ',' << r.lbfgs_iters << ',' << r.rsvd_oversamples << ',' << r.extra_lbfgs_iters << ','
        << r.extra_oversamples << ',' << num(r.lbfgs_eta) << ',' << num(r.rsvd_eta) << ','
        << (r.lbfgs_converged ? 1 : 0) << '\n';
}

// ---------------------------------------------------------------- robust

std::vector<RobustRow> run_robust(const Dataset& data, const RobustOptions& opt) {
  std::vector<ObjectiveRequest> requests;
  for (const auto& o : opt.objectives) requests.push_back(parse_objective(o));
  if (requests.empty() || opt.tau_grid.empty()) throw UsageError("robust sweep needs objectives and a tau grid");

  const Split split = train_test_split(data, opt.test_split, opt.seed);
  const Dataset train = data.select_rows(split.train);
  const Dataset test = data.select_rows(split.test);

  const std::size_t cells = opt.tau_grid.size() * requests.size();
  std::vector<RobustRow> rows(cells);
  parallel_for(cells, opt.jobs, [&](std::size_t cell) {
    const std::size_t ti = cell / requests.size();
    const std::size_t oi = cell % requests.size();
    RobustRow& row = rows[cell];
    row.tau = opt.tau_grid[ti];
    row.objective = opt.objectives[oi];
    // Same seed for every tau: one corrupted index set, multipliers scaled by tau.
    auto corrupted = std::make_shared<const Dataset>(
        contaminate(train, opt.omega, row.tau, opt.seed + 1).data);
    FitOptions fo;
    fo.config = requests[oi].kind == ObjectiveKind::square ? SolveConfig{} : SolveConfig::dca_defaults();
    fo.config.seed = opt.seed;
    fo.config.tol = 1e-10;
    try {
      KpcaModel m = fit(corrupted, opt.kernel, requests[oi], opt.components, fo);
      row.kappa = m.objective.kappa;
      row.reconstruction_error = reconstruction_error(m, test);
    } catch (const NumericError& e) {
      row.status = "failed";
      row.reconstruction_error = std::numeric_limits<double>::quiet_NaN();
    }
  });
  return rows;
}

void write_robust_csv(const std::vector<RobustRow>& rows, std::ostream& out) {
  out << "tau,objective,kappa,reconstruction_error,status\n";
  for (const auto& r : rows)
    out << num(r.tau) << ',' << r.objective << ',' << num(r.kappa) << ',' << num(r.reconstruction_error) << ','
        << r.status << '\n';
}

// ---------------------------------------------------------------- sparse

std::vector<SparseRow> run_sparse(const Dataset& data, const SparseOptions& opt) {
  if (opt.kind != ObjectiveKind::eps_linf && opt.kind != ObjectiveKind::eps_row2)
    throw UsageError("sparse sweep needs an eps objective");
  if (opt.eps_grid.empty() || opt.components_grid.empty()) throw UsageError("empty sweep grid");

  auto shared = std::make_shared<const Dataset>(data);
  KernelSpec kernel = opt.kernel;
  if (!kernel.resolved()) kernel.sigma = sigma_rule(data, 1.0);
  const GramMatrix centered = center_gram(gram(data, kernel));

  SolveConfig cfg = SolveConfig::dca_defaults();
  cfg.seed = opt.seed;
  cfg.max_iters = opt.max_iters;

  std::vector<double> square_error(opt.components_grid.size());
  parallel_for(opt.components_grid.size(), opt.jobs, [&](std::size_t k) {
    const auto s = opt.components_grid[k];
    SolveResult sq = dca_solve(centered.entries, s, ObjectiveSpec{}, cfg);
    square_error[k] = reconstruction_error(model_on_data(centered, std::move(sq.h), {}, shared, kernel), data);
  });

  const std::size_t cells = opt.components_grid.size() * opt.eps_grid.size();
  std::vector<SparseRow> rows(cells);
  parallel_for(cells, opt.jobs, [&](std::size_t cell) {
    const std::size_t k = cell / opt.eps_grid.size();
    SparseRow& row = rows[cell];
    row.components = opt.components_grid[k];
    row.eps = opt.eps_grid[cell % opt.eps_grid.size()];
    const ObjectiveSpec objective{opt.kind, 0.0, row.eps};
    try {
      SolveResult res = dca_solve(centered.entries, row.components, objective, cfg);
      row.iterations = res.report.iterations;
      const SparsityMetrics sm = sparsity_metrics(res.h);
      row.zero_rows_pct = sm.zero_rows_pct;
      row.zero_entries_pct = sm.zero_entries_pct;
      row.sparsity_pct = opt.kind == ObjectiveKind::eps_row2 ? sm.zero_rows_pct : sm.zero_entries_pct;
      const double err =
          reconstruction_error(model_on_data(centered, std::move(res.h), objective, shared, kernel), data);
      row.error_ratio = err / square_error[k];
    } catch (const SingularityError&) {
      row.status = "collapsed";
      row.sparsity_pct = row.zero_rows_pct = row.zero_entries_pct = 100.0;
      row.error_ratio = std::numeric_limits<double>::quiet_NaN();
    }
  });
  return rows;
}

void write_sparse_csv(const std::vector<SparseRow>& rows, std::ostream& out) {
  out << "eps,s,sparsity_pct,zero_rows_pct,zero_entries_pct,error_ratio,iterations,status\n";
  for (const auto& r : rows)
    out << num(r.eps) << ',' << r.components << ',' << num(r.sparsity_pct) << ',' << num(r.zero_rows_pct) << ','
        << num(r.zero_entries_pct) << ',' << num(r.error_ratio) << ',' << r.iterations << ',' << r.status << '\n';
}

}  // namespace dualkpca
