// dualkpca: fit, project, benchmark and experiment driver.
//
// Exit codes: 0 ok, 1 usage, 2 data, 3 numeric failure.
// DUALKPCA_JOBS sets the default for --jobs; BLAS/LAPACK threads follow
// OMP_NUM_THREADS / OPENBLAS_NUM_THREADS.

#include "dualkpca/data_io.hpp"
#include "dualkpca/errors.hpp"
#include "dualkpca/experiments.hpp"
#include "dualkpca/kernels.hpp"
#include "dualkpca/model.hpp"
#include "dualkpca/objectives.hpp"
#include "dualkpca/solvers.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace dualkpca;
using nlohmann::json;

namespace {

enum Exit { ok = 0, usage = 1, data_error = 2, numeric = 3 };

int default_jobs() {
  if (const char* env = std::getenv("DUALKPCA_JOBS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

// Writes to `path`, or stdout when the path is empty or "-".
template <class Fn>
void emit(const std::string& path, Fn&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  write(out);
  if (!out) throw DataError("failed writing " + path);
}

void emit_json(const std::string& path, const json& j) {
  emit(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

json envelope(const std::string& command) {
  return json{{"spec_version", kReportVersion}, {"command", command}};
}

// Input source shared by the data-driven commands.
struct Source {
  std::string data;
  std::string format = "csv";
  std::string label_column;
  std::vector<std::size_t> synthetic;  // n,d

  void add(CLI::App* cmd, bool allow_gram) {
    cmd->add_option("--data", data, "input file");
    cmd->add_option("--format", format, allow_gram ? "libsvm, csv or gram" : "libsvm or csv")
        ->check(allow_gram ? CLI::IsMember({"libsvm", "csv", "gram"}) : CLI::IsMember({"libsvm", "csv"}));
    cmd->add_option("--label-column", label_column, "CSV label column (header name or 0-based index)");
    cmd->add_option("--synthetic", synthetic, "standard-normal data N,D instead of --data")
        ->delimiter(',')
        ->expected(2);
  }

  bool has_data() const { return !data.empty() || !synthetic.empty(); }
  bool is_gram() const { return format == "gram" && synthetic.empty(); }

  Dataset load(std::uint64_t seed) const {
    if (!synthetic.empty()) return gen_synth_gaussian(synthetic.at(0), synthetic.at(1), seed);
    if (data.empty()) throw UsageError("one of --data or --synthetic is required");
    std::optional<std::string> label;
    if (!label_column.empty()) label = label_column;
    return load_dataset(data, format, label);
  }
};

struct KernelFlags {
  std::string family;
  std::string sigma = "auto";

  void add(CLI::App* cmd, const std::string& default_family) {
    family = default_family;
    cmd->add_option("--kernel", family, "linear, gaussian or laplace")
        ->check(CLI::IsMember({"linear", "gaussian", "laplace"}))
        ->capture_default_str();
    cmd->add_option("--sigma", sigma, "bandwidth, or auto for the sqrt(d v) rule")->capture_default_str();
  }

  KernelSpec spec() const { return parse_kernel(family, sigma); }
};

// ---------------------------------------------------------------- solve

struct SolveFlags {
  Source source;
  KernelFlags kernel;
  Eigen::Index components = 2;
  std::string objective = "square";
  std::string solver = "auto";
  double tol = 1e-8;
  int max_iters = 0;
  std::uint64_t seed = 0;
  double jitter = 0.0;
  std::string out;
  std::string report;
};

int run_solve(const SolveFlags& f) {
  FitOptions opt;
  const ObjectiveRequest request = parse_objective(f.objective);
  opt.config = request.kind == ObjectiveKind::square && f.solver != "dca" ? SolveConfig{} : SolveConfig::dca_defaults();
  opt.config.tol = f.tol;
  opt.config.seed = f.seed;
  if (f.max_iters > 0) opt.config.max_iters = f.max_iters;
  opt.solver = f.solver == "lbfgs" ? SolverChoice::lbfgs : f.solver == "dca" ? SolverChoice::dca : SolverChoice::automatic;
  opt.jitter = f.jitter;
  if (f.components < 1) throw UsageError("--components must be at least 1");

  KpcaModel model;
  if (f.source.is_gram()) {
    if (f.source.data.empty()) throw UsageError("--format gram needs --data");
    const GramMatrix centered = center_gram(load_precomputed_gram(f.source.data), f.jitter);
    if (f.components > centered.n()) throw UsageError("--components exceeds the number of samples");
    model = fit_gram(centered, request, f.components, opt);
  } else {
    auto data = std::make_shared<const Dataset>(f.source.load(f.seed));
    if (f.components > static_cast<Eigen::Index>(data->n()))
      throw UsageError("--components exceeds the number of samples");
    model = fit(data, f.kernel.spec(), request, f.components, opt);
  }
  save_model(model, f.out);

  json j = envelope("solve");
  j["model"] = f.out;
  j["kernel"] = {{"family", to_string(model.kernel.family)}};
  if (model.kernel.sigma) j["kernel"]["sigma"] = *model.kernel.sigma;
  j["objective"] = model.objective.to_string();
  if (model.kappa_max) j["kappa_max"] = *model.kappa_max;
  j["components"] = model.components();
  j["n"] = model.n;
  j["lambda"] = std::vector<double>(model.spectrum.values.data(), model.spectrum.values.data() + model.components());
  j["report"] = to_json(model.report);
  emit_json(f.report, j);
  return ok;
}

// ---------------------------------------------------------------- project

struct ProjectFlags {
  std::string model;
  Source train;
  Source points;
  std::string kernel_rows;
  std::string out;
};

int run_project(const ProjectFlags& f) {
  std::shared_ptr<const Dataset> training;
  if (f.train.has_data()) training = std::make_shared<const Dataset>(f.train.load(0));
  const KpcaModel model = load_model(f.model, training);
  Eigen::MatrixXd p;
  if (!f.kernel_rows.empty()) {
    const Eigen::MatrixXd rows = load_matrix_csv(f.kernel_rows);
    if (rows.cols() != model.n)
      throw DataError("kernel rows have " + std::to_string(rows.cols()) + " columns, model has n = " +
                      std::to_string(model.n));
    p = project_kernel_rows(model, rows);
  } else {
    if (!model.training) throw UsageError("precomputed-Gram models project from --kernel-rows");
    p = project(model, f.points.load(0));
  }
  emit(f.out, [&](std::ostream& out) { write_matrix_csv(p, out, "pc"); });
  return ok;
}

// ---------------------------------------------------------------- experiments

void write_report(const std::string& path, const std::string& command, json rows) {
  if (path.empty()) return;
  json j = envelope(command);
  j["rows"] = std::move(rows);
  emit_json(path, j);
}

struct BenchFlags {
  Source source;
  KernelFlags kernel;
  BenchOptions opt;
  std::string solvers = "eig,rsvd,lbfgs";
  Eigen::Index max_oversamples = 0;
  std::string dump_dir;
  std::string out;
  std::string report;
};

int run_bench_cmd(BenchFlags f) {
  f.opt.solvers.clear();
  std::stringstream ss(f.solvers);
  for (std::string s; std::getline(ss, s, ',');)
    if (!s.empty()) f.opt.solvers.push_back(s);
  if (f.max_oversamples > 0) f.opt.max_oversamples = f.max_oversamples;
  if (!f.dump_dir.empty()) f.opt.dump_dir = f.dump_dir;

  GramMatrix centered;
  if (f.source.is_gram()) {
    if (f.source.data.empty()) throw UsageError("--format gram needs --data");
    centered = center_gram(load_precomputed_gram(f.source.data));
  } else {
    const Dataset data = f.source.load(f.opt.seed);
    centered = center_gram(gram(data, resolve(f.kernel.spec(), data)));
  }
  const auto rows = run_bench(centered.entries, f.opt);
  emit(f.out, [&](std::ostream& out) { write_bench_csv(rows, out); });

  json jr = json::array();
  for (const auto& r : rows) {
    json row{{"task", r.task},       {"n", r.n},     {"solver", r.solver},       {"delta", r.delta},
             {"wall_seconds", r.wall_seconds}, {"samples", r.samples}, {"iterations", r.iterations},
             {"eta", r.eta},         {"converged", r.converged}};
    if (r.speedup_vs_rsvd) row["speedup_vs_rsvd"] = *r.speedup_vs_rsvd;
    jr.push_back(row);
  }
  write_report(f.report, "bench", jr);
  return ok;
}

struct SpectrumFlags {
  SpectrumOptions opt;
  std::string out;
  std::string report;
};

int run_spectrum_cmd(const SpectrumFlags& f) {
  const auto rows = run_spectrum(f.opt);
  emit(f.out, [&](std::ostream& out) { write_spectrum_csv(rows, out); });
  json jr = json::array();
  for (const auto& r : rows)
    jr.push_back({{"c", r.c},
                  {"lbfgs_iters", r.lbfgs_iters},
                  {"rsvd_oversamples", r.rsvd_oversamples},
                  {"extra_lbfgs_iters", r.extra_lbfgs_iters},
                  {"extra_oversamples", r.extra_oversamples},
                  {"lbfgs_eta", r.lbfgs_eta},
                  {"rsvd_eta", r.rsvd_eta},
                  {"lbfgs_converged", r.lbfgs_converged}});
  write_report(f.report, "spectrum", jr);
  return ok;
}

struct RobustFlags {
  Source source;
  KernelFlags kernel;
  RobustOptions opt;
  std::string out;
  std::string report;
};

int run_robust_cmd(RobustFlags f) {
  // Without --data the Iris-scale synthetic set is used.
  const Dataset data = f.source.has_data() ? f.source.load(f.opt.seed) : gen_iris_like(f.opt.seed);
  f.opt.kernel = f.kernel.spec();
  if (!f.opt.kernel.resolved()) f.opt.kernel = resolve(f.opt.kernel, data);
  const auto rows = run_robust(data, f.opt);
  emit(f.out, [&](std::ostream& out) { write_robust_csv(rows, out); });
  json jr = json::array();
  for (const auto& r : rows)
    jr.push_back({{"tau", r.tau},
                  {"objective", r.objective},
                  {"kappa", r.kappa},
                  {"reconstruction_error", r.reconstruction_error},
                  {"status", r.status}});
  write_report(f.report, "robust", jr);
  return ok;
}

struct SparseFlags {
  Source source;
  std::string family = "gaussian";
  std::string sigma = "auto";
  std::string objective = "eps2";
  SparseOptions opt;
  std::string out;
  std::string report;
};

int run_sparse_cmd(SparseFlags f) {
  const Dataset data = f.source.has_data() ? f.source.load(f.opt.seed) : gen_synth_gaussian(1000, 20, f.opt.seed);
  f.opt.kind = f.objective == "epsinf" ? ObjectiveKind::eps_linf : ObjectiveKind::eps_row2;
  f.opt.kernel = parse_kernel(f.family, f.sigma);
  const auto rows = run_sparse(data, f.opt);
  emit(f.out, [&](std::ostream& out) { write_sparse_csv(rows, out); });
  json jr = json::array();
  for (const auto& r : rows)
    jr.push_back({{"eps", r.eps},
                  {"s", r.components},
                  {"sparsity_pct", r.sparsity_pct},
                  {"zero_rows_pct", r.zero_rows_pct},
                  {"zero_entries_pct", r.zero_entries_pct},
                  {"error_ratio", r.error_ratio},
                  {"iterations", r.iterations},
                  {"status", r.status}});
  write_report(f.report, "sparse", jr);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel PCA by gradient descent on the dual objective, with robust and sparse variants"};
  app.require_subcommand(1);
  int jobs = default_jobs();
  app.add_option("--jobs,-j", jobs, "concurrent experiment cells (default $DUALKPCA_JOBS or 1)")
      ->check(CLI::PositiveNumber);

  SolveFlags solve;
  auto* c_solve = app.add_subcommand("solve", "fit a model and write it with a JSON report");
  solve.source.add(c_solve, true);
  solve.kernel.add(c_solve, "gaussian");
  c_solve->add_option("--components,-s", solve.components, "number of components")->capture_default_str();
  c_solve->add_option("--objective", solve.objective, "square, huber1:K, huber2:K, epsinf:E, eps2:E; K may be xmax:F")
      ->capture_default_str();
  c_solve->add_option("--solver", solve.solver, "auto, lbfgs or dca")
      ->check(CLI::IsMember({"auto", "lbfgs", "dca"}))
      ->capture_default_str();
  c_solve->add_option("--tol", solve.tol, "stopping tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  c_solve->add_option("--max-iters", solve.max_iters, "iteration cap (solver default when 0)");
  c_solve->add_option("--seed", solve.seed, "random start seed")->capture_default_str();
  c_solve->add_option("--jitter", solve.jitter, "diagonal shift after centering")->check(CLI::NonNegativeNumber);
  c_solve->add_option("--out", solve.out, "model file")->required();
  c_solve->add_option("--report", solve.report, "report JSON path (stdout by default)");

  ProjectFlags proj;
  auto* c_project = app.add_subcommand("project", "project points with a saved model");
  c_project->add_option("--model", proj.model, "model file")->required();
  c_project->add_option("--train", proj.train.data, "training data the model was fitted on");
  c_project->add_option("--train-format", proj.train.format, "libsvm or csv")
      ->check(CLI::IsMember({"libsvm", "csv"}));
  c_project->add_option("--train-label-column", proj.train.label_column, "CSV label column of --train");
  c_project->add_option("--data", proj.points.data, "points to project");
  c_project->add_option("--format", proj.points.format, "libsvm or csv")->check(CLI::IsMember({"libsvm", "csv"}));
  c_project->add_option("--label-column", proj.points.label_column, "CSV label column of --data");
  c_project->add_option("--kernel-rows", proj.kernel_rows, "uncentered kernel rows k(x, x_i) for Gram models");
  c_project->add_option("--out", proj.out, "projections CSV (stdout by default)");

  BenchFlags bench;
  auto* c_bench = app.add_subcommand("bench", "time eig, rsvd, lbfgs and dca to a common dual residual");
  bench.source.add(c_bench, true);
  bench.kernel.add(c_bench, "laplace");
  c_bench->add_option("--task", bench.opt.task, "task name for the CSV")->capture_default_str();
  c_bench->add_option("--components,-s", bench.opt.components)->check(CLI::PositiveNumber)->capture_default_str();
  c_bench->add_option("--delta", bench.opt.delta, "target dual residual")->check(CLI::PositiveNumber)->capture_default_str();
  c_bench->add_option("--repeats", bench.opt.repeats)->check(CLI::PositiveNumber)->capture_default_str();
  c_bench->add_option("--solvers", bench.solvers, "comma list of eig, rsvd, lbfgs, dca")->capture_default_str();
  c_bench->add_option("--seed", bench.opt.seed)->capture_default_str();
  c_bench->add_option("--power-iters", bench.opt.power_iters, "rsvd power iterations")->capture_default_str();
  c_bench->add_option("--max-oversamples", bench.max_oversamples, "rsvd oversampling cap (n - s when 0)");
  c_bench->add_option("--dump-dir", bench.dump_dir, "write each solver's final H as CSV here");
  c_bench->add_option("--out", bench.out, "CSV path (stdout by default)");
  c_bench->add_option("--report", bench.report, "also write a JSON report");

  SpectrumFlags spec;
  auto* c_spec = app.add_subcommand("spectrum", "oversamples and L-BFGS iterations vs spectral decay");
  c_spec->add_option("--c-grid", spec.opt.c_grid, "decay rates")->delimiter(',')->capture_default_str();
  c_spec->add_option("--n", spec.opt.n)->check(CLI::PositiveNumber)->capture_default_str();
  c_spec->add_option("--components,-s", spec.opt.components)->check(CLI::PositiveNumber)->capture_default_str();
  c_spec->add_option("--delta", spec.opt.delta)->check(CLI::PositiveNumber)->capture_default_str();
  c_spec->add_option("--seed", spec.opt.seed)->capture_default_str();
  c_spec->add_option("--power-iters", spec.opt.power_iters)->capture_default_str();
  c_spec->add_option("--max-iters", spec.opt.max_iters)->check(CLI::PositiveNumber)->capture_default_str();
  c_spec->add_option("--out", spec.out, "CSV path (stdout by default)");
  c_spec->add_option("--report", spec.report, "also write a JSON report");

  RobustFlags robust;
  auto* c_robust = app.add_subcommand("robust", "contaminated-data sweep over Huber radii");
  robust.source.add(c_robust, false);
  robust.kernel.add(c_robust, "gaussian");
  robust.kernel.sigma = "1";
  c_robust->add_option("--omega", robust.opt.omega, "contaminated fraction")->capture_default_str();
  c_robust->add_option("--tau-grid", robust.opt.tau_grid, "noise scales")->delimiter(',')->capture_default_str();
  c_robust->add_option("--test-split", robust.opt.test_split)->capture_default_str();
  c_robust->add_option("--objectives", robust.opt.objectives)->delimiter(',')->capture_default_str();
  c_robust->add_option("--components,-s", robust.opt.components)->check(CLI::PositiveNumber)->capture_default_str();
  c_robust->add_option("--seed", robust.opt.seed)->capture_default_str();
  c_robust->add_option("--out", robust.out, "CSV path (stdout by default)");
  c_robust->add_option("--report", robust.report, "also write a JSON report");

  SparseFlags sparse;
  auto* c_sparse = app.add_subcommand("sparse", "sparsity and error ratio over an eps grid");
  sparse.source.add(c_sparse, false);
  c_sparse->add_option("--kernel", sparse.family)
      ->check(CLI::IsMember({"linear", "gaussian", "laplace"}))
      ->capture_default_str();
  c_sparse->add_option("--sigma", sparse.sigma, "bandwidth, or auto for sqrt(d v)")->capture_default_str();
  c_sparse->add_option("--objective", sparse.objective, "eps2 or epsinf")
      ->check(CLI::IsMember({"eps2", "epsinf"}))
      ->capture_default_str();
  c_sparse->add_option("--eps-grid", sparse.opt.eps_grid)->delimiter(',')->capture_default_str();
  c_sparse->add_option("--components-grid", sparse.opt.components_grid)->delimiter(',')->capture_default_str();
  c_sparse->add_option("--seed", sparse.opt.seed)->capture_default_str();
  c_sparse->add_option("--max-iters", sparse.opt.max_iters)->check(CLI::PositiveNumber)->capture_default_str();
  c_sparse->add_option("--out", sparse.out, "CSV path (stdout by default)");
  c_sparse->add_option("--report", sparse.report, "also write a JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? ok : usage;
  }

  try {
    if (*c_solve) return run_solve(solve);
    if (*c_project) return run_project(proj);
    if (*c_bench) return run_bench_cmd(bench);
    if (*c_spec) return run_spectrum_cmd(spec);
    robust.opt.jobs = jobs;
    sparse.opt.jobs = jobs;
    if (*c_robust) return run_robust_cmd(robust);
    if (*c_sparse) return run_sparse_cmd(sparse);
  } catch (const UsageError& e) {
    std::cerr << "dualkpca: usage error: " << e.what() << '\n';
    return usage;
  } catch (const DataError& e) {
    std::cerr << "dualkpca: data error: " << e.what() << '\n';
    return data_error;
  } catch (const NumericError& e) {
    std::cerr << "dualkpca: numeric failure: " << e.what() << '\n';
    return numeric;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "dualkpca: data error: " << e.what() << '\n';
    return data_error;
  } catch (const std::exception& e) {
    std::cerr << "dualkpca: numeric failure: " << e.what() << '\n';
    return numeric;
  }
  return usage;
}
