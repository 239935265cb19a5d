#include "dualkpca/baselines.hpp"
#include "dualkpca/data_io.hpp"
#include "dualkpca/dual_core.hpp"
#include "dualkpca/errors.hpp"
#include "dualkpca/kernels.hpp"
#include "dualkpca/model.hpp"
#include "dualkpca/objectives.hpp"
#include "dualkpca/solvers.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

namespace py = pybind11;
using namespace dualkpca;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

py::dict report_dict(const SolveReport& r) {
  py::dict d;
  d["iterations"] = r.iterations;
  d["cost_trace"] = r.cost_trace;
  if (!r.eta_trace.empty()) d["eta_trace"] = r.eta_trace;
  d["wall_seconds"] = r.wall_seconds;
  d["termination"] = to_string(r.termination);
  d["restarts"] = r.restarts;
  return d;
}

SolveConfig make_config(bool dca, double tol, int max_iters, std::uint64_t seed,
                        const std::optional<Eigen::VectorXd>& benchmark_eigs) {
  SolveConfig cfg = dca ? SolveConfig::dca_defaults() : SolveConfig{};
  cfg.tol = tol;
  if (max_iters > 0) cfg.max_iters = max_iters;
  cfg.seed = seed;
  cfg.benchmark_eigs = benchmark_eigs;
  return cfg;
}

KernelSpec kernel_from(const std::string& family, const py::object& sigma) {
  if (sigma.is_none()) return parse_kernel(family, "auto");
  if (py::isinstance<py::str>(sigma)) return parse_kernel(family, sigma.cast<std::string>());
  KernelSpec k = parse_kernel(family, "auto");
  k.sigma = sigma.cast<double>();
  k.validate();
  return k;
}

}  // namespace

PYBIND11_MODULE(_dualkpca, m) {
  m.doc() = "Kernel PCA through its dual objective";

  auto data_error = py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  auto numeric_error = py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<SingularityError>(m, "SingularityError", numeric_error.ptr());
  py::register_exception<ToleranceNotReached>(m, "ToleranceNotReached", numeric_error.ptr());
  py::register_exception<ParseError>(m, "ParseError", data_error.ptr());
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);

  // Kernels.
  m.def(
      "gram",
      [](const RowMatrix& x, const std::string& kernel, const py::object& sigma, bool center) {
        const Dataset data{DenseRows(x)};
        const GramMatrix g = gram(data, resolve(kernel_from(kernel, sigma), data));
        return center ? center_gram(g).entries : g.entries;
      },
      py::arg("x"), py::arg("kernel") = "gaussian", py::arg("sigma") = py::none(), py::arg("center") = true,
      "Kernel matrix of the rows of x, centered by default.");
  m.def(
      "center_gram", [](const Eigen::MatrixXd& k) { return center_gram(precomputed_gram(k)).entries; },
      py::arg("k"));
  m.def(
      "sigma_rule", [](const RowMatrix& x, double scale) { return sigma_rule(Dataset{DenseRows(x)}, scale); },
      py::arg("x"), py::arg("scale") = 0.1);

  // Dual objective.
  m.def("pi", &pi, py::arg("g"), py::arg("h"), "Tr sqrt(H^T G H).");
  m.def(
      "grad_pi", [](const Eigen::MatrixXd& g, const Eigen::MatrixXd& h) { return grad_pi(g, h).gradient; },
      py::arg("g"), py::arg("h"));
  m.def(
      "dual_cost",
      [](const Eigen::MatrixXd& g, const Eigen::MatrixXd& h, const std::string& objective) {
        return dual_cost(g, h, parse_objective(objective).resolve());
      },
      py::arg("g"), py::arg("h"), py::arg("objective") = "square");
  m.def(
      "dual_residual",
      [](const Eigen::MatrixXd& g, const Eigen::MatrixXd& h, const Eigen::VectorXd& top) {
        return dual_residual(g, h, top);
      },
      py::arg("g"), py::arg("h"), py::arg("top_eigenvalues"));
  m.def("check_critical_point", &check_critical_point, py::arg("g"), py::arg("h"));

  // Objectives.
  m.def(
      "prox_psi_star",
      [](const std::string& objective, const Eigen::MatrixXd& y) {
        return prox_psi_star(parse_objective(objective).resolve(), y);
      },
      py::arg("objective"), py::arg("y"));
  m.def("project_l1_ball", &project_l1_ball, py::arg("v"), py::arg("radius"));

  // Solvers.
  m.def(
      "lbfgs_solve",
      [](const Eigen::MatrixXd& g, Eigen::Index s, double tol, int max_iters, std::uint64_t seed,
         std::optional<Eigen::VectorXd> benchmark_eigs) {
        SolveResult r = lbfgs_solve(g, s, make_config(false, tol, max_iters, seed, benchmark_eigs));
        return py::make_tuple(r.h, report_dict(r.report));
      },
      py::arg("g"), py::arg("s"), py::arg("tol") = 1e-8, py::arg("max_iters") = 0, py::arg("seed") = 0,
      py::arg("benchmark_eigs") = py::none(), "Returns (H, report).");
  m.def(
      "dca_solve",
      [](const Eigen::MatrixXd& g, Eigen::Index s, const std::string& objective, double tol, int max_iters,
         std::uint64_t seed, std::optional<Eigen::VectorXd> benchmark_eigs) {
        SolveResult r = dca_solve(g, s, parse_objective(objective).resolve(),
                                  make_config(true, tol, max_iters, seed, benchmark_eigs));
        return py::make_tuple(r.h, report_dict(r.report));
      },
      py::arg("g"), py::arg("s"), py::arg("objective") = "square", py::arg("tol") = 1e-8, py::arg("max_iters") = 0,
      py::arg("seed") = 0, py::arg("benchmark_eigs") = py::none(), "Returns (H, report).");

  // Baselines.
  m.def(
      "kpca_dense_eig",
      [](const Eigen::MatrixXd& g, Eigen::Index s) {
        DenseKpca k = kpca_dense_eig(g, s);
        return py::make_tuple(k.pairs.values, k.pairs.vectors, k.h_svd);
      },
      py::arg("g"), py::arg("s"), "Returns (eigenvalues, eigenvectors, H_svd).");
  m.def(
      "rsvd",
      [](const Eigen::MatrixXd& g, Eigen::Index s, Eigen::Index oversamples, int power_iters, std::uint64_t seed) {
        EigPairs p = rsvd(g, s, oversamples, power_iters, seed);
        return py::make_tuple(p.values, p.vectors);
      },
      py::arg("g"), py::arg("s"), py::arg("oversamples") = 10, py::arg("power_iters") = 2, py::arg("seed") = 0);

  // Data generators.
  m.def(
      "synth_gaussian", [](std::size_t n, std::size_t d, std::uint64_t seed) { return RowMatrix(gen_synth_gaussian(n, d, seed).dense()); },
      py::arg("n"), py::arg("d"), py::arg("seed") = 0);
  m.def(
      "controlled_spectrum_gram", &gen_controlled_spectrum_gram, py::arg("n"), py::arg("c"), py::arg("seed") = 0);

  // Fitted models.
  py::class_<KpcaModel>(m, "KpcaModel")
      .def_property_readonly("h", [](const KpcaModel& k) { return k.h; })
      .def_property_readonly("coefficients", [](const KpcaModel& k) { return k.coefficients; })
      .def_property_readonly("eigenvalues", [](const KpcaModel& k) { return k.spectrum.values; },
                             "Eigenvalues of H^T G H, decreasing.")
      .def_property_readonly("components", &KpcaModel::components)
      .def_property_readonly("objective", [](const KpcaModel& k) { return k.objective.to_string(); })
      .def_property_readonly("sigma", [](const KpcaModel& k) { return k.kernel.sigma; })
      .def_property_readonly("kappa_max", [](const KpcaModel& k) { return k.kappa_max; })
      .def_property_readonly("report", [](const KpcaModel& k) { return report_dict(k.report); })
      .def("project", [](const KpcaModel& k, const RowMatrix& x) { return project(k, Dataset{DenseRows(x)}); },
           py::arg("x"))
      .def("reconstruction_error",
           [](const KpcaModel& k, const RowMatrix& x) { return reconstruction_error(k, Dataset{DenseRows(x)}); },
           py::arg("x"))
      .def("save", [](const KpcaModel& k, const std::string& path) { save_model(k, path); }, py::arg("path"));

  m.def(
      "fit",
      [](const RowMatrix& x, Eigen::Index components, const std::string& kernel, const py::object& sigma,
         const std::string& objective, const std::string& solver, double tol, int max_iters, std::uint64_t seed) {
        const ObjectiveRequest request = parse_objective(objective);
        FitOptions opt;
        const bool dca = solver == "dca" || request.kind != ObjectiveKind::square;
        opt.config = make_config(dca, tol, max_iters, seed, std::nullopt);
        if (solver == "lbfgs") opt.solver = SolverChoice::lbfgs;
        else if (solver == "dca") opt.solver = SolverChoice::dca;
        else if (solver != "auto") throw UsageError("solver must be auto, lbfgs or dca");
        auto data = std::make_shared<const Dataset>(DenseRows(x));
        py::gil_scoped_release release;
        return fit(data, kernel_from(kernel, sigma), request, components, opt);
      },
      py::arg("x"), py::arg("components") = 2, py::arg("kernel") = "gaussian", py::arg("sigma") = py::none(),
      py::arg("objective") = "square", py::arg("solver") = "auto", py::arg("tol") = 1e-8, py::arg("max_iters") = 0,
      py::arg("seed") = 0, "Fits kernel PCA on the rows of x.");
  m.def(
      "load_model",
      [](const std::string& path, const RowMatrix& training) {
        return load_model(path, std::make_shared<const Dataset>(DenseRows(training)));
      },
      py::arg("path"), py::arg("training"));

  m.attr("MODEL_FORMAT") = kModelFormat;
}
