#include "dualkpca/model.hpp"

#include "dualkpca/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace dualkpca {

namespace {

SolveResult run_solver(const Eigen::MatrixXd& g, Eigen::Index s, const ObjectiveSpec& objective,
                       const FitOptions& options) {
  if (objective.kind == ObjectiveKind::square) {
    if (options.solver == SolverChoice::dca) {
      SolveConfig cfg = options.config;
      return dca_solve(g, s, objective, cfg);
    }
    return lbfgs_solve(g, s, options.config);
  }
  if (options.solver == SolverChoice::lbfgs)
    throw UsageError("L-BFGS handles the square objective only; use DCA for " + objective.to_string());
  return dca_solve(g, s, objective, options.config);
}

ObjectiveSpec resolve_objective(const Eigen::MatrixXd& g, const ObjectiveRequest& request, Eigen::Index s,
                                const FitOptions& options, std::optional<double>& kmax) {
  if (!request.relative_to_kappa_max) return request.resolve();
  SolveConfig pre = options.presolve_config.value_or(options.config);
  if (!options.presolve_config) pre.tol = std::min(pre.tol, 1e-10);
  pre.benchmark_eigs.reset();
  pre.initial.reset();
  const SolveResult square = lbfgs_solve(g, s, pre);
  kmax = kappa_max(request.kind, square.h);
  return request.resolve(*kmax);
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

}  // namespace

KpcaModel make_model(const GramMatrix& centered, DualVariable h, ObjectiveSpec objective) {
  if (!centered.stats) throw UsageError("make_model needs a centered Gram matrix");
  KpcaModel model;
  model.objective = objective;
  model.n = centered.n();
  model.stats = *centered.stats;
  const DualEvaluation eval = evaluate_dual(centered.entries, h);
  const double lmin = eval.spectrum.values(eval.spectrum.values.size() - 1);
  if (!(lmin > singularity_floor(eval.spectrum))) {
    std::ostringstream msg;
    msg << "unprojectable model: smallest eigenvalue of H^T G H is " << lmin;
    throw SingularityError(msg.str(), lmin);
  }
  model.h = std::move(h);
  model.spectrum = eval.spectrum;
  model.coefficients = recover_primal_coefficients(model);
  return model;
}

KpcaModel fit_gram(const GramMatrix& centered, const ObjectiveRequest& request, Eigen::Index s,
                   const FitOptions& options) {
  if (!centered.centered) throw UsageError("fit_gram expects a centered Gram matrix");
  std::optional<double> kmax;
  const ObjectiveSpec objective = resolve_objective(centered.entries, request, s, options, kmax);
  SolveResult solved = run_solver(centered.entries, s, objective, options);
  KpcaModel model = make_model(centered, std::move(solved.h), objective);
  model.kernel.family = KernelFamily::precomputed;
  model.report = std::move(solved.report);
  model.kappa_max = kmax;
  return model;
}

KpcaModel fit(std::shared_ptr<const Dataset> data, const KernelSpec& kernel, const ObjectiveRequest& objective,
              Eigen::Index s, const FitOptions& options) {
  if (!data) throw UsageError("fit: no dataset");
  if (kernel.family == KernelFamily::precomputed) throw UsageError("fit: use fit_gram for precomputed kernels");
  const KernelSpec resolved = resolve(kernel, *data);
  const GramMatrix centered = center_gram(gram(*data, resolved), options.jitter);
  KpcaModel model = fit_gram(centered, objective, s, options);
  model.kernel = resolved;
  model.fingerprint = data->fingerprint();
  model.training = std::move(data);
  return model;
}

Eigen::MatrixXd recover_primal_coefficients(const KpcaModel& model) {
  const auto& values = model.spectrum.values;
  if (values.size() == 0 || !(values(values.size() - 1) > singularity_floor(model.spectrum)))
    throw SingularityError("unprojectable model: H^T G H is singular",
                           values.size() ? values(values.size() - 1) : 0.0);
  return model.h * model.spectrum.apply(values.cwiseSqrt().cwiseInverse());
}

Eigen::MatrixXd project_kernel_rows(const KpcaModel& model, const Eigen::MatrixXd& kernel_rows) {
  if (model.coefficients.size() == 0) throw SingularityError("unprojectable model", 0.0);
  return center_rows(kernel_rows, model.stats) * model.coefficients;
}

Eigen::MatrixXd project(const KpcaModel& model, const Dataset& batch) {
  if (!model.training) throw UsageError("model has no training data; use project_kernel_rows");
  return project_kernel_rows(model, cross_kernel(*model.training, batch, model.kernel));
}

Eigen::VectorXd project(const KpcaModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  DenseRows row(1, x.size());
  row.row(0) = x.transpose();
  return project(model, Dataset(std::move(row))).row(0).transpose();
}

double reconstruction_error(const KpcaModel& model, const Dataset& data) {
  if (!model.training) throw UsageError("model has no training data");
  const Eigen::MatrixXd cross = cross_kernel(*model.training, data, model.kernel);
  const Eigen::VectorXd self = centered_self_kernel(cross, self_kernel(data, model.kernel), model.stats);
  const Eigen::MatrixXd p = project_kernel_rows(model, cross);
  return (self - p.rowwise().squaredNorm()).cwiseMax(0.0).mean();
}

SparsityMetrics sparsity_metrics(const Eigen::MatrixXd& h, double rel_tol) {
  if (h.size() == 0) return {100.0, 100.0};
  const double scale = h.cwiseAbs().maxCoeff();
  if (scale == 0.0) return {100.0, 100.0};
  const double cut = rel_tol * scale;
  Eigen::Index zero_entries = 0;
  Eigen::Index zero_rows = 0;
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    Eigen::Index row_zeros = 0;
    for (Eigen::Index j = 0; j < h.cols(); ++j)
      if (std::abs(h(i, j)) < cut) ++row_zeros;
    zero_entries += row_zeros;
    if (row_zeros == h.cols()) ++zero_rows;
  }
  return {100.0 * static_cast<double>(zero_rows) / static_cast<double>(h.rows()),
          100.0 * static_cast<double>(zero_entries) / static_cast<double>(h.size())};
}

void save_model(const KpcaModel& model, const std::filesystem::path& path) {
  nlohmann::json header;
  header["format"] = kModelFormat;
  header["kernel"] = {{"family", to_string(model.kernel.family)}};
  if (model.kernel.sigma) header["kernel"]["sigma"] = *model.kernel.sigma;
  header["objective"] = model.objective.to_string();
  if (model.kappa_max) header["kappa_max"] = *model.kappa_max;
  header["s"] = model.components();
  header["n"] = model.n;
  header["fingerprint"] = hex64(model.fingerprint);
  header["lambda"] = std::vector<double>(model.spectrum.values.data(),
                                         model.spectrum.values.data() + model.spectrum.values.size());
  std::vector<double> u;
  for (Eigen::Index r = 0; r < model.spectrum.rotation.rows(); ++r)
    for (Eigen::Index c = 0; c < model.spectrum.rotation.cols(); ++c) u.push_back(model.spectrum.rotation(r, c));
  header["U"] = u;
  header["column_means"] = std::vector<double>(model.stats.column_means.data(),
                                               model.stats.column_means.data() + model.stats.column_means.size());
  header["grand_mean"] = model.stats.grand_mean;

  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << header.dump() << '\n';
  write_matrix_csv(model.h, out, "h");
  if (!out) throw DataError("failed writing " + path.string());
}

KpcaModel load_model(const std::filesystem::path& path, std::shared_ptr<const Dataset> training) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string first;
  std::getline(in, first);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(first);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("model header is not valid JSON: " + std::string(e.what()));
  }
  if (header.value("format", "") != kModelFormat) throw DataError("unsupported model format");

  KpcaModel model;
  try {
    model.kernel = parse_kernel(header["kernel"]["family"].get<std::string>());
    if (header["kernel"].contains("sigma")) model.kernel.sigma = header["kernel"]["sigma"].get<double>();
    model.objective = parse_objective(header["objective"].get<std::string>()).resolve();
    if (header.contains("kappa_max")) model.kappa_max = header["kappa_max"].get<double>();
    const auto s = header["s"].get<Eigen::Index>();
    model.n = header["n"].get<Eigen::Index>();
    model.fingerprint = std::stoull(header["fingerprint"].get<std::string>(), nullptr, 16);
    auto lambda = header["lambda"].get<std::vector<double>>();
    auto u = header["U"].get<std::vector<double>>();
    auto means = header["column_means"].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(lambda.size()) != s || static_cast<Eigen::Index>(u.size()) != s * s ||
        static_cast<Eigen::Index>(means.size()) != model.n)
      throw DataError("model header has inconsistent sizes");
    model.spectrum.values = Eigen::Map<Eigen::VectorXd>(lambda.data(), s);
    model.spectrum.rotation = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(u.data(), s, s);
    model.stats.column_means = Eigen::Map<Eigen::VectorXd>(means.data(), model.n);
    model.stats.grand_mean = header["grand_mean"].get<double>();

    std::stringstream rest;
    rest << in.rdbuf();
    model.h = parse_csv(rest).dense();
    if (model.h.rows() != model.n || model.h.cols() != s) throw DataError("model payload has the wrong shape");
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed model header: " + std::string(e.what()));
  }

  if (model.kernel.family != KernelFamily::precomputed) {
    if (!training) throw UsageError("this model needs its training dataset for projection");
    if (training->fingerprint() != model.fingerprint)
      throw DataError("training dataset does not match the model fingerprint");
    model.training = std::move(training);
  }
  model.coefficients = recover_primal_coefficients(model);
  return model;
}

}  // namespace dualkpca
