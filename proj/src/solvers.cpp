#include "dualkpca/solvers.hpp"

#include "dualkpca/errors.hpp"
#include "dualkpca/line_search.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <sstream>

namespace dualkpca {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kReseedStride = 0x9e3779b97f4a7c15ULL;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_problem(const Eigen::MatrixXd& g, Eigen::Index s) {
  if (g.rows() != g.cols() || g.rows() == 0) throw DataError("G must be a nonempty square matrix");
  if (s < 1) throw UsageError("number of components must be at least 1");
  if (s > g.rows()) throw UsageError("number of components exceeds the number of samples");
}

// Picks the starting point: caller-supplied, or seeded N(0,1). A singular
// seeded start is redrawn once with a shifted seed.
template <class Probe>
DualVariable starting_point(const Eigen::MatrixXd& g, Eigen::Index s, const SolveConfig& config, int& restarts,
                            Probe&& probe) {
  if (config.initial) {
    if (config.initial->rows() != g.rows() || config.initial->cols() != s)
      throw UsageError("initial H has the wrong shape");
    probe(*config.initial);
    return *config.initial;
  }
  for (int attempt = 0;; ++attempt) {
    DualVariable h = standard_normal_init(g.rows(), s, config.seed + static_cast<std::uint64_t>(attempt) * kReseedStride);
    try {
      probe(h);
      return h;
    } catch (const SingularityError&) {
      if (attempt >= 1) throw;
      ++restarts;
    }
  }
}

class LbfgsMemory {
 public:
  explicit LbfgsMemory(int capacity) : capacity_(static_cast<std::size_t>(capacity)) {}

  void push(Eigen::VectorXd s, Eigen::VectorXd y) {
    const double sy = s.dot(y);
    if (!(sy > 1e-12 * s.norm() * y.norm())) return;  // curvature pair unusable
    if (pairs_.size() == capacity_) pairs_.pop_front();
    pairs_.push_back({std::move(s), std::move(y), 1.0 / sy});
  }

  void clear() { pairs_.clear(); }
  bool empty() const { return pairs_.empty(); }

  /// -H_k grad via the two-loop recursion.
  Eigen::VectorXd direction(const Eigen::VectorXd& grad) const {
    Eigen::VectorXd q = grad;
    std::vector<double> alpha(pairs_.size());
    for (std::size_t k = pairs_.size(); k-- > 0;) {
      alpha[k] = pairs_[k].rho * pairs_[k].s.dot(q);
      q -= alpha[k] * pairs_[k].y;
    }
    if (!pairs_.empty()) {
      const auto& last = pairs_.back();
      q *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      const double beta = pairs_[k].rho * pairs_[k].y.dot(q);
      q += (alpha[k] - beta) * pairs_[k].s;
    }
    return -q;
  }

 private:
  struct Pair {
    Eigen::VectorXd s, y;
    double rho;
  };
  std::size_t capacity_;
  std::deque<Pair> pairs_;
};

}  // namespace

std::string to_string(Termination t) {
  switch (t) {
    case Termination::tolerance: return "tolerance";
    case Termination::gradient: return "gradient";
    case Termination::stalled: return "stalled";
    case Termination::max_iters: return "max_iters";
  }
  return "unknown";
}

void SolveConfig::validate() const {
  if (!(tol > 0.0)) throw UsageError("tolerance must be positive");
  if (max_iters < 0) throw UsageError("max_iters must be nonnegative");
  if (lbfgs_memory < 1) throw UsageError("L-BFGS memory must be at least 1");
  if (!(0.0 < c1 && c1 < c2 && c2 < 1.0)) throw UsageError("Wolfe constants need 0 < c1 < c2 < 1");
  if (max_linesearch_steps < 1) throw UsageError("line search needs at least one step");
}

SolveConfig SolveConfig::dca_defaults() {
  SolveConfig c;
  c.max_iters = 1000;
  return c;
}

nlohmann::json to_json(const SolveReport& report) {
  nlohmann::json j;
  j["iterations"] = report.iterations;
  j["cost_trace"] = report.cost_trace;  // +inf (infeasible Huber start) serializes as null
  if (!report.eta_trace.empty()) j["eta_trace"] = report.eta_trace;
  j["wall_seconds"] = report.wall_seconds;
  j["termination"] = to_string(report.termination);
  j["restarts"] = report.restarts;
  return j;
}

DualVariable standard_normal_init(Eigen::Index n, Eigen::Index s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  DualVariable h(n, s);
  for (Eigen::Index c = 0; c < s; ++c)
    for (Eigen::Index r = 0; r < n; ++r) h(r, c) = normal(rng);
  return h;
}

SolveResult lbfgs_solve(const Eigen::MatrixXd& g, Eigen::Index s, const SolveConfig& config) {
  config.validate();
  check_problem(g, s);
  const auto t0 = Clock::now();
  const Eigen::Index n = g.rows();
  const double rms_scale = std::sqrt(static_cast<double>(n * s));

  // Objective on the flattened (column-major) H.
  CostGradientFn objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    Eigen::Map<const Eigen::MatrixXd> h(x.data(), n, s);
    const DualEvaluation eval = evaluate_dual(g, h);
    Eigen::MatrixXd gm = h - grad_pi(eval);
    grad = Eigen::Map<const Eigen::VectorXd>(gm.data(), gm.size());
    return 0.5 * x.squaredNorm() - eval.pi;
  };

  SolveResult result;
  auto& report = result.report;
  Eigen::VectorXd x, grad;
  double fx = 0.0;
  DualVariable h0 = starting_point(g, s, config, report.restarts, [&](const DualVariable& h) {
    Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(h.data(), h.size());
    fx = objective(xv, grad);
  });
  x = Eigen::Map<const Eigen::VectorXd>(h0.data(), h0.size());

  auto record = [&](double cost) {
    report.cost_trace.push_back(cost);
    if (config.benchmark_eigs) report.eta_trace.push_back(dual_residual(cost, *config.benchmark_eigs));
  };
  record(fx);

  LineSearchParams ls;
  ls.c1 = config.c1;
  ls.c2 = config.c2;
  ls.max_steps = config.max_linesearch_steps;

  LbfgsMemory memory(config.lbfgs_memory);
  report.termination = Termination::max_iters;
  bool done = config.benchmark_eigs && report.eta_trace.back() < config.tol;
  if (done) report.termination = Termination::tolerance;

  while (!done && report.iterations < config.max_iters) {
    Eigen::VectorXd dir = memory.direction(grad);
    if (!(dir.dot(grad) < 0.0)) {
      memory.clear();
      dir = -grad;
    }
    if (!(dir.dot(grad) < 0.0)) {  // zero gradient
      report.termination = Termination::gradient;
      break;
    }
    LineSearchResult step = line_search_strong_wolfe(objective, x, fx, grad, dir, ls);
    if (step.step == 0.0) {
      if (!memory.empty()) {  // retry once along steepest descent
        memory.clear();
        continue;
      }
      report.termination = Termination::stalled;
      break;
    }

    Eigen::VectorXd x_new = x + step.step * dir;
    memory.push(x_new - x, step.gradient - grad);
    x = std::move(x_new);
    grad = std::move(step.gradient);
    fx = step.value;
    ++report.iterations;
    record(fx);

    if (config.benchmark_eigs) {
      if (report.eta_trace.back() < config.tol) {
        report.termination = Termination::tolerance;
        done = true;
      }
      continue;
    }
    if (grad.norm() / rms_scale <= config.tol) {
      report.termination = Termination::gradient;
      done = true;
    } else if (report.cost_trace.size() >= 4) {
      const double older = report.cost_trace[report.cost_trace.size() - 4];
      if (std::abs(older - fx) <= config.tol * std::max(1.0, std::abs(fx))) {
        report.termination = Termination::tolerance;
        done = true;
      }
    }
  }

  result.h = Eigen::Map<const Eigen::MatrixXd>(x.data(), n, s);
  report.wall_seconds = seconds_since(t0);
  return result;
}

SolveResult dca_solve(const Eigen::MatrixXd& g, Eigen::Index s, const ObjectiveSpec& objective,
                      const SolveConfig& config) {
  config.validate();
  objective.validate();
  check_problem(g, s);
  const auto t0 = Clock::now();

  SolveResult result;
  auto& report = result.report;
  DualEvaluation eval;
  Eigen::MatrixXd y;
  DualVariable h = starting_point(g, s, config, report.restarts, [&](const DualVariable& start) {
    eval = evaluate_dual(g, start);
    y = grad_pi(eval);
  });

  auto record = [&](const DualEvaluation& e, const DualVariable& hh) {
    const double cost = dual_cost(e, hh, objective);
    report.cost_trace.push_back(cost);
    if (config.benchmark_eigs)
      report.eta_trace.push_back(dual_residual(0.5 * hh.squaredNorm() - e.pi, *config.benchmark_eigs));
    return cost;
  };
  double cost = record(eval, h);
  report.termination = Termination::max_iters;
  if (config.benchmark_eigs && report.eta_trace.back() < config.tol) report.termination = Termination::tolerance;

  const double eps = std::numeric_limits<double>::epsilon();
  while (report.termination == Termination::max_iters && report.iterations < config.max_iters) {
    if (report.iterations > 0) {
      try {
        y = grad_pi(eval);
      } catch (const SingularityError& e) {
        std::ostringstream msg;
        msg << "DCA iterate " << report.iterations << " is rank-deficient (" << e.what() << ")";
        if (objective.is_huber()) msg << "; kappa = " << objective.kappa << " is likely too small";
        if (objective.is_eps()) msg << "; eps = " << objective.eps << " is likely too large";
        throw SingularityError(msg.str(), e.eigenvalue());
      }
    }
    h = prox_psi_star(objective, y);
    eval = evaluate_dual(g, h);
    ++report.iterations;
    const double next = record(eval, h);

    if (config.benchmark_eigs && report.eta_trace.back() < config.tol) {
      report.termination = Termination::tolerance;
    } else if (std::abs(next - cost) < eps * std::max(1.0, std::abs(next))) {
      report.termination = Termination::tolerance;
    }
    cost = next;
  }

  result.h = std::move(h);
  report.wall_seconds = seconds_since(t0);
  return result;
}

}  // namespace dualkpca
