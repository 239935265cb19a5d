#include "dualkpca/objectives.hpp"

#include "dualkpca/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace dualkpca {

namespace {

constexpr double kBallTolerance = 1e-9;

double parse_positive(const std::string& text, const std::string& what, bool allow_zero) {
  double v = 0.0;
  try {
    std::size_t used = 0;
    v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw UsageError("invalid " + what + " '" + text + "'");
  }
  if (!std::isfinite(v) || v < 0.0 || (!allow_zero && v == 0.0))
    throw UsageError(what + " must be " + (allow_zero ? "nonnegative" : "positive"));
  return v;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

Eigen::VectorXd row_norms(const Eigen::MatrixXd& m) { return m.rowwise().norm(); }

}  // namespace

void ObjectiveSpec::validate() const {
  if (is_huber() && !(kappa > 0.0 && std::isfinite(kappa))) throw UsageError("huber objectives need kappa > 0");
  if (is_eps() && !(eps >= 0.0 && std::isfinite(eps))) throw UsageError("eps objectives need eps >= 0");
}

std::string ObjectiveSpec::to_string() const {
  switch (kind) {
    case ObjectiveKind::square: return "square";
    case ObjectiveKind::huber_l1: return "huber1:" + fmt(kappa);
    case ObjectiveKind::huber_row2: return "huber2:" + fmt(kappa);
    case ObjectiveKind::eps_linf: return "epsinf:" + fmt(eps);
    case ObjectiveKind::eps_row2: return "eps2:" + fmt(eps);
  }
  return "unknown";
}

ObjectiveSpec ObjectiveRequest::resolve(double kappa_max_value) const {
  ObjectiveSpec spec{kind, 0.0, 0.0};
  if (spec.is_huber()) spec.kappa = relative_to_kappa_max ? value * kappa_max_value : value;
  if (spec.is_eps()) spec.eps = value;
  spec.validate();
  return spec;
}

ObjectiveSpec ObjectiveRequest::resolve() const {
  if (relative_to_kappa_max) throw UsageError("objective radius is relative to kappa_max; resolve it first");
  return resolve(0.0);
}

std::string ObjectiveRequest::to_string() const {
  if (!relative_to_kappa_max) return resolve().to_string();
  return std::string(kind == ObjectiveKind::huber_l1 ? "huber1" : "huber2") + ":xmax:" + fmt(value);
}

ObjectiveRequest parse_objective(const std::string& text) {
  if (text == "square") return {};
  auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("unknown objective '" + text + "'");
  const std::string head = text.substr(0, colon);
  const std::string rest = text.substr(colon + 1);

  ObjectiveRequest req;
  if (head == "huber1" || head == "huber2") {
    req.kind = head == "huber1" ? ObjectiveKind::huber_l1 : ObjectiveKind::huber_row2;
    if (rest.rfind("xmax:", 0) == 0) {
      req.relative_to_kappa_max = true;
      req.value = parse_positive(rest.substr(5), "kappa fraction", false);
    } else {
      req.value = parse_positive(rest, "kappa", false);
    }
    return req;
  }
  if (head == "epsinf" || head == "eps2") {
    req.kind = head == "epsinf" ? ObjectiveKind::eps_linf : ObjectiveKind::eps_row2;
    req.value = parse_positive(rest, "eps", true);
    return req;
  }
  throw UsageError("unknown objective '" + text + "'");
}

Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& v, double radius) {
  if (!(radius > 0.0)) throw UsageError("project_l1_ball: radius must be positive");
  if (v.cwiseAbs().sum() <= radius) return v;

  std::vector<double> u(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) u[static_cast<std::size_t>(i)] = std::abs(v(i));
  std::sort(u.begin(), u.end(), std::greater<>());

  // Largest rho with u_rho > (sum_{j<=rho} u_j - r) / rho.
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    const double t = (cumsum - radius) / static_cast<double>(j + 1);
    if (u[j] > t) theta = t;
  }
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::max(std::abs(v(i)) - theta, 0.0);
    out(i) = std::copysign(mag, v(i));
    if (mag == 0.0) out(i) = 0.0;
  }
  return out;
}

Eigen::MatrixXd project_row_norm_ball(const Eigen::MatrixXd& y, double radius) {
  Eigen::VectorXd norms = row_norms(y);
  if (norms.sum() <= radius) return y;
  Eigen::VectorXd target = project_l1_ball(norms, radius);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(y.rows(), y.cols());
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    if (norms(i) > 0.0 && target(i) > 0.0) out.row(i) = y.row(i) * (target(i) / norms(i));
  return out;
}

Eigen::MatrixXd prox_psi_star(const ObjectiveSpec& spec, const Eigen::MatrixXd& y) {
  spec.validate();
  switch (spec.kind) {
    case ObjectiveKind::square:
      return y;
    case ObjectiveKind::huber_l1:
      return y.cwiseMax(-spec.kappa).cwiseMin(spec.kappa);
    case ObjectiveKind::huber_row2:
      return project_row_norm_ball(y, spec.kappa);
    case ObjectiveKind::eps_linf: {
      const double e = spec.eps;
      return y.unaryExpr([e](double v) { return v > e ? v - e : (v < -e ? v + e : 0.0); });
    }
    case ObjectiveKind::eps_row2: {
      Eigen::MatrixXd out = y;
      for (Eigen::Index i = 0; i < y.rows(); ++i) {
        const double norm = y.row(i).norm();
        if (norm <= spec.eps) {
          out.row(i).setZero();
        } else if (spec.eps > 0.0) {
          out.row(i) *= 1.0 - spec.eps / norm;
        }
      }
      return out;
    }
  }
  throw UsageError("unknown objective kind");
}

double psi_star_value(const ObjectiveSpec& spec, const Eigen::MatrixXd& h) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (spec.kind) {
    case ObjectiveKind::square:
      return 0.0;
    case ObjectiveKind::huber_l1:
      return h.cwiseAbs().maxCoeff() <= spec.kappa * (1.0 + kBallTolerance) ? 0.0 : inf;
    case ObjectiveKind::huber_row2:
      return row_norms(h).sum() <= spec.kappa * (1.0 + kBallTolerance) ? 0.0 : inf;
    case ObjectiveKind::eps_linf:
      return spec.eps * h.cwiseAbs().sum();
    case ObjectiveKind::eps_row2:
      return spec.eps * row_norms(h).sum();
  }
  return 0.0;
}

double kappa_max(ObjectiveKind kind, const Eigen::MatrixXd& h_square) {
  double gauge = 0.0;
  switch (kind) {
    case ObjectiveKind::huber_l1:
      gauge = h_square.size() ? h_square.cwiseAbs().maxCoeff() : 0.0;
      break;
    case ObjectiveKind::huber_row2:
      gauge = row_norms(h_square).sum();
      break;
    default:
      throw UsageError("kappa_max is defined for Huber objectives only");
  }
  if (!(gauge > 0.0)) throw NumericError("kappa_max: square-loss solution is zero");
  return gauge;
}

}  // namespace dualkpca
