#include "dualkpca/line_search.hpp"

#include "dualkpca/errors.hpp"

#include <cmath>
#include <limits>
#include <optional>

namespace dualkpca {

namespace {

struct Sample {
  double step = 0.0;
  double value = 0.0;
  double slope = 0.0;  // directional derivative
  Eigen::VectorXd gradient;
};

// Minimizer of the cubic interpolating (a, b); nullopt when it degenerates.
std::optional<double> cubic_min(const Sample& a, const Sample& b) {
  if (!std::isfinite(a.value) || !std::isfinite(b.value)) return std::nullopt;
  const double d1 = a.slope + b.slope - 3.0 * (a.value - b.value) / (a.step - b.step);
  const double disc = d1 * d1 - a.slope * b.slope;
  if (!(disc >= 0.0)) return std::nullopt;
  const double d2 = std::copysign(std::sqrt(disc), b.step - a.step);
  const double denom = b.slope - a.slope + 2.0 * d2;
  if (denom == 0.0) return std::nullopt;
  const double t = b.step - (b.step - a.step) * (b.slope + d2 - d1) / denom;
  if (!std::isfinite(t)) return std::nullopt;
  return t;
}

class Searcher {
 public:
  Searcher(const CostGradientFn& f, const Eigen::VectorXd& x, const Eigen::VectorXd& d, double f0, double slope0,
           const LineSearchParams& p)
      : f_(f), x_(x), d_(d), f0_(f0), slope0_(slope0), p_(p) {}

  LineSearchResult run() {
    Sample prev{0.0, f0_, slope0_, {}};
    double step = p_.initial_step;
    for (int i = 0; evaluations_ < p_.max_steps; ++i) {
      Sample cur = probe(step);
      if (violates_armijo(cur) || (i > 0 && cur.value >= prev.value)) return zoom(prev, cur);
      note_armijo(cur);
      if (std::abs(cur.slope) <= -p_.c2 * slope0_) return done(LineSearchStatus::converged, cur);
      if (cur.slope >= 0.0) return zoom(cur, prev);
      prev = std::move(cur);
      if (step >= p_.max_step) break;
      step = std::min(2.0 * step, p_.max_step);
    }
    return stalled();
  }

  int evaluations() const { return evaluations_; }

 private:
  Sample probe(double step) {
    ++evaluations_;
    Sample s;
    s.step = step;
    Eigen::VectorXd xs = x_ + step * d_;
    try {
      s.value = f_(xs, s.gradient);
      s.slope = s.gradient.dot(d_);
    } catch (const SingularityError&) {
      s.value = std::numeric_limits<double>::infinity();
    }
    if (!std::isfinite(s.value) || !std::isfinite(s.slope)) {
      s.value = std::numeric_limits<double>::infinity();
      s.slope = std::numeric_limits<double>::quiet_NaN();
    }
    return s;
  }

  bool violates_armijo(const Sample& s) const {
    return !std::isfinite(s.value) || s.value > f0_ + p_.c1 * s.step * slope0_;
  }

  void note_armijo(const Sample& s) {
    if (s.value < best_.value) best_ = s;
  }

  LineSearchResult zoom(Sample lo, Sample hi) {
    while (evaluations_ < p_.max_steps) {
      const double lo_s = std::min(lo.step, hi.step);
      const double hi_s = std::max(lo.step, hi.step);
      const double width = hi_s - lo_s;
      double trial = 0.5 * (lo.step + hi.step);
      if (auto c = cubic_min(lo, hi); c && *c > lo_s + 0.1 * width && *c < hi_s - 0.1 * width) trial = *c;
      if (width <= std::numeric_limits<double>::epsilon() * std::max(1.0, hi_s)) break;

      Sample cur = probe(trial);
      if (violates_armijo(cur) || cur.value >= lo.value) {
        hi = std::move(cur);
        continue;
      }
      note_armijo(cur);
      if (std::abs(cur.slope) <= -p_.c2 * slope0_) return done(LineSearchStatus::converged, cur);
      if (cur.slope * (hi.step - lo.step) >= 0.0) hi = lo;
      lo = std::move(cur);
    }
    return stalled();
  }

  LineSearchResult done(LineSearchStatus status, const Sample& s) const {
    return {status, s.step, s.value, s.gradient, evaluations_};
  }

  LineSearchResult stalled() const {
    if (best_.step > 0.0) return done(LineSearchStatus::stalled, best_);
    return {LineSearchStatus::stalled, 0.0, f0_, {}, evaluations_};
  }

  const CostGradientFn& f_;
  const Eigen::VectorXd& x_;
  const Eigen::VectorXd& d_;
  double f0_;
  double slope0_;
  const LineSearchParams& p_;
  int evaluations_ = 0;
  Sample best_{0.0, std::numeric_limits<double>::infinity(), 0.0, {}};
};

}  // namespace

void LineSearchParams::validate() const {
  if (!(0.0 < c1 && c1 < c2 && c2 < 1.0)) throw UsageError("line search needs 0 < c1 < c2 < 1");
  if (max_steps < 1) throw UsageError("line search needs at least one step");
  if (!(initial_step > 0.0) || !(max_step >= initial_step)) throw UsageError("invalid line search step bounds");
}

LineSearchResult line_search_strong_wolfe(const CostGradientFn& f, const Eigen::VectorXd& x, double fx,
                                          const Eigen::VectorXd& gx, const Eigen::VectorXd& direction,
                                          const LineSearchParams& params) {
  params.validate();
  if (direction.size() != x.size() || gx.size() != x.size()) throw UsageError("line search: size mismatch");
  const double slope0 = gx.dot(direction);
  if (!(slope0 < 0.0)) throw UsageError("line search: direction is not a descent direction");
  Searcher searcher(f, x, direction, fx, slope0, params);
  return searcher.run();
}

LineSearchResult line_search_strong_wolfe(const CostGradientFn& f, const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& direction, const LineSearchParams& params) {
  Eigen::VectorXd g;
  const double fx = f(x, g);
  auto result = line_search_strong_wolfe(f, x, fx, g, direction, params);
  result.evaluations += 1;
  return result;
}

}  // namespace dualkpca
