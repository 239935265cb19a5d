#pragma once

#include <Eigen/Dense>

#include <string>

namespace dualkpca {

/// Variance-like objectives obtained as Moreau envelopes 1/2|.|^2 [] Psi.
///
///  kind        Psi                      Psi*                     prox_{Psi*}
///  square      0 (plain variance)       0                        identity
///  huber_l1    kappa |.|_1 entrywise    ball |.|_inf <= kappa    entrywise clip
///  huber_row2  kappa max_i |h_i|_2      ball sum_i |h_i|_2 <= k  row-norm l1-ball projection
///  eps_linf    ball |.|_inf <= eps      eps |.|_1                soft-threshold
///  eps_row2    ball max_i |h_i|_2 <= e  eps sum_i |h_i|_2        block soft-threshold
enum class ObjectiveKind { square, huber_l1, huber_row2, eps_linf, eps_row2 };

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::square;
  double kappa = 0.0;  // huber kinds
  double eps = 0.0;    // eps kinds

  static ObjectiveSpec square() { return {}; }
  static ObjectiveSpec huber_l1(double kappa) { return {ObjectiveKind::huber_l1, kappa, 0.0}; }
  static ObjectiveSpec huber_row2(double kappa) { return {ObjectiveKind::huber_row2, kappa, 0.0}; }
  static ObjectiveSpec eps_linf(double eps) { return {ObjectiveKind::eps_linf, 0.0, eps}; }
  static ObjectiveSpec eps_row2(double eps) { return {ObjectiveKind::eps_row2, 0.0, eps}; }

  bool is_huber() const noexcept {
    return kind == ObjectiveKind::huber_l1 || kind == ObjectiveKind::huber_row2;
  }
  bool is_eps() const noexcept { return kind == ObjectiveKind::eps_linf || kind == ObjectiveKind::eps_row2; }

  void validate() const;
  std::string to_string() const;
};

/// A parsed CLI objective. Huber radii may be given relative to kappa_max
/// (`huber1:xmax:0.6`), which needs a square-loss solution to resolve.
struct ObjectiveRequest {
  ObjectiveKind kind = ObjectiveKind::square;
  double value = 0.0;
  bool relative_to_kappa_max = false;

  ObjectiveSpec resolve(double kappa_max_value) const;
  ObjectiveSpec resolve() const;  // throws if relative
  std::string to_string() const;
};

/// Accepts `square`, `huber1:K`, `huber2:K`, `epsinf:E`, `eps2:E`, and
/// `huber1:xmax:F` / `huber2:xmax:F`.
ObjectiveRequest parse_objective(const std::string& text);

/// Euclidean projection onto {v : sum |v_i| <= radius} (sort-based threshold).
Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& v, double radius);

/// Projection onto {H : sum_i |h_i|_2 <= radius}: l1-ball projection of the
/// row-norm vector, rows rescaled. Zero rows stay zero.
Eigen::MatrixXd project_row_norm_ball(const Eigen::MatrixXd& y, double radius);

Eigen::MatrixXd prox_psi_star(const ObjectiveSpec& spec, const Eigen::MatrixXd& y);

/// Psi*(H): 0 / indicator of the dual ball (relative tolerance 1e-9) / eps * dual norm.
double psi_star_value(const ObjectiveSpec& spec, const Eigen::MatrixXd& h);

/// Dual-ball gauge of a square-loss solution: the Huber radius above which the
/// ball constraint is inactive there.
double kappa_max(ObjectiveKind kind, const Eigen::MatrixXd& h_square);

}  // namespace dualkpca
