#pragma once

// Exponent validation and the sign-coupled power nonlinearity
//   F1 = sgn(v) (|u|+eps)^a1 / (|v|+eps)^b1,   F2 = sgn(u) (|u|+eps)^a2 / (|v|+eps)^b2
// together with its homotopy deformation.

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "sgm/error.hpp"
#include "sgm/grid.hpp"

namespace sgm {

/// Validated exponent quadruple.
struct Exponents {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;

  double alpha(int i) const noexcept { return i == 1 ? alpha1 : alpha2; }
  double beta(int i) const noexcept { return i == 1 ? beta1 : beta2; }

  /// Gates the uniqueness and synchronous-sign claims.
  bool alpha_nonpositive() const noexcept { return alpha1 <= 0.0 && alpha2 <= 0.0; }
};

/// Returns the names of every violated constraint; empty when valid.
inline std::vector<std::string> exponent_violations(double a1, double a2, double b1, double b2) {
  std::vector<std::string> out;
  const double a[2] = {a1, a2};
  const double b[2] = {b1, b2};
  for (int i = 0; i < 2; ++i) {
    const std::string s = std::to_string(i + 1);
    if (!(std::isfinite(a[i]) && std::isfinite(b[i]))) {
      out.push_back("alpha" + s + ", beta" + s + " must be finite");
      continue;
    }
    if (!(a[i] > -1.0 && a[i] < 1.0)) out.push_back("alpha" + s + " in (-1,1)");
    if (!(b[i] > 0.0 && b[i] < 1.0)) out.push_back("beta" + s + " in (0,1)");
    if (!(a[i] + b[i] < 1.0)) out.push_back("alpha" + s + " + beta" + s + " < 1");
    if (!(a[i] - b[i] < 0.0)) out.push_back("alpha" + s + " - beta" + s + " < 0");
    if (!(a[i] - b[i] > -1.0)) out.push_back("alpha" + s + " - beta" + s + " > -1");
  }
  return out;
}

inline Exponents validate_exponents(double a1, double a2, double b1, double b2) {
  auto bad = exponent_violations(a1, a2, b1, b2);
  if (!bad.empty()) {
    std::string msg = "invalid exponents, violated:";
    for (const auto& v : bad) msg += " [" + v + "]";
    throw InvalidArgument(msg);
  }
  return {a1, a2, b1, b2};
}

inline double sgn(double s) noexcept { return s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0); }

/// Nodewise right-hand side at a single point.
inline std::pair<double, double> eval_F_point(double u, double v, double eps, const Exponents& e) noexcept {
  const double au = std::abs(u) + eps;
  const double av = std::abs(v) + eps;
  const double f1 = sgn(v) * std::pow(au, e.alpha1) / std::pow(av, e.beta1);
  const double f2 = sgn(u) * std::pow(au, e.alpha2) / std::pow(av, e.beta2);
  return {f1, f2};
}

/// Regularized right-hand side on interior nodes (zero on the boundary).
/// With eps == 0 this is the singular system and every interior node must
/// have u != 0 and v != 0.
inline std::pair<Field, Field> eval_F_eps(const Field& u, const Field& v, double eps, const Exponents& e) {
  u.check_same(v);
  if (!(eps >= 0.0)) throw InvalidArgument("eps must be nonnegative");
  const Grid& g = u.grid();
  Field f1(u.grid_ptr()), f2(u.grid_ptr());
  for (std::size_t k : g.interior_ids()) {
    if (eps == 0.0 && (u[k] == 0.0 || v[k] == 0.0)) {
      throw SingularityError(k, "unregularized right-hand side evaluated where u or v vanishes");
    }
    auto [a, b] = eval_F_point(u[k], v[k], eps, e);
    f1[k] = a;
    f2[k] = b;
  }
  return {std::move(f1), std::move(f2)};
}

struct HomotopyParams {
  double t = 1.0;
  int theta = 0;
  double epsilon = 0.5;
  double lambda1 = 0.0;

  void validate() const {
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("homotopy t must lie in [0,1]");
    if (theta != 0 && theta != 1) throw InvalidArgument("homotopy theta must be 0 or 1");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("homotopy epsilon must lie in (0,1)");
    if (!std::isfinite(lambda1)) throw InvalidArgument("lambda1 must be finite");
  }
};

/// t F_eps(u,v) + (1-t) s(v) (1 + theta lambda1 u+), and symmetrically for the
/// second component. The switch s(v) is sgn(v) for theta = 0 and identically 1
/// for theta = 1, which is the decoupled limit 1 + lambda1 u+.
inline std::pair<Field, Field> eval_homotopy(const Field& u, const Field& v, const HomotopyParams& p,
                                             const Exponents& e) {
  p.validate();
  u.check_same(v);
  const Grid& g = u.grid();
  Field f1(u.grid_ptr()), f2(u.grid_ptr());
  for (std::size_t k : g.interior_ids()) {
    auto [a, b] = eval_F_point(u[k], v[k], p.epsilon, e);
    const double s1 = p.theta == 1 ? 1.0 : sgn(v[k]);
    const double s2 = p.theta == 1 ? 1.0 : sgn(u[k]);
    const double up = std::max(0.0, u[k]);
    const double vp = std::max(0.0, v[k]);
    f1[k] = p.t * a + (1.0 - p.t) * s1 * (1.0 + p.theta * p.lambda1 * up);
    f2[k] = p.t * b + (1.0 - p.t) * s2 * (1.0 + p.theta * p.lambda1 * vp);
  }
  return {std::move(f1), std::move(f2)};
}

}  // namespace sgm
