#pragma once

// Discrete -Laplacian + identity with homogeneous Dirichlet data eliminated,
// its conjugate-gradient resolvent, and inverse power iteration for the
// principal eigenpair.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "sgm/error.hpp"
#include "sgm/grid.hpp"

namespace sgm {

struct LinearSolveStats {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

class EllipticOperator {
public:
  explicit EllipticOperator(GridPtr grid, double rel_tol = 1e-12)
      : grid_(std::move(grid)), rel_tol_(rel_tol) {
    if (!grid_) throw InvalidArgument("operator needs a grid");
    inv_h2_[0] = 1.0 / (grid_->h(0) * grid_->h(0));
    inv_h2_[1] = grid_->dimension() == 2 ? 1.0 / (grid_->h(1) * grid_->h(1)) : 0.0;
    max_iter_ = 10 * std::max<std::size_t>(grid_->interior_ids().size(), 1);
  }

  const Grid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  double relative_tolerance() const noexcept { return rel_tol_; }
  std::size_t iteration_cap() const noexcept { return max_iter_; }

  double diagonal() const noexcept { return 1.0 + 2.0 * (inv_h2_[0] + inv_h2_[1]); }

  /// Max absolute row sum (the infinity norm of the matrix).
  double norm_inf() const noexcept { return 1.0 + 4.0 * (inv_h2_[0] + inv_h2_[1]); }

  /// (-Delta_h + I) u on interior nodes, 0 on the boundary. Boundary values of
  /// `u` are ignored (treated as the zero Dirichlet data).
  Field apply(const Field& u) const {
    check_grid(u);
    Field out(grid_);
    apply_into(u.values(), out.values());
    return out;
  }

  /// Solves (-Delta_h + I) u = rhs on interior nodes with u = 0 on the boundary.
  Field solve(const Field& rhs, LinearSolveStats* stats = nullptr) const {
    check_grid(rhs);
    const auto interior = grid_->interior_ids();
    const std::size_t total = grid_->size();

    std::vector<double> x(total, 0.0), r(total, 0.0), p(total, 0.0), ap(total, 0.0);
    double bnorm2 = 0.0;
    for (std::size_t k : interior) {
      if (!std::isfinite(rhs[k])) throw InvalidArgument("non-finite right-hand side at node " + std::to_string(k));
      r[k] = rhs[k];
      bnorm2 += r[k] * r[k];
    }
    if (bnorm2 == 0.0) {
      if (stats) *stats = {};
      return Field(grid_);
    }
    p = r;
    double rr = bnorm2;
    const double target = rel_tol_ * rel_tol_ * bnorm2;
    std::size_t it = 0;
    while (rr > target) {
      if (it >= max_iter_) {
        throw NonConvergence("conjugate gradient hit its iteration cap", std::sqrt(rr / bnorm2), it);
      }
      apply_into(p, ap);
      double pap = 0.0;
      for (std::size_t k : interior) pap += p[k] * ap[k];
      const double alpha = rr / pap;
      double rr_new = 0.0;
      for (std::size_t k : interior) {
        x[k] += alpha * p[k];
        r[k] -= alpha * ap[k];
        rr_new += r[k] * r[k];
      }
      const double beta = rr_new / rr;
      for (std::size_t k : interior) p[k] = r[k] + beta * p[k];
      rr = rr_new;
      ++it;
    }
    if (stats) *stats = {it, std::sqrt(rr / bnorm2)};
    return Field(grid_, std::move(x));
  }

private:
  void check_grid(const Field& f) const {
    if (f.grid_ptr() != grid_) throw InvalidArgument("field is not defined on the operator's grid");
  }

  // Neighbour sums are formed before subtraction, so a field that is odd
  // under reflection maps to an odd field bitwise.
  void apply_into(std::span<const double> u, std::span<double> out) const {
    const Grid& g = *grid_;
    const std::size_t nx = g.nx();
    auto val = [&](std::size_t k) { return g.is_boundary(k) ? 0.0 : u[k]; };
    for (std::size_t k : g.boundary_ids()) out[k] = 0.0;
    for (std::size_t k : g.interior_ids()) {
      const double c = u[k];
      double s = (2.0 * c - (val(k - 1) + val(k + 1))) * inv_h2_[0];
      if (g.dimension() == 2) s += (2.0 * c - (val(k - nx) + val(k + nx))) * inv_h2_[1];
      out[k] = s + c;
    }
  }

  GridPtr grid_;
  double rel_tol_;
  std::size_t max_iter_;
  double inv_h2_[2]{0.0, 0.0};
};

inline EllipticOperator assemble(GridPtr grid) { return EllipticOperator(std::move(grid)); }

/// <A f, f> / <f, f> in the trapezoid inner product.
inline double rayleigh_quotient(const EllipticOperator& op, const Field& f) {
  const double den = inner(f, f);
  if (den == 0.0) throw InvalidArgument("Rayleigh quotient of the zero field");
  return inner(op.apply(f), f) / den;
}

struct EigenPair {
  double lambda = 0.0;
  Field phi;
  std::size_t iterations = 0;
};

/// Reflection-odd part (f - f o R) / 2 across the midline orthogonal to `axis`.
inline Field odd_part(const Field& f, int axis) {
  const Grid& g = f.grid();
  Field out(f.grid_ptr());
  for (std::size_t k = 0; k < f.size(); ++k) out[k] = 0.5 * (f[k] - f[g.mirror(k, axis)]);
  return out;
}

namespace detail {

inline void sup_normalize(Field& f) {
  double big = 0.0;
  for (double v : f.values())
    if (std::abs(v) > std::abs(big)) big = v;
  if (big == 0.0) throw Error("inverse iteration collapsed to the zero field");
  f *= 1.0 / big;
}

template <class Project>
EigenPair inverse_iteration(const EllipticOperator& op, Field x, double tol, std::size_t max_iter,
                            Project&& project) {
  project(x);
  detail::sup_normalize(x);
  double rho = rayleigh_quotient(op, x);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    Field y = op.solve(x);
    project(y);
    detail::sup_normalize(y);
    const double rho_new = rayleigh_quotient(op, y);
    x = std::move(y);
    if (std::abs(rho_new - rho) <= tol) return {rho_new, std::move(x), it};
    rho = rho_new;
  }
  throw NonConvergence("inverse power iteration did not settle", std::abs(rho), max_iter);
}

}  // namespace detail

/// Smallest eigenvalue of the operator and its positive, sup-normalized eigenvector.
inline EigenPair principal_eigenpair(const EllipticOperator& op, double tol = 1e-13,
                                     std::size_t max_iter = 1000) {
  Field start = Field::dirichlet(op.grid_ptr(), [](double, double) { return 1.0; });
  return detail::inverse_iteration(op, std::move(start), tol, max_iter, [](Field&) {});
}

/// Lowest eigenpair within fields odd under reflection across `axis`. On an
/// interval, and on a rectangle whose longest side is `axis`, this is the
/// second eigenpair; its eigenvector has a single nodal line and is positive on
/// the low-coordinate side.
inline EigenPair odd_eigenpair(const EllipticOperator& op, int axis, double tol = 1e-13,
                               std::size_t max_iter = 2000) {
  const Grid& g = op.grid();
  const double mid = 0.5 * g.domain().extents[axis];
  Field start = Field::dirichlet(op.grid_ptr(), [&](double x, double y) {
    const double c = axis == 0 ? x : y;
    return c < mid ? 1.0 : (c > mid ? -1.0 : 0.0);
  });
  auto project = [axis](Field& f) { f = odd_part(f, axis); };
  EigenPair pair = detail::inverse_iteration(op, std::move(start), tol, max_iter, project);
  // Orient: positive on the low side.
  double low_side = 0.0;
  for (std::size_t k : g.interior_ids())
    if (g.coord(k)[axis] < mid) low_side += pair.phi[k];
  if (low_side < 0.0) pair.phi *= -1.0;
  return pair;
}

}  // namespace sgm
