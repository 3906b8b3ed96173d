#pragma once

// Barrier functions y_i, z_i:
//   (-Delta + I) y_i = d^(a_i - b_i)                         in the domain,
//   (-Delta + I) z_i = d^(a_i - b_i) off the layer, -1 on it  (layer = {d < delta}),
// the ordering constant c with d/c <= z_i <= y_i <= c d, and a certified scale C
// for which z_i/C is a discrete subsolution and C y_i a discrete supersolution
// for every (u, v) in the box [z1/C, C y1] x [z2/C, C y2].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "sgm/error.hpp"
#include "sgm/grid.hpp"
#include "sgm/nonlinearity.hpp"
#include "sgm/operator.hpp"

namespace sgm {

inline double default_delta(const Grid& grid) { return 4.0 * grid.h_min(); }

/// d^(a_i - b_i) at interior nodes (d >= h there, so the power is finite).
inline Field barrier_rhs_y(const Grid& grid, GridPtr ptr, const Exponents& e, int i) {
  Field f(std::move(ptr));
  const double p = e.alpha(i) - e.beta(i);
  auto d = grid.distance();
  for (std::size_t k : grid.interior_ids()) f[k] = std::pow(d[k], p);
  return f;
}

inline Field barrier_rhs_z(const Grid& grid, GridPtr ptr, const Exponents& e, double delta, int i) {
  Field f = barrier_rhs_y(grid, ptr, e, i);
  const auto mask = boundary_layer_mask(grid, delta);
  for (std::size_t k : grid.interior_ids())
    if (mask[k]) f[k] = -1.0;
  return f;
}

inline Field solve_y(const EllipticOperator& op, const Exponents& e, int i) {
  return op.solve(barrier_rhs_y(op.grid(), op.grid_ptr(), e, i));
}

/// Throws BarrierError if z_i fails to be positive on the interior, which means
/// the layer is too wide for this grid.
inline Field solve_z(const EllipticOperator& op, const Exponents& e, double delta, int i) {
  Field z = op.solve(barrier_rhs_z(op.grid(), op.grid_ptr(), e, delta, i));
  for (std::size_t k : op.grid().interior_ids()) {
    if (!(z[k] > 0.0)) throw BarrierError("z" + std::to_string(i) + " is not positive; layer width too large", k, z[k]);
  }
  return z;
}

/// Smallest constant (up to a few ulps) with d/c <= z and y <= c d on the interior.
inline double estimate_c(const Field& y, const Field& z, const Field& d) {
  y.check_same(z);
  y.check_same(d);
  const Grid& g = y.grid();
  double c = 0.0;
  for (std::size_t k : g.interior_ids()) {
    if (!(z[k] > 0.0)) throw BarrierError("ordering constant needs z > 0", k, z[k]);
    c = std::max({c, y[k] / d[k], d[k] / z[k]});
  }
  c *= 1.0 + 8.0 * std::numeric_limits<double>::epsilon();
  return std::max(c, 1.0 + 1e-12);
}

/// Outcome of testing one candidate scale C against the four inequality chains.
struct Certificate {
  double C = 0.0;
  bool pass = false;
  std::size_t worst_node = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  std::string worst_chain;
  std::size_t nodes_checked = 0;
  std::size_t nodes_failed = 0;
  std::vector<char> node_pass;  // per grid node; boundary nodes are marked 1
};

/// Extremal values of |u|^a_i / |v|^b_i over the box, chosen per the sign of a_i:
/// the smallest uses u at its lower end when a_i >= 0 (upper end when a_i <= 0)
/// and v at its upper end; the largest is the opposite corner.
inline double box_lower_bound(double a, double b, double C, double z1, double y1, double y2) {
  const double u = a >= 0.0 ? z1 / C : C * y1;
  return std::pow(u, a) / std::pow(C * y2, b);
}

inline double box_upper_bound(double a, double b, double C, double z1, double y1, double z2) {
  const double u = a >= 0.0 ? C * y1 : z1 / C;
  return std::pow(u, a) / std::pow(z2 / C, b);
}

/// Checks, at every interior node and for i = 1, 2,
///   C^-1 (rhs of z_i) <= min over the box of |u|^a_i/|v|^b_i,
///   C    (rhs of y_i) >= max over the box of |u|^a_i/|v|^b_i.
/// The left sides equal (-Delta_h + I)(C^-1 z_i) and (-Delta_h + I)(C y_i).
/// Slack is relative to the bound; the certificate passes when all slacks are >= 0.
inline Certificate certify_C(double C, const Field& y1, const Field& y2, const Field& z1, const Field& z2,
                             const Field& rhs_y1, const Field& rhs_y2, const Field& rhs_z1, const Field& rhs_z2,
                             const Exponents& e) {
  const Grid& g = y1.grid();
  Certificate cert;
  cert.C = C;
  cert.node_pass.assign(g.size(), 1);
  const Field* rhs_y[2] = {&rhs_y1, &rhs_y2};
  const Field* rhs_z[2] = {&rhs_z1, &rhs_z2};
  auto note = [&](double slack, std::size_t k, const std::string& chain) {
    if (slack < cert.worst_slack) {
      cert.worst_slack = slack;
      cert.worst_node = k;
      cert.worst_chain = chain;
    }
  };
  for (std::size_t k : g.interior_ids()) {
    bool ok = true;
    for (int i = 1; i <= 2; ++i) {
      const double a = e.alpha(i), b = e.beta(i);
      const std::string tag = std::to_string(i) + (a >= 0.0 ? " (alpha>=0)" : " (alpha<0)");

      const double lo = box_lower_bound(a, b, C, z1[k], y1[k], y2[k]);
      const double sub = (*rhs_z[i - 1])[k] / C;
      const double lo_slack = (lo - sub) / lo;
      note(lo_slack, k, "subsolution " + tag);
      ok = ok && lo_slack >= 0.0;

      const double hi = box_upper_bound(a, b, C, z1[k], y1[k], z2[k]);
      const double super = C * (*rhs_y[i - 1])[k];
      const double hi_slack = (super - hi) / hi;
      note(hi_slack, k, "supersolution " + tag);
      ok = ok && hi_slack >= 0.0;
    }
    ++cert.nodes_checked;
    if (!ok) {
      cert.node_pass[k] = 0;
      ++cert.nodes_failed;
    }
  }
  cert.pass = cert.nodes_failed == 0;
  return cert;
}

struct BarrierSet {
  Field y1, y2, z1, z2;
  Field rhs_y1, rhs_y2, rhs_z1, rhs_z2;
  double c = 0.0;
  double C = 0.0;
  double delta = 0.0;
  Certificate certificate;

  const Field& y(int i) const { return i == 1 ? y1 : y2; }
  const Field& z(int i) const { return i == 1 ? z1 : z2; }

  Certificate certify(double scale, const Exponents& e) const {
    return certify_C(scale, y1, y2, z1, z2, rhs_y1, rhs_y2, rhs_z1, rhs_z2, e);
  }
};

/// Doubling search from C = 2 up to 2^30; returns the first passing certificate.
inline Certificate calibrate_C(const BarrierSet& b, const Exponents& e) {
  Certificate last;
  for (int p = 1; p <= 30; ++p) {
    last = b.certify(std::ldexp(1.0, p), e);
    if (last.pass) return last;
  }
  throw BarrierError("no certified box scale up to 2^30 (" + last.worst_chain + ")", last.worst_node,
                     last.worst_slack);
}

/// Solves for y_i, z_i, computes c, and calibrates C.
inline BarrierSet build_barriers(const EllipticOperator& op, const Exponents& e, double delta) {
  const Grid& g = op.grid();
  const GridPtr& gp = op.grid_ptr();
  BarrierSet b;
  b.delta = delta;
  b.rhs_y1 = barrier_rhs_y(g, gp, e, 1);
  b.rhs_y2 = barrier_rhs_y(g, gp, e, 2);
  b.rhs_z1 = barrier_rhs_z(g, gp, e, delta, 1);
  b.rhs_z2 = barrier_rhs_z(g, gp, e, delta, 2);
  b.y1 = op.solve(b.rhs_y1);
  b.y2 = op.solve(b.rhs_y2);
  b.z1 = solve_z(op, e, delta, 1);
  b.z2 = solve_z(op, e, delta, 2);
  const Field d = Field::distance(gp);
  b.c = std::max(estimate_c(b.y1, b.z1, d), estimate_c(b.y2, b.z2, d));
  b.certificate = calibrate_C(b, e);
  b.C = b.certificate.C;
  return b;
}

}  // namespace sgm
