#pragma once

// Damped fixed-point iteration (u, v) -> (-Delta_h + I)^-1 F(u, v) on the
// positive, negative and nodal branches, and eps -> 0 continuation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sgm/barriers.hpp"
#include "sgm/error.hpp"
#include "sgm/grid.hpp"
#include "sgm/nonlinearity.hpp"
#include "sgm/operator.hpp"

namespace sgm {

enum class Branch { positive, negative, nodal };
enum class SeedKind { automatic, barrier_midpoint, mirrored, eigen2, explicit_fields };
enum class SignClass { positive, negative, nodal, other };

inline const char* to_string(Branch b) {
  switch (b) {
    case Branch::positive: return "positive";
    case Branch::negative: return "negative";
    case Branch::nodal: return "nodal";
  }
  return "?";
}

inline const char* to_string(SignClass c) {
  switch (c) {
    case SignClass::positive: return "positive";
    case SignClass::negative: return "negative";
    case SignClass::nodal: return "nodal";
    case SignClass::other: return "other";
  }
  return "?";
}

inline Branch parse_branch(const std::string& s) {
  if (s == "positive") return Branch::positive;
  if (s == "negative") return Branch::negative;
  if (s == "nodal") return Branch::nodal;
  throw InvalidArgument("unknown branch '" + s + "'");
}

struct SolveConfig {
  Branch branch = Branch::positive;
  double eps = 0.0;
  double omega = 0.5;
  double tol_update = 1e-10;
  double tol_residual = 1e-10;
  std::size_t max_iter = 5000;
  bool clip_to_box = true;
  SeedKind seed = SeedKind::automatic;
  Field seed_u, seed_v;  // used by SeedKind::explicit_fields

  // Box [-z_i/scale, z_i/scale] for the nodal branch.
  double nodal_box_scale = 1.001;
  double nodal_seed_amplitude = 0.1;
  // Restrict nodal iterates to fields odd under the domain reflection.
  bool odd_symmetry = true;

  void validate() const {
    if (!(omega > 0.0 && omega <= 1.0)) throw InvalidArgument("omega must lie in (0,1]");
    if (!(tol_update > 0.0) || !(tol_residual > 0.0)) throw InvalidArgument("tolerances must be positive");
    if (!(eps >= 0.0 && eps <= 1.0)) throw InvalidArgument("eps must lie in [0,1]");
    if (branch == Branch::nodal && !(eps > 0.0)) throw InvalidArgument("the nodal branch needs eps > 0");
    if (!(nodal_box_scale > 1.0)) throw InvalidArgument("nodal box scale must exceed 1");
    if (max_iter == 0) throw InvalidArgument("max_iter must be positive");
  }
};

/// Nodewise bounds lower <= u <= upper, lower <= v <= upper.
struct Box {
  Field lower_u, upper_u, lower_v, upper_v;

  bool contains(const Field& u, const Field& v) const {
    for (std::size_t k = 0; k < u.size(); ++k) {
      if (u[k] < lower_u[k] || u[k] > upper_u[k] || v[k] < lower_v[k] || v[k] > upper_v[k]) return false;
    }
    return true;
  }

  void clip(Field& u, Field& v) const {
    for (std::size_t k = 0; k < u.size(); ++k) {
      u[k] = std::clamp(u[k], lower_u[k], upper_u[k]);
      v[k] = std::clamp(v[k], lower_v[k], upper_v[k]);
    }
  }
};

inline Box trapping_box(Branch branch, const BarrierSet& b, double nodal_scale) {
  const double C = b.C;
  switch (branch) {
    case Branch::positive:
      return {(1.0 / C) * b.z1, C * b.y1, (1.0 / C) * b.z2, C * b.y2};
    case Branch::negative:
      return {-(C * b.y1), -((1.0 / C) * b.z1), -(C * b.y2), -((1.0 / C) * b.z2)};
    case Branch::nodal:
      return {-((1.0 / nodal_scale) * b.z1), (1.0 / nodal_scale) * b.z1, -((1.0 / nodal_scale) * b.z2),
              (1.0 / nodal_scale) * b.z2};
  }
  throw InvalidArgument("unknown branch");
}

/// Reflection axis for nodal seeding: the longer side (x on a tie).
inline int nodal_axis(const Grid& g) {
  if (g.dimension() == 1) return 0;
  return g.domain().extents[1] > g.domain().extents[0] ? 1 : 0;
}

struct SignSummary {
  SignClass kind = SignClass::other;
  double synchronous_fraction = 0.0;
  std::size_t considered = 0;  // interior nodes with min(|u|,|v|) > tol_sign
  std::size_t near_zero = 0;   // interior nodes excluded by the threshold
};

inline double default_tol_sign(const Field& u, const Field& v) {
  return 1e-6 * std::max(norm(u, NormKind::sup), norm(v, NormKind::sup));
}

inline SignSummary classify(const Field& u, const Field& v, double tol_sign) {
  u.check_same(v);
  const Grid& g = u.grid();
  bool all_pos = true, all_neg = true;
  bool u_pos = false, u_neg = false, v_pos = false, v_neg = false;
  SignSummary s;
  std::size_t sync = 0;
  for (std::size_t k : g.interior_ids()) {
    all_pos = all_pos && u[k] > tol_sign && v[k] > tol_sign;
    all_neg = all_neg && u[k] < -tol_sign && v[k] < -tol_sign;
    u_pos = u_pos || u[k] > tol_sign;
    u_neg = u_neg || u[k] < -tol_sign;
    v_pos = v_pos || v[k] > tol_sign;
    v_neg = v_neg || v[k] < -tol_sign;
    if (std::min(std::abs(u[k]), std::abs(v[k])) > tol_sign) {
      ++s.considered;
      if (u[k] * v[k] > 0.0) ++sync;
    } else {
      ++s.near_zero;
    }
  }
  if (all_pos) s.kind = SignClass::positive;
  else if (all_neg) s.kind = SignClass::negative;
  else if (u_pos && u_neg && v_pos && v_neg) s.kind = SignClass::nodal;
  s.synchronous_fraction = s.considered ? static_cast<double>(sync) / static_cast<double>(s.considered) : 0.0;
  return s;
}

struct StepResult {
  Field u, v;
  double update_sup = 0.0;    // sup |u' - u|, |v' - v|
  double residual_sup = 0.0;  // sup |u - S F1(u,v)|, |v - S F2(u,v)| at the input
};

/// One damped step u' = (1-omega) u + omega S F1(u,v), likewise for v, then the
/// optional odd projection and box clipping. `rhs(u, v)` returns (F1, F2).
template <class Rhs>
StepResult picard_step(const Field& u, const Field& v, Rhs&& rhs, const EllipticOperator& op, double omega,
                       const Box* box = nullptr, std::optional<int> odd_axis = std::nullopt) {
  auto [f1, f2] = rhs(u, v);
  Field w1 = op.solve(f1);
  Field w2 = op.solve(f2);
  StepResult out;
  out.residual_sup = std::max(sup_distance(w1, u), sup_distance(w2, v));
  out.u = (1.0 - omega) * u + omega * w1;
  out.v = (1.0 - omega) * v + omega * w2;
  if (odd_axis) {
    out.u = odd_part(out.u, *odd_axis);
    out.v = odd_part(out.v, *odd_axis);
  }
  if (box) box->clip(out.u, out.v);
  out.update_sup = std::max(sup_distance(out.u, u), sup_distance(out.v, v));
  return out;
}

inline StepResult picard_step(const Field& u, const Field& v, const SolveConfig& cfg, const EllipticOperator& op,
                              const Exponents& e, const Box* box = nullptr,
                              std::optional<int> odd_axis = std::nullopt) {
  auto rhs = [&](const Field& a, const Field& b) { return eval_F_eps(a, b, cfg.eps, e); };
  return picard_step(u, v, rhs, op, cfg.omega, box, odd_axis);
}

/// sup over the interior of |u - S F1|, |v - S F2|.
inline double resolvent_residual(const Field& u, const Field& v, double eps, const EllipticOperator& op,
                                 const Exponents& e) {
  auto [f1, f2] = eval_F_eps(u, v, eps, e);
  return std::max(sup_distance(op.solve(f1), u), sup_distance(op.solve(f2), v));
}

/// sup over the interior of |(-Delta_h + I)u - F1|, |(-Delta_h + I)v - F2|.
inline double strong_residual(const Field& u, const Field& v, double eps, const EllipticOperator& op,
                              const Exponents& e) {
  auto [f1, f2] = eval_F_eps(u, v, eps, e);
  return std::max(sup_distance(op.apply(u), f1), sup_distance(op.apply(v), f2));
}

/// Weak-form residual against every interior hat function,
///   a(u, phi_k) - (F1, phi_k)  with  a(u, phi) = sum over edges (|cell|/h^2) du dphi + sum |cell| u phi,
/// assembled edge by edge with lumped mass. Returns the sup over k and both
/// components, divided by the cell volume so it is comparable with the strong residual.
inline double weak_form_residual(const Field& u, const Field& v, double eps, const EllipticOperator& op,
                                 const Exponents& e) {
  const Grid& g = op.grid();
  auto [f1, f2] = eval_F_eps(u, v, eps, e);
  const double vol = g.cell_volume();
  auto assemble_component = [&](const Field& w, const Field& f) {
    std::vector<double> r(g.size(), 0.0);
    auto value = [&](std::size_t k) { return g.is_boundary(k) ? 0.0 : w[k]; };
    auto edge = [&](std::size_t p, std::size_t q, double h) {
      const double flux = vol / (h * h) * (value(p) - value(q));
      r[p] += flux;
      r[q] -= flux;
    };
    for (std::size_t j = 0; j < g.ny(); ++j)
      for (std::size_t i = 0; i + 1 < g.nx(); ++i) edge(g.index(i, j), g.index(i + 1, j), g.h(0));
    if (g.dimension() == 2)
      for (std::size_t j = 0; j + 1 < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) edge(g.index(i, j), g.index(i, j + 1), g.h(1));
    double worst = 0.0;
    for (std::size_t k : g.interior_ids()) {
      const double res = r[k] + vol * w[k] - vol * f[k];
      worst = std::max(worst, std::abs(res) / vol);
    }
    return worst;
  };
  return std::max(assemble_component(u, f1), assemble_component(v, f2));
}

struct IterationRecord {
  double update_sup = 0.0;
  double residual_sup = 0.0;
};

enum class SolveStatus { converged, iteration_cap, box_violation };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::iteration_cap: return "iteration_cap";
    case SolveStatus::box_violation: return "box_violation";
  }
  return "?";
}

struct SolveResult {
  Branch branch = Branch::positive;
  double eps = 0.0;
  Field u, v;
  double residual_sup = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  SolveStatus status = SolveStatus::iteration_cap;
  SignSummary sign;
  std::vector<IterationRecord> trace;

  bool converged() const noexcept { return status == SolveStatus::converged; }
};

/// Seeds: positive -> sqrt(lower * upper) of the box; negative -> the negated
/// positive seed; nodal -> amplitude times the odd eigenvector, for both components.
inline std::pair<Field, Field> branch_seed(const SolveConfig& cfg, const EllipticOperator& op, const BarrierSet& b) {
  const GridPtr& gp = op.grid_ptr();
  SeedKind kind = cfg.seed;
  if (kind == SeedKind::automatic) {
    kind = cfg.branch == Branch::positive   ? SeedKind::barrier_midpoint
           : cfg.branch == Branch::negative ? SeedKind::mirrored
                                            : SeedKind::eigen2;
  }
  switch (kind) {
    case SeedKind::explicit_fields:
      if (cfg.seed_u.empty() || cfg.seed_v.empty()) throw InvalidArgument("explicit seed fields missing");
      return {cfg.seed_u, cfg.seed_v};
    case SeedKind::barrier_midpoint:
    case SeedKind::mirrored: {
      const Box pos = trapping_box(Branch::positive, b, cfg.nodal_box_scale);
      Field u(gp), v(gp);
      for (std::size_t k : op.grid().interior_ids()) {
        u[k] = std::sqrt(pos.lower_u[k] * pos.upper_u[k]);
        v[k] = std::sqrt(pos.lower_v[k] * pos.upper_v[k]);
      }
      if (kind == SeedKind::mirrored) return {-u, -v};
      return {std::move(u), std::move(v)};
    }
    case SeedKind::eigen2: {
      const EigenPair second = odd_eigenpair(op, nodal_axis(op.grid()));
      return {cfg.nodal_seed_amplitude * second.phi, cfg.nodal_seed_amplitude * second.phi};
    }
    case SeedKind::automatic:
      break;
  }
  throw InvalidArgument("unsupported seed");
}

/// Iterates picard_step until both the update and the resolvent residual fall
/// below tolerance, or the iteration cap is reached.
inline SolveResult solve_branch(const SolveConfig& cfg, const EllipticOperator& op, const BarrierSet& b,
                                const Exponents& e) {
  cfg.validate();
  const Box box = trapping_box(cfg.branch, b, cfg.nodal_box_scale);
  std::optional<int> axis;
  if (cfg.branch == Branch::nodal && cfg.odd_symmetry) axis = nodal_axis(op.grid());

  auto [u, v] = branch_seed(cfg, op, b);
  u.check_same(v);
  if (u.grid_ptr() != op.grid_ptr()) throw InvalidArgument("seed is not on the operator's grid");
  for (std::size_t k : op.grid().boundary_ids()) u[k] = v[k] = 0.0;
  if (axis) {
    u = odd_part(u, *axis);
    v = odd_part(v, *axis);
  }
  if (cfg.clip_to_box) box.clip(u, v);

  SolveResult res;
  res.branch = cfg.branch;
  res.eps = cfg.eps;
  double last_update = std::numeric_limits<double>::infinity();
  const Box* clip = cfg.clip_to_box ? &box : nullptr;
  for (std::size_t it = 0;; ++it) {
    StepResult step = picard_step(u, v, cfg, op, e, clip, axis);
    res.trace.push_back({last_update, step.residual_sup});
    if (step.residual_sup <= cfg.tol_residual && last_update <= cfg.tol_update) {
      res.residual_sup = step.residual_sup;
      res.iterations = it;
      res.status = SolveStatus::converged;
      break;
    }
    if (it >= cfg.max_iter) {
      res.residual_sup = step.residual_sup;
      res.iterations = it;
      res.status = SolveStatus::iteration_cap;
      break;
    }
    last_update = step.update_sup;
    u = std::move(step.u);
    v = std::move(step.v);
  }
  if (res.converged() && !cfg.clip_to_box && !box.contains(u, v)) res.status = SolveStatus::box_violation;
  res.sign = classify(u, v, default_tol_sign(u, v));
  res.u = std::move(u);
  res.v = std::move(v);
  return res;
}

/// eps_k = 2^-k for k = k_min..k_max.
inline std::vector<double> geometric_schedule(int k_min, int k_max) {
  if (k_min < 1 || k_max < k_min) throw InvalidArgument("schedule needs 1 <= k_min <= k_max");
  std::vector<double> s;
  for (int k = k_min; k <= k_max; ++k) s.push_back(std::ldexp(1.0, -k));
  return s;
}

struct ContinuationOptions {
  double early_stop = 1e-8;      // stop once both H1 Cauchy differences fall below this
  bool record_cold_start = false;  // also solve each stage from the cold seed
};

struct ContinuationTrace {
  std::vector<double> eps_schedule;           // stages actually run
  std::vector<SolveResult> results;           // one per stage
  std::vector<std::pair<double, double>> h1_diffs;  // ||u_{k+1}-u_k||_H1, ||v_{k+1}-v_k||_H1
  std::vector<std::size_t> cold_iterations;   // filled when record_cold_start
  bool completed = false;
  bool stopped_early = false;
  std::string failure;

  const SolveResult& final_result() const { return results.back(); }
};

/// Warm-started sequence of solves along a strictly decreasing eps schedule.
inline ContinuationTrace continuation(const std::vector<double>& schedule, const SolveConfig& base,
                                      const EllipticOperator& op, const BarrierSet& b, const Exponents& e,
                                      const ContinuationOptions& opts = {}) {
  if (schedule.empty()) throw InvalidArgument("empty eps schedule");
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (!(schedule[k] > 0.0 && schedule[k] < 1.0)) throw InvalidArgument("schedule entries must lie in (0,1)");
    if (k > 0 && !(schedule[k] < schedule[k - 1])) throw InvalidArgument("schedule must be strictly decreasing");
  }
  ContinuationTrace trace;
  SolveConfig cfg = base;
  for (double eps : schedule) {
    cfg.eps = eps;
    SolveResult r = solve_branch(cfg, op, b, e);
    if (opts.record_cold_start) {
      SolveConfig cold = base;
      cold.eps = eps;
      trace.cold_iterations.push_back(solve_branch(cold, op, b, e).iterations);
    }
    trace.eps_schedule.push_back(eps);
    const bool ok = r.converged();
    trace.results.push_back(std::move(r));
    if (!ok) {
      trace.failure = "stage eps=" + format_double(eps) + " ended with status " +
                      to_string(trace.results.back().status);
      return trace;
    }
    const SolveResult& cur = trace.results.back();
    if (trace.results.size() > 1) {
      const SolveResult& prev = trace.results[trace.results.size() - 2];
      trace.h1_diffs.emplace_back(norm(cur.u - prev.u, NormKind::h1), norm(cur.v - prev.v, NormKind::h1));
      const auto& d = trace.h1_diffs.back();
      if (d.first < opts.early_stop && d.second < opts.early_stop) {
        trace.stopped_early = true;
        break;
      }
    }
    cfg.seed = SeedKind::explicit_fields;
    cfg.seed_u = cur.u;
    cfg.seed_v = cur.v;
  }
  trace.completed = true;
  return trace;
}

}  // namespace sgm
