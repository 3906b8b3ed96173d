#pragma once

// Pass/fail checks over computed solutions: barrier bounds, residuals, mirror
// symmetry, multi-start uniqueness, synchronous signs, eps-convergence and
// distinctness of the three solutions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sgm/barriers.hpp"
#include "sgm/grid.hpp"
#include "sgm/nonlinearity.hpp"
#include "sgm/operator.hpp"
#include "sgm/solver.hpp"

namespace sgm {

enum class CheckStatus { pass, fail, inconclusive, skipped };

inline const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::inconclusive: return "inconclusive";
    case CheckStatus::skipped: return "skipped";
  }
  return "?";
}

struct CheckRecord {
  static constexpr std::size_t no_node = static_cast<std::size_t>(-1);

  std::string name;
  std::string claim;  // the property being checked, in words
  CheckStatus status = CheckStatus::fail;
  std::size_t worst_node = no_node;
  double slack = 0.0;      // signed margin at the worst node; >= 0 (or > 0) means satisfied
  double tolerance = 0.0;
  std::string detail;
  std::vector<std::pair<std::string, double>> metrics;

  bool ok() const noexcept { return status == CheckStatus::pass || status == CheckStatus::skipped; }
};

struct VerificationReport {
  std::vector<CheckRecord> checks;

  /// True when no check failed or was inconclusive. Skipped checks (hypothesis
  /// not met) do not count against the report.
  bool overall_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.ok(); });
  }

  const CheckRecord* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

inline CheckStatus status_of(bool ok) { return ok ? CheckStatus::pass : CheckStatus::fail; }

/// Positive/negative: strict z_i/C < |u| < C y_i on every interior node.
/// Nodal: |u| <= z1/scale, |v| <= z2/scale (non-strict).
inline CheckRecord check_bounds(const Field& u, const Field& v, Branch branch, const BarrierSet& b,
                                double nodal_scale) {
  CheckRecord rec;
  rec.name = std::string("bounds_") + to_string(branch);
  const Box box = trapping_box(branch, b, nodal_scale);
  const bool strict = branch != Branch::nodal;
  rec.claim = strict ? "solution strictly inside [z_i/C, C y_i] (mirrored for negative) at interior nodes"
                     : "nodal solution inside [-z_i/C', z_i/C'] at every node";
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k : u.grid().interior_ids()) {
    const double s = std::min({u[k] - box.lower_u[k], box.upper_u[k] - u[k], v[k] - box.lower_v[k],
                               box.upper_v[k] - v[k]});
    if (s < worst) {
      worst = s;
      rec.worst_node = k;
    }
  }
  rec.slack = worst;
  rec.status = status_of(strict ? worst > 0.0 : worst >= 0.0);
  rec.metrics.push_back({"C", branch == Branch::nodal ? nodal_scale : b.C});
  return rec;
}

/// Smallest box scale C' for which |u| <= z1/C' and |v| <= z2/C' (reported for nodal results).
inline double largest_nodal_scale(const Field& u, const Field& v, const BarrierSet& b) {
  double ratio = 0.0;
  for (std::size_t k : u.grid().interior_ids())
    ratio = std::max({ratio, std::abs(u[k]) / b.z1[k], std::abs(v[k]) / b.z2[k]});
  return ratio > 0.0 ? 1.0 / ratio : std::numeric_limits<double>::infinity();
}

/// Converged residuals in three forms: resolvent sup, strong form sup and the
/// hat-function weak form. The strong and weak forms are bounded by
/// tol * ||A||_inf (the resolvent form bound mapped through the operator).
inline CheckRecord check_residual(const SolveResult& r, const EllipticOperator& op, const Exponents& e,
                                  double tol) {
  CheckRecord rec;
  rec.name = std::string("residual_") + to_string(r.branch);
  rec.claim = "fixed point of (u,v) -> S F(u,v) in resolvent, strong and weak form";
  rec.tolerance = tol;
  const double res = resolvent_residual(r.u, r.v, r.eps, op, e);
  const double strong = strong_residual(r.u, r.v, r.eps, op, e);
  const double weak = weak_form_residual(r.u, r.v, r.eps, op, e);
  const double bound = tol * op.norm_inf();
  rec.slack = tol - res;
  rec.status = status_of(r.converged() && res <= tol && strong <= bound && weak <= bound);
  rec.metrics = {{"resolvent", res}, {"strong", strong}, {"weak", weak}, {"strong_bound", bound},
                 {"eps", r.eps}, {"iterations", static_cast<double>(r.iterations)}};
  if (!r.converged()) rec.detail = std::string("solve status ") + to_string(r.status);
  return rec;
}

/// One unclipped step from a converged solution stays in the trapping box.
inline CheckRecord check_box_preservation(const SolveResult& r, const EllipticOperator& op, const BarrierSet& b,
                                          const Exponents& e, double nodal_scale) {
  CheckRecord rec;
  rec.name = std::string("box_preservation_") + to_string(r.branch);
  rec.claim = "one unclipped fixed-point step keeps the solution in its box";
  SolveConfig cfg;
  cfg.eps = r.eps;
  StepResult step = picard_step(r.u, r.v, cfg, op, e);
  const Box box = trapping_box(r.branch, b, nodal_scale);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k : op.grid().interior_ids()) {
    const double s = std::min({step.u[k] - box.lower_u[k], box.upper_u[k] - step.u[k],
                               step.v[k] - box.lower_v[k], box.upper_v[k] - step.v[k]});
    if (s < worst) {
      worst = s;
      rec.worst_node = k;
    }
  }
  rec.slack = worst;
  rec.status = status_of(worst >= 0.0);
  return rec;
}

/// Negative-branch result equals the negated positive one.
inline CheckRecord check_mirror(const SolveResult& pos, const SolveResult& neg, double tol = 1e-7) {
  CheckRecord rec;
  rec.name = "mirror";
  rec.claim = "negative solution is the mirror image of the positive one";
  rec.tolerance = tol;
  const double du = norm(pos.u + neg.u, NormKind::sup);
  const double dv = norm(pos.v + neg.v, NormKind::sup);
  rec.slack = tol - std::max(du, dv);
  rec.metrics = {{"sup|u- + u+|", du}, {"sup|v- + v+|", dv}};
  rec.status = status_of(pos.converged() && neg.converged() && du <= tol && dv <= tol);
  return rec;
}

/// Uniform double in [0,1) from a 64-bit engine, identical on every platform.
inline double unit_uniform(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Random seed inside the positive box, log-uniform per node between the bounds.
inline std::pair<Field, Field> random_box_seed(const Box& box, const Grid& g, std::mt19937_64& gen) {
  Field u(box.lower_u.grid_ptr()), v(box.lower_u.grid_ptr());
  for (std::size_t k : g.interior_ids()) {
    const double tu = unit_uniform(gen);
    const double tv = unit_uniform(gen);
    u[k] = std::exp((1.0 - tu) * std::log(box.lower_u[k]) + tu * std::log(box.upper_u[k]));
    v[k] = std::exp((1.0 - tv) * std::log(box.lower_v[k]) + tv * std::log(box.upper_v[k]));
  }
  return {std::move(u), std::move(v)};
}

struct UniquenessOptions {
  std::size_t n_starts = 10;
  std::uint64_t seed = 42;
  double agreement_tol = 1e-6;
};

/// Multi-start agreement on a constant-sign branch. Only meaningful when both
/// alpha_i <= 0; otherwise the check is skipped.
inline CheckRecord check_uniqueness(Branch branch, const SolveConfig& base, const EllipticOperator& op,
                                    const BarrierSet& b, const Exponents& e, const UniquenessOptions& opts = {}) {
  CheckRecord rec;
  rec.name = std::string("uniqueness_") + to_string(branch);
  rec.claim = "randomized starts in the box converge to one constant-sign solution";
  rec.tolerance = opts.agreement_tol;
  if (branch == Branch::nodal) throw InvalidArgument("uniqueness is checked on constant-sign branches only");
  if (!e.alpha_nonpositive()) {
    rec.status = CheckStatus::skipped;
    rec.detail = "hypothesis not met: some alpha_i > 0";
    return rec;
  }
  // Seeds are drawn in the positive box and negated for the negative branch.
  std::mt19937_64 gen(opts.seed);
  const Box pos_box = trapping_box(Branch::positive, b, base.nodal_box_scale);
  std::vector<SolveResult> runs;
  for (std::size_t s = 0; s < opts.n_starts; ++s) {
    auto [u, v] = random_box_seed(pos_box, op.grid(), gen);
    SolveConfig cfg = base;
    cfg.branch = branch;
    cfg.seed = SeedKind::explicit_fields;
    cfg.seed_u = branch == Branch::negative ? -u : u;
    cfg.seed_v = branch == Branch::negative ? -v : v;
    runs.push_back(solve_branch(cfg, op, b, e));
  }
  double worst = 0.0;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (!runs[i].converged()) ++failed;
    for (std::size_t j = i + 1; j < runs.size(); ++j)
      worst = std::max({worst, sup_distance(runs[i].u, runs[j].u), sup_distance(runs[i].v, runs[j].v)});
  }
  rec.slack = opts.agreement_tol - worst;
  rec.metrics = {{"starts", static_cast<double>(runs.size())},
                 {"nonconverged", static_cast<double>(failed)},
                 {"max_pairwise_sup", worst}};
  if (failed > 0) {
    rec.status = CheckStatus::inconclusive;
    rec.detail = std::to_string(failed) + " start(s) did not converge";
  } else {
    rec.status = status_of(worst <= opts.agreement_tol);
  }
  return rec;
}

/// u v > 0 wherever min(|u|,|v|) > tol_sign, and both components change sign.
inline CheckRecord check_synchronous_sign(const Field& u, const Field& v, double tol_sign) {
  CheckRecord rec;
  rec.name = "synchronous_sign";
  rec.claim = "u v > 0 away from an explicit near-zero set; both components change sign";
  rec.tolerance = tol_sign;
  const SignSummary s = classify(u, v, tol_sign);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k : u.grid().interior_ids()) {
    if (std::min(std::abs(u[k]), std::abs(v[k])) <= tol_sign) continue;
    if (u[k] * v[k] < worst) {
      worst = u[k] * v[k];
      rec.worst_node = k;
    }
  }
  rec.slack = worst;
  rec.metrics = {{"synchronous_fraction", s.synchronous_fraction},
                 {"considered_nodes", static_cast<double>(s.considered)},
                 {"near_zero_nodes", static_cast<double>(s.near_zero)}};
  const bool both_change = s.kind == SignClass::nodal;
  rec.status = status_of(both_change && s.considered > 0 && s.synchronous_fraction == 1.0);
  if (!both_change) rec.detail = std::string("classification ") + to_string(s.kind);
  return rec;
}

/// The near-zero set excluded by check_synchronous_sign is at most `max_fraction` of the interior.
inline CheckRecord check_near_zero_set(const Field& u, const Field& v, double tol_sign, double max_fraction = 0.02) {
  CheckRecord rec;
  rec.name = "near_zero_set";
  rec.claim = "nodes with min(|u|,|v|) <= tol_sign form a small set";
  rec.tolerance = max_fraction;
  const SignSummary s = classify(u, v, tol_sign);
  const double frac = static_cast<double>(s.near_zero) / static_cast<double>(u.grid().interior_ids().size());
  rec.slack = max_fraction - frac;
  rec.metrics = {{"near_zero_fraction", frac}, {"near_zero_nodes", static_cast<double>(s.near_zero)}};
  rec.status = status_of(frac <= max_fraction);
  return rec;
}

/// Every continuation stage converged.
inline CheckRecord check_continuation_stages(const ContinuationTrace& trace) {
  CheckRecord rec;
  rec.name = "continuation_stages";
  rec.claim = "every eps stage of the continuation converged";
  std::size_t converged = 0;
  for (const auto& r : trace.results) converged += r.converged() ? 1 : 0;
  rec.metrics = {{"stages", static_cast<double>(trace.results.size())},
                 {"converged", static_cast<double>(converged)}};
  if (!trace.eps_schedule.empty()) rec.metrics.push_back({"final_eps", trace.eps_schedule.back()});
  rec.status = status_of(trace.completed && converged == trace.results.size() && !trace.results.empty());
  rec.detail = trace.failure;
  return rec;
}

/// H1 Cauchy differences eventually decrease (last three ratios < 1, a zero
/// difference counts as decreasing) and the final difference is below `final_tol`.
inline CheckRecord check_convergence(const ContinuationTrace& trace, double final_tol = 1e-6) {
  CheckRecord rec;
  rec.name = "eps_convergence";
  rec.claim = "H1 Cauchy differences of the eps-continuation decrease to below tolerance";
  rec.tolerance = final_tol;
  if (trace.results.size() < 4 || trace.h1_diffs.size() < 3) {
    rec.status = CheckStatus::fail;
    rec.detail = "need at least 4 stages";
    return rec;
  }
  const auto& d = trace.h1_diffs;
  const std::size_t ratios = std::min<std::size_t>(3, d.size() - 1);
  bool decreasing = true;
  double worst_ratio = 0.0;
  auto falls = [](double prev, double next) { return next == 0.0 || next < prev; };
  for (std::size_t k = d.size() - ratios; k < d.size(); ++k) {
    decreasing = decreasing && falls(d[k - 1].first, d[k].first) && falls(d[k - 1].second, d[k].second);
    if (d[k - 1].first > 0.0) worst_ratio = std::max(worst_ratio, d[k].first / d[k - 1].first);
    if (d[k - 1].second > 0.0) worst_ratio = std::max(worst_ratio, d[k].second / d[k - 1].second);
  }
  const double last = std::max(d.back().first, d.back().second);
  rec.slack = final_tol - last;
  rec.metrics = {{"final_h1_diff", last}, {"worst_tail_ratio", worst_ratio}};
  rec.status = status_of(decreasing && last < final_tol);
  if (!decreasing) rec.detail = "tail of H1 differences is not decreasing";
  return rec;
}

/// Pairwise sup distances among the three solutions exceed 0.1 * max(|u+|,|v+|).
inline CheckRecord check_distinctness(const SolveResult& pos, const SolveResult& neg, const SolveResult& nodal) {
  CheckRecord rec;
  rec.name = "distinctness";
  rec.claim = "positive, negative and nodal solutions are three different solutions";
  const double scale = std::max(norm(pos.u, NormKind::sup), norm(pos.v, NormKind::sup));
  const double threshold = 0.1 * scale;
  rec.tolerance = threshold;
  auto dist = [](const SolveResult& a, const SolveResult& b) {
    return std::min(sup_distance(a.u, b.u), sup_distance(a.v, b.v));
  };
  const double pn = dist(pos, neg);
  const double pz = dist(pos, nodal);
  const double nz = dist(neg, nodal);
  // nodal against -(positive), independently of the computed negative branch
  const double mz = std::min(norm(nodal.u + pos.u, NormKind::sup), norm(nodal.v + pos.v, NormKind::sup));
  const double worst = std::min({pn, pz, nz, mz});
  rec.slack = worst - threshold;
  rec.metrics = {{"pos_neg", pn}, {"pos_nodal", pz}, {"neg_nodal", nz}, {"minus_pos_nodal", mz},
                 {"threshold", threshold}};
  rec.status = status_of(worst > threshold);
  return rec;
}

/// Certificate for C re-checked at C and 2C.
inline CheckRecord check_calibration(const BarrierSet& b, const Exponents& e) {
  CheckRecord rec;
  rec.name = "calibration";
  rec.claim = "z_i/C is a subsolution and C y_i a supersolution over the box, at C and 2C";
  const Certificate at_c = b.certify(b.C, e);
  const Certificate at_2c = b.certify(2.0 * b.C, e);
  rec.worst_node = at_c.worst_node;
  rec.slack = std::min(at_c.worst_slack, at_2c.worst_slack);
  rec.metrics = {{"C", b.C}, {"slack_at_C", at_c.worst_slack}, {"slack_at_2C", at_2c.worst_slack}};
  rec.detail = at_c.worst_chain;
  rec.status = status_of(at_c.pass && at_2c.pass);
  return rec;
}

/// d/c <= z_i <= y_i <= c d at every interior node.
inline CheckRecord check_ordering(const BarrierSet& b) {
  CheckRecord rec;
  rec.name = "barrier_ordering";
  rec.claim = "d/c <= z_i <= y_i <= c d at every interior node";
  const Grid& g = b.y1.grid();
  auto d = g.distance();
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 2; ++i) {
    const Field& y = b.y(i);
    const Field& z = b.z(i);
    for (std::size_t k : g.interior_ids()) {
      const double s = std::min({z[k] - d[k] / b.c, y[k] - z[k], b.c * d[k] - y[k]});
      if (s < worst) {
        worst = s;
        rec.worst_node = k;
      }
    }
  }
  rec.slack = worst;
  rec.metrics = {{"c", b.c}};
  rec.status = status_of(worst >= 0.0);
  return rec;
}

inline std::string format_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

/// Fixed-width table, one row per check.
inline void print_report(std::ostream& os, const VerificationReport& rep) {
  char line[256];
  std::snprintf(line, sizeof line, "%-28s %-13s %12s %10s\n", "check", "status", "slack", "node");
  os << line;
  for (const auto& c : rep.checks) {
    const std::string node = c.worst_node == CheckRecord::no_node ? "-" : std::to_string(c.worst_node);
    std::snprintf(line, sizeof line, "%-28s %-13s %12s %10s\n", c.name.c_str(), to_string(c.status),
                  format_short(c.slack).c_str(), node.c_str());
    os << line;
  }
  os << (rep.overall_pass() ? "overall: pass\n" : "overall: FAIL\n");
}

}  // namespace sgm
