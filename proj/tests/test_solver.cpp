#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "sgm/solver.hpp"

using namespace sgm;

namespace {

const Exponents canonical{-0.4, -0.3, 0.5, 0.4};

class CanonicalInterval : public ::testing::Test {
protected:
  static void SetUpTestSuite() {
    grid_ = build_grid(Domain::interval(1.0), 201);
    op_ = new EllipticOperator(grid_);
    barriers_ = new BarrierSet(build_barriers(*op_, canonical, default_delta(*grid_)));
  }
  static void TearDownTestSuite() {
    delete barriers_;
    delete op_;
  }
  static SolveConfig config(Branch b, double eps = 0.0) {
    SolveConfig c;
    c.branch = b;
    c.eps = eps;
    return c;
  }

  static inline GridPtr grid_;
  static inline EllipticOperator* op_ = nullptr;
  static inline BarrierSet* barriers_ = nullptr;
};

Field sine(const GridPtr& g, double freq, double sign = 1.0) {
  return Field::from_function(g, [=](double x, double) { return sign * std::sin(freq * std::numbers::pi * x); });
}

}  // namespace

TEST_F(CanonicalInterval, StepAtFixedPointDoesNotMove) {
  auto constant = [&](const Field&, const Field&) { return std::pair{Field(grid_, 1.0), Field(grid_, 1.0)}; };
  Field w = op_->solve(Field(grid_, 1.0));
  StepResult s = picard_step(w, w, constant, *op_, 0.5);
  EXPECT_LE(s.update_sup, 1e-15);
  EXPECT_LE(s.residual_sup, 1e-15);
}

TEST_F(CanonicalInterval, UndampedStepWithConstantRhsConvergesAtOnce) {
  auto constant = [&](const Field&, const Field&) { return std::pair{Field(grid_, 2.0), Field(grid_, -1.0)}; };
  Field a = sine(grid_, 3.0), b = sine(grid_, 1.0, 5.0);
  StepResult s1 = picard_step(a, b, constant, *op_, 1.0);
  StepResult s2 = picard_step(s1.u, s1.v, constant, *op_, 1.0);
  EXPECT_LE(s2.update_sup, 1e-15);
  EXPECT_LE(sup_distance(s1.u, op_->solve(Field(grid_, 2.0))), 1e-15);
}

TEST_F(CanonicalInterval, ClippingKeepsIterateInBox) {
  const Box box = trapping_box(Branch::positive, *barriers_, 1.001);
  Field u(grid_, 100.0), v(grid_, 1e-9);
  SolveConfig cfg = config(Branch::positive);
  StepResult s = picard_step(u, v, cfg, *op_, canonical, &box);
  EXPECT_TRUE(box.contains(s.u, s.v));
}

TEST_F(CanonicalInterval, PositiveBranchStaysStrictlyInsideBox) {
  SolveResult r = solve_branch(config(Branch::positive), *op_, *barriers_, canonical);
  ASSERT_TRUE(r.converged()) << to_string(r.status);
  EXPECT_LE(r.residual_sup, 1e-10);
  EXPECT_EQ(r.sign.kind, SignClass::positive);
  const double C = barriers_->C;
  for (auto k : grid_->interior_ids()) {
    EXPECT_GT(r.u[k], barriers_->z1[k] / C);
    EXPECT_LT(r.u[k], C * barriers_->y1[k]);
    EXPECT_GT(r.v[k], barriers_->z2[k] / C);
    EXPECT_LT(r.v[k], C * barriers_->y2[k]);
  }
  EXPECT_LE(resolvent_residual(r.u, r.v, 0.0, *op_, canonical), 1e-8);
  EXPECT_LE(strong_residual(r.u, r.v, 0.0, *op_, canonical), 1e-8 * op_->norm_inf());
  EXPECT_NEAR(weak_form_residual(r.u, r.v, 0.0, *op_, canonical), strong_residual(r.u, r.v, 0.0, *op_, canonical),
              1e-9);
}

TEST_F(CanonicalInterval, UnclippedIterationReachesSameSolution) {
  SolveConfig c = config(Branch::positive);
  SolveResult clipped = solve_branch(c, *op_, *barriers_, canonical);
  c.clip_to_box = false;
  SolveResult free = solve_branch(c, *op_, *barriers_, canonical);
  ASSERT_TRUE(free.converged()) << to_string(free.status);
  EXPECT_LE(sup_distance(clipped.u, free.u), 1e-8);
}

TEST_F(CanonicalInterval, NegativeBranchMirrorsPositive) {
  SolveResult pos = solve_branch(config(Branch::positive), *op_, *barriers_, canonical);
  SolveResult neg = solve_branch(config(Branch::negative), *op_, *barriers_, canonical);
  ASSERT_TRUE(neg.converged());
  EXPECT_EQ(neg.sign.kind, SignClass::negative);
  EXPECT_LE(norm(pos.u + neg.u, NormKind::sup), 1e-8);
  EXPECT_LE(norm(pos.v + neg.v, NormKind::sup), 1e-8);
  EXPECT_LE(resolvent_residual(-pos.u, -pos.v, 0.0, *op_, canonical), 1e-10);
}

TEST_F(CanonicalInterval, NodalBranchChangesSignInsideItsBox) {
  SolveConfig c = config(Branch::nodal, 0.1);
  SolveResult r = solve_branch(c, *op_, *barriers_, canonical);
  ASSERT_TRUE(r.converged()) << to_string(r.status);
  EXPECT_EQ(r.sign.kind, SignClass::nodal);
  EXPECT_EQ(r.sign.synchronous_fraction, 1.0);
  const Box box = trapping_box(Branch::nodal, *barriers_, c.nodal_box_scale);
  EXPECT_TRUE(box.contains(r.u, r.v));
}

TEST_F(CanonicalInterval, NodalBranchNeedsRegularization) {
  EXPECT_THROW(solve_branch(config(Branch::nodal, 0.0), *op_, *barriers_, canonical), InvalidArgument);
  SolveConfig c = config(Branch::nodal, 0.1);
  c.nodal_box_scale = 1.0;
  EXPECT_THROW(solve_branch(c, *op_, *barriers_, canonical), InvalidArgument);
}

TEST_F(CanonicalInterval, IterationCapIsReported) {
  SolveConfig c = config(Branch::positive);
  c.max_iter = 3;
  SolveResult r = solve_branch(c, *op_, *barriers_, canonical);
  EXPECT_EQ(r.status, SolveStatus::iteration_cap);
  EXPECT_EQ(r.iterations, 3u);
  EXPECT_EQ(r.trace.size(), 4u);
}

TEST_F(CanonicalInterval, ContinuationBookkeeping) {
  ContinuationOptions opts;
  opts.record_cold_start = true;
  ContinuationTrace t =
      continuation(geometric_schedule(1, 5), config(Branch::nodal, 0.5), *op_, *barriers_, canonical, opts);
  ASSERT_TRUE(t.completed) << t.failure;
  ASSERT_EQ(t.results.size(), 5u);
  ASSERT_EQ(t.h1_diffs.size(), 4u);
  ASSERT_EQ(t.cold_iterations.size(), 5u);
  for (auto [du, dv] : t.h1_diffs) {
    EXPECT_TRUE(std::isfinite(du) && std::isfinite(dv));
  }
  for (std::size_t k = 1; k < 5; ++k) EXPECT_LE(t.results[k].iterations, t.cold_iterations[k]);
  const SolveResult& last = t.final_result();
  EXPECT_EQ(last.eps, 1.0 / 32.0);
  EXPECT_EQ(last.sign.synchronous_fraction, 1.0);
}

TEST_F(CanonicalInterval, ScheduleMustDecrease) {
  SolveConfig c = config(Branch::nodal, 0.5);
  EXPECT_THROW(continuation({0.5, 0.5}, c, *op_, *barriers_, canonical), InvalidArgument);
  EXPECT_THROW(continuation({}, c, *op_, *barriers_, canonical), InvalidArgument);
  EXPECT_THROW(geometric_schedule(3, 2), InvalidArgument);
}

TEST(Classify, ConstantSigns) {
  auto g = build_grid(Domain::interval(1.0), 21);
  EXPECT_EQ(classify(Field(g, 1.0), Field(g, 1.0), 1e-6).kind, SignClass::positive);
  EXPECT_EQ(classify(Field(g, -1.0), Field(g, -2.0), 1e-6).kind, SignClass::negative);
  EXPECT_EQ(classify(Field(g, 1.0), Field(g, -2.0), 1e-6).kind, SignClass::other);
}

TEST(Classify, SynchronousAndOppositeProfiles) {
  auto g = build_grid(Domain::interval(1.0), 201);
  SignSummary same = classify(sine(g, 2.0), sine(g, 2.0), 1e-6);
  EXPECT_EQ(same.kind, SignClass::nodal);
  EXPECT_EQ(same.synchronous_fraction, 1.0);
  SignSummary opposite = classify(sine(g, 2.0), sine(g, 2.0, -1.0), 1e-6);
  EXPECT_EQ(opposite.kind, SignClass::nodal);
  EXPECT_EQ(opposite.synchronous_fraction, 0.0);
  EXPECT_EQ(same.considered + same.near_zero, g->interior_ids().size());
}

TEST(Solver, PositiveBranchOnSquare) {
  auto g = build_grid(Domain::rectangle(1.0, 1.0), 41);
  EllipticOperator op(g);
  BarrierSet b = build_barriers(op, canonical, 2.0 * g->h_min());
  SolveConfig c;
  SolveResult r = solve_branch(c, op, b, canonical);
  ASSERT_TRUE(r.converged()) << to_string(r.status);
  EXPECT_EQ(r.sign.kind, SignClass::positive);
  EXPECT_LE(resolvent_residual(r.u, r.v, 0.0, op, canonical), 1e-8);
}

TEST(Solver, SquareWithWideLayerFailsCalibrationLoudly) {
  auto g = build_grid(Domain::rectangle(1.0, 1.0), 41);
  EllipticOperator op(g);
  try {
    build_barriers(op, canonical, default_delta(*g));
    FAIL() << "expected calibration failure";
  } catch (const BarrierError& ex) {
    EXPECT_FALSE(g->is_boundary(ex.node()));
    EXPECT_LT(ex.slack(), 0.0);
  }
}
