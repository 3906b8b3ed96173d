#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sgm/barriers.hpp"

using namespace sgm;

namespace {

const Exponents canonical{-0.4, -0.3, 0.5, 0.4};
const Exponents positive_alpha{0.3, 0.2, 0.5, 0.6};

struct UnitInterval {
  GridPtr g = build_grid(Domain::interval(1.0), 201);
  EllipticOperator op{g};
};

void expect_ordering(const Field& y, const Field& z, double c) {
  auto d = y.grid().distance();
  for (auto k : y.grid().interior_ids()) {
    EXPECT_LE(d[k] / c, z[k]) << "node " << k;
    EXPECT_LE(z[k], y[k]) << "node " << k;
    EXPECT_LE(y[k], c * d[k]) << "node " << k;
  }
}

}  // namespace

TEST(Barriers, RhsAtFirstInteriorNode) {
  UnitInterval s;
  Exponents e{-0.4, -0.3, 0.5, 0.4};
  Field r = barrier_rhs_y(*s.g, s.g, e, 1);
  EXPECT_NEAR(r[1], std::pow(0.005, -0.9), 1e-9);
  EXPECT_NEAR(r[1], 117.7, 0.05);
  EXPECT_EQ(r[0], 0.0);
}

TEST(Barriers, LayerRhsIsMinusOne) {
  UnitInterval s;
  const double delta = default_delta(*s.g);
  Field r = barrier_rhs_z(*s.g, s.g, canonical, delta, 2);
  const auto mask = boundary_layer_mask(*s.g, delta);
  for (auto k : s.g->interior_ids()) {
    if (mask[k]) EXPECT_EQ(r[k], -1.0);
    else EXPECT_EQ(r[k], std::pow(s.g->distance()[k], -0.7));
  }
}

TEST(Barriers, YIsPositiveAndSymmetric) {
  UnitInterval s;
  for (int i : {1, 2}) {
    Field y = solve_y(s.op, canonical, i);
    for (auto k : s.g->interior_ids()) {
      EXPECT_GT(y[k], 0.0);
      EXPECT_NEAR(y[k], y[s.g->mirror(k, 0)], 1e-12);
    }
  }
}

TEST(Barriers, ZBelowYAndEqualWithoutLayer) {
  UnitInterval s;
  Field y = solve_y(s.op, canonical, 1);
  Field z = solve_z(s.op, canonical, default_delta(*s.g), 1);
  for (auto k : s.g->interior_ids()) EXPECT_LE(z[k], y[k]);
  Field z0 = solve_z(s.op, canonical, 0.5 * s.g->h(0), 1);
  for (std::size_t k = 0; k < s.g->size(); ++k) EXPECT_EQ(z0[k], y[k]);
}

TEST(Barriers, WideLayerFlagged) {
  auto g = build_grid(Domain::interval(1.0), 41);
  EllipticOperator op(g);
  EXPECT_THROW(solve_z(op, canonical, 0.45, 1), BarrierError);
}

TEST(OrderingConstant, IdentityCase) {
  auto g = build_grid(Domain::interval(1.0), 21);
  Field d = Field::distance(g);
  const double c = estimate_c(d, d, d);
  EXPECT_GE(c, 1.0);
  EXPECT_LT(c, 1.0 + 1e-9);
}

TEST(OrderingConstant, RecheckBothExponentSets) {
  UnitInterval s;
  const Field d = Field::distance(s.g);
  for (const Exponents& e : {canonical, positive_alpha}) {
    const double delta = default_delta(*s.g);
    for (int i : {1, 2}) {
      Field y = solve_y(s.op, e, i);
      Field z = solve_z(s.op, e, delta, i);
      const double c = estimate_c(y, z, d);
      EXPECT_GE(c, 1.0);
      expect_ordering(y, z, c);
    }
  }
}

TEST(OrderingConstant, RejectsNonpositiveZ) {
  auto g = build_grid(Domain::interval(1.0), 11);
  Field d = Field::distance(g);
  Field z = d;
  z[3] = 0.0;
  EXPECT_THROW(estimate_c(d, z, d), BarrierError);
}

TEST(Calibration, CanonicalIsCertifiedAndMonotone) {
  UnitInterval s;
  BarrierSet b = build_barriers(s.op, canonical, default_delta(*s.g));
  EXPECT_TRUE(b.certificate.pass);
  EXPECT_GE(b.C, 2.0);
  const double p = std::log2(b.C);
  EXPECT_EQ(p, std::round(p));
  EXPECT_EQ(b.certificate.nodes_checked, s.g->interior_ids().size());
  EXPECT_TRUE(b.certify(2.0 * b.C, canonical).pass);
  if (b.C > 2.0) {
    EXPECT_FALSE(b.certify(b.C / 2.0, canonical).pass);
  }
}

TEST(Calibration, ExtremalValuesBoundTheRhsOverTheBox) {
  UnitInterval s;
  BarrierSet b = build_barriers(s.op, canonical, default_delta(*s.g));
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (auto k : s.g->interior_ids()) {
    for (int trial = 0; trial < 8; ++trial) {
      const double u = b.z1[k] / b.C + U(gen) * (b.C * b.y1[k] - b.z1[k] / b.C);
      const double v = b.z2[k] / b.C + U(gen) * (b.C * b.y2[k] - b.z2[k] / b.C);
      auto [f1, f2] = eval_F_point(u, v, 0.0, canonical);
      const double fs[2] = {f1, f2};
      for (int i : {1, 2}) {
        const double lo = box_lower_bound(canonical.alpha(i), canonical.beta(i), b.C, b.z1[k], b.y1[k], b.y2[k]);
        const double hi = box_upper_bound(canonical.alpha(i), canonical.beta(i), b.C, b.z1[k], b.y1[k], b.z2[k]);
        EXPECT_LE(lo, fs[i - 1] * (1 + 1e-12));
        EXPECT_GE(hi, fs[i - 1] * (1 - 1e-12));
      }
    }
  }
}

TEST(Calibration, PositiveAlphaUsesItsOwnCorners) {
  const double C = 4.0, z1 = 0.2, y1 = 0.5, y2 = 0.6, z2 = 0.1;
  EXPECT_DOUBLE_EQ(box_lower_bound(0.3, 0.5, C, z1, y1, y2), std::pow(z1 / C, 0.3) / std::pow(C * y2, 0.5));
  EXPECT_DOUBLE_EQ(box_upper_bound(0.3, 0.5, C, z1, y1, z2), std::pow(C * y1, 0.3) / std::pow(z2 / C, 0.5));
  EXPECT_DOUBLE_EQ(box_lower_bound(-0.3, 0.5, C, z1, y1, y2), std::pow(C * y1, -0.3) / std::pow(C * y2, 0.5));
  EXPECT_DOUBLE_EQ(box_upper_bound(-0.3, 0.5, C, z1, y1, z2), std::pow(z1 / C, -0.3) / std::pow(z2 / C, 0.5));
}

TEST(Calibration, FailedCertificateNamesWorstNode) {
  UnitInterval s;
  BarrierSet b = build_barriers(s.op, canonical, default_delta(*s.g));
  Certificate c = b.certify(1.5, canonical);
  EXPECT_FALSE(c.pass);
  EXPECT_GT(c.nodes_failed, 0u);
  EXPECT_LT(c.worst_slack, 0.0);
  EXPECT_FALSE(s.g->is_boundary(c.worst_node));
  EXPECT_FALSE(c.worst_chain.empty());
}
