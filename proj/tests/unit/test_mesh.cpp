#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "hdgeuler/mesh.hpp"
#include "hdgeuler/quadrature.hpp"

using namespace hdgeuler;

TEST(Mesh, CountsNonPeriodic) {
  const Mesh m = Mesh::build_square(4, 1.0, false);
  EXPECT_EQ(m.num_cells(), 32);
  EXPECT_EQ(m.num_facets(), 56);
  EXPECT_EQ(m.num_boundary_facets(), 16);
}

TEST(Mesh, SingleSquare) {
  const Mesh m = Mesh::build_square(1, 1.0, false);
  EXPECT_EQ(m.num_cells(), 2);
  EXPECT_EQ(m.num_facets(), 5);
  EXPECT_EQ(m.num_interior_facets(), 1);
}

TEST(Mesh, CountsPeriodic) {
  const Mesh m = Mesh::build_square(4, 2.0 * std::numbers::pi, true);
  EXPECT_EQ(m.num_cells(), 32);
  EXPECT_EQ(m.num_facets(), 48);
  EXPECT_EQ(m.num_boundary_facets(), 0);
  for (const auto& c : m.cells()) {
    EXPECT_NE(c.facets[0], c.facets[1]);
    EXPECT_NE(c.facets[1], c.facets[2]);
  }
}

TEST(Mesh, RejectsBadInput) {
  EXPECT_THROW(Mesh::build_square(0, 1.0, false), std::invalid_argument);
  EXPECT_THROW(Mesh::build_square(2, 0.0, false), std::invalid_argument);
}

TEST(Mesh, GeometryInvariants) {
  for (bool periodic : {false, true}) {
    const Mesh m = Mesh::build_square(3, 2.0, periodic);
    double area = 0.0;
    for (const auto& c : m.cells()) {
      EXPECT_GT(c.det_jacobian, 0.0);
      area += c.area;
    }
    EXPECT_NEAR(area, 4.0, 1e-13);
    EXPECT_NEAR(m.h(), std::sqrt(2.0) * 2.0 / 3.0, 1e-15);
    for (int f = 0; f < m.num_facets(); ++f) {
      const Facet& fc = m.facet(f);
      EXPECT_NEAR(fc.normal.norm(), 1.0, 1e-14);
      const double leg = 2.0 / 3.0;
      EXPECT_TRUE(std::abs(fc.length - leg) < 1e-14 || std::abs(fc.length - leg * std::sqrt(2.0)) < 1e-14);
      EXPECT_EQ(m.cell(fc.plus.cell).facets[static_cast<std::size_t>(fc.plus.local_edge)], f);
      if (fc.minus) {
        const Vec2 nm = m.cell(fc.minus->cell).normal(fc.minus->local_edge);
        EXPECT_NEAR((nm + fc.normal).norm(), 0.0, 1e-15);
        // the minus side, read reversed, traverses the same physical segment
        const Cell& cm = m.cell(fc.minus->cell);
        for (double s : {0.0, 0.3, 1.0}) {
          Vec2 xm = cm.map(side_reference_point(*fc.minus, s));
          Vec2 xp = m.cell(fc.plus.cell).map(side_reference_point(fc.plus, s));
          if (periodic) {
            Vec2 d = xm - xp;
            for (int a = 0; a < 2; ++a) d[a] -= 2.0 * std::round(d[a] / 2.0);
            EXPECT_NEAR(d.norm(), 0.0, 1e-14);
          } else {
            EXPECT_NEAR((xm - xp).norm(), 0.0, 1e-14);
          }
        }
      }
    }
  }
}

TEST(Mesh, Locate) {
  const Mesh m = Mesh::build_square(5, 1.0, false);
  for (const Vec2& x : {Vec2(0.13, 0.77), Vec2(0.99, 0.01), Vec2(0.5, 0.5)}) {
    const auto [c, xi] = m.locate(x);
    EXPECT_GE(xi.x(), -1e-12);
    EXPECT_GE(xi.y(), -1e-12);
    EXPECT_LE(xi.x() + xi.y(), 1.0 + 1e-12);
    EXPECT_NEAR((m.cell(c).map(xi) - x).norm(), 0.0, 1e-14);
  }
}

TEST(Quadrature, FacetRules) {
  const Mesh m = Mesh::build_square(1, 1.0, false);
  // facet 0 is the bottom edge (0,0)-(1,0)
  const Facet& f = m.facet(0);
  ASSERT_NEAR(f.start.y(), 0.0, 0.0);
  ASSERT_NEAR(f.end.y(), 0.0, 0.0);
  const auto r1 = facet_quadrature(m, 0, 1);
  ASSERT_EQ(r1.points.size(), 1u);
  EXPECT_NEAR(r1.weights[0], 1.0, 1e-15);
  EXPECT_NEAR(r1.points[0].x(), 0.5, 1e-15);
  const auto r3 = facet_quadrature(m, 0, 3);
  ASSERT_EQ(r3.points.size(), 2u);
  EXPECT_NEAR(r3.weights[0], 0.5, 1e-15);
  EXPECT_NEAR(r3.weights[1], 0.5, 1e-15);
  const auto r2 = facet_quadrature(m, 0, 2);
  double s = 0.0;
  for (std::size_t q = 0; q < r2.points.size(); ++q) s += r2.weights[q] * r2.points[q].x() * r2.points[q].x();
  EXPECT_NEAR(s, 1.0 / 3.0, 1e-15);
}

TEST(Quadrature, TriangleMonomials) {
  // int_T x^a y^b = a! b! / (a+b+2)!
  auto fact = [](int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
  };
  for (int deg = 1; deg <= 14; ++deg) {
    const TriangleRule rule = triangle_rule(deg);
    for (int a = 0; a <= deg; ++a) {
      for (int b = 0; a + b <= deg; ++b) {
        double s = 0.0;
        for (std::size_t q = 0; q < rule.points.size(); ++q)
          s += rule.weights[q] * std::pow(rule.points[q].x(), a) * std::pow(rule.points[q].y(), b);
        const double exact = fact(a) * fact(b) / fact(a + b + 2);
        EXPECT_NEAR(s, exact, 1e-13 * exact) << deg << " " << a << " " << b;
      }
    }
  }
  const TriangleRule r1 = triangle_rule(1);
  ASSERT_EQ(r1.points.size(), 1u);
  EXPECT_NEAR(r1.weights[0], 0.5, 1e-16);
}

TEST(Quadrature, LineMonomials) {
  for (int deg = 1; deg <= 20; ++deg) {
    const LineRule rule = line_rule(deg);
    for (int a = 0; a <= deg; ++a) {
      double s = 0.0;
      for (std::size_t q = 0; q < rule.points.size(); ++q) s += rule.weights[q] * std::pow(rule.points[q], a);
      EXPECT_NEAR(s, 1.0 / (a + 1), 1e-13) << deg << " " << a;
    }
  }
}

TEST(Quadrature, CellRuleWeightsSumToArea) {
  const Mesh m = Mesh::build_square(3, 2.0, false);
  for (int c = 0; c < m.num_cells(); ++c) {
    const auto r = cell_quadrature(m, c, 5);
    double w = 0.0;
    for (double x : r.weights) w += x;
    EXPECT_NEAR(w, m.cell(c).area, 1e-14);
  }
  const auto r = cell_quadrature(m, 0, 1);
  EXPECT_NEAR(r.weights[0], m.cell(0).area, 1e-15);
}
