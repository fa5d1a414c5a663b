#include "hdgeuler/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hdgeuler {

LineRule gauss_legendre(int npoints) {
  if (npoints < 1) throw std::invalid_argument("gauss_legendre: need at least one point");
  LineRule rule;
  rule.points.resize(static_cast<std::size_t>(npoints));
  rule.weights.resize(static_cast<std::size_t>(npoints));
  const int n = npoints;
  for (int i = 0; i < n; ++i) {
    // Newton iteration on P_n starting from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      const double pn = n == 1 ? x : p1;
      const double pnm1 = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.points[static_cast<std::size_t>(n - 1 - i)] = 0.5 * (x + 1.0);
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = 0.5 * w;
  }
  return rule;
}

LineRule line_rule(int degree) {
  if (degree < 1) throw std::invalid_argument("line_rule: degree must be >= 1");
  return gauss_legendre((degree + 2) / 2);
}

TriangleRule triangle_rule(int degree) {
  if (degree < 1) throw std::invalid_argument("triangle_rule: degree must be >= 1");
  TriangleRule rule;
  if (degree == 1) {
    rule.points = {Vec2(1.0 / 3.0, 1.0 / 3.0)};
    rule.weights = {0.5};
    return rule;
  }
  if (degree == 2) {
    rule.points = {Vec2(1.0 / 6.0, 1.0 / 6.0), Vec2(2.0 / 3.0, 1.0 / 6.0), Vec2(1.0 / 6.0, 2.0 / 3.0)};
    rule.weights = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
    return rule;
  }
  // Duffy collapse of the unit square: (u, v) -> (u (1 - v), v), Jacobian (1 - v).
  const int m = (degree + 3) / 2;
  const LineRule g = gauss_legendre(m);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      const double u = g.points[static_cast<std::size_t>(a)];
      const double v = g.points[static_cast<std::size_t>(b)];
      rule.points.emplace_back(u * (1.0 - v), v);
      rule.weights.push_back(g.weights[static_cast<std::size_t>(a)] * g.weights[static_cast<std::size_t>(b)] * (1.0 - v));
    }
  }
  return rule;
}

PhysicalRule cell_quadrature(const Mesh& mesh, int cell, int degree) {
  const Cell& c = mesh.cell(cell);
  const TriangleRule ref = triangle_rule(degree);
  PhysicalRule rule;
  for (std::size_t q = 0; q < ref.points.size(); ++q) {
    rule.points.push_back(c.map(ref.points[q]));
    rule.weights.push_back(ref.weights[q] * c.det_jacobian);
  }
  return rule;
}

PhysicalRule facet_quadrature(const Mesh& mesh, int facet, int degree) {
  const Facet& f = mesh.facet(facet);
  const LineRule ref = line_rule(degree);
  PhysicalRule rule;
  for (std::size_t q = 0; q < ref.points.size(); ++q) {
    rule.points.push_back(f.point(ref.points[q]));
    rule.weights.push_back(ref.weights[q] * f.length);
  }
  return rule;
}

}  // namespace hdgeuler
