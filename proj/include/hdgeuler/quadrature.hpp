#pragma once

#include <vector>

#include "hdgeuler/mesh.hpp"

namespace hdgeuler {

/// Rule on the unit interval [0,1].
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
};

/// Rule on the reference triangle; weights sum to 1/2.
struct TriangleRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
};

/// Physical-space rule: points in physical coordinates, weights include the
/// measure of the cell or facet.
struct PhysicalRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with `npoints` points mapped to [0,1].
LineRule gauss_legendre(int npoints);

/// Gauss rule on [0,1] exact for polynomials up to `degree`.
LineRule line_rule(int degree);

/// Triangle rule exact up to `degree`: centroid rule for degree 1, the
/// three-point symmetric rule for degree 2, collapsed Gauss-Legendre beyond.
TriangleRule triangle_rule(int degree);

PhysicalRule cell_quadrature(const Mesh& mesh, int cell, int degree);
PhysicalRule facet_quadrature(const Mesh& mesh, int facet, int degree);

}  // namespace hdgeuler
