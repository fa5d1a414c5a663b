#pragma once

#include <vector>

#include <Eigen/Dense>

#include "hdgeuler/mesh.hpp"

namespace hdgeuler {

/// Where a Lagrange node sits on the reference triangle.
struct NodeLocation {
  enum class Kind { vertex, edge, interior } kind = Kind::interior;
  int entity = -1;     // vertex index or local edge index
  double edge_t = 0.0; // parameter along the local edge traversal (edge nodes)
};

/// Nodal Lagrange basis of P_m on the reference triangle, built on the
/// equispaced lattice {(i/m, j/m) : i + j <= m} (the centroid for m = 0).
class LagrangeTriangle {
 public:
  explicit LagrangeTriangle(int degree);

  [[nodiscard]] int degree() const { return degree_; }
  [[nodiscard]] int size() const { return static_cast<int>(nodes_.size()); }
  [[nodiscard]] const std::vector<Vec2>& nodes() const { return nodes_; }
  [[nodiscard]] const std::vector<NodeLocation>& locations() const { return locations_; }

  [[nodiscard]] Eigen::VectorXd values(const Vec2& xi) const;
  /// Reference gradients, one row per basis function.
  [[nodiscard]] Eigen::MatrixX2d gradients(const Vec2& xi) const;

  /// Number of nodes for a given degree.
  static int dimension(int degree) { return (degree + 1) * (degree + 2) / 2; }

 private:
  int degree_;
  std::vector<Vec2> nodes_;
  std::vector<NodeLocation> locations_;
  std::vector<std::pair<int, int>> exponents_;
  Eigen::MatrixXd coefficients_;  // monomial coefficients, one column per basis function
};

/// Nodal Lagrange basis of P_k on [0,1] with equispaced nodes (midpoint for k = 0).
class LagrangeInterval {
 public:
  explicit LagrangeInterval(int degree);

  [[nodiscard]] int degree() const { return degree_; }
  [[nodiscard]] int size() const { return degree_ + 1; }
  [[nodiscard]] const std::vector<double>& nodes() const { return nodes_; }
  [[nodiscard]] Eigen::VectorXd values(double s) const;

 private:
  int degree_;
  std::vector<double> nodes_;
  Eigen::MatrixXd coefficients_;
};

}  // namespace hdgeuler
