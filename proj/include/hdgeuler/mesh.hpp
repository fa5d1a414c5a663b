#pragma once

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace hdgeuler {

using Vec2 = Eigen::Vector2d;

/// Reference triangle has vertices (0,0), (1,0), (0,1). Local edge e is the
/// edge opposite vertex e, traversed from vertex (e+1)%3 to (e+2)%3, so that
/// traversal is counter-clockwise and the outward normal is the traversal
/// direction rotated clockwise.
struct Cell {
  std::array<int, 3> vertices{};  // topological ids (periodic images identified)
  std::array<Vec2, 3> coords{};   // physical coordinates, unwrapped
  std::array<int, 3> facets{};    // facet id of local edge e
  Eigen::Matrix2d jacobian;       // columns: coords[1]-coords[0], coords[2]-coords[0]
  Eigen::Matrix2d inv_jacobian_t; // J^{-T}, maps reference gradients to physical
  double det_jacobian = 0.0;
  double area = 0.0;

  [[nodiscard]] Vec2 map(const Vec2& xi) const { return coords[0] + jacobian * xi; }
  [[nodiscard]] Vec2 pull_back(const Vec2& x) const;
  /// Outward unit normal of local edge e.
  [[nodiscard]] Vec2 normal(int e) const;
};

/// One side of a facet: which cell, which local edge, and whether the cell's
/// own edge traversal runs against the facet parametrisation.
struct FacetSide {
  int cell = -1;
  int local_edge = -1;
  bool reversed = false;
};

/// Facets are parametrised by s in [0,1] along the plus cell's traversal
/// direction; `start`/`end` are the plus cell's physical endpoints.
struct Facet {
  std::array<int, 2> vertices{};
  Vec2 start;
  Vec2 end;
  Vec2 normal;  // unit normal pointing out of the plus cell
  double length = 0.0;
  FacetSide plus;
  std::optional<FacetSide> minus;

  [[nodiscard]] bool is_boundary() const { return !minus.has_value(); }
  [[nodiscard]] Vec2 point(double s) const { return start + s * (end - start); }
};

/// Reference coordinates of the point with cell-edge parameter t on local edge e.
Vec2 reference_edge_point(int local_edge, double t);

/// Reference coordinates of facet parameter s as seen from one of its sides.
inline Vec2 side_reference_point(const FacetSide& side, double s) {
  return reference_edge_point(side.local_edge, side.reversed ? 1.0 - s : s);
}

class Mesh {
 public:
  /// Structured triangulation of [0,L]^2: n x n squares, each split along the
  /// lower-left to upper-right diagonal. Periodic meshes identify both pairs of
  /// opposite edges.
  static Mesh build_square(int n, double length, bool periodic);

  [[nodiscard]] int grid_size() const { return n_; }
  [[nodiscard]] double domain_length() const { return length_; }
  [[nodiscard]] bool periodic() const { return periodic_; }
  /// Largest cell diameter, sqrt(2) L / n.
  [[nodiscard]] double h() const;

  [[nodiscard]] int num_cells() const { return static_cast<int>(cells_.size()); }
  [[nodiscard]] int num_facets() const { return static_cast<int>(facets_.size()); }
  [[nodiscard]] int num_vertices() const { return num_vertices_; }
  [[nodiscard]] int num_boundary_facets() const;
  [[nodiscard]] int num_interior_facets() const { return num_facets() - num_boundary_facets(); }

  [[nodiscard]] const Cell& cell(int c) const { return cells_[static_cast<std::size_t>(c)]; }
  [[nodiscard]] const Facet& facet(int f) const { return facets_[static_cast<std::size_t>(f)]; }
  [[nodiscard]] const std::vector<Cell>& cells() const { return cells_; }
  [[nodiscard]] const std::vector<Facet>& facets() const { return facets_; }

  /// Side of facet f belonging to cell c.
  [[nodiscard]] const FacetSide& side_of(int f, int c) const;

  /// Cell containing the physical point (unwrapped into the domain for periodic
  /// meshes), together with the point's reference coordinates.
  [[nodiscard]] std::pair<int, Vec2> locate(const Vec2& x) const;

 private:
  int n_ = 0;
  double length_ = 0.0;
  bool periodic_ = false;
  int num_vertices_ = 0;
  std::vector<Cell> cells_;
  std::vector<Facet> facets_;
};

}  // namespace hdgeuler
