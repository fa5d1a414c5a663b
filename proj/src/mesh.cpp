#include "hdgeuler/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hdgeuler {

Vec2 Cell::pull_back(const Vec2& x) const { return jacobian.inverse() * (x - coords[0]); }

Vec2 Cell::normal(int e) const {
  const Vec2 t = coords[static_cast<std::size_t>((e + 2) % 3)] - coords[static_cast<std::size_t>((e + 1) % 3)];
  return Vec2(t.y(), -t.x()) / t.norm();
}

Vec2 reference_edge_point(int local_edge, double t) {
  static const std::array<Vec2, 3> ref{Vec2(0.0, 0.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0)};
  const Vec2& a = ref[static_cast<std::size_t>((local_edge + 1) % 3)];
  const Vec2& b = ref[static_cast<std::size_t>((local_edge + 2) % 3)];
  return a + t * (b - a);
}

double Mesh::h() const { return std::sqrt(2.0) * length_ / n_; }

int Mesh::num_boundary_facets() const {
  int count = 0;
  for (const auto& f : facets_) count += f.is_boundary() ? 1 : 0;
  return count;
}

const FacetSide& Mesh::side_of(int f, int c) const {
  const Facet& facet = facets_[static_cast<std::size_t>(f)];
  if (facet.plus.cell == c) return facet.plus;
  if (facet.minus && facet.minus->cell == c) return *facet.minus;
  throw std::logic_error("Mesh::side_of: cell does not touch facet");
}

Mesh Mesh::build_square(int n, double length, bool periodic) {
  if (n < 1) throw std::invalid_argument("build_square: n must be >= 1");
  if (!(length > 0.0)) throw std::invalid_argument("build_square: L must be > 0");

  Mesh mesh;
  mesh.n_ = n;
  mesh.length_ = length;
  mesh.periodic_ = periodic;

  const int nv = periodic ? n : n + 1;  // vertex (and vertical-edge) count per row
  mesh.num_vertices_ = nv * nv;
  const double dx = length / n;

  auto vertex_id = [&](int i, int j) {
    if (periodic) return (j % n) * n + (i % n);
    return j * (n + 1) + i;
  };
  const int num_h = n * nv;
  const int num_v = nv * n;
  auto h_id = [&](int i, int j) { return (periodic ? j % n : j) * n + i; };
  auto v_id = [&](int i, int j) { return num_h + j * nv + (periodic ? i % n : i); };
  auto d_id = [&](int i, int j) { return num_h + num_v + j * n + i; };

  mesh.facets_.resize(static_cast<std::size_t>(num_h + num_v + n * n));
  mesh.cells_.reserve(static_cast<std::size_t>(2 * n * n));

  auto make_cell = [&](std::array<std::array<int, 2>, 3> ij, std::array<int, 3> edges) {
    Cell c;
    for (std::size_t a = 0; a < 3; ++a) {
      c.vertices[a] = vertex_id(ij[a][0], ij[a][1]);
      c.coords[a] = Vec2(ij[a][0] * dx, ij[a][1] * dx);
    }
    c.facets = edges;
    c.jacobian.col(0) = c.coords[1] - c.coords[0];
    c.jacobian.col(1) = c.coords[2] - c.coords[0];
    c.det_jacobian = c.jacobian.determinant();
    c.inv_jacobian_t = c.jacobian.inverse().transpose();
    c.area = 0.5 * c.det_jacobian;
    return c;
  };

  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      // lower-right triangle (v00, v10, v11)
      mesh.cells_.push_back(make_cell({{{i, j}, {i + 1, j}, {i + 1, j + 1}}},
                                      {v_id(i + 1, j), d_id(i, j), h_id(i, j)}));
      // upper-left triangle (v00, v11, v01)
      mesh.cells_.push_back(make_cell({{{i, j}, {i + 1, j + 1}, {i, j + 1}}},
                                      {h_id(i, j + 1), v_id(i, j), d_id(i, j)}));
    }
  }

  std::vector<bool> has_plus(mesh.facets_.size(), false);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Cell& cell = mesh.cells_[static_cast<std::size_t>(c)];
    for (int e = 0; e < 3; ++e) {
      const auto fid = static_cast<std::size_t>(cell.facets[static_cast<std::size_t>(e)]);
      Facet& f = mesh.facets_[fid];
      const auto a = static_cast<std::size_t>((e + 1) % 3);
      const auto b = static_cast<std::size_t>((e + 2) % 3);
      if (!has_plus[fid]) {
        has_plus[fid] = true;
        f.plus = FacetSide{c, e, false};
        f.vertices = {cell.vertices[a], cell.vertices[b]};
        f.start = cell.coords[a];
        f.end = cell.coords[b];
        f.length = (f.end - f.start).norm();
        f.normal = cell.normal(e);
      } else {
        if (f.minus) throw std::logic_error("build_square: facet shared by more than two cells");
        // Both neighbours are counter-clockwise, so they traverse a shared
        // edge in opposite directions.
        f.minus = FacetSide{c, e, true};
      }
    }
  }
  return mesh;
}

std::pair<int, Vec2> Mesh::locate(const Vec2& x) const {
  const double dx = length_ / n_;
  Vec2 y = x;
  if (periodic_) {
    y.x() = std::fmod(y.x(), length_);
    y.y() = std::fmod(y.y(), length_);
    if (y.x() < 0) y.x() += length_;
    if (y.y() < 0) y.y() += length_;
  }
  int i = static_cast<int>(std::floor(y.x() / dx));
  int j = static_cast<int>(std::floor(y.y() / dx));
  i = std::clamp(i, 0, n_ - 1);
  j = std::clamp(j, 0, n_ - 1);
  const double lx = y.x() / dx - i;
  const double ly = y.y() / dx - j;
  const int c = 2 * (j * n_ + i) + (lx >= ly ? 0 : 1);
  return {c, cells_[static_cast<std::size_t>(c)].pull_back(y)};
}

}  // namespace hdgeuler
