#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "hdgeuler/mesh.hpp"
#include "hdgeuler/polynomial.hpp"
#include "hdgeuler/quadrature.hpp"

namespace hdgeuler {

enum class Family { dg_scalar, dg_vector, trace, cg_scalar, cg_vector, bdm };

std::string to_string(Family family);

using ScalarFunction = std::function<double(const Vec2&)>;
using VectorFunction = std::function<Vec2(const Vec2&)>;

/// Finite-element space over a mesh. Cell-based families store, per cell, the
/// global indices of all local basis functions in component-major order
/// (all x-component functions, then all y-component functions). The trace
/// family stores per-facet indices in the facet's own parametrisation.
///
/// `bdm` uses the broken dg_vector layout; H(div) conformity is a property of
/// the fields produced by BdmProjector, not of the index map.
class Space {
 public:
  static std::shared_ptr<const Space> make(std::shared_ptr<const Mesh> mesh, Family family, int degree);

  [[nodiscard]] Family family() const { return family_; }
  [[nodiscard]] int degree() const { return degree_; }
  [[nodiscard]] const Mesh& mesh() const { return *mesh_; }
  [[nodiscard]] const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  [[nodiscard]] int total_dofs() const { return total_dofs_; }
  [[nodiscard]] int components() const { return components_; }
  [[nodiscard]] bool is_trace() const { return family_ == Family::trace; }
  [[nodiscard]] bool is_continuous() const { return family_ == Family::cg_scalar || family_ == Family::cg_vector; }

  /// Scalar basis size per cell (per facet for the trace family).
  [[nodiscard]] int local_size() const { return local_size_; }
  [[nodiscard]] std::span<const int> cell_dofs(int c) const;
  [[nodiscard]] std::span<const int> facet_dofs(int f) const;

  [[nodiscard]] const LagrangeTriangle& basis() const { return *cell_basis_; }
  [[nodiscard]] const LagrangeInterval& facet_basis() const { return *facet_basis_; }

  /// Physical coordinates of the interpolation node behind each local basis
  /// function of cell c (scalar numbering).
  [[nodiscard]] std::vector<Vec2> cell_nodes(int c) const;

 private:
  Space() = default;
  std::shared_ptr<const Mesh> mesh_;
  Family family_ = Family::dg_scalar;
  int degree_ = 0;
  int components_ = 1;
  int local_size_ = 0;
  int total_dofs_ = 0;
  int block_ = 0;  // entries per cell (or facet) in the dof table
  std::vector<int> dof_table_;
  std::optional<LagrangeTriangle> cell_basis_;
  std::optional<LagrangeInterval> facet_basis_;
};

using SpacePtr = std::shared_ptr<const Space>;

/// Coefficient vector over a space.
class Field {
 public:
  Field() = default;
  explicit Field(SpacePtr space);
  Field(SpacePtr space, Eigen::VectorXd coefficients);

  [[nodiscard]] const Space& space() const { return *space_; }
  [[nodiscard]] const SpacePtr& space_ptr() const { return space_; }
  [[nodiscard]] Eigen::VectorXd& coefficients() { return coefficients_; }
  [[nodiscard]] const Eigen::VectorXd& coefficients() const { return coefficients_; }

  /// Scalar value at reference point xi of cell c (component `comp` for vector spaces).
  [[nodiscard]] double value(int c, const Vec2& xi, int comp = 0) const;
  [[nodiscard]] Vec2 vector_value(int c, const Vec2& xi) const;
  /// Physical gradient of component `comp`.
  [[nodiscard]] Vec2 gradient(int c, const Vec2& xi, int comp = 0) const;
  /// Row i holds the physical gradient of component i.
  [[nodiscard]] Eigen::Matrix2d vector_gradient(int c, const Vec2& xi) const;
  /// Trace fields: value at facet parameter s.
  [[nodiscard]] double trace_value(int f, double s) const;

  /// Point evaluation in physical coordinates.
  [[nodiscard]] double evaluate(const Vec2& x, int comp = 0) const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double a);

 private:
  SpacePtr space_;
  Eigen::VectorXd coefficients_;
};

/// Basis values (and reference gradients) of a triangle basis at a reference rule.
struct CellTabulation {
  TriangleRule rule;
  Eigen::MatrixXd values;                 // nq x nb
  std::vector<Eigen::MatrixX2d> gradients; // per point, nb x 2 (reference)
  CellTabulation(const LagrangeTriangle& basis, int quad_degree);
};

/// Basis values of a triangle basis at a line rule mapped onto each local edge,
/// for both orientations. Index with `at(edge, reversed)`.
struct EdgeTabulation {
  LineRule rule;
  std::array<Eigen::MatrixXd, 6> values;                  // nq x nb
  std::array<std::vector<Eigen::MatrixX2d>, 6> gradients; // per point, nb x 2 (reference)
  EdgeTabulation(const LagrangeTriangle& basis, int quad_degree);
  [[nodiscard]] const Eigen::MatrixXd& at(int edge, bool reversed) const {
    return values[static_cast<std::size_t>(2 * edge + (reversed ? 1 : 0))];
  }
  [[nodiscard]] const std::vector<Eigen::MatrixX2d>& grad_at(int edge, bool reversed) const {
    return gradients[static_cast<std::size_t>(2 * edge + (reversed ? 1 : 0))];
  }
};

/// Values of a facet basis at a line rule: nq x (k+1).
Eigen::MatrixXd tabulate_facet_basis(const LagrangeInterval& basis, const LineRule& rule);

Field interpolate(const SpacePtr& space, const ScalarFunction& fn);
Field interpolate(const SpacePtr& space, const VectorFunction& fn);

/// Quadrature degree used for norms of fields of the given polynomial degree.
int norm_quadrature_degree(int degree);

double l2_norm(const Field& field);
double l2_error(const Field& field, const ScalarFunction& exact);
double l2_error(const Field& field, const VectorFunction& exact);
/// The domain integral (field)_Omega; not normalised by the domain area.
double mean(const Field& field);

/// Projection of a dg_vector field of degree m onto the broken-BDM_m
/// representation with single-valued normal component. On each facet the
/// normal trace equals the averaged normal trace of the input (zero on
/// boundary facets); inside each cell the result is the L2-closest
/// polynomial satisfying those facet constraints.
class BdmProjector {
 public:
  explicit BdmProjector(const SpacePtr& velocity_space);
  [[nodiscard]] Field apply(const Field& q) const;
  [[nodiscard]] const SpacePtr& target_space() const { return target_; }

 private:
  SpacePtr source_;
  SpacePtr target_;
  int nb_ = 0;
  int nt_ = 0;
  LineRule edge_rule_;
  Eigen::MatrixXd edge_test_;  // nq x (m+1), test polynomials along cell-edge parameter
  std::vector<Eigen::MatrixXd> solution_maps_;  // per cell: [I 0] KKT^{-1}
  std::vector<Eigen::MatrixXd> cell_mass_;      // per cell scalar mass matrix
  std::optional<EdgeTabulation> edge_tab_;
};

Field project_to_bdm(const Field& q);

/// Global L2 projection onto the continuous vector space of the same degree.
class CgProjector {
 public:
  explicit CgProjector(const SpacePtr& dg_vector_space);
  [[nodiscard]] Field apply(const Field& q) const;
  [[nodiscard]] const SpacePtr& target_space() const { return target_; }

 private:
  SpacePtr source_;
  SpacePtr target_;
  SpacePtr scalar_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> mass_solver_;
  Eigen::MatrixXd ref_mixed_mass_;  // reference (cg_i, dg_j) mass, both scalar bases of same degree
};

Field project_to_cg(const Field& q);

}  // namespace hdgeuler
