#include "hdgeuler/fespace.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/LU>
#include <Eigen/Sparse>

namespace hdgeuler {

namespace {

constexpr int kMaxDegree = 8;

Eigen::MatrixXd reference_mass(const LagrangeTriangle& basis) {
  const CellTabulation tab(basis, std::max(2 * basis.degree(), 1));
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  for (std::size_t q = 0; q < tab.rule.weights.size(); ++q) {
    const auto row = tab.values.row(static_cast<Eigen::Index>(q));
    m.noalias() += tab.rule.weights[q] * row.transpose() * row;
  }
  return m;
}

}  // namespace

std::string to_string(Family family) {
  switch (family) {
    case Family::dg_scalar: return "dg_scalar";
    case Family::dg_vector: return "dg_vector";
    case Family::trace: return "trace";
    case Family::cg_scalar: return "cg_scalar";
    case Family::cg_vector: return "cg_vector";
    case Family::bdm: return "bdm";
  }
  return "unknown";
}

std::shared_ptr<const Space> Space::make(std::shared_ptr<const Mesh> mesh, Family family, int degree) {
  if (!mesh) throw std::invalid_argument("make_space: null mesh");
  const bool needs_one = family == Family::cg_scalar || family == Family::cg_vector || family == Family::bdm;
  if (degree < (needs_one ? 1 : 0) || degree > kMaxDegree)
    throw std::invalid_argument("make_space: unsupported degree " + std::to_string(degree) + " for " +
                                to_string(family));

  std::shared_ptr<Space> s(new Space());
  s->mesh_ = std::move(mesh);
  s->family_ = family;
  s->degree_ = degree;
  s->components_ = (family == Family::dg_vector || family == Family::cg_vector || family == Family::bdm) ? 2 : 1;
  const Mesh& m = *s->mesh_;

  if (family == Family::trace) {
    s->facet_basis_.emplace(degree);
    s->local_size_ = degree + 1;
    s->block_ = s->local_size_;
    s->total_dofs_ = m.num_facets() * s->local_size_;
    s->dof_table_.resize(static_cast<std::size_t>(s->total_dofs_));
    for (int i = 0; i < s->total_dofs_; ++i) s->dof_table_[static_cast<std::size_t>(i)] = i;
    return s;
  }

  s->cell_basis_.emplace(degree);
  const LagrangeTriangle& basis = *s->cell_basis_;
  const int nb = basis.size();
  s->local_size_ = nb;
  s->block_ = s->components_ * nb;
  s->dof_table_.resize(static_cast<std::size_t>(m.num_cells() * s->block_));

  if (!s->is_continuous()) {
    s->total_dofs_ = m.num_cells() * s->block_;
    for (int i = 0; i < s->total_dofs_; ++i) s->dof_table_[static_cast<std::size_t>(i)] = i;
    return s;
  }

  // Continuous numbering: vertices, then facet-interior nodes in facet
  // parameter order, then cell-interior nodes.
  const int mdeg = degree;
  const int per_edge = mdeg - 1;
  const int per_cell = (mdeg - 1) * (mdeg - 2) / 2;
  const int edge_offset = m.num_vertices();
  const int cell_offset = edge_offset + m.num_facets() * per_edge;
  const int nscalar = cell_offset + m.num_cells() * per_cell;
  s->total_dofs_ = s->components_ * nscalar;
  for (int c = 0; c < m.num_cells(); ++c) {
    const Cell& cell = m.cell(c);
    int interior = 0;
    for (int i = 0; i < nb; ++i) {
      const NodeLocation& loc = basis.locations()[static_cast<std::size_t>(i)];
      int g = -1;
      switch (loc.kind) {
        case NodeLocation::Kind::vertex:
          g = cell.vertices[static_cast<std::size_t>(loc.entity)];
          break;
        case NodeLocation::Kind::edge: {
          const int f = cell.facets[static_cast<std::size_t>(loc.entity)];
          const FacetSide& side = m.side_of(f, c);
          const double sp = side.reversed ? 1.0 - loc.edge_t : loc.edge_t;
          const int r = static_cast<int>(std::lround(sp * mdeg)) - 1;
          g = edge_offset + f * per_edge + r;
          break;
        }
        case NodeLocation::Kind::interior:
          g = cell_offset + c * per_cell + interior++;
          break;
      }
      for (int comp = 0; comp < s->components_; ++comp)
        s->dof_table_[static_cast<std::size_t>(c * s->block_ + comp * nb + i)] = comp * nscalar + g;
    }
  }
  return s;
}

std::span<const int> Space::cell_dofs(int c) const {
  if (is_trace()) throw std::logic_error("Space::cell_dofs on a trace space");
  return {dof_table_.data() + static_cast<std::size_t>(c) * static_cast<std::size_t>(block_),
          static_cast<std::size_t>(block_)};
}

std::span<const int> Space::facet_dofs(int f) const {
  if (!is_trace()) throw std::logic_error("Space::facet_dofs on a cell space");
  return {dof_table_.data() + static_cast<std::size_t>(f) * static_cast<std::size_t>(block_),
          static_cast<std::size_t>(block_)};
}

std::vector<Vec2> Space::cell_nodes(int c) const {
  const Cell& cell = mesh_->cell(c);
  std::vector<Vec2> out;
  out.reserve(cell_basis_->nodes().size());
  for (const auto& xi : cell_basis_->nodes()) out.push_back(cell.map(xi));
  return out;
}

Field::Field(SpacePtr space) : space_(std::move(space)), coefficients_(Eigen::VectorXd::Zero(space_->total_dofs())) {}

Field::Field(SpacePtr space, Eigen::VectorXd coefficients)
    : space_(std::move(space)), coefficients_(std::move(coefficients)) {
  if (coefficients_.size() != space_->total_dofs()) throw std::invalid_argument("Field: coefficient size mismatch");
}

double Field::value(int c, const Vec2& xi, int comp) const {
  const auto dofs = space_->cell_dofs(c);
  const Eigen::VectorXd phi = space_->basis().values(xi);
  const int nb = space_->local_size();
  double v = 0.0;
  for (int i = 0; i < nb; ++i) v += phi(i) * coefficients_(dofs[static_cast<std::size_t>(comp * nb + i)]);
  return v;
}

Vec2 Field::vector_value(int c, const Vec2& xi) const { return {value(c, xi, 0), value(c, xi, 1)}; }

Vec2 Field::gradient(int c, const Vec2& xi, int comp) const {
  const auto dofs = space_->cell_dofs(c);
  const Eigen::MatrixX2d g = space_->basis().gradients(xi);
  const int nb = space_->local_size();
  Eigen::Vector2d ref = Eigen::Vector2d::Zero();
  for (int i = 0; i < nb; ++i) ref += coefficients_(dofs[static_cast<std::size_t>(comp * nb + i)]) * g.row(i).transpose();
  return space_->mesh().cell(c).inv_jacobian_t * ref;
}

Eigen::Matrix2d Field::vector_gradient(int c, const Vec2& xi) const {
  Eigen::Matrix2d out;
  out.row(0) = gradient(c, xi, 0).transpose();
  out.row(1) = gradient(c, xi, 1).transpose();
  return out;
}

double Field::trace_value(int f, double s) const {
  const auto dofs = space_->facet_dofs(f);
  const Eigen::VectorXd phi = space_->facet_basis().values(s);
  double v = 0.0;
  for (int i = 0; i < phi.size(); ++i) v += phi(i) * coefficients_(dofs[static_cast<std::size_t>(i)]);
  return v;
}

double Field::evaluate(const Vec2& x, int comp) const {
  if (space_->is_trace()) throw std::logic_error("Field::evaluate: trace fields are evaluated per facet");
  const auto [c, xi] = space_->mesh().locate(x);
  return value(c, xi, comp);
}

Field& Field::operator+=(const Field& other) {
  coefficients_ += other.coefficients_;
  return *this;
}

Field& Field::operator-=(const Field& other) {
  coefficients_ -= other.coefficients_;
  return *this;
}

Field& Field::operator*=(double a) {
  coefficients_ *= a;
  return *this;
}

CellTabulation::CellTabulation(const LagrangeTriangle& basis, int quad_degree) : rule(triangle_rule(quad_degree)) {
  const auto nq = static_cast<Eigen::Index>(rule.points.size());
  values.resize(nq, basis.size());
  gradients.reserve(rule.points.size());
  for (Eigen::Index q = 0; q < nq; ++q) {
    values.row(q) = basis.values(rule.points[static_cast<std::size_t>(q)]).transpose();
    gradients.push_back(basis.gradients(rule.points[static_cast<std::size_t>(q)]));
  }
}

EdgeTabulation::EdgeTabulation(const LagrangeTriangle& basis, int quad_degree) : rule(line_rule(quad_degree)) {
  const auto nq = static_cast<Eigen::Index>(rule.points.size());
  for (int e = 0; e < 3; ++e) {
    for (int r = 0; r < 2; ++r) {
      const auto idx = static_cast<std::size_t>(2 * e + r);
      values[idx].resize(nq, basis.size());
      for (Eigen::Index q = 0; q < nq; ++q) {
        const double s = rule.points[static_cast<std::size_t>(q)];
        const Vec2 xi = side_reference_point(FacetSide{0, e, r == 1}, s);
        values[idx].row(q) = basis.values(xi).transpose();
        gradients[idx].push_back(basis.gradients(xi));
      }
    }
  }
}

Eigen::MatrixXd tabulate_facet_basis(const LagrangeInterval& basis, const LineRule& rule) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rule.points.size()), basis.size());
  for (std::size_t q = 0; q < rule.points.size(); ++q)
    out.row(static_cast<Eigen::Index>(q)) = basis.values(rule.points[q]).transpose();
  return out;
}

Field interpolate(const SpacePtr& space, const ScalarFunction& fn) {
  Field out(space);
  auto& x = out.coefficients();
  const Mesh& mesh = space->mesh();
  if (space->components() != 1) throw std::invalid_argument("interpolate: scalar function into vector space");
  if (space->is_trace()) {
    const auto& nodes = space->facet_basis().nodes();
    for (int f = 0; f < mesh.num_facets(); ++f) {
      const auto dofs = space->facet_dofs(f);
      for (std::size_t i = 0; i < nodes.size(); ++i) x(dofs[i]) = fn(mesh.facet(f).point(nodes[i]));
    }
    return out;
  }
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto dofs = space->cell_dofs(c);
    const auto pts = space->cell_nodes(c);
    for (std::size_t i = 0; i < pts.size(); ++i) x(dofs[i]) = fn(pts[i]);
  }
  return out;
}

Field interpolate(const SpacePtr& space, const VectorFunction& fn) {
  if (space->components() != 2) throw std::invalid_argument("interpolate: vector function into scalar space");
  Field out(space);
  auto& x = out.coefficients();
  const Mesh& mesh = space->mesh();
  const int nb = space->local_size();
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto dofs = space->cell_dofs(c);
    const auto pts = space->cell_nodes(c);
    for (int i = 0; i < nb; ++i) {
      const Vec2 v = fn(pts[static_cast<std::size_t>(i)]);
      x(dofs[static_cast<std::size_t>(i)]) = v.x();
      x(dofs[static_cast<std::size_t>(nb + i)]) = v.y();
    }
  }
  return out;
}

int norm_quadrature_degree(int degree) { return 2 * degree + 2; }

namespace {

// Integrates g(cell, ref point, physical point) over all cells with a rule
// of the given degree.
template <typename G>
double integrate_cells(const Mesh& mesh, int degree, G&& g) {
  const TriangleRule rule = triangle_rule(degree);
  double total = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Cell& cell = mesh.cell(c);
    double local = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q)
      local += rule.weights[q] * g(c, rule.points[q], cell.map(rule.points[q]));
    total += local * cell.det_jacobian;
  }
  return total;
}

template <typename G>
double integrate_facets(const Mesh& mesh, int degree, G&& g) {
  const LineRule rule = line_rule(degree);
  double total = 0.0;
  for (int f = 0; f < mesh.num_facets(); ++f) {
    double local = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) local += rule.weights[q] * g(f, rule.points[q]);
    total += local * mesh.facet(f).length;
  }
  return total;
}

}  // namespace

double l2_norm(const Field& field) {
  const Space& sp = field.space();
  const int deg = norm_quadrature_degree(sp.degree());
  if (sp.is_trace())
    return std::sqrt(integrate_facets(sp.mesh(), deg, [&](int f, double s) {
      const double v = field.trace_value(f, s);
      return v * v;
    }));
  return std::sqrt(integrate_cells(sp.mesh(), deg, [&](int c, const Vec2& xi, const Vec2&) {
    double sum = 0.0;
    for (int comp = 0; comp < sp.components(); ++comp) {
      const double v = field.value(c, xi, comp);
      sum += v * v;
    }
    return sum;
  }));
}

double l2_error(const Field& field, const ScalarFunction& exact) {
  const Space& sp = field.space();
  if (sp.components() != 1 || sp.is_trace()) throw std::invalid_argument("l2_error: scalar cell field expected");
  const int deg = norm_quadrature_degree(sp.degree()) + 4;
  return std::sqrt(integrate_cells(sp.mesh(), deg, [&](int c, const Vec2& xi, const Vec2& x) {
    const double d = field.value(c, xi) - exact(x);
    return d * d;
  }));
}

double l2_error(const Field& field, const VectorFunction& exact) {
  const Space& sp = field.space();
  if (sp.components() != 2) throw std::invalid_argument("l2_error: vector field expected");
  const int deg = norm_quadrature_degree(sp.degree()) + 4;
  return std::sqrt(integrate_cells(sp.mesh(), deg, [&](int c, const Vec2& xi, const Vec2& x) {
    return (field.vector_value(c, xi) - exact(x)).squaredNorm();
  }));
}

double mean(const Field& field) {
  const Space& sp = field.space();
  if (sp.components() != 1) throw std::invalid_argument("mean: scalar field expected");
  const int deg = std::max(sp.degree(), 1);
  if (sp.is_trace())
    return integrate_facets(sp.mesh(), deg, [&](int f, double s) { return field.trace_value(f, s); });
  return integrate_cells(sp.mesh(), deg, [&](int c, const Vec2& xi, const Vec2&) { return field.value(c, xi); });
}

BdmProjector::BdmProjector(const SpacePtr& velocity_space) : source_(velocity_space) {
  if (velocity_space->family() != Family::dg_vector)
    throw std::invalid_argument("BdmProjector: dg_vector input space expected");
  const int m = velocity_space->degree();
  target_ = Space::make(velocity_space->mesh_ptr(), Family::bdm, std::max(m, 1));
  if (m < 1) throw std::invalid_argument("BdmProjector: degree must be >= 1");
  const Mesh& mesh = velocity_space->mesh();
  const LagrangeTriangle& basis = velocity_space->basis();
  nb_ = basis.size();
  nt_ = 3 * (m + 1);
  edge_rule_ = line_rule(2 * m);
  edge_tab_.emplace(basis, 2 * m);
  const LagrangeInterval test_basis(m);
  edge_test_ = tabulate_facet_basis(test_basis, edge_rule_);
  const Eigen::MatrixXd ref_mass = reference_mass(basis);

  // Cells sharing a Jacobian share the local system.
  std::vector<Eigen::Matrix2d> shapes;
  std::vector<Eigen::MatrixXd> shape_maps;
  std::vector<Eigen::MatrixXd> shape_mass;
  solution_maps_.reserve(static_cast<std::size_t>(mesh.num_cells()));
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Cell& cell = mesh.cell(c);
    std::size_t found = shapes.size();
    for (std::size_t s = 0; s < shapes.size(); ++s)
      if ((shapes[s] - cell.jacobian).cwiseAbs().maxCoeff() <= 1e-14 * cell.jacobian.norm()) found = s;
    if (found == shapes.size()) {
      const Eigen::MatrixXd mass = cell.det_jacobian * ref_mass;
      const int nv = 2 * nb_;
      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nv + nt_, nv + nt_);
      kkt.block(0, 0, nb_, nb_) = mass;
      kkt.block(nb_, nb_, nb_, nb_) = mass;
      for (int e = 0; e < 3; ++e) {
        const Vec2 n = cell.normal(e);
        const Eigen::MatrixXd& phi = edge_tab_->at(e, false);
        const double len = (cell.coords[static_cast<std::size_t>((e + 2) % 3)] -
                            cell.coords[static_cast<std::size_t>((e + 1) % 3)]).norm();
        for (std::size_t q = 0; q < edge_rule_.points.size(); ++q) {
          const double w = edge_rule_.weights[q] * len;
          const auto qi = static_cast<Eigen::Index>(q);
          for (int j = 0; j <= m; ++j) {
            const int row = nv + e * (m + 1) + j;
            for (int i = 0; i < nb_; ++i) {
              const double v = w * edge_test_(qi, j) * phi(qi, i);
              kkt(row, i) += v * n.x();
              kkt(row, nb_ + i) += v * n.y();
            }
          }
        }
      }
      kkt.block(0, nv, nv, nt_) = kkt.block(nv, 0, nt_, nv).transpose();
      const Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt);
      const Eigen::MatrixXd inv = lu.inverse();
      shapes.push_back(cell.jacobian);
      shape_maps.push_back(inv.topRows(nv));
      shape_mass.push_back(mass);
    }
    solution_maps_.push_back(shape_maps[found]);
    cell_mass_.push_back(shape_mass[found]);
  }
}

Field BdmProjector::apply(const Field& q) const {
  if (q.space_ptr() != source_) throw std::invalid_argument("BdmProjector: field from a different space");
  const Mesh& mesh = source_->mesh();
  const int m = source_->degree();
  Field out(target_);
  Eigen::VectorXd rhs(2 * nb_ + nt_);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Cell& cell = mesh.cell(c);
    const auto dofs = source_->cell_dofs(c);
    Eigen::VectorXd qc(2 * nb_);
    for (int i = 0; i < 2 * nb_; ++i) qc(i) = q.coefficients()(dofs[static_cast<std::size_t>(i)]);
    const auto& mass = cell_mass_[static_cast<std::size_t>(c)];
    rhs.segment(0, nb_) = mass * qc.head(nb_);
    rhs.segment(nb_, nb_) = mass * qc.tail(nb_);
    rhs.tail(nt_).setZero();
    for (int e = 0; e < 3; ++e) {
      const int f = cell.facets[static_cast<std::size_t>(e)];
      const Facet& facet = mesh.facet(f);
      if (facet.is_boundary()) continue;
      const FacetSide& own = mesh.side_of(f, c);
      const FacetSide& other = (facet.plus.cell == c && own.local_edge == facet.plus.local_edge) ? *facet.minus : facet.plus;
      const Vec2 n = cell.normal(e);
      const Eigen::MatrixXd& phi = edge_tab_->at(e, false);
      for (std::size_t qq = 0; qq < edge_rule_.points.size(); ++qq) {
        const double t = edge_rule_.points[qq];
        const auto qi = static_cast<Eigen::Index>(qq);
        Vec2 own_val = Vec2::Zero();
        for (int i = 0; i < nb_; ++i) own_val += phi(qi, i) * Vec2(qc(i), qc(nb_ + i));
        const double s = own.reversed ? 1.0 - t : t;
        const Vec2 other_val = q.vector_value(other.cell, side_reference_point(other, s));
        const double g = 0.5 * (own_val + other_val).dot(n) * edge_rule_.weights[qq] * facet.length;
        for (int j = 0; j <= m; ++j) rhs(2 * nb_ + e * (m + 1) + j) += g * edge_test_(qi, j);
      }
    }
    const Eigen::VectorXd x = solution_maps_[static_cast<std::size_t>(c)] * rhs;
    const auto tdofs = target_->cell_dofs(c);
    for (int i = 0; i < 2 * nb_; ++i) out.coefficients()(tdofs[static_cast<std::size_t>(i)]) = x(i);
  }
  return out;
}

Field project_to_bdm(const Field& q) { return BdmProjector(q.space_ptr()).apply(q); }

CgProjector::CgProjector(const SpacePtr& dg_vector_space) : source_(dg_vector_space) {
  if (dg_vector_space->family() != Family::dg_vector)
    throw std::invalid_argument("CgProjector: dg_vector input space expected");
  const int m = dg_vector_space->degree();
  target_ = Space::make(dg_vector_space->mesh_ptr(), Family::cg_vector, m);
  scalar_ = Space::make(dg_vector_space->mesh_ptr(), Family::cg_scalar, m);
  ref_mixed_mass_ = reference_mass(scalar_->basis());
  const Mesh& mesh = scalar_->mesh();
  const int nb = scalar_->local_size();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(mesh.num_cells() * nb * nb));
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto dofs = scalar_->cell_dofs(c);
    const double det = mesh.cell(c).det_jacobian;
    for (int i = 0; i < nb; ++i)
      for (int j = 0; j < nb; ++j)
        trips.emplace_back(dofs[static_cast<std::size_t>(i)], dofs[static_cast<std::size_t>(j)], det * ref_mixed_mass_(i, j));
  }
  Eigen::SparseMatrix<double> mass(scalar_->total_dofs(), scalar_->total_dofs());
  mass.setFromTriplets(trips.begin(), trips.end());
  mass_solver_.compute(mass);
  if (mass_solver_.info() != Eigen::Success) throw std::runtime_error("CgProjector: mass factorisation failed");
}

Field CgProjector::apply(const Field& q) const {
  if (q.space().family() != Family::dg_vector || q.space().degree() != source_->degree())
    throw std::invalid_argument("CgProjector: incompatible input field");
  const Mesh& mesh = scalar_->mesh();
  const int nb = scalar_->local_size();
  const int ns = scalar_->total_dofs();
  Field out(target_);
  for (int comp = 0; comp < 2; ++comp) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ns);
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const auto qd = q.space().cell_dofs(c);
      const auto sd = scalar_->cell_dofs(c);
      Eigen::VectorXd qc(nb);
      for (int i = 0; i < nb; ++i) qc(i) = q.coefficients()(qd[static_cast<std::size_t>(comp * nb + i)]);
      const Eigen::VectorXd local = mesh.cell(c).det_jacobian * (ref_mixed_mass_ * qc);
      for (int i = 0; i < nb; ++i) rhs(sd[static_cast<std::size_t>(i)]) += local(i);
    }
    out.coefficients().segment(comp * ns, ns) = mass_solver_.solve(rhs);
  }
  return out;
}

Field project_to_cg(const Field& q) { return CgProjector(q.space_ptr()).apply(q); }

}  // namespace hdgeuler
