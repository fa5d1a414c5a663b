#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "hdgeuler/fespace.hpp"
#include "hdgeuler/sparse.hpp"

namespace hdgeuler {

struct FormParams {
  double alpha = 1.0;  // interior/boundary penalty
  double tau = 1.0;    // hybridisation stabilisation
  bool upwind = true;  // upwind (true) or central (false) advective flux
};

/// Space-time forcing f(x, t).
using TimeVectorFunction = std::function<Vec2(const Vec2&, double)>;

/// The HDG discretisation of pressure degree k: velocity in [DG_{k+1}]^2,
/// pressure in DG_k, trace in P_k on every facet, together with the basis
/// tabulations shared by all forms.
class Discretisation {
 public:
  Discretisation(std::shared_ptr<const Mesh> mesh, int k, FormParams params = {}, int quad_degree = -1);

  [[nodiscard]] const Mesh& mesh() const { return *mesh_; }
  [[nodiscard]] const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  [[nodiscard]] int k() const { return k_; }
  [[nodiscard]] const FormParams& params() const { return params_; }
  [[nodiscard]] int quad_degree() const { return qdeg_; }

  [[nodiscard]] const SpacePtr& velocity_space() const { return vq_; }
  [[nodiscard]] const SpacePtr& pressure_space() const { return vp_; }
  [[nodiscard]] const SpacePtr& trace_space() const { return vt_; }

  /// Local sizes: velocity scalar basis, velocity block, pressure block, trace per facet.
  [[nodiscard]] int nbq() const { return vq_->local_size(); }
  [[nodiscard]] int nq() const { return 2 * vq_->local_size(); }
  [[nodiscard]] int np() const { return vp_->local_size(); }
  [[nodiscard]] int nt() const { return k_ + 1; }

  [[nodiscard]] int num_velocity_dofs() const { return vq_->total_dofs(); }
  [[nodiscard]] int num_pressure_dofs() const { return vp_->total_dofs(); }
  [[nodiscard]] int num_trace_dofs() const { return vt_->total_dofs(); }

  [[nodiscard]] const CellTabulation& velocity_tab() const { return tab_q_; }
  [[nodiscard]] const CellTabulation& pressure_tab() const { return tab_p_; }
  [[nodiscard]] const EdgeTabulation& velocity_edge_tab() const { return etab_q_; }
  [[nodiscard]] const EdgeTabulation& pressure_edge_tab() const { return etab_p_; }
  [[nodiscard]] const LineRule& facet_rule() const { return etab_q_.rule; }
  /// Trace basis at the facet rule points, nq x (k+1).
  [[nodiscard]] const Eigen::MatrixXd& trace_values() const { return trace_vals_; }

  /// Local coefficient vector of a cellwise field.
  [[nodiscard]] static Eigen::VectorXd cell_coefficients(const Field& f, int c);

 private:
  std::shared_ptr<const Mesh> mesh_;
  int k_;
  FormParams params_;
  int qdeg_;
  SpacePtr vq_, vp_, vt_;
  CellTabulation tab_q_, tab_p_;
  EdgeTabulation etab_q_, etab_p_;
  Eigen::MatrixXd trace_vals_;
};

/// Cell-local blocks of the hybridised mixed operator. Rows are test
/// functions, columns trial functions; velocity ordering is component-major,
/// trace ordering is local edge major with each edge in its facet's own
/// parametrisation.
///
///   <w, M Q>                  = (w.Q)
///   <w, Gp p + Gl l>          = g(w, p, l)
///   <psi, D Q + Cpp p + Cpl l> = psi rows of Gamma
///   <mu, B Q + Clp p + Cll l>  = mu rows of Gamma
struct LocalMixedBlocks {
  Eigen::MatrixXd M, Gp, Gl, D, B, Cpp, Cpl, Clp, Cll;
};

struct MixedBlocks {
  std::vector<LocalMixedBlocks> cells;
  int nq = 0, np = 0, nl = 0;  // local sizes; nl = 3 (k+1)
  int num_q = 0, num_p = 0, num_l = 0;
  /// Global trace dof of local trace index j in cell c.
  std::vector<int> trace_map;  // num_cells * nl
  [[nodiscard]] int trace_dof(int c, int j) const { return trace_map[static_cast<std::size_t>(c * nl + j)]; }
};

MixedBlocks assemble_mixed_blocks(const Discretisation& disc);

/// Globally assembled versions of the mixed blocks (for tests and dense oracles).
struct GlobalMixedMatrices {
  SparseMatrix M, Gp, Gl, D, B, Cpp, Cpl, Clp, Cll;
};
GlobalMixedMatrices assemble_global(const MixedBlocks& blocks);

/// Block-diagonal velocity mass matrix in the shared cell-block pattern.
CellBlockMatrix assemble_velocity_mass(const Discretisation& disc);
/// Applies the block-diagonal velocity mass matrix.
Eigen::VectorXd apply_velocity_mass(const MixedBlocks& blocks, const Eigen::VectorXd& q);

/// Advection, penalty and (optional) upwind stabilisation, linear in Q for a
/// fixed advecting velocity Q* (a BDM field of the velocity layout):
/// <w, F Q> = f_im(w, Q, Q*).
void assemble_advection(const Discretisation& disc, const Field& qstar, CellBlockMatrix& out);
CellBlockMatrix assemble_advection(const Discretisation& disc, const Field& qstar);

/// <w, b> = (w . f(t)) with f interpolated into the velocity space.
Eigen::VectorXd assemble_forcing(const Discretisation& disc, const MixedBlocks& blocks, const TimeVectorFunction& f,
                                 double t);

/// Boundary load on the trace space: <mu, b> = sum over boundary facets of <mu n.f(t)>.
Eigen::VectorXd assemble_boundary_normal_load(const Discretisation& disc, const TimeVectorFunction& f, double t);

/// Weak divergence matrix: <psi, Div Z> = Div(psi, Z) for Z in the velocity space.
SparseMatrix assemble_weak_divergence(const Discretisation& disc);

/// Non-hybridised pressure coupling G~ (velocity rows, pressure columns).
SparseMatrix assemble_dg_pressure_gradient(const Discretisation& disc);

/// f_p = -f(t) + (Q . grad) Q, evaluated at the velocity interpolation nodes.
Field compute_fp(const Field& q, const TimeVectorFunction& f, double t);

/// Constraint residual vector (psi rows, then mu rows) of Gamma(Q, p, l).
Eigen::VectorXd constraint_residual(const MixedBlocks& blocks, const Eigen::VectorXd& q, const Eigen::VectorXd& p,
                                    const Eigen::VectorXd& l);

/// Applies the momentum coupling g: returns Gp p + Gl l.
Eigen::VectorXd apply_pressure_gradient(const MixedBlocks& blocks, const Eigen::VectorXd& p, const Eigen::VectorXd& l);

/// Upwinded DG advection of a passive tracer by a continuous velocity:
/// (A q)_chi = a(chi, q, U).
class TracerAdvection {
 public:
  TracerAdvection(std::shared_ptr<const Mesh> mesh, int tracer_degree, int velocity_degree);

  [[nodiscard]] const SpacePtr& space() const { return space_; }
  /// Assembles A for the continuous velocity U (a cg_vector field).
  void assemble(const Field& u, CellBlockMatrix& out) const;
  [[nodiscard]] CellBlockMatrix assemble(const Field& u) const;
  /// Block-diagonal tracer mass matrix and its cellwise inverse.
  [[nodiscard]] const CellBlockMatrix& mass() const { return mass_; }
  [[nodiscard]] Eigen::VectorXd solve_mass(const Eigen::VectorXd& rhs) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  SpacePtr space_;
  int velocity_degree_;
  LagrangeTriangle ubasis_;
  CellTabulation tab_;
  EdgeTabulation etab_;
  CellTabulation utab_;
  EdgeTabulation uetab_;
  CellBlockMatrix mass_;
  std::vector<Eigen::MatrixXd> inverse_mass_;
};

}  // namespace hdgeuler
