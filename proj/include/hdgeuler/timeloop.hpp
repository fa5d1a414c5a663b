#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hdgeuler/forms.hpp"
#include "hdgeuler/krylov.hpp"
#include "hdgeuler/mixed_solver.hpp"
#include "hdgeuler/tableau.hpp"

namespace hdgeuler {

struct FlowState {
  double t = 0.0;
  Field q, p, l;
  std::optional<Field> tracer;
};

struct SolveRecord {
  int stage = 0;
  std::string kind;  // tentative, pressure, final, reconstruct, implicit
  int iterations = 0;
  double residual = 0.0;
  double seconds = 0.0;
};

struct StepperOptions {
  int richardson_iterations = 2;
  /// Step II of the Richardson iteration with the weak divergence of the
  /// tentative velocity as source (instead of the full constraint residual).
  bool literal_projection = false;
  MixedSolveOptions pressure;
  GmresOptions tentative{1e-10, 1000, 200, true};
};

/// IMEX-HDG timestepper: implicit advection and pressure, explicit forcing.
/// Each stage is solved approximately by a Richardson iteration preconditioned
/// with the projection method; the step ends with a mixed solve that makes
/// the new velocity satisfy the constraint, followed by a pressure
/// reconstruction.
class ImexHdgStepper {
 public:
  ImexHdgStepper(const Discretisation& disc, ButcherTableau tab, TimeVectorFunction forcing, StepperOptions opts = {});

  [[nodiscard]] const Discretisation& discretisation() const { return *disc_; }
  [[nodiscard]] const ButcherTableau& tableau() const { return tab_; }
  [[nodiscard]] const MixedBlocks& blocks() const { return blocks_; }
  [[nodiscard]] MixedSolver& mixed_solver() { return mixed_; }
  [[nodiscard]] const StepperOptions& options() const { return opts_; }

  /// Interpolated velocity with the pressure reconstructed from it.
  FlowState initial_state(const VectorFunction& q0, double t0);

  void step(FlowState& state, double dt);

  /// Solves the mixed problem U = -grad p, div U = div f_p with n.U = -n.f on
  /// the boundary, for f_p = -f(t) + (Q.grad)Q. Returns mean-zero (p, l).
  std::pair<Field, Field> reconstruct_pressure(const Field& q, double t);

  /// Approximate solution of M Q - a dt (F Q + G(p, l)) = r, Gamma(Q, p, l) = 0
  /// with F the advection operator for the current Q*. (q, p, l) hold the
  /// initial iterate and receive the result.
  void richardson_stage_solve(double a_dt, const Eigen::VectorXd& r, const CellBlockMatrix& advection,
                              Eigen::VectorXd& q, Eigen::VectorXd& p, Eigen::VectorXd& l, int stage = 0);

  /// Euclidean norm of Gamma(Q^{n+1}, dp, dl) after the last final update, and
  /// the norm of the condensed right-hand side of that solve.
  [[nodiscard]] double last_constraint_residual() const { return last_gamma_; }
  [[nodiscard]] double last_constraint_rhs_norm() const { return last_rhs_norm_; }
  /// Defect norms ||dr|| of the Richardson iterations of the last stage solve.
  [[nodiscard]] const std::vector<double>& last_defects() const { return defects_; }
  /// Velocities Q_0 .. Q_{s-1} of the last step.
  [[nodiscard]] const std::vector<Eigen::VectorXd>& stage_velocities() const { return stage_q_; }

  [[nodiscard]] const std::vector<SolveRecord>& records() const { return records_; }
  void clear_records() { records_.clear(); }

  [[nodiscard]] double energy(const Field& q) const;

 private:
  const Discretisation* disc_;
  ButcherTableau tab_;
  TimeVectorFunction forcing_;
  StepperOptions opts_;
  MixedBlocks blocks_;
  CellBlockMatrix mass_;
  CellBlockMatrix advection_;
  CellBlockMatrix tentative_;  // M - a dt F of the current stage
  SparseMatrix divergence_;
  BdmProjector bdm_;
  MixedSolver mixed_;
  std::vector<SolveRecord> records_;
  std::vector<double> defects_;
  std::vector<Eigen::VectorXd> stage_q_;
  double last_gamma_ = 0.0;
  double last_rhs_norm_ = 0.0;
};

/// Explicit DG advection of a passive tracer by the stage velocities of an
/// IMEX step, each projected onto the continuous space of the same degree.
class TracerStepper {
 public:
  TracerStepper(const Discretisation& disc, int tracer_degree, ButcherTableau tab);

  [[nodiscard]] const SpacePtr& space() const { return advection_.space(); }
  /// stage_q: velocity coefficient vectors Q_0 .. Q_{s-1} (Q_0 = Q^n).
  void step(Field& tracer, const std::vector<Eigen::VectorXd>& stage_q, double dt);

 private:
  const Discretisation* disc_;
  ButcherTableau tab_;
  TracerAdvection advection_;
  CgProjector cg_;
  CellBlockMatrix a_;
};

/// The original, non-hybridised DG scheme with backward Euler for advection
/// and pressure and explicit forcing; solved monolithically by sparse LU.
class ImplicitDgStepper {
 public:
  ImplicitDgStepper(const Discretisation& disc, TimeVectorFunction forcing);

  void step(FlowState& state, double dt);
  /// Euclidean norm of the discrete divergence G~^T Q after the last step.
  [[nodiscard]] double last_constraint_residual() const { return last_gamma_; }
  /// ||G~^T Q|| for any velocity.
  [[nodiscard]] double divergence(const Field& q) const;
  [[nodiscard]] const std::vector<SolveRecord>& records() const { return records_; }
  void clear_records() { records_.clear(); }

 private:
  const Discretisation* disc_;
  TimeVectorFunction forcing_;
  MixedBlocks blocks_;
  CellBlockMatrix mass_;
  CellBlockMatrix advection_;
  SparseMatrix gtilde_;
  BdmProjector bdm_;
  Eigen::VectorXd pressure_weights_;
  std::vector<SolveRecord> records_;
  double last_gamma_ = 0.0;
};

}  // namespace hdgeuler
