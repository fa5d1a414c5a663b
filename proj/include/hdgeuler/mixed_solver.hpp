#pragma once

#include <map>
#include <memory>

#include <Eigen/Dense>

#include "hdgeuler/condensation.hpp"
#include "hdgeuler/forms.hpp"
#include "hdgeuler/ilu0.hpp"
#include "hdgeuler/krylov.hpp"
#include "hdgeuler/multigrid.hpp"

namespace hdgeuler {

/// Removes the Euclidean projection onto the constant vector.
void deflate_constant(Eigen::VectorXd& v);

/// Relative size of the constant-mode component of v: |sum v| / (sqrt(N) ||v||).
double constant_fraction(const Eigen::VectorXd& v);

struct MixedSolveOptions {
  double rtol = 1e-12;
  int maxit = 500;
  int krylov_dim = 200;
  double consistency_tol = 1e-8;
  MgOptions mg;
};

struct MixedSolution {
  Eigen::VectorXd q, p, l;
  GmresResult stats;
  double rhs_norm = 0.0;  // norm of the condensed right-hand side
  double seconds = 0.0;
};

/// Solves the hybridised mixed system (see CondensedSystem) by condensation,
/// deflated GMRES on the trace system preconditioned with TwoLevelMG, and
/// cell-local back-substitution. The pressure constant is fixed afterwards so
/// that (p)_Omega = 0. Condensed systems are cached per constraint scale c.
class MixedSolver {
 public:
  MixedSolver(const Discretisation& disc, const MixedBlocks& blocks, MixedSolveOptions opts = {});

  /// With project_rhs the constant-mode component of the condensed right-hand
  /// side is removed; otherwise an inconsistent right-hand side throws.
  MixedSolution solve(double c, const Eigen::VectorXd& rq, const Eigen::VectorXd& rp, const Eigen::VectorXd& rl,
                      bool project_rhs = false);

  [[nodiscard]] const CondensedSystem& condensed(double c);
  [[nodiscard]] const TwoLevelMG& multigrid(double c);
  [[nodiscard]] const MixedSolveOptions& options() const { return opts_; }

  /// Shifts p and l by the same constant so that (p)_Omega = 0.
  void remove_pressure_mean(Eigen::VectorXd& p, Eigen::VectorXd& l) const;

 private:
  struct Entry {
    std::unique_ptr<CondensedSystem> system;
    std::unique_ptr<TwoLevelMG> mg;
  };
  Entry& entry(double c);

  const Discretisation* disc_;
  const MixedBlocks* blocks_;
  MixedSolveOptions opts_;
  std::map<double, Entry> cache_;
  Eigen::VectorXd pressure_weights_;  // (phi_i)_Omega / |Omega|
};

/// GMRES with an ILU(0) preconditioner for the tentative velocity system.
GmresResult solve_tentative(const RowMatrix& a, const Eigen::VectorXd& rhs, Eigen::VectorXd& x,
                            const GmresOptions& opts);

}  // namespace hdgeuler
