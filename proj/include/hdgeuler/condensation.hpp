#pragma once

#include <vector>

#include <Eigen/Dense>

#include "hdgeuler/forms.hpp"
#include "hdgeuler/sparse.hpp"

namespace hdgeuler {

/// Static condensation of the hybridised mixed system
///
///   [ M  -Gp    -Gl   ] [Q]   [r_q]
///   [ D   c Cpp  c Cpl ] [p] = [r_p]
///   [ B   c Clp  c Cll ] [l]   [r_l]
///
/// to the trace unknowns. The cell-local (Q, p) blocks are factorised once;
/// S l = g is the trace system, with the sign chosen so that S is symmetric
/// positive semidefinite.
class CondensedSystem {
 public:
  /// Throws std::runtime_error if a local (Q, p) block is singular.
  CondensedSystem(const MixedBlocks& blocks, double c);

  [[nodiscard]] double scale() const { return c_; }
  [[nodiscard]] const SparseMatrix& matrix() const { return s_; }
  [[nodiscard]] const MixedBlocks& blocks() const { return *blocks_; }

  /// Trace right-hand side g for the full right-hand side (r_q, r_p, r_l).
  [[nodiscard]] Eigen::VectorXd condense(const Eigen::VectorXd& rq, const Eigen::VectorXd& rp,
                                         const Eigen::VectorXd& rl) const;
  /// Cell-local recovery of (Q, p) from the trace solution.
  void back_substitute(const Eigen::VectorXd& l, const Eigen::VectorXd& rq, const Eigen::VectorXd& rp,
                       Eigen::VectorXd& q, Eigen::VectorXd& p) const;

  /// Full operator applied to (Q, p, l); returns the stacked residual rows.
  [[nodiscard]] Eigen::VectorXd apply_full(const Eigen::VectorXd& q, const Eigen::VectorXd& p,
                                           const Eigen::VectorXd& l) const;

 private:
  const MixedBlocks* blocks_;
  double c_;
  SparseMatrix s_;
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
  std::vector<Eigen::MatrixXd> a21_inv_;  // A21 A11^{-1}, nl x (nq + np)
  std::vector<Eigen::MatrixXd> inv_a12_;  // A11^{-1} A12, (nq + np) x nl
};

}  // namespace hdgeuler
