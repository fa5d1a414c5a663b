#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "hdgeuler/forms.hpp"
#include "hdgeuler/sparse.hpp"

namespace hdgeuler {

struct MgOptions {
  int chebyshev_order = 2;     // Chebyshev steps per smoothing pass
  int smooth_steps = 1;        // smoothing passes before and after the coarse correction
  int power_iterations = 10;   // for the largest eigenvalue of the block-Jacobi preconditioned operator
  double lower_fraction = 0.125;
  double safety = 1.1;
};

/// Two-level non-nested multigrid for the condensed trace system. The fine
/// smoother is Chebyshev-accelerated facet-block Jacobi; the coarse space is
/// the continuous P1 space on the same triangulation, with the Laplacian as
/// coarse operator. Prolongation restricts a coarse function to the skeleton
/// and projects it facet by facet onto the trace space; restriction is its
/// transpose.
class TwoLevelMG {
 public:
  TwoLevelMG(const SparseMatrix& s, const Discretisation& disc, MgOptions opts = {});

  /// One V-cycle with zero initial guess: z = B r.
  void apply(const Eigen::VectorXd& r, Eigen::VectorXd& z) const;

  [[nodiscard]] const SparseMatrix& prolongation() const { return p_; }
  /// The coarse Laplacian (singular; the coarse solve pins one dof).
  [[nodiscard]] const SparseMatrix& coarse_matrix() const { return ac_; }
  [[nodiscard]] double lambda_max() const { return lambda_max_; }

  /// Chebyshev smoothing of S x = r starting from x.
  void smooth(const Eigen::VectorXd& r, Eigen::VectorXd& x) const;
  void apply_block_jacobi(const Eigen::VectorXd& r, Eigen::VectorXd& z) const;

 private:
  const SparseMatrix* s_;
  MgOptions opts_;
  int nt_ = 0;  // trace dofs per facet
  std::vector<Eigen::MatrixXd> block_inv_;
  double lambda_max_ = 0.0;
  SparseMatrix p_;
  SparseMatrix ac_;  // P1 Laplacian
  SparseMatrix pinned_;
  Eigen::SimplicialLDLT<SparseMatrix> coarse_;
};

}  // namespace hdgeuler
