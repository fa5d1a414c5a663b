#pragma once

#include <vector>

#include <Eigen/Dense>

#include "hdgeuler/sparse.hpp"

namespace hdgeuler {

/// Incomplete LU factorisation with zero fill-in on the matrix's own pattern.
/// L has a unit diagonal. The factors are kept in one CSR array for
/// inspection and split into strict L, strict U and the inverted diagonal for
/// the triangular solves.
class Ilu0 {
 public:
  Ilu0() = default;
  /// Throws std::runtime_error on a missing or zero pivot.
  explicit Ilu0(const RowMatrix& a);

  void compute(const RowMatrix& a);
  /// Solves L U x = b.
  [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  void apply(const Eigen::VectorXd& b, Eigen::VectorXd& x) const;

  [[nodiscard]] const RowMatrix& factors() const { return lu_; }

 private:
  RowMatrix lu_;
  std::vector<int> diag_;  // position of the diagonal entry in each row
  std::vector<int> l_outer_, l_inner_, u_outer_, u_inner_;
  std::vector<double> l_values_, u_values_, inv_diag_;
};

}  // namespace hdgeuler
