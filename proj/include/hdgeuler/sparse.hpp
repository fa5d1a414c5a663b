#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "hdgeuler/mesh.hpp"

namespace hdgeuler {

using SparseMatrix = Eigen::SparseMatrix<double>;
using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplets = std::vector<Eigen::Triplet<double>>;

/// Row-major sparse matrix over a cellwise-discontinuous space whose dofs are
/// numbered contiguously per cell (`block` per cell). The pattern couples each
/// cell with itself and its facet neighbours; values are refilled in place.
class CellBlockMatrix {
 public:
  CellBlockMatrix(const Mesh& mesh, int block);

  void set_zero();
  /// Adds a dense block coupling test cell `a` (rows) with trial cell `b`.
  void add_block(int a, int b, const Eigen::Ref<const Eigen::MatrixXd>& values);

  [[nodiscard]] int block() const { return block_; }
  /// y = A x, exploiting that each row's columns are whole neighbour blocks.
  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
  [[nodiscard]] RowMatrix& matrix() { return matrix_; }
  [[nodiscard]] const RowMatrix& matrix() const { return matrix_; }

 private:
  int block_;
  std::vector<std::vector<int>> neighbours_;  // sorted, including the cell itself
  RowMatrix matrix_;
};

/// Same pattern, values a*x + b*y.
RowMatrix linear_combination(double a, const RowMatrix& x, double b, const RowMatrix& y);

}  // namespace hdgeuler
