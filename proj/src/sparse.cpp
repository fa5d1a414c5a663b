#include "hdgeuler/sparse.hpp"

#include <algorithm>
#include <stdexcept>

namespace hdgeuler {

CellBlockMatrix::CellBlockMatrix(const Mesh& mesh, int block) : block_(block) {
  const int nc = mesh.num_cells();
  neighbours_.resize(static_cast<std::size_t>(nc));
  for (int c = 0; c < nc; ++c) neighbours_[static_cast<std::size_t>(c)].push_back(c);
  for (const Facet& f : mesh.facets()) {
    if (!f.minus) continue;
    neighbours_[static_cast<std::size_t>(f.plus.cell)].push_back(f.minus->cell);
    neighbours_[static_cast<std::size_t>(f.minus->cell)].push_back(f.plus.cell);
  }
  Eigen::Index nnz = 0;
  for (auto& nb : neighbours_) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    nnz += static_cast<Eigen::Index>(nb.size()) * block * block;
  }
  const Eigen::Index n = static_cast<Eigen::Index>(nc) * block;
  matrix_.resize(n, n);
  matrix_.reserve(nnz);
  for (int c = 0; c < nc; ++c) {
    for (int i = 0; i < block; ++i) {
      const Eigen::Index row = static_cast<Eigen::Index>(c) * block + i;
      matrix_.startVec(row);
      for (int b : neighbours_[static_cast<std::size_t>(c)])
        for (int j = 0; j < block; ++j) matrix_.insertBack(row, static_cast<Eigen::Index>(b) * block + j) = 0.0;
    }
  }
  matrix_.finalize();
}

void CellBlockMatrix::set_zero() {
  std::fill(matrix_.valuePtr(), matrix_.valuePtr() + matrix_.nonZeros(), 0.0);
}

void CellBlockMatrix::add_block(int a, int b, const Eigen::Ref<const Eigen::MatrixXd>& values) {
  const auto& nb = neighbours_[static_cast<std::size_t>(a)];
  const auto it = std::lower_bound(nb.begin(), nb.end(), b);
  if (it == nb.end() || *it != b) throw std::logic_error("CellBlockMatrix: cells are not neighbours");
  const auto slot = static_cast<Eigen::Index>(it - nb.begin());
  double* vals = matrix_.valuePtr();
  const auto* outer = matrix_.outerIndexPtr();
  for (int i = 0; i < block_; ++i) {
    double* row = vals + outer[static_cast<Eigen::Index>(a) * block_ + i] + slot * block_;
    for (int j = 0; j < block_; ++j) row[j] += values(i, j);
  }
}

void CellBlockMatrix::apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  if (x.size() != matrix_.cols()) throw std::invalid_argument("CellBlockMatrix::apply: size mismatch");
  y.resize(matrix_.rows());
  const double* vals = matrix_.valuePtr();
  const auto* outer = matrix_.outerIndexPtr();
  const double* xp = x.data();
  const auto nc = static_cast<int>(neighbours_.size());
  for (int c = 0; c < nc; ++c) {
    const auto& nb = neighbours_[static_cast<std::size_t>(c)];
    for (int i = 0; i < block_; ++i) {
      const Eigen::Index row = static_cast<Eigen::Index>(c) * block_ + i;
      const double* v = vals + outer[row];
      double sum = 0.0;
      for (int b : nb) {
        const double* xb = xp + static_cast<Eigen::Index>(b) * block_;
        for (int j = 0; j < block_; ++j) sum += v[j] * xb[j];
        v += block_;
      }
      y(row) = sum;
    }
  }
}

RowMatrix linear_combination(double a, const RowMatrix& x, double b, const RowMatrix& y) {
  if (x.nonZeros() != y.nonZeros() || x.rows() != y.rows())
    throw std::invalid_argument("linear_combination: patterns differ");
  RowMatrix out = x;
  Eigen::Map<Eigen::VectorXd> vo(out.valuePtr(), out.nonZeros());
  const Eigen::Map<const Eigen::VectorXd> vx(x.valuePtr(), x.nonZeros());
  const Eigen::Map<const Eigen::VectorXd> vy(y.valuePtr(), y.nonZeros());
  vo = a * vx + b * vy;
  return out;
}

}  // namespace hdgeuler
