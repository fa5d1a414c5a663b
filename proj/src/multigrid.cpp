#include "hdgeuler/multigrid.hpp"

#include <random>
#include <stdexcept>

namespace hdgeuler {

TwoLevelMG::TwoLevelMG(const SparseMatrix& s, const Discretisation& disc, MgOptions opts)
    : s_(&s), opts_(opts), nt_(disc.nt()) {
  const Mesh& mesh = disc.mesh();
  const int nf = mesh.num_facets();
  if (s.rows() != static_cast<Eigen::Index>(nf) * nt_) throw std::invalid_argument("TwoLevelMG: trace size mismatch");

  block_inv_.resize(static_cast<std::size_t>(nf));
  for (int f = 0; f < nf; ++f) {
    const Eigen::MatrixXd blk = Eigen::MatrixXd(s.block(f * nt_, f * nt_, nt_, nt_));
    block_inv_[static_cast<std::size_t>(f)] = blk.inverse();
  }

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd v(s.rows()), w(s.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = u(rng);
  v.normalize();
  for (int it = 0; it < opts_.power_iterations; ++it) {
    apply_block_jacobi(s * v, w);
    lambda_max_ = w.norm();
    v = w / lambda_max_;
  }

  const SpacePtr coarse = Space::make(disc.mesh_ptr(), Family::cg_scalar, 1);
  const LagrangeTriangle& cb = coarse->basis();
  const LagrangeInterval& tb = disc.trace_space()->facet_basis();
  Triplets pt;
  for (int f = 0; f < nf; ++f) {
    const Facet& facet = mesh.facet(f);
    const auto dofs = coarse->cell_dofs(facet.plus.cell);
    for (int j = 0; j < nt_; ++j) {
      const Eigen::VectorXd phi = cb.values(side_reference_point(facet.plus, tb.nodes()[static_cast<std::size_t>(j)]));
      for (int a = 0; a < cb.size(); ++a)
        if (phi(a) != 0.0) pt.emplace_back(f * nt_ + j, dofs[static_cast<std::size_t>(a)], phi(a));
    }
  }
  p_.resize(s.rows(), coarse->total_dofs());
  p_.setFromTriplets(pt.begin(), pt.end());

  Triplets at;
  const Eigen::MatrixX2d ref = cb.gradients(Vec2(1.0 / 3.0, 1.0 / 3.0));
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Cell& cell = mesh.cell(c);
    const Eigen::MatrixX2d g = ref * cell.inv_jacobian_t.transpose();
    const Eigen::MatrixXd k = cell.area * g * g.transpose();
    const auto dofs = coarse->cell_dofs(c);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        at.emplace_back(dofs[static_cast<std::size_t>(a)], dofs[static_cast<std::size_t>(b)], k(a, b));
  }
  ac_.resize(coarse->total_dofs(), coarse->total_dofs());
  ac_.setFromTriplets(at.begin(), at.end());
  // pure-Neumann (or periodic) Laplacian: pin the first dof
  pinned_ = ac_;
  pinned_.prune([](Eigen::Index i, Eigen::Index j, double) { return i != 0 && j != 0; });
  pinned_.coeffRef(0, 0) = 1.0;
  coarse_.compute(pinned_);
  if (coarse_.info() != Eigen::Success) throw std::runtime_error("TwoLevelMG: coarse factorisation failed");
}

void TwoLevelMG::apply_block_jacobi(const Eigen::VectorXd& r, Eigen::VectorXd& z) const {
  z.resize(r.size());
  for (std::size_t f = 0; f < block_inv_.size(); ++f) {
    const auto o = static_cast<Eigen::Index>(f) * nt_;
    z.segment(o, nt_).noalias() = block_inv_[f] * r.segment(o, nt_);
  }
}

void TwoLevelMG::smooth(const Eigen::VectorXd& r, Eigen::VectorXd& x) const {
  const double upper = opts_.safety * lambda_max_;
  const double lower = opts_.lower_fraction * lambda_max_;
  const double theta = 0.5 * (upper + lower);
  const double delta = 0.5 * (upper - lower);
  const double sigma = theta / delta;
  double rho = 1.0 / sigma;
  Eigen::VectorXd res, z, d;
  for (int it = 0; it < opts_.chebyshev_order; ++it) {
    res = r - *s_ * x;
    apply_block_jacobi(res, z);
    if (it == 0) {
      d = z / theta;
    } else {
      const double rho_new = 1.0 / (2.0 * sigma - rho);
      d = (rho_new * rho) * d + (2.0 * rho_new / delta) * z;
      rho = rho_new;
    }
    x += d;
  }
}

void TwoLevelMG::apply(const Eigen::VectorXd& r, Eigen::VectorXd& z) const {
  z = Eigen::VectorXd::Zero(r.size());
  for (int i = 0; i < opts_.smooth_steps; ++i) smooth(r, z);
  Eigen::VectorXd rc = p_.transpose() * (r - *s_ * z);
  rc(0) = 0.0;
  z += p_ * coarse_.solve(rc);
  for (int i = 0; i < opts_.smooth_steps; ++i) smooth(r, z);
}

}  // namespace hdgeuler
