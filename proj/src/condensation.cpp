#include "hdgeuler/condensation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hdgeuler {

namespace {

Eigen::VectorXd gather_trace(const MixedBlocks& b, int c, const Eigen::VectorXd& l) {
  Eigen::VectorXd lc(b.nl);
  for (int j = 0; j < b.nl; ++j) lc(j) = l(b.trace_dof(c, j));
  return lc;
}

}  // namespace

CondensedSystem::CondensedSystem(const MixedBlocks& blocks, double c) : blocks_(&blocks), c_(c) {
  const int nq = blocks.nq, np = blocks.np, nl = blocks.nl;
  const int nloc = nq + np;
  const auto ncells = blocks.cells.size();
  lu_.reserve(ncells);
  a21_inv_.resize(ncells);
  inv_a12_.resize(ncells);
  Triplets trips;
  trips.reserve(ncells * static_cast<std::size_t>(nl * nl));
  Eigen::MatrixXd a11(nloc, nloc), a12(nloc, nl), a21(nl, nloc);
  for (std::size_t k = 0; k < ncells; ++k) {
    const LocalMixedBlocks& b = blocks.cells[k];
    a11 << b.M, -b.Gp, b.D, c * b.Cpp;
    a12 << -b.Gl, c * b.Cpl;
    a21 << b.B, c * b.Clp;
    lu_.emplace_back(a11);
    const double scale = a11.cwiseAbs().maxCoeff();
    const double rcond = lu_.back().rcond();
    if (!(rcond > 1e3 * std::numeric_limits<double>::epsilon()) || scale == 0.0)
      throw std::runtime_error("condense: singular local block in cell " + std::to_string(k));
    inv_a12_[k] = lu_.back().solve(a12);
    a21_inv_[k] = a21 * lu_.back().inverse();
    const Eigen::MatrixXd sk = a21 * inv_a12_[k] - c * b.Cll;
    const int ci = static_cast<int>(k);
    for (int i = 0; i < nl; ++i)
      for (int j = 0; j < nl; ++j) trips.emplace_back(blocks.trace_dof(ci, i), blocks.trace_dof(ci, j), sk(i, j));
  }
  s_.resize(blocks.num_l, blocks.num_l);
  s_.setFromTriplets(trips.begin(), trips.end());
  s_.makeCompressed();
}

Eigen::VectorXd CondensedSystem::condense(const Eigen::VectorXd& rq, const Eigen::VectorXd& rp,
                                          const Eigen::VectorXd& rl) const {
  const MixedBlocks& b = *blocks_;
  // S = -(A22 - A21 A11^{-1} A12), so g = -(r_l - A21 A11^{-1} r_loc)
  Eigen::VectorXd g = -rl;
  Eigen::VectorXd rloc(b.nq + b.np);
  for (std::size_t k = 0; k < b.cells.size(); ++k) {
    rloc << rq.segment(static_cast<Eigen::Index>(k) * b.nq, b.nq), rp.segment(static_cast<Eigen::Index>(k) * b.np, b.np);
    const Eigen::VectorXd t = a21_inv_[k] * rloc;
    for (int j = 0; j < b.nl; ++j) g(b.trace_dof(static_cast<int>(k), j)) += t(j);
  }
  return g;
}

void CondensedSystem::back_substitute(const Eigen::VectorXd& l, const Eigen::VectorXd& rq, const Eigen::VectorXd& rp,
                                      Eigen::VectorXd& q, Eigen::VectorXd& p) const {
  const MixedBlocks& b = *blocks_;
  q.resize(b.num_q);
  p.resize(b.num_p);
  Eigen::VectorXd rloc(b.nq + b.np);
  for (std::size_t k = 0; k < b.cells.size(); ++k) {
    const auto ko = static_cast<Eigen::Index>(k);
    rloc << rq.segment(ko * b.nq, b.nq), rp.segment(ko * b.np, b.np);
    const Eigen::VectorXd x = lu_[k].solve(rloc) - inv_a12_[k] * gather_trace(b, static_cast<int>(k), l);
    q.segment(ko * b.nq, b.nq) = x.head(b.nq);
    p.segment(ko * b.np, b.np) = x.tail(b.np);
  }
}

Eigen::VectorXd CondensedSystem::apply_full(const Eigen::VectorXd& q, const Eigen::VectorXd& p,
                                            const Eigen::VectorXd& l) const {
  const MixedBlocks& b = *blocks_;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(b.num_q + b.num_p + b.num_l);
  for (std::size_t k = 0; k < b.cells.size(); ++k) {
    const auto ko = static_cast<Eigen::Index>(k);
    const LocalMixedBlocks& m = b.cells[k];
    const auto qc = q.segment(ko * b.nq, b.nq);
    const auto pc = p.segment(ko * b.np, b.np);
    const Eigen::VectorXd lc = gather_trace(b, static_cast<int>(k), l);
    out.segment(ko * b.nq, b.nq) = m.M * qc - m.Gp * pc - m.Gl * lc;
    out.segment(b.num_q + ko * b.np, b.np) = m.D * qc + c_ * (m.Cpp * pc + m.Cpl * lc);
    const Eigen::VectorXd mu = m.B * qc + c_ * (m.Clp * pc + m.Cll * lc);
    for (int j = 0; j < b.nl; ++j) out(b.num_q + b.num_p + b.trace_dof(static_cast<int>(k), j)) += mu(j);
  }
  return out;
}

}  // namespace hdgeuler
