#include "hdgeuler/mixed_solver.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace hdgeuler {

void deflate_constant(Eigen::VectorXd& v) {
  if (v.size() > 0) v.array() -= v.mean();
}

double constant_fraction(const Eigen::VectorXd& v) {
  const double norm = v.norm();
  if (norm == 0.0) return 0.0;
  return std::abs(v.sum()) / (std::sqrt(static_cast<double>(v.size())) * norm);
}

MixedSolver::MixedSolver(const Discretisation& disc, const MixedBlocks& blocks, MixedSolveOptions opts)
    : disc_(&disc), blocks_(&blocks), opts_(opts) {
  const Mesh& mesh = disc.mesh();
  const auto& tp = disc.pressure_tab();
  const Eigen::VectorXd ref = tp.values.transpose() * Eigen::Map<const Eigen::VectorXd>(
                                                          tp.rule.weights.data(), static_cast<Eigen::Index>(tp.rule.weights.size()));
  pressure_weights_.resize(blocks.num_p);
  const double area = mesh.domain_length() * mesh.domain_length();
  for (int c = 0; c < mesh.num_cells(); ++c)
    pressure_weights_.segment(static_cast<Eigen::Index>(c) * blocks.np, blocks.np) = ref * (mesh.cell(c).det_jacobian / area);
}

MixedSolver::Entry& MixedSolver::entry(double c) {
  auto it = cache_.find(c);
  if (it != cache_.end()) return it->second;
  if (cache_.size() >= 8) cache_.clear();
  Entry e;
  e.system = std::make_unique<CondensedSystem>(*blocks_, c);
  e.mg = std::make_unique<TwoLevelMG>(e.system->matrix(), *disc_, opts_.mg);
  return cache_.emplace(c, std::move(e)).first->second;
}

const CondensedSystem& MixedSolver::condensed(double c) { return *entry(c).system; }
const TwoLevelMG& MixedSolver::multigrid(double c) { return *entry(c).mg; }

void MixedSolver::remove_pressure_mean(Eigen::VectorXd& p, Eigen::VectorXd& l) const {
  const double m = pressure_weights_.dot(p);
  p.array() -= m;
  l.array() -= m;
}

MixedSolution MixedSolver::solve(double c, const Eigen::VectorXd& rq, const Eigen::VectorXd& rp,
                                 const Eigen::VectorXd& rl, bool project_rhs) {
  const auto t0 = std::chrono::steady_clock::now();
  Entry& e = entry(c);
  const CondensedSystem& cs = *e.system;
  const TwoLevelMG& mg = *e.mg;
  Eigen::VectorXd g = cs.condense(rq, rp, rl);
  if (!project_rhs && constant_fraction(g) > opts_.consistency_tol)
    throw std::runtime_error("solve_mixed: right-hand side is inconsistent with the constant pressure mode");
  deflate_constant(g);

  MixedSolution out;
  out.rhs_norm = g.norm();
  out.l = Eigen::VectorXd::Zero(g.size());
  GmresOptions go;
  go.rtol = opts_.rtol;
  go.maxit = opts_.maxit;
  go.krylov_dim = opts_.krylov_dim;
  const SparseMatrix& s = cs.matrix();
  // S maps into the mean-free subspace; deflating its output removes the
  // rounding in the constant mode, which GMRES cannot reduce
  const auto apply_s = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    y.noalias() = s * x;
    deflate_constant(y);
  };
  out.stats = gmres(apply_s, g, out.l,
                    [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { mg.apply(x, y); }, go,
                    [](Eigen::VectorXd& v) { deflate_constant(v); });
  cs.back_substitute(out.l, rq, rp, out.q, out.p);
  remove_pressure_mean(out.p, out.l);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

GmresResult solve_tentative(const RowMatrix& a, const Eigen::VectorXd& rhs, Eigen::VectorXd& x,
                            const GmresOptions& opts) {
  const Ilu0 ilu(a);
  return gmres([&](const Eigen::VectorXd& v, Eigen::VectorXd& y) { y.noalias() = a * v; }, rhs, x,
               [&](const Eigen::VectorXd& v, Eigen::VectorXd& y) { ilu.apply(v, y); }, opts);
}

}  // namespace hdgeuler
