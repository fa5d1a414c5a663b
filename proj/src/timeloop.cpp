#include "hdgeuler/timeloop.hpp"

#include <chrono>
#include <stdexcept>

#include <Eigen/SparseLU>

#include "hdgeuler/ilu0.hpp"

namespace hdgeuler {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// (phi_i)_Omega / |Omega| for the pressure basis functions.
Eigen::VectorXd pressure_mean_weights(const Discretisation& disc) {
  const Mesh& mesh = disc.mesh();
  const auto& tp = disc.pressure_tab();
  Eigen::VectorXd ref = Eigen::VectorXd::Zero(disc.np());
  for (std::size_t q = 0; q < tp.rule.weights.size(); ++q)
    ref += tp.rule.weights[q] * tp.values.row(static_cast<Eigen::Index>(q)).transpose();
  const double area = mesh.domain_length() * mesh.domain_length();
  Eigen::VectorXd w(disc.num_pressure_dofs());
  for (int c = 0; c < mesh.num_cells(); ++c)
    w.segment(static_cast<Eigen::Index>(c) * disc.np(), disc.np()) = ref * (mesh.cell(c).det_jacobian / area);
  return w;
}

}  // namespace

ImexHdgStepper::ImexHdgStepper(const Discretisation& disc, ButcherTableau tab, TimeVectorFunction forcing,
                               StepperOptions opts)
    : disc_(&disc),
      tab_(std::move(tab)),
      forcing_(std::move(forcing)),
      opts_(opts),
      blocks_(assemble_mixed_blocks(disc)),
      mass_(assemble_velocity_mass(disc)),
      advection_(disc.mesh(), disc.nq()),
      tentative_(disc.mesh(), disc.nq()),
      divergence_(assemble_weak_divergence(disc)),
      bdm_(disc.velocity_space()),
      mixed_(disc, blocks_, opts.pressure) {
  tab_.validate();
  if (opts_.richardson_iterations < 1) throw std::invalid_argument("richardson iterations must be >= 1");
}

double ImexHdgStepper::energy(const Field& q) const {
  return 0.5 * q.coefficients().dot(apply_velocity_mass(blocks_, q.coefficients()));
}

FlowState ImexHdgStepper::initial_state(const VectorFunction& q0, double t0) {
  FlowState s;
  s.t = t0;
  s.q = interpolate(disc_->velocity_space(), q0);
  auto [p, l] = reconstruct_pressure(s.q, t0);
  s.p = std::move(p);
  s.l = std::move(l);
  return s;
}

std::pair<Field, Field> ImexHdgStepper::reconstruct_pressure(const Field& q, double t) {
  const auto t0 = Clock::now();
  const Field fp = compute_fp(q, forcing_, t);
  const Eigen::VectorXd rp = divergence_ * fp.coefficients();
  const Eigen::VectorXd rl = -assemble_boundary_normal_load(*disc_, forcing_, t);
  // The source is compatible with the constant pressure mode only up to the
  // discretisation error, so its kernel component is projected out.
  MixedSolution sol = mixed_.solve(1.0, Eigen::VectorXd::Zero(blocks_.num_q), rp, rl, true);
  records_.push_back({-1, "reconstruct", sol.stats.iterations, sol.stats.residual, seconds_since(t0)});
  return {Field(disc_->pressure_space(), std::move(sol.p)), Field(disc_->trace_space(), std::move(sol.l))};
}

void ImexHdgStepper::richardson_stage_solve(double a_dt, const Eigen::VectorXd& r, const CellBlockMatrix& advection,
                                            Eigen::VectorXd& q, Eigen::VectorXd& p, Eigen::VectorXd& l, int stage) {
  if (a_dt == 0.0) throw std::invalid_argument("richardson_stage_solve: a_ii dt = 0");
  const RowMatrix& m = mass_.matrix();
  const RowMatrix& f = advection.matrix();
  tentative_.matrix() = linear_combination(1.0, m, -a_dt, f);
  auto t0 = Clock::now();
  const Ilu0 ilu(tentative_.matrix());
  const double ilu_seconds = seconds_since(t0);
  defects_.clear();
  const double c = 1.0 / a_dt;
  for (int it = 0; it < opts_.richardson_iterations; ++it) {
    const Eigen::VectorXd dr = r - m * q + a_dt * (f * q + apply_pressure_gradient(blocks_, p, l));
    defects_.push_back(dr.norm());

    t0 = Clock::now();
    Eigen::VectorXd qbar = Eigen::VectorXd::Zero(q.size());
    const GmresResult tent = gmres([&](const Eigen::VectorXd& v, Eigen::VectorXd& y) { tentative_.apply(v, y); }, dr, qbar,
                                   [&](const Eigen::VectorXd& v, Eigen::VectorXd& y) { ilu.apply(v, y); }, opts_.tentative);
    records_.push_back({stage, "tentative", tent.iterations, tent.residual, seconds_since(t0) + (it == 0 ? ilu_seconds : 0.0)});

    t0 = Clock::now();
    MixedSolution inc;
    if (opts_.literal_projection) {
      const Eigen::VectorXd rp = -(divergence_ * qbar) / a_dt;
      inc = mixed_.solve(1.0, Eigen::VectorXd::Zero(q.size()), rp, Eigen::VectorXd::Zero(l.size()), true);
    } else {
      // Increment that restores the constraint for the updated iterate:
      // Gamma(Q + Qbar + a dt dQ, p + dp, l + dl) = 0, divided by a dt.
      const Eigen::VectorXd gam = constraint_residual(blocks_, q + qbar, p, l) * (-c);
      inc = mixed_.solve(c, Eigen::VectorXd::Zero(q.size()), gam.head(blocks_.num_p), gam.tail(blocks_.num_l), true);
    }
    records_.push_back({stage, "pressure", inc.stats.iterations, inc.stats.residual, seconds_since(t0)});
    q += qbar + a_dt * inc.q;
    p += inc.p;
    l += inc.l;
  }
}

void ImexHdgStepper::step(FlowState& state, double dt) {
  const int s = tab_.stages();
  const double tn = state.t;
  const Eigen::VectorXd m0 = apply_velocity_mass(blocks_, state.q.coefficients());
  std::vector<Eigen::VectorXd> mq(static_cast<std::size_t>(s)), r(static_cast<std::size_t>(s)),
      fex(static_cast<std::size_t>(s));
  for (int j = 0; j < s; ++j) {
    const bool used = tab_.b_ex(j) != 0.0 || tab_.a_ex.col(j).any();
    fex[static_cast<std::size_t>(j)] = used ? assemble_forcing(*disc_, blocks_, forcing_, tn + tab_.c(j) * dt)
                                            : Eigen::VectorXd::Zero(blocks_.num_q);
  }
  mq[0] = m0;
  stage_q_.assign(static_cast<std::size_t>(s), Eigen::VectorXd());
  stage_q_[0] = state.q.coefficients();
  Eigen::VectorXd q = state.q.coefficients(), p = state.p.coefficients(), l = state.l.coefficients();
  for (int i = 1; i < s; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    r[iu] = imex_stage_residual(tab_, i, dt, m0, mq, r, fex);
    const Field qstar = bdm_.apply(Field(disc_->velocity_space(), q));
    assemble_advection(*disc_, qstar, advection_);
    richardson_stage_solve(tab_.a_im(i, i) * dt, r[iu], advection_, q, p, l, i);
    mq[iu] = apply_velocity_mass(blocks_, q);
    stage_q_[iu] = q;
  }

  const Eigen::VectorXd rn = imex_final_residual(tab_, dt, m0, mq, r, fex);
  const double bdt = tab_.b_im(s - 1) * dt;
  if (bdt == 0.0) throw std::invalid_argument("final update: b_im(s-1) = 0");
  const auto t0 = Clock::now();
  MixedSolution fin = mixed_.solve(1.0 / bdt, rn, Eigen::VectorXd::Zero(blocks_.num_p), Eigen::VectorXd::Zero(blocks_.num_l));
  records_.push_back({s, "final", fin.stats.iterations, fin.stats.residual, seconds_since(t0)});
  const Eigen::VectorXd dp = fin.p / bdt, dl = fin.l / bdt;
  last_gamma_ = constraint_residual(blocks_, fin.q, dp, dl).norm();
  last_rhs_norm_ = fin.rhs_norm / bdt;

  state.q.coefficients() = fin.q;
  state.t = tn + dt;
  auto [pn, ln] = reconstruct_pressure(state.q, state.t);
  state.p = std::move(pn);
  state.l = std::move(ln);
}

TracerStepper::TracerStepper(const Discretisation& disc, int tracer_degree, ButcherTableau tab)
    : disc_(&disc),
      tab_(std::move(tab)),
      advection_(disc.mesh_ptr(), tracer_degree, disc.k() + 1),
      cg_(disc.velocity_space()),
      a_(disc.mesh(), advection_.space()->local_size()) {
  tab_.validate();
}

void TracerStepper::step(Field& tracer, const std::vector<Eigen::VectorXd>& stage_q, double dt) {
  const int s = tab_.stages();
  if (static_cast<int>(stage_q.size()) != s) throw std::invalid_argument("TracerStepper: stage count mismatch");
  const Eigen::VectorXd q0 = tracer.coefficients();
  std::vector<Eigen::VectorXd> stage(static_cast<std::size_t>(s));
  std::vector<Eigen::VectorXd> rate(static_cast<std::size_t>(s));  // A(U_i) q_i, computed on demand
  auto rate_of = [&](int j) -> const Eigen::VectorXd& {
    auto& rj = rate[static_cast<std::size_t>(j)];
    if (rj.size() == 0) {
      const Field u = cg_.apply(Field(disc_->velocity_space(), stage_q[static_cast<std::size_t>(j)]));
      advection_.assemble(u, a_);
      rj = a_.matrix() * stage[static_cast<std::size_t>(j)];
    }
    return rj;
  };
  stage[0] = q0;
  for (int i = 1; i < s; ++i) {
    Eigen::VectorXd inc = Eigen::VectorXd::Zero(q0.size());
    for (int j = 0; j < i; ++j)
      if (tab_.a_ex(i, j) != 0.0) inc += tab_.a_ex(i, j) * rate_of(j);
    stage[static_cast<std::size_t>(i)] = q0 + dt * advection_.solve_mass(inc);
  }
  Eigen::VectorXd inc = Eigen::VectorXd::Zero(q0.size());
  for (int i = 0; i < s; ++i)
    if (tab_.b_ex(i) != 0.0) inc += tab_.b_ex(i) * rate_of(i);
  tracer.coefficients() = q0 + dt * advection_.solve_mass(inc);
}

ImplicitDgStepper::ImplicitDgStepper(const Discretisation& disc, TimeVectorFunction forcing)
    : disc_(&disc),
      forcing_(std::move(forcing)),
      blocks_(assemble_mixed_blocks(disc)),
      mass_(assemble_velocity_mass(disc)),
      advection_(disc.mesh(), disc.nq()),
      gtilde_(assemble_dg_pressure_gradient(disc)),
      bdm_(disc.velocity_space()),
      pressure_weights_(pressure_mean_weights(disc)) {}

void ImplicitDgStepper::step(FlowState& state, double dt) {
  const auto t0 = Clock::now();
  const Eigen::Index nq = blocks_.num_q, np = blocks_.num_p;
  assemble_advection(*disc_, bdm_.apply(state.q), advection_);
  const RowMatrix a = linear_combination(1.0, mass_.matrix(), -dt, advection_.matrix());
  Triplets t;
  t.reserve(static_cast<std::size_t>(a.nonZeros() + 2 * gtilde_.nonZeros() + 2 * np));
  for (int i = 0; i < a.outerSize(); ++i)
    for (RowMatrix::InnerIterator it(a, i); it; ++it) t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int j = 0; j < gtilde_.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(gtilde_, j); it; ++it) {
      const int row = static_cast<int>(it.row()), col = static_cast<int>(nq + it.col());
      t.emplace_back(row, col, -dt * it.value());
      t.emplace_back(col, row, it.value());
    }
  // mean-zero pressure, bordered with the left null vector (0, 1)
  const auto border = static_cast<int>(nq + np);
  for (Eigen::Index i = 0; i < np; ++i) {
    t.emplace_back(border, static_cast<int>(nq + i), pressure_weights_(i));
    t.emplace_back(static_cast<int>(nq + i), border, 1.0);
  }
  SparseMatrix sys(nq + np + 1, nq + np + 1);
  sys.setFromTriplets(t.begin(), t.end());
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(sys);
  if (lu.info() != Eigen::Success) throw std::runtime_error("implicit DG step: singular system");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nq + np + 1);
  rhs.head(nq) = apply_velocity_mass(blocks_, state.q.coefficients()) +
                 dt * assemble_forcing(*disc_, blocks_, forcing_, state.t);
  const Eigen::VectorXd x = lu.solve(rhs);
  state.q.coefficients() = x.head(nq);
  state.p.coefficients() = x.segment(nq, np);
  state.t += dt;
  last_gamma_ = (gtilde_.transpose() * state.q.coefficients()).norm();
  records_.push_back({1, "implicit", 1, (sys * x - rhs).norm() / std::max(rhs.norm(), 1e-300), seconds_since(t0)});
}

double ImplicitDgStepper::divergence(const Field& q) const { return (gtilde_.transpose() * q.coefficients()).norm(); }

}  // namespace hdgeuler
