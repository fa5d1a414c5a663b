#include "hdgeuler/cases.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "hdgeuler/mesh.hpp"
#include "hdgeuler/output.hpp"
#include "hdgeuler/tableau.hpp"

namespace hdgeuler {

namespace {

constexpr double kPi = std::numbers::pi;

Vec2 taylor_green_q0(const Vec2& x) {
  const double a = 0.5 * (2.0 * x.x() - 1.0) * kPi;
  const double b = 0.5 * (2.0 * x.y() - 1.0) * kPi;
  return {-std::cos(a) * std::sin(b), std::sin(a) * std::cos(b)};
}

}  // namespace

FlowCase taylor_green(double kappa, PressureReference reference) {
  FlowCase fc;
  fc.name = "taylor_green";
  fc.length = 1.0;
  fc.periodic = false;
  fc.q0 = taylor_green_q0;
  fc.forcing = [kappa](const Vec2& x, double t) -> Vec2 { return -kappa * std::exp(-kappa * t) * taylor_green_q0(x); };
  fc.q_exact = [kappa](const Vec2& x, double t) -> Vec2 { return std::exp(-kappa * t) * taylor_green_q0(x); };
  if (reference == PressureReference::benchmark)
    fc.p_exact = [kappa](const Vec2& x, double t) {
      const double a = 0.5 * (2.0 * x.x() - 1.0) * kPi;
      const double b = 0.5 * (2.0 * x.y() - 1.0) * kPi;
      return std::exp(-2.0 * kappa * t) * (4.0 / (kPi * kPi) - std::cos(a) * std::cos(b));
    };
  else
    fc.p_exact = [kappa](const Vec2& x, double t) {
      const double a = (2.0 * x.x() - 1.0) * kPi;
      const double b = (2.0 * x.y() - 1.0) * kPi;
      return -0.25 * std::exp(-2.0 * kappa * t) * (std::cos(a) + std::cos(b));
    };
  return fc;
}

FlowCase shear_flow(double rho, double delta) {
  FlowCase fc;
  fc.name = "shear_flow";
  fc.length = 2.0 * kPi;
  fc.periodic = true;
  fc.q0 = [rho, delta](const Vec2& x) -> Vec2 {
    const double y = x.y();
    const double qx = y <= kPi ? std::tanh((y - 0.5 * kPi) / rho) : std::tanh((1.5 * kPi - y) / rho);
    return {qx, delta * std::sin(x.x())};
  };
  fc.forcing = [](const Vec2&, double) -> Vec2 { return Vec2::Zero(); };
  return fc;
}

double gaussian_tracer(const Vec2& x) {
  const double dx = x.x() - 0.5, dy = x.y() - 0.75;
  return std::exp(-50.0 * (dx * dx + dy * dy));
}

Field vorticity(const Discretisation& disc, const Field& q) {
  const SpacePtr& vp = disc.pressure_space();
  const CellTabulation& tab = disc.pressure_tab();
  const Mesh& mesh = disc.mesh();
  Field w(vp);
  const int np = disc.np();
  // the reference mass matrix scales with |det J| on affine cells
  Eigen::MatrixXd ref_mass = Eigen::MatrixXd::Zero(np, np);
  for (std::size_t g = 0; g < tab.rule.points.size(); ++g)
    ref_mass += tab.rule.weights[g] * tab.values.row(static_cast<Eigen::Index>(g)).transpose() *
                tab.values.row(static_cast<Eigen::Index>(g));
  const Eigen::LDLT<Eigen::MatrixXd> ref_solver(ref_mass);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(np);
    for (std::size_t g = 0; g < tab.rule.points.size(); ++g) {
      const Eigen::Matrix2d grad = q.vector_gradient(c, tab.rule.points[g]);
      const double curl = grad(1, 0) - grad(0, 1);
      rhs += tab.rule.weights[g] * curl * tab.values.row(static_cast<Eigen::Index>(g)).transpose();
    }
    const Eigen::VectorXd local = ref_solver.solve(rhs);
    const auto dofs = vp->cell_dofs(c);
    for (int i = 0; i < np; ++i) w.coefficients()(dofs[static_cast<std::size_t>(i)]) = local(i);
  }
  return w;
}

double divergence_norm(const MixedBlocks& blocks, const Field& q, const Field& p, const Field& l) {
  return constraint_residual(blocks, q.coefficients(), p.coefficients(), l.coefficients()).norm();
}

double kinetic_energy(const Field& q) {
  const double norm = l2_norm(q);
  return 0.5 * norm * norm;
}

ConvergenceRow run_taylor_green(int k, int n, const std::string& tableau_name, const ConvergenceOptions& opts) {
  ConvergenceRow row;
  row.k = k;
  row.n = n;
  row.tableau = tableau_name;
  const FlowCase fc = taylor_green(opts.kappa, opts.pressure_reference);
  auto mesh = std::make_shared<const Mesh>(Mesh::build_square(n, fc.length, fc.periodic));
  row.h = mesh->h();
  row.dt = opts.final_time / n;
  const Discretisation disc(mesh, k, opts.params);
  ImexHdgStepper stepper(disc, tableau(tableau_name), fc.forcing, opts.stepper);
  FlowState state = stepper.initial_state(fc.q0, 0.0);
  for (int step = 0; step < n; ++step) stepper.step(state, row.dt);
  const double t = state.t;
  row.err_q = l2_error(state.q, [&](const Vec2& x) { return fc.q_exact(x, t); });
  row.err_p = l2_error(state.p, [&](const Vec2& x) { return fc.p_exact(x, t); });
  return row;
}

std::vector<ConvergenceRow> run_convergence_study(const std::vector<int>& degrees, const std::vector<int>& grids,
                                                  const std::map<int, std::string>& tableau_for_k,
                                                  const ConvergenceOptions& opts) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<ConvergenceRow> rows;
  for (int k : degrees) {
    const auto it = tableau_for_k.find(k);
    if (it == tableau_for_k.end()) throw std::invalid_argument("no tableau given for k = " + std::to_string(k));
    std::optional<ConvergenceRow> previous;
    for (int n : grids) {
      ConvergenceRow row;
      try {
        row = run_taylor_green(k, n, it->second, opts);
      } catch (const std::exception& e) {
        row.k = k;
        row.n = n;
        row.tableau = it->second;
        row.h = std::sqrt(2.0) / n;
        row.dt = opts.final_time / n;
        row.err_q = row.err_p = nan;
        row.failure = e.what();
      }
      row.order_q = row.order_p = nan;
      if (previous) {
        const double ratio = std::log2(static_cast<double>(n) / previous->n);
        row.order_q = std::log2(previous->err_q / row.err_q) / ratio;
        row.order_p = std::log2(previous->err_p / row.err_p) / ratio;
      }
      rows.push_back(row);
      previous = row;
    }
  }
  return rows;
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  CsvWriter csv(out, {"k", "n", "h", "dt", "err_Q_L2", "err_p_L2", "order_Q", "order_p"});
  for (const auto& r : rows) csv.row(r.k, r.n, r.h, r.dt, r.err_q, r.err_p, r.order_q, r.order_p);
}

}  // namespace hdgeuler
