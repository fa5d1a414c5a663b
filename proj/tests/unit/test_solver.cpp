#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "hdgeuler/condensation.hpp"
#include "hdgeuler/ilu0.hpp"
#include "hdgeuler/krylov.hpp"
#include "hdgeuler/mixed_solver.hpp"
#include "hdgeuler/multigrid.hpp"

using namespace hdgeuler;

namespace {

std::shared_ptr<const Mesh> square(int n, bool periodic) {
  return std::make_shared<const Mesh>(Mesh::build_square(n, 1.0, periodic));
}

Eigen::VectorXd random_vector(Eigen::Index n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

RowMatrix to_sparse(const Eigen::MatrixXd& a) { return a.sparseView(); }

// Dense full mixed operator assembled from the global blocks.
Eigen::MatrixXd dense_mixed(const GlobalMixedMatrices& g, double c) {
  const auto nq = g.M.rows(), np = g.Cpp.rows(), nl = g.Cll.rows();
  Eigen::MatrixXd a(nq + np + nl, nq + np + nl);
  a << Eigen::MatrixXd(g.M), -Eigen::MatrixXd(g.Gp), -Eigen::MatrixXd(g.Gl),  //
      Eigen::MatrixXd(g.D), c * Eigen::MatrixXd(g.Cpp), c * Eigen::MatrixXd(g.Cpl),  //
      Eigen::MatrixXd(g.B), c * Eigen::MatrixXd(g.Clp), c * Eigen::MatrixXd(g.Cll);
  return a;
}

struct DenseSolution {
  Eigen::VectorXd q, p, l;
};

// Dense bordered solve: the constant mode (0, 1, 1) is removed by requiring a
// mean-zero pressure, and the left null vector borders the extra column.
DenseSolution dense_solve(const Discretisation& disc, const GlobalMixedMatrices& g, double c, const Eigen::VectorXd& rhs) {
  const auto nq = g.M.rows(), np = g.Cpp.rows(), nl = g.Cll.rows();
  const auto n = nq + np + nl;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  const Field one = interpolate(disc.pressure_space(), [](const Vec2&) { return 1.0; });
  for (Eigen::Index i = 0; i < np; ++i) {
    Field e(disc.pressure_space());
    e.coefficients()(i) = 1.0;
    w(nq + i) = mean(e);
  }
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  y.segment(nq, np).setOnes();
  y.tail(nl).setConstant(-1.0);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, n + 1);
  a.topLeftCorner(n, n) = dense_mixed(g, c);
  a.topRightCorner(n, 1) = y;
  a.bottomLeftCorner(1, n) = w.transpose();
  Eigen::VectorXd b(n + 1);
  b << rhs, 0.0;
  const Eigen::VectorXd x = a.fullPivLu().solve(b);
  EXPECT_LE(std::abs(x(n)), 1e-10 * std::max(1.0, rhs.norm()));  // consistent right-hand side
  return {x.head(nq), x.segment(nq, np), x.segment(nq + np, nl)};
}

double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

}  // namespace

TEST(Gmres, IdentityConvergesInOneIteration) {
  const Eigen::VectorXd b = random_vector(7, 1);
  Eigen::VectorXd x;
  GmresOptions o;
  o.rtol = 1e-12;
  const auto r = gmres([](const Eigen::VectorXd& v, Eigen::VectorXd& y) { y = v; }, b, x, o);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_LE((x - b).norm(), 1e-14);
}

TEST(Gmres, DiagonalSystem) {
  const Eigen::Vector2d d(1.0, 4.0);
  Eigen::VectorXd x;
  GmresOptions o;
  o.rtol = 1e-12;
  const auto r = gmres([&](const Eigen::VectorXd& v, Eigen::VectorXd& y) { y = d.cwiseProduct(v); },
                       Eigen::VectorXd::Ones(2), x, o);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(x(0), 1.0, 1e-12);
  EXPECT_NEAR(x(1), 0.25, 1e-12);
}

TEST(Gmres, RestartsAndSignalsNonConvergence) {
  const int n = 60;
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) * 3.0;
  for (int i = 0; i + 1 < n; ++i) {
    a(i, i + 1) = -1.0;
    a(i + 1, i) = -1.2;
  }
  const Eigen::VectorXd b = random_vector(n, 2);
  auto op = [&](const Eigen::VectorXd& v, Eigen::VectorXd& y) { y = a * v; };
  GmresOptions o;
  o.rtol = 1e-11;
  o.krylov_dim = 5;
  Eigen::VectorXd x;
  const auto r = gmres(op, b, x, o);
  EXPECT_TRUE(r.converged);
  EXPECT_LE((a * x - b).norm() / b.norm(), 1e-11);
  o.maxit = 2;
  x.resize(0);
  EXPECT_THROW(gmres(op, b, x, o), SolverError);
  o.throw_on_failure = false;
  x.resize(0);
  const auto r2 = gmres(op, b, x, o);
  EXPECT_FALSE(r2.converged);
  EXPECT_GT(r2.residual, 1e-11);
}

TEST(Ilu0, DiagonalIsExactInverse) {
  const Eigen::VectorXd d = Eigen::Vector3d(2.0, -4.0, 0.5);
  const Ilu0 ilu(to_sparse(Eigen::MatrixXd(d.asDiagonal())));
  EXPECT_LE((ilu.solve(Eigen::Vector3d(1, 1, 1)) - Eigen::Vector3d(0.5, -0.25, 2.0)).norm(), 1e-15);
}

TEST(Ilu0, ExactWhenPatternSuffices) {
  Eigen::MatrixXd lower(4, 4);
  lower << 2, 0, 0, 0, 1, 3, 0, 0, -1, 2, 4, 0, 0.5, 0, 1, 5;
  Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(5, 5);
  for (int i = 0; i < 5; ++i) {
    tri(i, i) = 4.0 + i;
    if (i > 0) tri(i, i - 1) = -1.0 - 0.1 * i;
    if (i < 4) tri(i, i + 1) = -2.0;
  }
  for (const Eigen::MatrixXd& a : {lower, tri}) {
    const Ilu0 ilu(to_sparse(a));
    const Eigen::VectorXd b = random_vector(a.rows(), 3);
    EXPECT_LE((a * ilu.solve(b) - b).norm(), 1e-13);
  }
}

TEST(Ilu0, SignalsZeroPivot) {
  Eigen::MatrixXd a(2, 2);
  a << 1, 1, 1, 1;
  EXPECT_THROW(Ilu0{to_sparse(a)}, std::runtime_error);
}

TEST(Tentative, ZeroStepIsMassSolve) {
  const Discretisation disc(square(4, true), 1);
  const CellBlockMatrix m = assemble_velocity_mass(disc);
  const Eigen::VectorXd z = random_vector(disc.num_velocity_dofs(), 4);
  Eigen::VectorXd x;
  GmresOptions o;
  o.rtol = 1e-10;
  solve_tentative(m.matrix(), m.matrix() * z, x, o);
  EXPECT_LE((x - z).norm() / z.norm(), 1e-10);
}

TEST(Tentative, TaylorGreenStageConvergesQuickly) {
  const Discretisation disc(square(8, false), 1);
  const double pi = std::numbers::pi;
  const Field q0 = interpolate(disc.velocity_space(), [pi](const Vec2& p) {
    const double a = (2 * p.x() - 1) * pi / 2, b = (2 * p.y() - 1) * pi / 2;
    return Vec2(-std::cos(a) * std::sin(b), std::sin(a) * std::cos(b));
  });
  const CellBlockMatrix m = assemble_velocity_mass(disc);
  const CellBlockMatrix f = assemble_advection(disc, project_to_bdm(q0));
  const RowMatrix a = linear_combination(1.0, m.matrix(), -1.0 / 8.0, f.matrix());
  Eigen::VectorXd x;
  GmresOptions o;
  o.rtol = 1e-10;
  const auto r = solve_tentative(a, m.matrix() * q0.coefficients(), x, o);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 60);
}

class CondensationTest : public ::testing::TestWithParam<std::tuple<int, int, bool, double>> {};

TEST_P(CondensationTest, MatchesDenseSaddleSolve) {
  const auto [n, k, periodic, c] = GetParam();
  const Discretisation disc(square(n, periodic), k);
  const MixedBlocks blocks = assemble_mixed_blocks(disc);
  const GlobalMixedMatrices g = assemble_global(blocks);
  const Eigen::MatrixXd a = dense_mixed(g, c);
  // consistent right-hand side: the image of a random state
  const Eigen::VectorXd rhs = a * random_vector(a.cols(), 5);
  const DenseSolution want = dense_solve(disc, g, c, rhs);

  MixedSolver solver(disc, blocks);
  const auto nq = blocks.num_q, np = blocks.num_p;
  const MixedSolution got = solver.solve(c, rhs.head(nq), rhs.segment(nq, np), rhs.tail(blocks.num_l));
  EXPECT_LE(rel(got.q, want.q), 1e-10);
  EXPECT_LE(rel(got.p, want.p), 1e-10);
  EXPECT_LE(rel(got.l, want.l), 1e-10);
}

INSTANTIATE_TEST_SUITE_P(SmallMeshes, CondensationTest,
                         ::testing::Values(std::make_tuple(1, 1, false, 1.0), std::make_tuple(2, 1, true, 1.0),
                                           std::make_tuple(3, 1, false, 1.0), std::make_tuple(4, 1, true, 1.0),
                                           std::make_tuple(3, 2, false, 1.0), std::make_tuple(4, 2, true, 1.0),
                                           std::make_tuple(3, 1, true, 16.0), std::make_tuple(2, 2, false, 8.0)));

TEST(Condensation, SingleCellBackSubstitutionMatchesDenseOracle) {
  const Discretisation disc(square(1, false), 1);
  const MixedBlocks blocks = assemble_mixed_blocks(disc);
  const GlobalMixedMatrices g = assemble_global(blocks);
  const Eigen::MatrixXd a = dense_mixed(g, 1.0);
  const Eigen::VectorXd rhs = a * random_vector(a.cols(), 6);
  const DenseSolution want = dense_solve(disc, g, 1.0, rhs);
  const CondensedSystem cs(blocks, 1.0);
  const auto nq = blocks.num_q, np = blocks.num_p;
  // the trace component of the dense solution is a solution of the condensed system
  Eigen::VectorXd q, p;
  cs.back_substitute(want.l, rhs.head(nq), rhs.segment(nq, np), q, p);
  EXPECT_LE(rel(q, want.q), 1e-11);
  EXPECT_LE(rel(p, want.p), 1e-11);
  const Eigen::VectorXd gl = cs.condense(rhs.head(nq), rhs.segment(nq, np), rhs.tail(blocks.num_l));
  EXPECT_LE((cs.matrix() * want.l - gl).norm(), 1e-11 * gl.norm());
  EXPECT_LE((cs.apply_full(want.q, want.p, want.l) - rhs).norm(), 1e-11 * rhs.norm());
}

TEST(Condensation, ZeroRightHandSide) {
  const Discretisation disc(square(3, true), 2);
  const MixedBlocks blocks = assemble_mixed_blocks(disc);
  MixedSolver solver(disc, blocks);
  const auto s = solver.solve(1.0, Eigen::VectorXd::Zero(blocks.num_q), Eigen::VectorXd::Zero(blocks.num_p),
                              Eigen::VectorXd::Zero(blocks.num_l));
  EXPECT_EQ(s.q.norm() + s.p.norm() + s.l.norm(), 0.0);
}

TEST(Condensation, TraceOperatorIsSymmetricSemidefiniteWithConstantKernel) {
  for (bool periodic : {true, false})
    for (int k : {1, 2, 3})
      for (double c : {1.0, 25.0}) {
        const Discretisation disc(square(periodic ? 2 : 3, periodic), k);
        const MixedBlocks blocks = assemble_mixed_blocks(disc);
        const CondensedSystem cs(blocks, c);
        const Eigen::MatrixXd s(cs.matrix());
        EXPECT_LE((s - s.transpose()).norm(), 1e-10 * s.norm());
        EXPECT_LE((s * Eigen::VectorXd::Ones(s.rows())).norm(), 1e-11 * s.norm());
        const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (s + s.transpose())).eigenvalues();
        const double tol = 1e-10 * ev.maxCoeff();
        EXPECT_GE(ev(0), -tol);
        EXPECT_LE(std::abs(ev(0)), tol);
        EXPECT_GT(ev(1), tol);
      }
}

TEST(Condensation, RejectsInconsistentRightHandSide) {
  const Discretisation disc(square(2, true), 1);
  const MixedBlocks blocks = assemble_mixed_blocks(disc);
  MixedSolver solver(disc, blocks);
  const Eigen::VectorXd rl = Eigen::VectorXd::Ones(blocks.num_l);
  EXPECT_THROW(solver.solve(1.0, Eigen::VectorXd::Zero(blocks.num_q), Eigen::VectorXd::Zero(blocks.num_p), rl),
               std::runtime_error);
  const auto s = solver.solve(1.0, Eigen::VectorXd::Zero(blocks.num_q), Eigen::VectorXd::Zero(blocks.num_p), rl, true);
  EXPECT_LE(s.l.norm() + s.p.norm(), 1e-12);
}

TEST(Deflation, RemovesConstantMode) {
  Eigen::VectorXd c = Eigen::VectorXd::Constant(5, 2.5);
  deflate_constant(c);
  EXPECT_LE(c.norm(), 1e-15);
  Eigen::VectorXd z(4);
  z << 1, -2, 3, -2;
  const Eigen::VectorXd z0 = z;
  deflate_constant(z);
  EXPECT_LE((z - z0).norm(), 1e-14);
  Eigen::VectorXd r = random_vector(50, 7);
  deflate_constant(r);
  EXPECT_LE(std::abs(r.mean()), 1e-14);
  const Eigen::VectorXd r1 = r;
  deflate_constant(r);
  EXPECT_LE((r - r1).norm(), 1e-15);
}

TEST(Multigrid, ProlongationInvariants) {
  for (int k : {1, 2, 3}) {
    const auto mesh = square(3, false);
    const Discretisation disc(mesh, k);
    const MixedBlocks blocks = assemble_mixed_blocks(disc);
    const CondensedSystem cs(blocks, 1.0);
    const TwoLevelMG mg(cs.matrix(), disc);
    const SparseMatrix& p = mg.prolongation();
    EXPECT_LE((p * Eigen::VectorXd::Ones(p.cols()) - Eigen::VectorXd::Ones(p.rows())).norm(), 1e-14);
    // moment matching against the coarse function restricted to the skeleton
    const SpacePtr coarse = Space::make(mesh, Family::cg_scalar, 1);
    const Field phi(coarse, random_vector(coarse->total_dofs(), 8));
    const Field trace(disc.trace_space(), p * phi.coefficients());
    const LineRule rule = line_rule(8);
    for (int f = 0; f < mesh->num_facets(); ++f) {
      const Facet& fc = mesh->facet(f);
      for (int j = 0; j <= k; ++j) {
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
          const double s = rule.points[q];
          const double mu = disc.trace_space()->facet_basis().values(s)(j);
          lhs += rule.weights[q] * mu * trace.trace_value(f, s);
          rhs += rule.weights[q] * mu * phi.value(fc.plus.cell, side_reference_point(fc.plus, s));
        }
        EXPECT_NEAR(lhs, rhs, 1e-14);
      }
    }
    EXPECT_LE((mg.coarse_matrix() * Eigen::VectorXd::Ones(p.cols())).norm(), 1e-13);
  }
}

TEST(Multigrid, VCycleIsLinearAndContracts) {
  const Discretisation disc(square(8, true), 1);
  const MixedBlocks blocks = assemble_mixed_blocks(disc);
  const CondensedSystem cs(blocks, 1.0);
  const SparseMatrix& s = cs.matrix();
  const TwoLevelMG mg(s, disc);
  const Eigen::VectorXd x = random_vector(s.rows(), 9), y = random_vector(s.rows(), 10);
  Eigen::VectorXd bx, by, bxy;
  mg.apply(x, bx);
  mg.apply(y, by);
  mg.apply(2.0 * x - 3.0 * y, bxy);
  EXPECT_LE((bxy - (2.0 * bx - 3.0 * by)).norm(), 1e-12 * bxy.norm());

  auto energy = [&](const Eigen::VectorXd& v) { return std::sqrt(v.dot(s * v)); };
  Eigen::VectorXd e = x;
  deflate_constant(e);
  for (int cycle = 0; cycle < 3; ++cycle) {
    Eigen::VectorXd be;
    mg.apply(s * e, be);
    Eigen::VectorXd next = e - be;
    deflate_constant(next);
    EXPECT_LE(energy(next), 0.5 * energy(e));
    e = next;
  }
}

TEST(Multigrid, TraceSolveIterationBound) {
  const Discretisation disc(square(8, false), 1);
  const MixedBlocks blocks = assemble_mixed_blocks(disc);
  MixedSolver solver(disc, blocks);
  const GlobalMixedMatrices g = assemble_global(blocks);
  const Eigen::VectorXd rhs = dense_mixed(g, 1.0) * random_vector(blocks.num_q + blocks.num_p + blocks.num_l, 11);
  const auto s = solver.solve(1.0, rhs.head(blocks.num_q), rhs.segment(blocks.num_q, blocks.num_p), rhs.tail(blocks.num_l));
  EXPECT_TRUE(s.stats.converged);
  EXPECT_LE(s.stats.residual, 1e-12);
  EXPECT_LE(s.stats.iterations, 30);
}

// Mixed Poisson problem: M Q - G(p, l) = 0, Gamma = (psi, b) with b = -Laplace p*.
TEST(MixedSolver, ManufacturedMixedPoissonConverges) {
  const double pi = std::numbers::pi;
  const auto exact = [pi](const Vec2& x) { return std::cos(2 * pi * x.x()) * std::cos(2 * pi * x.y()); };
  const auto source = [&](const Vec2& x) { return 8 * pi * pi * exact(x); };
  std::vector<double> errors;
  for (int n : {4, 8, 16, 32}) {
    const Discretisation disc(square(n, false), 1);
    const MixedBlocks blocks = assemble_mixed_blocks(disc);
    Eigen::VectorXd rp = Eigen::VectorXd::Zero(blocks.num_p);
    const auto& tp = disc.pressure_tab();
    for (int c = 0; c < disc.mesh().num_cells(); ++c) {
      const Cell& cell = disc.mesh().cell(c);
      for (std::size_t q = 0; q < tp.rule.weights.size(); ++q)
        rp.segment(static_cast<Eigen::Index>(c) * blocks.np, blocks.np) +=
            tp.rule.weights[q] * cell.det_jacobian * source(cell.map(tp.rule.points[q])) *
            tp.values.row(static_cast<Eigen::Index>(q)).transpose();
    }
    MixedSolver solver(disc, blocks);
    const auto s = solver.solve(1.0, Eigen::VectorXd::Zero(blocks.num_q), rp, Eigen::VectorXd::Zero(blocks.num_l));
    const Field p(disc.pressure_space(), s.p);
    EXPECT_LE(std::abs(mean(p)), 1e-12 * s.p.norm());
    errors.push_back(l2_error(p, exact));
  }
  // The observed order approaches k + 1 = 2 from below (1.71, 1.91, 1.98).
  double previous = 0.0;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double order = std::log2(errors[i - 1] / errors[i]);
    EXPECT_GT(order, previous);
    previous = order;
  }
  EXPECT_GE(previous, 1.95);
}
