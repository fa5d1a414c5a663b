#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "hdgeuler/cases.hpp"
#include "hdgeuler/quadrature.hpp"

using namespace hdgeuler;
using std::numbers::pi;

namespace {

std::shared_ptr<const Mesh> square(int n, bool periodic = false, double length = 1.0) {
  return std::make_shared<const Mesh>(Mesh::build_square(n, length, periodic));
}

// integral over the unit square by a tensor Gauss rule
template <typename F>
double integrate_unit_square(F f) {
  const auto [x, w] = gauss_legendre(20);
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) sum += w[i] * w[j] * f(Vec2(x[i], x[j]));
  return sum;
}

}  // namespace

TEST(TaylorGreen, PointValues) {
  const FlowCase fc = taylor_green(0.5);
  EXPECT_NEAR(fc.q0(Vec2(0.5, 0.0)).x(), 1.0, 1e-15);
  EXPECT_NEAR(fc.q0(Vec2(0.5, 0.0)).y(), 0.0, 1e-15);
  EXPECT_NEAR(fc.p_exact(Vec2(0.5, 0.5), 0.0), 4.0 / (pi * pi) - 1.0, 1e-15);
  EXPECT_NEAR(fc.p_exact(Vec2(0.5, 0.5), 0.0), -0.5947154, 5e-7);
  EXPECT_NEAR(fc.q_exact(Vec2(0.5, 0.0), 2.0).x(), std::exp(-1.0), 1e-15);
  const Vec2 f = fc.forcing(Vec2(0.5, 0.0), 2.0);
  EXPECT_NEAR(f.x(), -0.5 * std::exp(-1.0), 1e-15);
  EXPECT_FALSE(fc.periodic);
  EXPECT_TRUE(fc.has_exact_solution());
}

TEST(TaylorGreen, PressureHasZeroMean) {
  for (auto ref : {PressureReference::benchmark, PressureReference::euler}) {
    const FlowCase fc = taylor_green(0.5, ref);
    for (double t : {0.0, 0.3, 1.0}) EXPECT_NEAR(integrate_unit_square([&](const Vec2& x) { return fc.p_exact(x, t); }), 0.0, 1e-12);
  }
}

TEST(TaylorGreen, NoNormalFlowOnBoundary) {
  const FlowCase fc = taylor_green(0.5);
  for (int i = 0; i <= 20; ++i) {
    const double s = i / 20.0;
    EXPECT_LE(std::abs(fc.q0(Vec2(0.0, s)).x()), 1e-14);
    EXPECT_LE(std::abs(fc.q0(Vec2(1.0, s)).x()), 1e-14);
    EXPECT_LE(std::abs(fc.q0(Vec2(s, 0.0)).y()), 1e-14);
    EXPECT_LE(std::abs(fc.q0(Vec2(s, 1.0)).y()), 1e-14);
  }
}

TEST(TaylorGreen, EulerPressureBalancesAdvection) {
  // grad p = -(Q.grad)Q for the consistent reference, checked by central differences
  const FlowCase fc = taylor_green(0.5, PressureReference::euler);
  const double eps = 1e-6;
  for (const Vec2& x : {Vec2(0.3, 0.2), Vec2(0.7, 0.55), Vec2(0.1, 0.9)}) {
    const Vec2 dx(eps, 0.0), dy(0.0, eps);
    const Vec2 gp((fc.p_exact(x + dx, 0.0) - fc.p_exact(x - dx, 0.0)) / (2 * eps),
                  (fc.p_exact(x + dy, 0.0) - fc.p_exact(x - dy, 0.0)) / (2 * eps));
    const Vec2 q = fc.q0(x);
    const Vec2 dqdx = (fc.q0(x + dx) - fc.q0(x - dx)) / (2 * eps), dqdy = (fc.q0(x + dy) - fc.q0(x - dy)) / (2 * eps);
    const Vec2 adv = q.x() * dqdx + q.y() * dqdy;
    EXPECT_NEAR(gp.x(), -adv.x(), 1e-7);
    EXPECT_NEAR(gp.y(), -adv.y(), 1e-7);
  }
}

TEST(ShearFlow, PointValues) {
  const FlowCase fc = shear_flow();
  EXPECT_NEAR(fc.length, 2.0 * pi, 1e-15);
  EXPECT_TRUE(fc.periodic);
  EXPECT_FALSE(fc.has_exact_solution());
  EXPECT_NEAR(fc.q0(Vec2(0.0, pi / 2)).x(), 0.0, 1e-15);
  EXPECT_NEAR(fc.q0(Vec2(0.0, pi / 2)).y(), 0.0, 1e-15);
  EXPECT_NEAR(fc.q0(Vec2(pi / 2, pi / 2)).x(), 0.0, 1e-15);
  EXPECT_NEAR(fc.q0(Vec2(pi / 2, pi / 2)).y(), 0.05, 1e-15);
  EXPECT_NEAR(fc.q0(Vec2(0.3, pi)).x(), 0.99999938, 1e-8);
  EXPECT_NEAR(fc.q0(Vec2(0.3, pi)).x(), std::tanh(7.5), 1e-15);
  EXPECT_EQ(fc.forcing(Vec2(1.0, 2.0), 3.0), Vec2::Zero());
}

TEST(ShearFlow, ContinuousAcrossMiddleAndPeriodic) {
  const FlowCase fc = shear_flow();
  EXPECT_NEAR(fc.q0(Vec2(1.0, pi - 1e-12)).x(), fc.q0(Vec2(1.0, pi + 1e-12)).x(), 1e-10);
  EXPECT_NEAR(fc.q0(Vec2(1.0, 0.0)).x(), fc.q0(Vec2(1.0, 2 * pi)).x(), 1e-12);
  EXPECT_NEAR(fc.q0(Vec2(0.0, 1.0)).y(), fc.q0(Vec2(2 * pi, 1.0)).y(), 1e-12);
}

TEST(Vorticity, RigidRotationAndConstant) {
  const Discretisation disc(square(3), 2);
  const Field rot = interpolate(disc.velocity_space(), [](const Vec2& x) { return Vec2(-x.y(), x.x()); });
  const Field w = vorticity(disc, rot);
  EXPECT_LT(l2_error(w, [](const Vec2&) { return 2.0; }), 1e-12);
  const Field c = interpolate(disc.velocity_space(), [](const Vec2&) { return Vec2(0.3, -1.2); });
  EXPECT_LT(l2_norm(vorticity(disc, c)), 1e-12);
}

TEST(Vorticity, TaylorGreenMatchesAnalyticCurl) {
  // omega = dQy/dx - dQx/dy = 2 pi cos(a) cos(b) with a, b the shifted coordinates
  const FlowCase fc = taylor_green(0.5);
  const auto curl = [](const Vec2& x) {
    return 2.0 * pi * std::cos((2.0 * x.x() - 1.0) * pi / 2) * std::cos((2.0 * x.y() - 1.0) * pi / 2);
  };
  double previous = 0.0;
  for (int n : {4, 8, 16}) {
    const Discretisation disc(square(n), 1);
    const double err = l2_error(vorticity(disc, interpolate(disc.velocity_space(), fc.q0)), curl);
    if (n > 4) {
      EXPECT_GE(std::log2(previous / err), 1.8);
    }
    previous = err;
  }
  EXPECT_LT(previous, 1e-2);
}

TEST(Diagnostics, DivergenceNorm) {
  const Discretisation disc(square(3), 2);
  const MixedBlocks blocks = assemble_mixed_blocks(disc);
  const Field p(disc.pressure_space()), l(disc.trace_space());
  // cubic stream-function field, divergence-free with no normal flow
  const Field swirl = interpolate(disc.velocity_space(), [](const Vec2& x) {
    return Vec2(x.x() * (1 - x.x()) * (1 - 2 * x.y()), -(1 - 2 * x.x()) * x.y() * (1 - x.y()));
  });
  EXPECT_LT(divergence_norm(blocks, swirl, p, l), 1e-12);
  const Field expand = interpolate(disc.velocity_space(), [](const Vec2& x) { return Vec2(x.x(), 0.0); });
  EXPECT_GT(divergence_norm(blocks, expand, p, l), 1e-3);
}

TEST(Diagnostics, KineticEnergy) {
  const Discretisation disc(square(2), 1);
  const Field c = interpolate(disc.velocity_space(), [](const Vec2&) { return Vec2(1.0, 2.0); });
  EXPECT_NEAR(kinetic_energy(c), 2.5, 1e-13);
}

TEST(ConvergenceStudy, OrdersAndCsv) {
  ConvergenceOptions opts;
  opts.final_time = 0.25;
  const auto rows = run_convergence_study({1}, {4, 8}, {{1, "imex_euler"}}, opts);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_TRUE(std::isnan(rows[0].order_q));
  EXPECT_TRUE(std::isfinite(rows[1].order_q));
  EXPECT_GT(rows[1].order_q, 0.5);
  EXPECT_DOUBLE_EQ(rows[1].dt, 0.25 / 8);
  std::ostringstream out;
  write_convergence_csv(out, rows);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "k,n,h,dt,err_Q_L2,err_p_L2,order_Q,order_p");
  EXPECT_THROW(run_convergence_study({2}, {4}, {{1, "imex_euler"}}, opts), std::invalid_argument);
}
