#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "hdgeuler/fespace.hpp"
#include "hdgeuler/forms.hpp"
#include "hdgeuler/timeloop.hpp"

namespace hdgeuler {

using TimeScalarFunction = std::function<double(const Vec2&, double)>;

/// A benchmark problem: domain, initial velocity, forcing and (optionally)
/// the exact solution.
struct FlowCase {
  std::string name;
  double length = 1.0;
  bool periodic = false;
  VectorFunction q0;
  TimeVectorFunction forcing;
  TimeVectorFunction q_exact;  // empty when unknown
  TimeScalarFunction p_exact;  // empty when unknown

  [[nodiscard]] bool has_exact_solution() const { return static_cast<bool>(q_exact) && static_cast<bool>(p_exact); }
};

/// Which closed form serves as the Taylor-Green pressure. `benchmark` is
/// exp(-2 kappa t)(4/pi^2 - cos a cos b), the stated benchmark value; `euler`
/// is -exp(-2 kappa t)(cos 2a + cos 2b)/4, the pressure that balances (Q.grad)Q
/// for the benchmark velocity (a = (2x-1)pi/2, b = (2y-1)pi/2).
enum class PressureReference { benchmark, euler };

/// Forced Taylor-Green vortex on the unit square with no-flux walls; the
/// exact velocity decays like exp(-kappa t).
FlowCase taylor_green(double kappa, PressureReference reference = PressureReference::benchmark);

inline constexpr double kShearFlowRho = 0.20943951023931953;  // pi / 15
inline constexpr double kShearFlowDelta = 0.05;

/// Double shear layer on the periodic square [0, 2 pi]^2.
FlowCase shear_flow(double rho = kShearFlowRho, double delta = kShearFlowDelta);

/// Gaussian blob centred at (1/2, 3/4) used as the default tracer profile.
double gaussian_tracer(const Vec2& x);

/// Curl of the velocity, L2-projected cellwise into the pressure space DG_k.
Field vorticity(const Discretisation& disc, const Field& q);

/// Euclidean norm of the assembled constraint residual Gamma(Q, p, l).
double divergence_norm(const MixedBlocks& blocks, const Field& q, const Field& p, const Field& l);

/// Kinetic energy 1/2 ||Q||^2.
double kinetic_energy(const Field& q);

struct ConvergenceRow {
  int k = 0;
  int n = 0;
  double h = 0.0;
  double dt = 0.0;
  double err_q = 0.0;
  double err_p = 0.0;
  double order_q = 0.0;  // NaN for the coarsest grid
  double order_p = 0.0;
  std::string tableau;
  std::string failure;  // empty on success
};

struct ConvergenceOptions {
  double kappa = 0.5;
  PressureReference pressure_reference = PressureReference::benchmark;
  double final_time = 1.0;
  StepperOptions stepper;
  FormParams params;
};

/// Final-time L2 errors of one Taylor-Green run with n_t = n steps.
ConvergenceRow run_taylor_green(int k, int n, const std::string& tableau_name, const ConvergenceOptions& opts = {});

/// Runs every (k, n) pair, with tableau_for_k choosing the timestepper of
/// each degree. Observed orders compare consecutive grids of the same k. A
/// failed run gives a row with NaN errors and the failure reason.
std::vector<ConvergenceRow> run_convergence_study(const std::vector<int>& degrees, const std::vector<int>& grids,
                                                  const std::map<int, std::string>& tableau_for_k,
                                                  const ConvergenceOptions& opts = {});

/// Writes the rows with header k,n,h,dt,err_Q_L2,err_p_L2,order_Q,order_p.
void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows);

}  // namespace hdgeuler
