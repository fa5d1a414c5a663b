#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hdgeuler/cases.hpp"
#include "hdgeuler/config.hpp"

namespace hdgeuler {

/// Environment variable that relocates relative output directories.
inline constexpr const char* kOutputRootEnv = "HDG_EULER_OUTPUT_ROOT";

/// output.dir, prefixed with $HDG_EULER_OUTPUT_ROOT when that is set and the
/// directory is relative.
std::filesystem::path output_directory(const SimConfig& config);

FlowCase make_case(const SimConfig& config);
FormParams form_params(const SimConfig& config);
StepperOptions stepper_options(const SimConfig& config);

struct RunSummary {
  std::filesystem::path dir;
  int steps = 0;  // completed steps
  double t = 0.0;
  double energy0 = 0.0;
  double energy = 0.0;
  double div_residual = 0.0;
  std::optional<double> err_q, err_p;  // final errors of exact-solution cases
  std::vector<std::filesystem::path> snapshots;
  bool ok = true;
  std::string failure;  // step, stage and reason of the failing solve
};

/// Runs one simulation and writes config.ini, timeseries.csv, solvelog.csv,
/// errors.csv (exact-solution cases) and the VTU series into the output
/// directory. Solver failures stop the run: the summary and failure.txt
/// describe the failing step.
RunSummary run(const SimConfig& config);

struct RobustnessRow {
  int k = 0;
  int n = 0;
  std::string tableau;
  int steps = 0;
  double mean_tentative = 0.0;
  double mean_pressure = 0.0;  // Richardson pressure corrections
  double mean_final = 0.0;     // final-update solve of each step
  double mean_reconstruct = 0.0;
  std::string failure;
};

struct CostRow {
  int k = 0;
  int n = 0;
  long dofs = 0;  // velocity + pressure unknowns
  int steps = 0;
  double seconds_per_step = 0.0;  // median over the timed steps
  std::string failure;
};

/// Least-squares line log(seconds) = slope log(N) + intercept.
struct CostFit {
  int k = 0;
  double slope = 0.0;
  double intercept = 0.0;
  int points = 0;
};

/// Both studies run `study.steps` steps of the configured case for every
/// (k, n) with dt = T / n; setup is not timed.
std::vector<RobustnessRow> run_robustness_study(const SimConfig& config);
std::vector<CostRow> run_cost_study(const SimConfig& config);
/// One fit per degree with at least two successful rows.
std::vector<CostFit> fit_cost(const std::vector<CostRow>& rows);

/// kind: convergence | robustness | cost. Writes the CSVs into the output
/// directory and returns it.
std::filesystem::path run_study(const std::string& kind, const SimConfig& config);

}  // namespace hdgeuler
