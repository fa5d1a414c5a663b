#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hdgeuler/tableau.hpp"

namespace hdgeuler {

/// Malformed text; the message starts with "<origin>:<line>:".
class ConfigParseError : public std::runtime_error {
 public:
  ConfigParseError(const std::string& origin, int line, const std::string& what);
  [[nodiscard]] int line() const { return line_; }

 private:
  int line_;
};

/// Well-formed text with an invalid value; `key()` is the dotted key path.
class ConfigValidationError : public std::runtime_error {
 public:
  ConfigValidationError(const std::string& key, const std::string& what);
  [[nodiscard]] const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Coefficients of a user-supplied tableau, in the printed (not shifted) form.
struct TableauOverride {
  std::string name = "custom";
  std::vector<std::vector<double>> a_im, a_ex;
  std::vector<double> b_im, b_ex, c;
  bool operator==(const TableauOverride&) const = default;
};

struct TracerConfig {
  bool enabled = false;
  int degree = 0;  // resolved to k when not given
  std::string ic = "gaussian";
  bool operator==(const TracerConfig&) const = default;
};

struct SolverConfig {
  double pressure_rtol = 1e-12;
  double velocity_rtol = 1e-10;
  int maxit = 1000;
  int smooth_steps = 1;
  int chebyshev_order = 2;
  bool operator==(const SolverConfig&) const = default;
};

struct OutputConfig {
  std::string dir = "output";
  int vtu_every = 0;             // 0: no cadence-based snapshots
  std::vector<double> vtu_times;  // snapshot at the steps closest to these times
  bool csv = true;
  bool operator==(const OutputConfig&) const = default;
};

struct StudyConfig {
  std::vector<int> degrees{1};
  std::vector<int> grids{8, 16};
  std::map<int, std::string> tableaus;  // per degree; defaults to the run tableau
  int steps = 5;                        // timed steps per cell (robustness, cost)
  bool operator==(const StudyConfig&) const = default;
};

/// Effective configuration of a run. Parsing resolves every derived value
/// (time step, step count, tracer degree), so the echo is self-contained.
struct SimConfig {
  std::string testcase = "taylor_green";  // taylor_green | shear_flow
  std::string scheme = "imex_hdg";        // imex_hdg | implicit_dg
  int n = 8;
  int k = 1;
  std::string tableau = "imex_euler";
  std::optional<TableauOverride> tableau_override;
  double final_time = 1.0;
  double dt = 0.125;
  int n_t = 8;
  int n_R = 2;
  bool literal_projection = false;
  double alpha = 1.0;
  double tau = 1.0;
  std::string flux = "upwind";  // upwind | central
  double kappa = 0.5;
  std::string pressure_reference = "benchmark";  // benchmark | euler
  double rho = 0.20943951023931953;
  double delta = 0.05;
  TracerConfig tracer;
  SolverConfig solver;
  OutputConfig output;
  StudyConfig study;

  bool operator==(const SimConfig&) const = default;

  /// The tableau in generic form (override if present).
  [[nodiscard]] ButcherTableau butcher_tableau() const;
};

SimConfig parse_config(const std::string& text, const std::string& origin = "<config>");
SimConfig load_config(const std::filesystem::path& path);
/// Canonical text of the effective configuration; parse_config(echo_config(c)) == c.
std::string echo_config(const SimConfig& config);

}  // namespace hdgeuler
