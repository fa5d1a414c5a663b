// hdgeuler: run simulations and studies from an INI config.
//
//   hdgeuler run <config>
//   hdgeuler study <convergence|robustness|cost> <config>
//   hdgeuler validate <config>
//
// HDG_EULER_OUTPUT_ROOT, when set, prefixes relative output directories.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "hdgeuler/config.hpp"
#include "hdgeuler/run.hpp"

namespace {

int report_config_error(const std::exception& e) {
  std::cerr << "hdgeuler: invalid config: " << e.what() << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IMEX-HDG solver for the 2D incompressible Euler equations"};
  app.require_subcommand(1);

  std::string config_path;
  std::string study_kind;

  auto* run_cmd = app.add_subcommand("run", "Run one simulation");
  run_cmd->add_option("config", config_path, "INI config file")->required()->check(CLI::ExistingFile);

  auto* study_cmd = app.add_subcommand("study", "Run a convergence, robustness or cost study");
  study_cmd->add_option("kind", study_kind, "Study kind")
      ->required()
      ->check(CLI::IsMember({"convergence", "robustness", "cost"}));
  study_cmd->add_option("config", config_path, "INI config file")->required()->check(CLI::ExistingFile);

  auto* validate_cmd = app.add_subcommand("validate", "Parse a config and print the effective configuration");
  validate_cmd->add_option("config", config_path, "INI config file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  hdgeuler::SimConfig config;
  try {
    config = hdgeuler::load_config(config_path);
  } catch (const hdgeuler::ConfigParseError& e) {
    return report_config_error(e);
  } catch (const hdgeuler::ConfigValidationError& e) {
    return report_config_error(e);
  } catch (const std::exception& e) {
    std::cerr << "hdgeuler: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*validate_cmd) {
      std::cout << hdgeuler::echo_config(config);
      return 0;
    }
    if (*study_cmd) {
      const auto dir = hdgeuler::run_study(study_kind, config);
      std::cout << study_kind << " study written to " << dir.string() << "\n";
      return 0;
    }
    const hdgeuler::RunSummary s = hdgeuler::run(config);
    if (!s.ok) {
      std::cerr << "hdgeuler: solver failure at " << s.failure << "\n";
      return 1;
    }
    std::cout << "steps " << s.steps << ", t = " << s.t << ", energy " << s.energy0 << " -> " << s.energy
              << ", div residual " << s.div_residual;
    if (s.err_q) std::cout << ", err_Q_L2 " << *s.err_q << ", err_p_L2 " << *s.err_p;
    std::cout << "\noutput: " << s.dir.string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "hdgeuler: " << e.what() << "\n";
    return 1;
  }
}
