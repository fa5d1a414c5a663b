#include "hdgeuler/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <set>

#include "hdgeuler/output.hpp"

namespace hdgeuler {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string snapshot_name(int step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%06d.vtu", step);
  return buf;
}

void write_pvd(const std::filesystem::path& path, const std::vector<std::pair<double, std::string>>& entries) {
  std::ofstream out = open_output(path);
  out << "<?xml version=\"1.0\"?>\n<VTKFile type=\"Collection\" version=\"0.1\">\n  <Collection>\n";
  for (const auto& [t, file] : entries)
    out << "    <DataSet timestep=\"" << CsvWriter::format(t) << "\" file=\"" << file << "\"/>\n";
  out << "  </Collection>\n</VTKFile>\n";
}

/// Steps at which a snapshot is written.
std::set<int> snapshot_steps(const SimConfig& c) {
  std::set<int> steps;
  if (c.output.vtu_every > 0)
    for (int s = 0; s <= c.n_t; s += c.output.vtu_every) steps.insert(s);
  for (double t : c.output.vtu_times) {
    const int s = c.dt > 0.0 ? static_cast<int>(std::llround(t / c.dt)) : 0;
    steps.insert(std::clamp(s, 0, c.n_t));
  }
  return steps;
}

std::string tableau_for(const SimConfig& c, int k) {
  const auto it = c.study.tableaus.find(k);
  return it != c.study.tableaus.end() ? it->second : c.tableau;
}

ButcherTableau butcher_for(const SimConfig& c, int k) {
  const auto it = c.study.tableaus.find(k);
  return it != c.study.tableaus.end() ? tableau(it->second) : c.butcher_tableau();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Failure reasons as a single CSV cell.
std::string csv_cell(std::string text) {
  std::replace_if(text.begin(), text.end(), [](char ch) { return ch == ',' || ch == '"' || ch == '\n'; }, ';');
  return text;
}

void write_config_echo(const std::filesystem::path& dir, const SimConfig& c) {
  std::ofstream out = open_output(dir / "config.ini");
  out << echo_config(c);
}

}  // namespace

std::filesystem::path output_directory(const SimConfig& config) {
  std::filesystem::path dir(config.output.dir);
  const char* root = std::getenv(kOutputRootEnv);
  if (root != nullptr && *root != '\0' && dir.is_relative()) dir = std::filesystem::path(root) / dir;
  return dir;
}

FlowCase make_case(const SimConfig& config) {
  if (config.testcase == "taylor_green")
    return taylor_green(config.kappa,
                        config.pressure_reference == "euler" ? PressureReference::euler : PressureReference::benchmark);
  if (config.testcase == "shear_flow") return shear_flow(config.rho, config.delta);
  throw std::invalid_argument("unknown testcase " + config.testcase);
}

FormParams form_params(const SimConfig& config) { return {config.alpha, config.tau, config.flux == "upwind"}; }

StepperOptions stepper_options(const SimConfig& config) {
  StepperOptions o;
  o.richardson_iterations = config.n_R;
  o.literal_projection = config.literal_projection;
  o.pressure.rtol = config.solver.pressure_rtol;
  o.pressure.maxit = config.solver.maxit;
  o.pressure.mg.smooth_steps = config.solver.smooth_steps;
  o.pressure.mg.chebyshev_order = config.solver.chebyshev_order;
  o.tentative.rtol = config.solver.velocity_rtol;
  o.tentative.maxit = config.solver.maxit;
  return o;
}

RunSummary run(const SimConfig& config) {
  RunSummary summary;
  summary.dir = output_directory(config);
  std::filesystem::create_directories(summary.dir);
  write_config_echo(summary.dir, config);
  std::filesystem::remove(summary.dir / "failure.txt");

  const FlowCase fc = make_case(config);
  auto mesh = std::make_shared<const Mesh>(Mesh::build_square(config.n, fc.length, fc.periodic));
  const Discretisation disc(mesh, config.k, form_params(config));
  const ButcherTableau tab = config.butcher_tableau();
  const bool imex = config.scheme == "imex_hdg";
  if (config.tracer.enabled && !imex) throw std::invalid_argument("tracer advection requires scheme = imex_hdg");

  std::unique_ptr<ImexHdgStepper> hdg;
  std::unique_ptr<ImplicitDgStepper> dg;
  FlowState state;
  if (imex) {
    hdg = std::make_unique<ImexHdgStepper>(disc, tab, fc.forcing, stepper_options(config));
    try {
      state = hdg->initial_state(fc.q0, 0.0);
    } catch (const std::exception& e) {
      summary.ok = false;
      summary.failure = std::string("step 0 (initial pressure reconstruction): ") + e.what();
      std::ofstream(summary.dir / "failure.txt") << summary.failure << "\n";
      return summary;
    }
  } else {
    dg = std::make_unique<ImplicitDgStepper>(disc, fc.forcing);
    state.q = interpolate(disc.velocity_space(), fc.q0);
    state.p = Field(disc.pressure_space());
    state.l = Field(disc.trace_space());
  }
  std::unique_ptr<TracerStepper> tracer;
  if (config.tracer.enabled) {
    tracer = std::make_unique<TracerStepper>(disc, config.tracer.degree, tab);
    const double length = fc.length;
    if (config.tracer.ic == "gaussian")
      state.tracer = interpolate(tracer->space(), [length](const Vec2& x) { return gaussian_tracer(x / length); });
    else
      state.tracer = interpolate(tracer->space(), [](const Vec2&) { return 1.0; });
  }

  const auto divergence = [&]() {
    return imex ? divergence_norm(hdg->blocks(), state.q, state.p, state.l) : dg->divergence(state.q);
  };
  const auto records = [&]() -> const std::vector<SolveRecord>& { return imex ? hdg->records() : dg->records(); };
  const auto clear_records = [&]() { imex ? hdg->clear_records() : dg->clear_records(); };
  clear_records();  // the initial reconstruction is setup

  std::optional<std::ofstream> ts_file, log_file, err_file;
  std::optional<CsvWriter> ts, log, err;
  if (config.output.csv) {
    ts_file.emplace(open_output(summary.dir / "timeseries.csv"));
    ts.emplace(*ts_file, std::vector<std::string>{"step", "t", "energy", "div_residual", "total_seconds"});
    log_file.emplace(open_output(summary.dir / "solvelog.csv"));
    log.emplace(*log_file, std::vector<std::string>{"step", "stage", "kind", "iterations", "residual", "seconds"});
    if (fc.has_exact_solution()) {
      err_file.emplace(open_output(summary.dir / "errors.csv"));
      err.emplace(*err_file, std::vector<std::string>{"step", "t", "err_Q_L2", "err_p_L2"});
    }
  }

  const std::set<int> snapshots = snapshot_steps(config);
  std::vector<std::pair<double, std::string>> series;
  double total_seconds = 0.0;

  const auto record_step = [&](int step) {
    summary.steps = step;
    summary.t = state.t;
    summary.energy = kinetic_energy(state.q);
    summary.div_residual = divergence();
    if (ts) ts->row(step, state.t, summary.energy, summary.div_residual, total_seconds);
    if (fc.has_exact_solution()) {
      const double t = state.t;
      summary.err_q = l2_error(state.q, [&](const Vec2& x) { return fc.q_exact(x, t); });
      summary.err_p = l2_error(state.p, [&](const Vec2& x) { return fc.p_exact(x, t); });
      if (err) err->row(step, t, *summary.err_q, *summary.err_p);
    }
    if (snapshots.count(step) != 0) {
      const Field w = vorticity(disc, state.q);
      SnapshotFields fields;
      fields.velocity = &state.q;
      fields.pressure = &state.p;
      fields.vorticity = &w;
      if (state.tracer) fields.tracer = &*state.tracer;
      if (fc.has_exact_solution()) {
        const double t = state.t;
        fields.q_exact = [&fc, t](const Vec2& x) { return fc.q_exact(x, t); };
        fields.p_exact = [&fc, t](const Vec2& x) { return fc.p_exact(x, t); };
      }
      const std::string name = snapshot_name(step);
      write_vtu(summary.dir / name, *mesh, fields);
      summary.snapshots.push_back(summary.dir / name);
      series.emplace_back(state.t, name);
      write_pvd(summary.dir / "snapshots.pvd", series);
    }
  };

  summary.energy0 = kinetic_energy(state.q);
  record_step(0);
  for (int step = 1; step <= config.n_t; ++step) {
    const auto t0 = Clock::now();
    try {
      if (imex) {
        hdg->step(state, config.dt);
        if (tracer) tracer->step(*state.tracer, hdg->stage_velocities(), config.dt);
      } else {
        dg->step(state, config.dt);
      }
    } catch (const std::exception& e) {
      std::string where = "step " + std::to_string(step) + " (t = " + CsvWriter::format(state.t) + ")";
      if (!records().empty()) {
        const SolveRecord& last = records().back();
        where += ", after the " + last.kind + " solve of stage " + std::to_string(last.stage);
      }
      summary.ok = false;
      summary.failure = where + ": " + e.what();
      if (log)
        for (const auto& r : records()) log->row(step, r.stage, r.kind, r.iterations, r.residual, r.seconds);
      std::ofstream(summary.dir / "failure.txt") << summary.failure << "\n";
      return summary;
    }
    total_seconds += seconds_since(t0);
    if (log)
      for (const auto& r : records()) log->row(step, r.stage, r.kind, r.iterations, r.residual, r.seconds);
    clear_records();
    record_step(step);
  }
  return summary;
}

std::vector<RobustnessRow> run_robustness_study(const SimConfig& config) {
  const FlowCase fc = make_case(config);
  std::vector<RobustnessRow> rows;
  for (int k : config.study.degrees)
    for (int n : config.study.grids) {
      RobustnessRow row;
      row.k = k;
      row.n = n;
      row.tableau = tableau_for(config, k);
      try {
        auto mesh = std::make_shared<const Mesh>(Mesh::build_square(n, fc.length, fc.periodic));
        const Discretisation disc(mesh, k, form_params(config));
        ImexHdgStepper stepper(disc, butcher_for(config, k), fc.forcing, stepper_options(config));
        FlowState state = stepper.initial_state(fc.q0, 0.0);
        stepper.clear_records();
        const double dt = config.final_time / n;
        for (int s = 0; s < config.study.steps; ++s) stepper.step(state, dt);
        std::map<std::string, std::pair<double, int>> acc;
        for (const auto& r : stepper.records()) {
          acc[r.kind].first += r.iterations;
          ++acc[r.kind].second;
        }
        const auto mean = [&](const std::string& kind) {
          const auto it = acc.find(kind);
          return it == acc.end() ? kNan : it->second.first / it->second.second;
        };
        row.steps = config.study.steps;
        row.mean_tentative = mean("tentative");
        row.mean_pressure = mean("pressure");
        row.mean_final = mean("final");
        row.mean_reconstruct = mean("reconstruct");
      } catch (const std::exception& e) {
        row.mean_tentative = row.mean_pressure = row.mean_final = row.mean_reconstruct = kNan;
        row.failure = e.what();
      }
      rows.push_back(row);
    }
  return rows;
}

std::vector<CostRow> run_cost_study(const SimConfig& config) {
  const FlowCase fc = make_case(config);
  std::vector<CostRow> rows;
  for (int k : config.study.degrees)
    for (int n : config.study.grids) {
      CostRow row;
      row.k = k;
      row.n = n;
      try {
        auto mesh = std::make_shared<const Mesh>(Mesh::build_square(n, fc.length, fc.periodic));
        const Discretisation disc(mesh, k, form_params(config));
        row.dofs = static_cast<long>(disc.num_velocity_dofs()) + disc.num_pressure_dofs();
        ImexHdgStepper stepper(disc, butcher_for(config, k), fc.forcing, stepper_options(config));
        FlowState state = stepper.initial_state(fc.q0, 0.0);
        const double dt = config.final_time / n;
        std::vector<double> times;
        for (int s = 0; s < config.study.steps; ++s) {
          const auto t0 = Clock::now();
          stepper.step(state, dt);
          times.push_back(seconds_since(t0));
          stepper.clear_records();
        }
        row.steps = config.study.steps;
        row.seconds_per_step = median(times);
      } catch (const std::exception& e) {
        row.seconds_per_step = kNan;
        row.failure = e.what();
      }
      rows.push_back(row);
    }
  return rows;
}

std::vector<CostFit> fit_cost(const std::vector<CostRow>& rows) {
  std::map<int, std::vector<std::pair<double, double>>> points;
  for (const auto& r : rows)
    if (r.failure.empty() && r.seconds_per_step > 0.0 && r.dofs > 0)
      points[r.k].emplace_back(std::log(static_cast<double>(r.dofs)), std::log(r.seconds_per_step));
  std::vector<CostFit> fits;
  for (const auto& [k, pts] : points) {
    if (pts.size() < 2) continue;
    Eigen::MatrixXd a(static_cast<Eigen::Index>(pts.size()), 2);
    Eigen::VectorXd b(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      a(i, 0) = pts[static_cast<std::size_t>(i)].first;
      a(i, 1) = 1.0;
      b(i) = pts[static_cast<std::size_t>(i)].second;
    }
    const Eigen::Vector2d x = a.colPivHouseholderQr().solve(b);
    fits.push_back({k, x(0), x(1), static_cast<int>(pts.size())});
  }
  return fits;
}

std::filesystem::path run_study(const std::string& kind, const SimConfig& config) {
  const std::filesystem::path dir = output_directory(config);
  std::filesystem::create_directories(dir);
  write_config_echo(dir, config);
  if (kind == "convergence") {
    if (config.testcase != "taylor_green") throw std::invalid_argument("convergence study needs testcase = taylor_green");
    if (config.tableau_override && config.study.tableaus.size() < config.study.degrees.size())
      throw std::invalid_argument("convergence study needs a named tableau for every degree (study.tableaus)");
    ConvergenceOptions opts;
    opts.kappa = config.kappa;
    opts.pressure_reference = config.pressure_reference == "euler" ? PressureReference::euler : PressureReference::benchmark;
    opts.final_time = config.final_time;
    opts.stepper = stepper_options(config);
    opts.params = form_params(config);
    std::map<int, std::string> tableaus;
    for (int k : config.study.degrees) tableaus[k] = tableau_for(config, k);
    const auto rows = run_convergence_study(config.study.degrees, config.study.grids, tableaus, opts);
    std::ofstream out = open_output(dir / "convergence.csv");
    write_convergence_csv(out, rows);
    std::ofstream failures = open_output(dir / "failures.txt");
    for (const auto& r : rows)
      if (!r.failure.empty()) failures << "k=" << r.k << " n=" << r.n << ": " << r.failure << "\n";
  } else if (kind == "robustness") {
    const auto rows = run_robustness_study(config);
    std::ofstream out = open_output(dir / "robustness.csv");
    CsvWriter csv(out, {"k", "n", "tableau", "steps", "mean_tentative", "mean_pressure", "mean_final",
                        "mean_reconstruct", "failure"});
    for (const auto& r : rows)
      csv.row(r.k, r.n, r.tableau, r.steps, r.mean_tentative, r.mean_pressure, r.mean_final, r.mean_reconstruct,
              csv_cell(r.failure));
  } else if (kind == "cost") {
    const auto rows = run_cost_study(config);
    std::ofstream out = open_output(dir / "cost.csv");
    CsvWriter csv(out, {"k", "n", "N", "steps", "seconds_per_step", "failure"});
    for (const auto& r : rows) csv.row(r.k, r.n, r.dofs, r.steps, r.seconds_per_step, csv_cell(r.failure));
    const auto fits = fit_cost(rows);
    if (!fits.empty()) {
      std::ofstream fit_out = open_output(dir / "cost_fit.csv");
      CsvWriter fit_csv(fit_out, {"k", "slope", "intercept", "points"});
      for (const auto& f : fits) fit_csv.row(f.k, f.slope, f.intercept, f.points);
    }
  } else {
    throw std::invalid_argument("unknown study kind " + kind + " (expected convergence, robustness or cost)");
  }
  return dir;
}

}  // namespace hdgeuler
