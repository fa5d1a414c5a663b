#include "hdgeuler/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace hdgeuler {

ConfigParseError::ConfigParseError(const std::string& origin, int line, const std::string& what)
    : std::runtime_error(origin + ":" + std::to_string(line) + ": " + what), line_(line) {}

ConfigValidationError::ConfigValidationError(const std::string& key, const std::string& what)
    : std::runtime_error(key + ": " + what), key_(key) {}

ButcherTableau SimConfig::butcher_tableau() const {
  if (!tableau_override) return hdgeuler::tableau(tableau);
  const TableauOverride& o = *tableau_override;
  const auto s = static_cast<Eigen::Index>(o.c.size());
  ButcherTableau t;
  t.name = o.name;
  t.a_im = Eigen::MatrixXd::Zero(s, s);
  t.a_ex = Eigen::MatrixXd::Zero(s, s);
  t.b_im = Eigen::VectorXd::Map(o.b_im.data(), s);
  t.b_ex = Eigen::VectorXd::Map(o.b_ex.data(), s);
  t.c = Eigen::VectorXd::Map(o.c.data(), s);
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = 0; j < s; ++j) {
      t.a_im(i, j) = o.a_im[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      t.a_ex(i, j) = o.a_ex[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  ButcherTableau g = to_generic(t);
  g.validate();
  return g;
}

namespace {

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

class Reader {
 public:
  Reader(std::map<std::string, Entry> entries, std::string origin) : entries_(std::move(entries)), origin_(std::move(origin)) {}

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  const Entry* find(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  void get(const std::string& key, std::string& out) {
    if (const Entry* e = find(key)) {
      if (e->value.empty()) throw ConfigParseError(origin_, e->line, "empty value for " + key);
      out = e->value;
    }
  }

  void get(const std::string& key, double& out) {
    if (const Entry* e = find(key)) out = to_double(*e, e->value, key);
  }

  void get(const std::string& key, int& out) {
    if (const Entry* e = find(key)) out = to_int(*e, e->value, key);
  }

  void get(const std::string& key, bool& out) {
    if (const Entry* e = find(key)) {
      std::string v = e->value;
      std::transform(v.begin(), v.end(), v.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
      if (v == "true" || v == "yes" || v == "1" || v == "on")
        out = true;
      else if (v == "false" || v == "no" || v == "0" || v == "off")
        out = false;
      else
        throw ConfigParseError(origin_, e->line, "expected a boolean for " + key + ", got '" + e->value + "'");
    }
  }

  void get(const std::string& key, std::vector<double>& out) {
    if (const Entry* e = find(key)) out = doubles(*e, e->value, key);
  }

  void get(const std::string& key, std::vector<int>& out) {
    if (const Entry* e = find(key)) {
      out.clear();
      for (const auto& item : split(e->value, ','))
        if (!item.empty()) out.push_back(to_int(*e, item, key));
    }
  }

  void get_matrix(const std::string& key, std::vector<std::vector<double>>& out) {
    if (const Entry* e = find(key)) {
      out.clear();
      for (const auto& row : split(e->value, ';')) out.push_back(doubles(*e, row, key));
    }
  }

  void get_tableau_map(const std::string& key, std::map<int, std::string>& out) {
    if (const Entry* e = find(key)) {
      out.clear();
      for (const auto& item : split(e->value, ',')) {
        if (item.empty()) continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos)
          throw ConfigParseError(origin_, e->line, "expected k:tableau in " + key + ", got '" + item + "'");
        out[to_int(*e, trim(item.substr(0, colon)), key)] = trim(item.substr(colon + 1));
      }
    }
  }

  void reject_unused() const {
    for (const auto& [key, e] : entries_)
      if (!e.used) throw ConfigValidationError(key, "unknown key (line " + std::to_string(e.line) + ")");
  }

 private:
  double to_double(const Entry& e, const std::string& text, const std::string& key) const {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size())
      throw ConfigParseError(origin_, e.line, "expected a number for " + key + ", got '" + text + "'");
    return v;
  }

  int to_int(const Entry& e, const std::string& text, const std::string& key) const {
    char* end = nullptr;
    const long v = std::strtol(text.c_str(), &end, 10);
    if (text.empty() || end != text.c_str() + text.size() || v < INT32_MIN || v > INT32_MAX)
      throw ConfigParseError(origin_, e.line, "expected an integer for " + key + ", got '" + text + "'");
    return static_cast<int>(v);
  }

  std::vector<double> doubles(const Entry& e, const std::string& text, const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split(text, ','))
      if (!item.empty()) out.push_back(to_double(e, item, key));
    return out;
  }

  std::map<std::string, Entry> entries_;
  std::string origin_;
};

std::map<std::string, Entry> tokenize(const std::string& text, const std::string& origin) {
  std::map<std::string, Entry> entries;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigParseError(origin, line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) throw ConfigParseError(origin, line, "empty section name");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigParseError(origin, line, "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    if (key.empty()) throw ConfigParseError(origin, line, "missing key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (entries.count(full) != 0) throw ConfigParseError(origin, line, "duplicate key " + full);
    entries[full] = Entry{trim(s.substr(eq + 1)), line, false};
  }
  return entries;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigValidationError(key, what);
}

void resolve_time(SimConfig& c, bool has_dt, bool has_nt) {
  require(c.n_t >= 0, "n_t", "must be non-negative");
  if (has_nt && c.n_t == 0) {
    c.dt = 0.0;  // zero-step run
    return;
  }
  require(c.final_time > 0.0, "T", "must be positive");
  if (has_dt) require(c.dt > 0.0, "dt", "must be positive");
  if (has_dt && has_nt) {
    require(std::abs(c.dt * c.n_t - c.final_time) <= 1e-12 * c.final_time, "dt",
            "dt * n_t = " + std::to_string(c.dt * c.n_t) + " differs from T = " + std::to_string(c.final_time));
  } else if (has_dt) {
    const double steps = c.final_time / c.dt;
    c.n_t = static_cast<int>(std::llround(steps));
    require(c.n_t > 0 && std::abs(steps - c.n_t) <= 1e-9 * steps, "dt", "T is not an integer multiple of dt");
  } else {
    if (!has_nt) c.n_t = c.n;  // n_t = n, as in the convergence protocol
    c.dt = c.final_time / c.n_t;
  }
}

void validate(SimConfig& c) {
  require(c.testcase == "taylor_green" || c.testcase == "shear_flow", "testcase", "expected taylor_green or shear_flow");
  require(c.scheme == "imex_hdg" || c.scheme == "implicit_dg", "scheme", "expected imex_hdg or implicit_dg");
  require(c.n >= 2, "n", "grid size must be at least 2");
  require(c.k >= 1 && c.k <= 3, "k", "polynomial degree must be 1, 2 or 3");
  if (!c.tableau_override) {
    const auto names = tableau_names();
    require(std::find(names.begin(), names.end(), c.tableau) != names.end(), "tableau", "unknown tableau " + c.tableau);
  }
  require(c.n_R >= 1, "n_R", "must be at least 1");
  require(c.alpha > 0.0, "alpha", "must be positive");
  require(c.tau > 0.0, "tau", "must be positive");
  require(c.flux == "upwind" || c.flux == "central", "flux", "expected upwind or central");
  require(c.pressure_reference == "benchmark" || c.pressure_reference == "euler", "pressure_reference",
          "expected benchmark or euler");
  require(c.rho > 0.0, "rho", "must be positive");
  require(c.solver.pressure_rtol > 0.0, "solver.pressure_rtol", "must be positive");
  require(c.solver.velocity_rtol > 0.0, "solver.velocity_rtol", "must be positive");
  require(c.solver.maxit >= 1, "solver.maxit", "must be at least 1");
  require(c.solver.smooth_steps >= 1, "solver.mg.smooth_steps", "must be at least 1");
  require(c.solver.chebyshev_order >= 1, "solver.mg.chebyshev_order", "must be at least 1");
  require(c.tracer.degree >= 0, "tracer.degree", "must be non-negative");
  require(c.tracer.ic == "gaussian" || c.tracer.ic == "constant", "tracer.ic", "expected gaussian or constant");
  require(c.output.vtu_every >= 0, "output.vtu_every", "must be non-negative");
  require(!c.output.dir.empty(), "output.dir", "must not be empty");
  require(c.study.steps >= 1, "study.steps", "must be at least 1");
  require(!c.study.degrees.empty(), "study.degrees", "must not be empty");
  require(!c.study.grids.empty(), "study.grids", "must not be empty");
  for (int k : c.study.degrees) require(k >= 1 && k <= 3, "study.degrees", "degrees must be 1, 2 or 3");
  for (int n : c.study.grids) require(n >= 2, "study.grids", "grid sizes must be at least 2");
  for (const auto& [k, name] : c.study.tableaus) {
    const auto names = tableau_names();
    require(std::find(names.begin(), names.end(), name) != names.end(), "study.tableaus", "unknown tableau " + name);
  }
  if (c.tableau_override) {
    const TableauOverride& o = *c.tableau_override;
    const std::size_t s = o.c.size();
    require(s >= 1, "tableau.c", "must not be empty");
    require(o.b_im.size() == s, "tableau.b_im", "length differs from tableau.c");
    require(o.b_ex.size() == s, "tableau.b_ex", "length differs from tableau.c");
    require(o.a_im.size() == s, "tableau.a_im", "row count differs from tableau.c");
    require(o.a_ex.size() == s, "tableau.a_ex", "row count differs from tableau.c");
    for (const auto& row : o.a_im) require(row.size() == s, "tableau.a_im", "row length differs from tableau.c");
    for (const auto& row : o.a_ex) require(row.size() == s, "tableau.a_ex", "row length differs from tableau.c");
    try {
      (void)c.butcher_tableau();
    } catch (const std::exception& e) {
      throw ConfigValidationError("tableau", e.what());
    }
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out;
}

std::string join(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + std::to_string(v[i]);
  return out;
}

std::string join(const std::vector<std::vector<double>>& m) {
  std::string out;
  for (std::size_t i = 0; i < m.size(); ++i) out += (i ? "; " : "") + join(m[i]);
  return out;
}

}  // namespace

SimConfig parse_config(const std::string& text, const std::string& origin) {
  Reader r(tokenize(text, origin), origin);
  SimConfig c;
  r.get("testcase", c.testcase);
  r.get("scheme", c.scheme);
  r.get("n", c.n);
  r.get("k", c.k);
  r.get("tableau", c.tableau);
  const bool has_dt = r.has("dt"), has_nt = r.has("n_t");
  r.get("T", c.final_time);
  r.get("dt", c.dt);
  r.get("n_t", c.n_t);
  r.get("n_R", c.n_R);
  r.get("literal_projection", c.literal_projection);
  r.get("alpha", c.alpha);
  r.get("tau", c.tau);
  r.get("flux", c.flux);
  r.get("kappa", c.kappa);
  r.get("pressure_reference", c.pressure_reference);
  r.get("rho", c.rho);
  r.get("delta", c.delta);

  if (r.has("tableau.c") || r.has("tableau.a_im") || r.has("tableau.a_ex") || r.has("tableau.b_im") ||
      r.has("tableau.b_ex")) {
    TableauOverride o;
    r.get("tableau.name", o.name);
    r.get_matrix("tableau.a_im", o.a_im);
    r.get_matrix("tableau.a_ex", o.a_ex);
    r.get("tableau.b_im", o.b_im);
    r.get("tableau.b_ex", o.b_ex);
    r.get("tableau.c", o.c);
    c.tableau_override = o;
    c.tableau = o.name;
  }

  bool has_degree = r.has("tracer.degree");
  r.get("tracer.enabled", c.tracer.enabled);
  r.get("tracer.degree", c.tracer.degree);
  r.get("tracer.ic", c.tracer.ic);

  r.get("solver.pressure_rtol", c.solver.pressure_rtol);
  r.get("solver.velocity_rtol", c.solver.velocity_rtol);
  r.get("solver.maxit", c.solver.maxit);
  r.get("solver.mg.smooth_steps", c.solver.smooth_steps);
  r.get("solver.mg.chebyshev_order", c.solver.chebyshev_order);

  r.get("output.dir", c.output.dir);
  r.get("output.vtu_every", c.output.vtu_every);
  r.get("output.vtu_times", c.output.vtu_times);
  r.get("output.csv", c.output.csv);

  r.get("study.degrees", c.study.degrees);
  r.get("study.grids", c.study.grids);
  r.get_tableau_map("study.tableaus", c.study.tableaus);
  r.get("study.steps", c.study.steps);

  r.reject_unused();
  if (!has_degree) c.tracer.degree = c.k;
  resolve_time(c, has_dt, has_nt);
  validate(c);
  return c;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.string());
}

std::string echo_config(const SimConfig& c) {
  std::ostringstream out;
  out << "# effective configuration\n"
      << "testcase = " << c.testcase << "\n"
      << "scheme = " << c.scheme << "\n"
      << "n = " << c.n << "\n"
      << "k = " << c.k << "\n";
  if (!c.tableau_override) out << "tableau = " << c.tableau << "\n";
  out << "T = " << fmt(c.final_time) << "\n"
      << "dt = " << fmt(c.dt) << "\n"
      << "n_t = " << c.n_t << "\n"
      << "n_R = " << c.n_R << "\n"
      << "literal_projection = " << (c.literal_projection ? "true" : "false") << "\n"
      << "alpha = " << fmt(c.alpha) << "\n"
      << "tau = " << fmt(c.tau) << "\n"
      << "flux = " << c.flux << "\n"
      << "kappa = " << fmt(c.kappa) << "\n"
      << "pressure_reference = " << c.pressure_reference << "\n"
      << "rho = " << fmt(c.rho) << "\n"
      << "delta = " << fmt(c.delta) << "\n";
  if (c.tableau_override) {
    const TableauOverride& o = *c.tableau_override;
    out << "\n[tableau]\n"
        << "name = " << o.name << "\n"
        << "a_im = " << join(o.a_im) << "\n"
        << "a_ex = " << join(o.a_ex) << "\n"
        << "b_im = " << join(o.b_im) << "\n"
        << "b_ex = " << join(o.b_ex) << "\n"
        << "c = " << join(o.c) << "\n";
  }
  out << "\n[tracer]\n"
      << "enabled = " << (c.tracer.enabled ? "true" : "false") << "\n"
      << "degree = " << c.tracer.degree << "\n"
      << "ic = " << c.tracer.ic << "\n"
      << "\n[solver]\n"
      << "pressure_rtol = " << fmt(c.solver.pressure_rtol) << "\n"
      << "velocity_rtol = " << fmt(c.solver.velocity_rtol) << "\n"
      << "maxit = " << c.solver.maxit << "\n"
      << "\n[solver.mg]\n"
      << "smooth_steps = " << c.solver.smooth_steps << "\n"
      << "chebyshev_order = " << c.solver.chebyshev_order << "\n"
      << "\n[output]\n"
      << "dir = " << c.output.dir << "\n"
      << "vtu_every = " << c.output.vtu_every << "\n";
  if (!c.output.vtu_times.empty()) out << "vtu_times = " << join(c.output.vtu_times) << "\n";
  out << "csv = " << (c.output.csv ? "true" : "false") << "\n"
      << "\n[study]\n"
      << "degrees = " << join(c.study.degrees) << "\n"
      << "grids = " << join(c.study.grids) << "\n";
  if (!c.study.tableaus.empty()) {
    out << "tableaus = ";
    bool first = true;
    for (const auto& [k, name] : c.study.tableaus) {
      out << (first ? "" : ", ") << k << ":" << name;
      first = false;
    }
    out << "\n";
  }
  out << "steps = " << c.study.steps << "\n";
  return out.str();
}

}  // namespace hdgeuler
