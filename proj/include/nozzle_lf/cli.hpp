#pragma once

// Run configuration, orchestration and file output for the nozzle-lf tool.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "diagnostics.hpp"

namespace nozzle_lf::cli {

enum class Mode { modified, baseline_lf };

inline const char* to_string(Mode m) { return m == Mode::modified ? "modified" : "baseline-lf"; }

inline Mode parse_mode(const std::string& s) {
  if (s == "modified") return Mode::modified;
  if (s == "baseline-lf") return Mode::baseline_lf;
  throw ConfigError("run.mode", "expected modified or baseline-lf, got '" + s + "'");
}

struct GeometrySpec {
  std::string family = "constant";  // constant | bump | laval | table
  double area = 1.0;
  double eps = 0.2;    // bump strength
  double kappa = 0.3;  // laval throat contraction
  double radius = 1.0; // X
  std::string table;
};

struct BoundSpec {
  std::string kind = "auto";  // auto | zero | constant
  double width = 0.1;
  double margin = 0.05;
  double value = 0.0;
  double lo = -1.0;
  double hi = 1.0;
};

struct InitialSpec {
  std::string profile = "riemann-step";  // riemann-step | gaussian-density | table | vacuum
  double rho_left = 1.0, v_left = 0.0, rho_right = 0.5, v_right = 0.0, x0 = 0.0;
  double rho_ambient = 1.0, amplitude = 1.0, center = 0.0, width = 0.2, velocity = 0.0;
  std::string table;
};

struct RunConfig {
  double gamma = 1.4;
  double vacuum_floor = 1e-14;
  GeometrySpec geometry;
  BoundSpec bound;
  InitialSpec initial;
  std::optional<double> M;
  double dx = 0.02;
  double T = 0.2;
  ExponentOverrides exponents;
  Mode mode = Mode::modified;
  std::string out = "out";
  long stride = 10;
  double slack_coefficient = 1.0;
  double rh_threshold = 1e-9;
  bool audit = true;
  std::string source;  // directory of the config file, for relative table paths
};

namespace detail {

inline double to_number(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + text + "'");
  }
  if (used != text.size()) throw ConfigError(key, "expected a number, got '" + text + "'");
  return v;
}

inline long to_integer(const std::string& key, const std::string& text) {
  const double v = to_number(key, text);
  if (v != std::floor(v)) throw ConfigError(key, "expected an integer, got '" + text + "'");
  return static_cast<long>(v);
}

inline bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError(key, "expected a boolean, got '" + text + "'");
}

}  // namespace detail

/// Applies one key = value assignment. Keys are dotted (section.name).
inline void apply(RunConfig& cfg, const std::string& key, const std::string& value) {
  using detail::to_number;
  auto num = [&](double& field) { field = to_number(key, value); };
  if (key == "gamma") num(cfg.gamma);
  else if (key == "vacuum_floor") num(cfg.vacuum_floor);
  else if (key == "dx") num(cfg.dx);
  else if (key == "T" || key == "t_final") num(cfg.T);
  else if (key == "M") cfg.M = to_number(key, value);
  else if (key == "alpha") cfg.exponents.alpha = to_number(key, value);
  else if (key == "beta") cfg.exponents.beta = to_number(key, value);
  else if (key == "delta") cfg.exponents.delta = to_number(key, value);
  else if (key == "geometry.family") cfg.geometry.family = value;
  else if (key == "geometry.area") num(cfg.geometry.area);
  else if (key == "geometry.eps") num(cfg.geometry.eps);
  else if (key == "geometry.kappa") num(cfg.geometry.kappa);
  else if (key == "geometry.radius" || key == "X") num(cfg.geometry.radius);
  else if (key == "geometry.table") cfg.geometry.table = value;
  else if (key == "bound.kind") cfg.bound.kind = value;
  else if (key == "bound.width") num(cfg.bound.width);
  else if (key == "bound.margin") num(cfg.bound.margin);
  else if (key == "bound.value") num(cfg.bound.value);
  else if (key == "bound.lo") num(cfg.bound.lo);
  else if (key == "bound.hi") num(cfg.bound.hi);
  else if (key == "initial.profile") cfg.initial.profile = value;
  else if (key == "initial.rho_left") num(cfg.initial.rho_left);
  else if (key == "initial.v_left") num(cfg.initial.v_left);
  else if (key == "initial.rho_right") num(cfg.initial.rho_right);
  else if (key == "initial.v_right") num(cfg.initial.v_right);
  else if (key == "initial.x0") num(cfg.initial.x0);
  else if (key == "initial.rho_ambient") num(cfg.initial.rho_ambient);
  else if (key == "initial.amplitude") num(cfg.initial.amplitude);
  else if (key == "initial.center") num(cfg.initial.center);
  else if (key == "initial.width") num(cfg.initial.width);
  else if (key == "initial.velocity") num(cfg.initial.velocity);
  else if (key == "initial.table") cfg.initial.table = value;
  else if (key == "run.mode") cfg.mode = parse_mode(value);
  else if (key == "run.out") cfg.out = value;
  else if (key == "run.stride") cfg.stride = detail::to_integer(key, value);
  else if (key == "run.slack") num(cfg.slack_coefficient);
  else if (key == "run.rh_threshold") num(cfg.rh_threshold);
  else if (key == "run.audit") cfg.audit = detail::to_bool(key, value);
  else throw ConfigError(key, "unknown key");
}

/// Checks everything that can be checked without building the run.
inline void check(const RunConfig& cfg) {
  if (!(cfg.gamma > 1.0) || cfg.gamma > 5.0 / 3.0 + 1e-15)
    throw ConfigError("gamma", "must satisfy 1 < gamma <= 5/3, got " + std::to_string(cfg.gamma));
  if (!(cfg.vacuum_floor >= 0.0)) throw ConfigError("vacuum_floor", "must be nonnegative");
  if (!(cfg.dx > 0.0)) throw ConfigError("dx", "must be positive");
  if (!(cfg.T >= 0.0)) throw ConfigError("T", "must be nonnegative");
  if (cfg.M && !(*cfg.M >= 0.0)) throw ConfigError("M", "must be nonnegative");
  if (cfg.stride < 1) throw ConfigError("run.stride", "must be at least 1");
  const auto& g = cfg.geometry;
  if (g.family != "constant" && g.family != "bump" && g.family != "laval" && g.family != "table")
    throw ConfigError("geometry.family", "expected constant, bump, laval or table, got '" + g.family + "'");
  if (g.family == "table" && g.table.empty()) throw ConfigError("geometry.table", "table geometry needs a file");
  if (!(g.radius > 0.0)) throw ConfigError("geometry.radius", "must be positive");
  if (!(g.area > 0.0)) throw ConfigError("geometry.area", "must be positive");
  const auto& b = cfg.bound;
  if (b.kind != "auto" && b.kind != "zero" && b.kind != "constant")
    throw ConfigError("bound.kind", "expected auto, zero or constant, got '" + b.kind + "'");
  if (b.kind == "constant" && !(b.value >= 0.0)) throw ConfigError("bound.value", "must be nonnegative");
  const auto& i = cfg.initial;
  if (i.profile != "riemann-step" && i.profile != "gaussian-density" && i.profile != "table" && i.profile != "vacuum")
    throw ConfigError("initial.profile",
                      "expected riemann-step, gaussian-density, table or vacuum, got '" + i.profile + "'");
  if (i.profile == "riemann-step" && !(i.rho_left >= 0.0 && i.rho_right >= 0.0))
    throw ConfigError("initial.rho_left", "densities must be nonnegative");
  if (i.profile == "gaussian-density" && !(i.width > 0.0)) throw ConfigError("initial.width", "must be positive");
  if (i.profile == "table" && i.table.empty()) throw ConfigError("initial.table", "table profile needs a file");
  // Exponent constraints are those of the scheme; check them with a placeholder mesh.
  const auto c = make_gas(cfg.gamma, cfg.vacuum_floor);
  make_parameters(cfg.dx, 1.0, cfg.T, BoundFunction::zero(), c, cfg.exponents);
}

/// Parses key = value text with optional [section] headers. Comments start a line with # or ;.
inline RunConfig parse_config_text(const std::string& text, const std::string& source_dir = ".") {
  std::istringstream in(text);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_config(in);
  } catch (const CLI::Error& e) {
    throw ConfigError("", std::string("malformed config: ") + e.what());
  }
  RunConfig cfg;
  cfg.source = source_dir;
  for (const auto& it : items) {
    if (it.name == "++" || it.name == "--") continue;
    std::string key;
    for (const auto& p : it.parents) key += p + ".";
    key += it.name;
    if (it.inputs.size() != 1) throw ConfigError(key, "expected a single value");
    apply(cfg, key, it.inputs.front());
  }
  check(cfg);
  return cfg;
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path().string();
  return parse_config_text(ss.str(), dir.empty() ? "." : dir);
}

inline std::string resolve_path(const RunConfig& cfg, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? p : (std::filesystem::path(cfg.source) / path).string();
}

// ---------------------------------------------------------------------------
// Building a run

/// Reads an (x, rho, v) table; the profile is linearly interpolated and constant outside.
inline InitialData read_profile_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("initial.table", "cannot open " + path);
  std::vector<double> xs, rs, vs;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    for (char& ch : line)
      if (ch == ',' || ch == ';' || ch == '\t') ch = ' ';
    std::istringstream ls(line);
    double x, r, v;
    if (!(ls >> x >> r >> v)) {
      const auto pos = line.find_first_not_of(" \r");
      if (pos == std::string::npos || line[pos] == '#' || first) {
        first = false;
        continue;
      }
      throw ConfigError("initial.table", "malformed row: " + line);
    }
    first = false;
    if (!xs.empty() && !(x > xs.back())) throw ConfigError("initial.table", "x column must be strictly increasing");
    if (!(r >= 0.0)) throw ConfigError("initial.table", "densities must be nonnegative");
    xs.push_back(x);
    rs.push_back(r);
    vs.push_back(v);
  }
  if (xs.size() < 2) throw ConfigError("initial.table", "need at least two rows");
  auto u = [xs, rs, vs](double x) {
    if (x <= xs.front()) return GasState{rs.front(), rs.front() * vs.front()};
    if (x >= xs.back()) return GasState{rs.back(), rs.back() * vs.back()};
    const auto i = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) - 1;
    const double s = (x - xs[i]) / (xs[i + 1] - xs[i]);
    const double r = rs[i] + s * (rs[i + 1] - rs[i]);
    const double v = vs[i] + s * (vs[i + 1] - vs[i]);
    return GasState{r, r * v};
  };
  return {u, xs};
}

inline InitialData make_initial(const RunConfig& cfg) {
  const auto& i = cfg.initial;
  if (i.profile == "vacuum") return {[](double) { return GasState{}; }, {}};
  if (i.profile == "riemann-step") {
    const GasState l{i.rho_left, i.rho_left * i.v_left}, r{i.rho_right, i.rho_right * i.v_right};
    const double x0 = i.x0;
    return {[=](double x) { return x < x0 ? l : r; }, {x0}};
  }
  if (i.profile == "gaussian-density") {
    return {[i](double x) {
              const double y = (x - i.center) / i.width;
              const double rho = i.rho_ambient + i.amplitude * std::exp(-y * y);
              return GasState{rho, rho * i.velocity};
            },
            {}};
  }
  return read_profile_table(resolve_path(cfg, i.table));
}

inline NozzleGeometry make_geometry(const RunConfig& cfg) {
  const auto& g = cfg.geometry;
  try {
    if (g.family == "constant") return constant_geometry(g.area, g.radius);
    if (g.family == "bump") return bump_geometry(g.area, g.eps, g.radius);
    if (g.family == "laval") return laval_geometry(g.area, g.kappa, g.radius);
    return read_geometry_table(resolve_path(cfg, g.table));
  } catch (const DomainError& e) {
    throw ConfigError("geometry", e.what());
  }
}

inline BoundFunction make_bound(const RunConfig& cfg, const NozzleGeometry& geom, const GasConstants& c) {
  const auto& b = cfg.bound;
  if (b.kind == "zero") return BoundFunction::zero();
  if (b.kind == "constant") return BoundFunction::constant(b.value, b.lo, b.hi, std::min(cfg.dx, 1e-2));
  return auto_bound(geom, admissibility_constants(c), b.width, b.margin);
}

/// Everything a run needs, at a stable address (the context borrows geometry and bound).
struct RunSetup {
  RunConfig cfg;
  GasConstants gas;
  NozzleGeometry geom;
  BoundFunction b;
  InitialData u0;
  SchemeContext ctx;
  ValidationReport validation;
  double data_M = 0.0;

  explicit RunSetup(RunConfig config)
      : cfg(std::move(config)), gas(make_gas(cfg.gamma, cfg.vacuum_floor)), geom(make_geometry(cfg)),
        b(make_bound(cfg, geom, gas)), u0(make_initial(cfg)) {
    ctx.geom = &geom;
    ctx.b = &b;
    ctx.gas = gas;
    ctx.params.dx = cfg.dx;
    validation = validate_condition(geom, b, admissibility_constants(gas));
    // The index window depends on dt, which depends on M: iterate until the data fit.
    double lo = -geom.cutoff() - 2.0;
    for (int pass = 0; pass < 4; ++pass) {
      data_M = data_bound(u0, ctx, lo, geom.cutoff(), cfg.dx / 4.0).first;
      const double M = cfg.M.value_or(data_M);
      ctx.params = make_parameters(cfg.dx, M, cfg.T, b, gas, cfg.exponents);
      const auto [j_lo, j_hi] = index_window(ctx, step_count(ctx.params));
      const double need_lo = static_cast<double>(j_lo - 1) * cfg.dx;
      if (need_lo >= lo) break;
      lo = need_lo;
    }
    if (cfg.M && *cfg.M < data_M * (1.0 - 1e-12))
      throw ConfigError("M", "initial data need M >= " + std::to_string(data_M));
  }
  RunSetup(const RunSetup&) = delete;
  RunSetup& operator=(const RunSetup&) = delete;
};

// ---------------------------------------------------------------------------
// Output

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// One CSV per snapshot: t, x, rho, m, v, z, w, lower, upper.
inline void write_snapshot(const std::filesystem::path& file, const StaggeredState& s, double t,
                           const SchemeContext& ctx) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "t,x,rho,m,v,z,w,lower,upper\n";
  const auto env = ctx.envelope();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x = s.x(i);
    const GasState& u = s.nodes[i];
    const auto p = to_invariants(u, ctx.gas);
    out << fmt(t) << ',' << fmt(x) << ',' << fmt(u.rho) << ',' << fmt(u.m) << ',' << fmt(velocity(u, ctx.gas)) << ','
        << fmt(p.z) << ',' << fmt(p.w) << ',' << fmt(env.lower(x)) << ',' << fmt(env.upper(x)) << '\n';
  }
}

struct SnapshotRow {
  double t, x, rho, m, v, z, w, lower, upper;
};

inline std::vector<SnapshotRow> read_snapshot(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::string line;
  std::getline(in, line);
  std::vector<SnapshotRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ls, cell, ',')) v.push_back(std::strtod(cell.c_str(), nullptr));
    if (v.size() != 9) throw std::runtime_error("malformed snapshot row in " + file.string());
    rows.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]});
  }
  return rows;
}

inline std::string snapshot_name(Mode mode, long n) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "snapshot_%s_%06ld.csv", to_string(mode), n);
  return buf;
}

inline void write_energy(const std::filesystem::path& file, const std::vector<EnergyReport>& reports) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "n,t,total_energy,total_mass,discrete_mass,energy_bound,slack,clamp_count,vacuum_count,removed_mass,"
         "max_rh_residual,max_envelope_violation,max_pre_violation,jump_sum,jump_bounded,recurrence_violation,"
         "recurrence_excess\n";
  for (const auto& r : reports) {
    out << r.n << ',' << fmt(r.t) << ',' << fmt(r.total_energy) << ',' << fmt(r.total_mass) << ','
        << fmt(r.discrete_mass) << ',' << fmt(r.energy_bound) << ',' << fmt(r.slack) << ',' << r.clamp_count << ','
        << r.vacuum_count << ',' << fmt(r.removed_mass) << ',' << fmt(r.max_rh_residual) << ','
        << fmt(r.max_envelope_violation) << ',' << fmt(r.max_pre_violation) << ',' << fmt(r.jump_sum) << ','
        << (r.jump_bounded ? 1 : 0) << ',' << fmt(r.recurrence_violation) << ',' << fmt(r.recurrence_excess) << '\n';
  }
}

inline nlohmann::ordered_json config_json(const RunSetup& s) {
  const auto& c = s.cfg;
  nlohmann::ordered_json j;
  j["gamma"] = c.gamma;
  j["geometry"] = {{"family", c.geometry.family}, {"area", c.geometry.area}, {"eps", c.geometry.eps},
                   {"kappa", c.geometry.kappa}, {"radius", c.geometry.radius}, {"table", c.geometry.table}};
  j["bound"] = {{"kind", c.bound.kind}, {"width", c.bound.width}, {"margin", c.bound.margin},
                {"value", c.bound.value}};
  j["initial"] = {{"profile", c.initial.profile}};
  const auto& p = s.ctx.params;
  j["parameters"] = {{"dx", p.dx}, {"dt", p.dt}, {"M", p.M},         {"M_data", s.data_M}, {"T", p.T},
                     {"steps", step_count(p)}, {"alpha", p.alpha}, {"beta", p.beta}, {"delta", p.delta}};
  j["validation"] = {{"pass", s.validation.pass()},
                     {"mu", s.validation.mu},
                     {"sigma", s.validation.sigma},
                     {"integral_plus", s.validation.integral_plus},
                     {"integral_minus", s.validation.integral_minus},
                     {"budget", s.validation.budget},
                     {"max_pointwise_margin", s.validation.max_pointwise_margin}};
  return j;
}

// ---------------------------------------------------------------------------
// Commands

struct RunOutcome {
  int exit_code = 0;
  std::vector<std::string> hard_failures;
  std::vector<std::string> files;
};

namespace detail {

inline EnergyReport plain_report(const StaggeredState& s, const SchemeContext& ctx, double bound) {
  EnergyReport r;
  r.n = s.n;
  r.t = static_cast<double>(s.n) * ctx.params.dt;
  r.total_energy = total_energy(s, *ctx.geom, ctx.gas);
  r.total_mass = total_mass(s, *ctx.geom);
  r.discrete_mass = discrete_mass(s);
  r.energy_bound = bound;
  r.slack = bound - r.total_energy;
  return r;
}

}  // namespace detail

/// Runs the configured scheme and writes snapshots, the energy series and the audit summary.
inline RunOutcome cmd_run(const RunConfig& config, std::ostream& log) {
  RunSetup setup(config);
  const auto& cfg = setup.cfg;
  const auto& ctx = setup.ctx;
  const std::filesystem::path dir(cfg.out);
  std::filesystem::create_directories(dir);
  RunOutcome outcome;
  const long steps = step_count(ctx.params);
  const auto s0 = initialize(setup.u0, ctx, steps);
  const auto [xa, xb] = audit_range(s0);
  const double energy0 = initial_energy(setup.u0, xa, xb, ctx);

  auto snapshot = [&](const StaggeredState& s) {
    const auto name = snapshot_name(cfg.mode, s.n);
    write_snapshot(dir / name, s, static_cast<double>(s.n) * ctx.params.dt, ctx);
    outcome.files.push_back(name);
  };
  auto wants_snapshot = [&](long n) { return n % cfg.stride == 0 || n == steps; };

  nlohmann::ordered_json audit;
  audit["mode"] = to_string(cfg.mode);
  if (cfg.mode == Mode::baseline_lf) audit["note"] = "plain staggered Lax-Friedrichs with pointwise source; comparison only";
  audit["config"] = config_json(setup);
  std::vector<EnergyReport> reports;

  if (cfg.mode == Mode::modified) {
    Monitor mon(ctx, energy0, cfg.audit, cfg.slack_coefficient);
    mon.initial(s0);
    snapshot(s0);
    auto snap_obs = [&](const StepView& v) {
      if (wants_snapshot(v.result.state.n)) snapshot(v.result.state);
    };
    const auto res = run(setup.u0, ctx, {mon.as_observer(), snap_obs});
    reports = mon.reports();
    const auto& last = reports.back();
    const double post = mon.max_post_violation();
    const double rh = mon.max_rh_residual();
    if (post > 0.0) outcome.hard_failures.push_back("post-projection envelope violation " + fmt(post));
    if (rh > cfg.rh_threshold) outcome.hard_failures.push_back("Rankine-Hugoniot residual " + fmt(rh));
    bool jump_ok = true;
    for (const auto& r : reports) jump_ok = jump_ok && r.jump_bounded;
    audit["results"] = {{"steps", res.steps},
                        {"final_time", last.t},
                        {"min_slack", mon.min_slack()},
                        {"max_envelope_violation", post},
                        {"max_pre_violation", mon.max_pre_violation()},
                        {"max_rh_residual", rh},
                        {"clamp_count", last.clamp_count},
                        {"vacuum_count", last.vacuum_count},
                        {"removed_mass", last.removed_mass},
                        {"initial_mass", reports.front().total_mass},
                        {"final_mass", last.total_mass},
                        {"jump_sum", last.jump_sum},
                        {"jump_bounded", jump_ok},
                        {"worst_recurrence_violation", mon.worst_recurrence_violation()},
                        {"worst_recurrence_excess", mon.worst_recurrence_excess()}};
  } else {
    StaggeredState s = s0;
    reports.push_back(detail::plain_report(s, ctx, energy0));
    snapshot(s);
    for (long k = 0; k < steps; ++k) {
      s = baseline_lf_step(s, ctx);
      reports.push_back(detail::plain_report(s, ctx, energy0));
      if (wants_snapshot(s.n)) snapshot(s);
    }
    // Comparison against the modified scheme on the same mesh.
    Monitor mon(ctx, energy0, false);
    mon.initial(s0);
    run(setup.u0, ctx, {mon.as_observer()});
    const auto cmp_name = std::string("comparison_energy.csv");
    std::ofstream cmp(dir / cmp_name);
    cmp << "n,t,energy_modified,energy_baseline,mass_modified,mass_baseline\n";
    double max_gap = 0.0;
    for (std::size_t i = 0; i < reports.size() && i < mon.reports().size(); ++i) {
      const auto& a = mon.reports()[i];
      const auto& b = reports[i];
      cmp << b.n << ',' << fmt(b.t) << ',' << fmt(a.total_energy) << ',' << fmt(b.total_energy) << ','
          << fmt(a.total_mass) << ',' << fmt(b.total_mass) << '\n';
      max_gap = std::max(max_gap, std::abs(a.total_energy - b.total_energy));
    }
    outcome.files.push_back(cmp_name);
    double min_slack = std::numeric_limits<double>::infinity();
    for (const auto& r : reports) min_slack = std::min(min_slack, r.slack);
    audit["results"] = {{"steps", steps},
                        {"final_time", reports.back().t},
                        {"min_slack", min_slack},
                        {"initial_mass", reports.front().total_mass},
                        {"final_mass", reports.back().total_mass},
                        {"max_energy_gap_to_modified", max_gap}};
  }

  const auto energy_name = std::string("energy_") + to_string(cfg.mode) + ".csv";
  write_energy(dir / energy_name, reports);
  outcome.files.push_back(energy_name);
  audit["hard_failures"] = outcome.hard_failures;
  audit["status"] = outcome.hard_failures.empty() ? "ok" : "hard-failure";
  const auto audit_name = std::string("audit_") + to_string(cfg.mode) + ".json";
  std::ofstream(dir / audit_name) << audit.dump(2) << '\n';
  outcome.files.push_back(audit_name);
  outcome.exit_code = outcome.hard_failures.empty() ? 0 : 2;

  log << "mode " << to_string(cfg.mode) << ", " << steps << " steps, dx " << fmt(ctx.params.dx) << ", dt "
      << fmt(ctx.params.dt) << ", M " << fmt(ctx.params.M) << '\n';
  for (const auto& f : outcome.hard_failures) log << "hard failure: " << f << '\n';
  log << "wrote " << outcome.files.size() << " files to " << dir.string() << '\n';
  return outcome;
}

struct RiemannRequest {
  GasState left;
  GasState right;
  double gamma = 1.4;
  double t = 1.0;
  int samples = 21;
  std::optional<double> x_min;
  std::optional<double> x_max;
};

/// Region, middle state, wave speeds and a sampled profile at time t.
inline void cmd_riemann(const RiemannRequest& req, std::ostream& out) {
  if (!(req.left.rho >= 0.0 && req.right.rho >= 0.0)) throw ConfigError("rho", "densities must be nonnegative");
  if (!(req.t > 0.0)) throw ConfigError("t", "sample time must be positive");
  if (req.samples < 1) throw ConfigError("samples", "need at least one sample");
  const auto c = make_gas(req.gamma);
  const auto rs = solve_riemann(req.left, req.right, c);
  const auto p = to_invariants(rs.middle, c);
  out << "region " << to_string(rs.region) << '\n';
  out << "middle rho " << fmt(rs.middle.rho) << " m " << fmt(rs.middle.m) << " v " << fmt(velocity(rs.middle, c))
      << " z " << fmt(p.z) << " w " << fmt(p.w) << '\n';
  auto wave = [&](const WaveDescriptor& wd) {
    out << "wave" << wd.kind.family << ' ' << (wd.is_shock() ? "shock" : "rarefaction") << " speeds "
        << fmt(wd.speed_lo) << ' ' << fmt(wd.speed_hi) << '\n';
  };
  wave(rs.wave1);
  wave(rs.wave2);
  out << "x,rho,m,v\n";
  auto row = [&](double x) {
    const GasState u = sample(rs, x / req.t);
    out << fmt(x) << ',' << fmt(u.rho) << ',' << fmt(u.m) << ',' << fmt(velocity(u, c)) << '\n';
  };
  if (req.left == req.right) {
    row(0.0);
    return;
  }
  const double reach = 1.2 * std::max({std::abs(rs.wave1.speed_lo), std::abs(rs.wave2.speed_hi), 1e-3}) * req.t;
  const double a = req.x_min.value_or(-reach), b = req.x_max.value_or(reach);
  if (req.samples == 1) {
    row(0.5 * (a + b));
    return;
  }
  for (int i = 0; i < req.samples; ++i) row(a + (b - a) * i / (req.samples - 1));
}

/// Prints the admissibility check of the geometry and bound function. Returns true on pass.
inline bool cmd_validate(const RunConfig& config, std::ostream& out) {
  RunSetup setup(config);
  const auto& v = setup.validation;
  out << "mu " << fmt(v.mu) << '\n';
  out << "sigma " << fmt(v.sigma) << '\n';
  out << "budget " << fmt(v.budget) << '\n';
  out << "integral_plus " << fmt(v.integral_plus) << '\n';
  out << "integral_minus " << fmt(v.integral_minus) << '\n';
  out << "max_pointwise_margin " << fmt(v.max_pointwise_margin) << " at x " << fmt(v.worst_x) << '\n';
  if (v.integral_excess > 0.0) out << "integral_excess " << fmt(v.integral_excess) << '\n';
  out << "M_data " << fmt(setup.data_M) << '\n';
  out << "M " << fmt(setup.ctx.params.M) << '\n';
  out << (v.pass() ? "pass" : "fail") << '\n';
  return v.pass();
}

}  // namespace nozzle_lf::cli
