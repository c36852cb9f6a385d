#pragma once

// Energy and mass functionals, the discrete energy recurrence audit with its
// correction term R(x, u), and a per-step monitor usable as a run observer.

#include <algorithm>
#include <cmath>
#include <vector>

#include "gas.hpp"
#include "nozzle.hpp"
#include "quadrature.hpp"
#include "scheme.hpp"

namespace nozzle_lf {

// ---------------------------------------------------------------------------
// Functionals

/// Fixed integration range of a run: [j_lo dx, j_hi dx]. Both node parities cover it.
inline std::pair<double, double> audit_range(const StaggeredState& s) {
  return {static_cast<double>(s.j_lo) * s.dx, static_cast<double>(s.j_hi) * s.dx};
}

/// int f(x, u(x)) dx over the audit range for the piecewise constant node function
/// (node j holds on [(j-1)dx, (j+1)dx]; ambient states beyond the window).
template <class F>
double node_integral(const StaggeredState& s, const F& f) {
  const auto [xa, xb] = audit_range(s);
  const double dx = s.dx;
  double acc = 0.0;
  for (long j = s.first() - 2; j <= s.last() + 2; j += 2) {
    const double x0 = std::max(xa, static_cast<double>(j - 1) * dx);
    const double x1 = std::min(xb, static_cast<double>(j + 1) * dx);
    if (!(x1 > x0)) continue;
    const GasState& u = s.at(j);
    acc += gauss_legendre<5>([&](double x) { return f(x, u); }, x0, x1, 0.0);
  }
  return acc;
}

/// Node variant of the energy: int A eta*(u^n) over the audit range.
inline double total_energy(const StaggeredState& s, const NozzleGeometry& geom, const GasConstants& c) {
  return node_integral(s, [&](double x, const GasState& u) { return geom.area(x) * mechanical_pair(u, c).eta; });
}

/// Weighted mass int A rho over the audit range.
inline double total_mass(const StaggeredState& s, const NozzleGeometry& geom) {
  return node_integral(s, [&](double x, const GasState& u) { return geom.area(x) * u.rho; });
}

/// Discrete mass sum 2 dx rho_j over the stored nodes.
inline double discrete_mass(const StaggeredState& s) {
  double m = 0.0;
  for (const auto& u : s.nodes) m += 2.0 * s.dx * u.rho;
  return m;
}

/// Trace variant: int A eta*(u(x, n dt + tau)) over the cells of one step, ambient elsewhere.
inline double total_energy(const AdvanceResult& step, double tau, const SchemeContext& ctx) {
  const auto& s = step.state;
  const auto [xa, xb] = audit_range(s);
  const double dx = ctx.params.dx;
  auto f = [&](double x, const GasState& u) { return Moments{ctx.geom->area(x) * mechanical_pair(u, ctx.gas).eta, 0.0}; };
  double acc = 0.0;
  for (const auto& cell : step.cells) {
    const double x0 = std::max(xa, cell.x_center - dx);
    const double x1 = std::min(xb, cell.x_center + dx);
    if (x1 > x0) acc += integrate_trace(cell, tau, x0, x1, f, ctx).first;
  }
  auto ambient = [&](double x0, double x1, const GasState& u) {
    if (x1 > x0) acc += gauss_legendre<5>([&](double x) { return f(x, u).first; }, x0, x1, 0.0);
  };
  ambient(xa, static_cast<double>(s.first() - 1) * dx, s.ambient_left);
  ambient(static_cast<double>(s.last() + 1) * dx, xb, s.ambient_right);
  return acc;
}

/// int A eta*(chi_X u0) over [x0, x1], the right-hand side of the energy inequality.
inline double initial_energy(const InitialData& u0, double x0, double x1, const SchemeContext& ctx) {
  const double X = ctx.geom->cutoff();
  const double h = ctx.params.dx;
  std::vector<double> cuts;
  for (double x = x0; x < x1; x += h) cuts.push_back(x);
  cuts.push_back(x1);
  for (double b : u0.breakpoints)
    if (b > x0 && b < x1) cuts.push_back(b);
  if (X > x0 && X < x1) cuts.push_back(X);
  std::sort(cuts.begin(), cuts.end());
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (!(b > a) || a >= X) continue;
    acc += gauss_legendre<5>(
        [&](double x) { return ctx.geom->area(x) * mechanical_pair(normalize(u0.u(x), ctx.gas), ctx.gas).eta; }, a, b, 0.0);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Recurrence audit

/// Correction term of the discrete energy recurrence, three terms as written.
inline double correction_R(double x, const GasState& u, const SchemeParameters& params, const NozzleGeometry& geom,
                           const BoundFunction& b, const GasConstants& c) {
  if (is_vacuum(u, c)) return 0.0;
  const double g = c.gamma, th = c.theta;
  const double rho = u.rho, m = u.m;
  const double rt = std::pow(rho, th);
  const double ratio = params.dx / params.dt;
  const double bx = b(x);
  const double ax = geom.a(x);
  const double t1 = -(ratio / 4.0) * bx * (3.0 / (g - 1.0) * rt * m + m * m * m / (2.0 * std::pow(rho, th + 2.0)));
  const double t2 = (1.0 / (4.0 * ratio)) * ax *
                    (g / (g - 1.0) * std::pow(rho, 2.0 * th) * m * m / rho + 0.5 * std::pow(m, 4) / std::pow(rho, 3));
  const double t3 = -(1.0 / (4.0 * ratio)) * bx *
                    ((g + th + 1.0) / ((g - 1.0) * th) * m * std::pow(rho, 3.0 * th) +
                     (g + 3.0 * th + 4.0) / (2.0 * th) * m * m * m * rt / (rho * rho) +
                     std::pow(m, 5) / (2.0 * std::pow(rho, th + 4.0)));
  return t1 + t2 + t3;
}

/// (1 / 2dx) int over the cell and the step of -a(x) q*(u) = (A'/A) q*(u).
inline double cell_source_integral(const CellSolution& cell, const SchemeContext& ctx) {
  const double dx = ctx.params.dx;
  const double dt = ctx.params.dt;
  if (ctx.flat(cell.x_center - dx, cell.x_center + dx) || ctx.geom->straight()) return 0.0;
  auto f = [&](double x, const GasState& u) { return Moments{-ctx.a(x) * mechanical_pair(u, ctx.gas).q, 0.0}; };
  const double st = gauss_legendre<5>(
      [&](double t) { return integrate_trace(cell, t, cell.x_center - dx, cell.x_center + dx, f, ctx).first; }, 0.0, dt,
      0.0);
  return st / (2.0 * dx);
}

struct RecurrenceNode {
  long j = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double correction = 0.0;  // R(x_{j+1}) dt - R(x_{j-1}) dt
  double source = 0.0;      // space-time source integral term
  double violation = 0.0;
};

struct RecurrenceAudit {
  long n = 0;
  double slack = 0.0;  // c dx^1.5
  std::vector<RecurrenceNode> nodes;
  double worst_violation = 0.0;
  long worst_j = 0;
  double max_correction = 0.0;
};

/// Checks eta*(u_j^{n+1}) <= averaged energy - flux difference + R terms + source integral
/// at every node, with slack c dx^1.5.
inline RecurrenceAudit audit_recurrence(const StaggeredState& before, const AdvanceResult& step,
                                        const SchemeContext& ctx, double slack_coefficient = 1.0) {
  const auto& c = ctx.gas;
  const double dx = ctx.params.dx;
  const double dt = ctx.params.dt;
  RecurrenceAudit audit;
  audit.n = step.state.n;
  audit.slack = slack_coefficient * std::pow(dx, 1.5);
  for (std::size_t i = 0; i < step.cells.size(); ++i) {
    const auto& cell = step.cells[i];
    const long j = cell.j;
    const GasState& ul = before.at(j - 1);
    const GasState& ur = before.at(j + 1);
    const auto el = mechanical_pair(ul, c);
    const auto er = mechanical_pair(ur, c);
    RecurrenceNode node;
    node.j = j;
    node.lhs = mechanical_pair(step.state.nodes[i], c).eta;
    node.correction = (correction_R(static_cast<double>(j + 1) * dx, ur, ctx.params, *ctx.geom, *ctx.b, c) -
                       correction_R(static_cast<double>(j - 1) * dx, ul, ctx.params, *ctx.geom, *ctx.b, c)) * dt;
    node.source = cell_source_integral(cell, ctx);
    node.rhs = 0.5 * (el.eta + er.eta) - dt / (2.0 * dx) * (er.q - el.q) + node.correction + node.source;
    node.violation = std::max(0.0, node.lhs - node.rhs - audit.slack);
    if (node.violation > audit.worst_violation) {
      audit.worst_violation = node.violation;
      audit.worst_j = j;
    }
    audit.max_correction = std::max(audit.max_correction, std::abs(node.correction));
    audit.nodes.push_back(node);
  }
  return audit;
}

/// Largest lhs - rhs over the nodes before the slack is applied (may be negative).
inline double worst_excess(const RecurrenceAudit& a) {
  double w = -std::numeric_limits<double>::infinity();
  for (const auto& n : a.nodes) w = std::max(w, n.lhs - n.rhs);
  return w;
}

// ---------------------------------------------------------------------------
// Monitor

/// int over the cells of |u(x, t_{n+1} - 0) - u^{n+1}_j|^2 (both components).
inline double time_jump(const AdvanceResult& step, const SchemeContext& ctx) {
  const double dx = ctx.params.dx;
  double acc = 0.0;
  for (std::size_t i = 0; i < step.cells.size(); ++i) {
    const auto& cell = step.cells[i];
    const GasState uj = step.state.nodes[i];
    const auto m = integrate_trace(
        cell, ctx.params.dt, cell.x_center - dx, cell.x_center + dx,
        [&](double, const GasState& u) {
          const double dr = u.rho - uj.rho, dm = u.m - uj.m;
          return Moments{dr * dr, dm * dm};
        },
        ctx);
    acc += m.first + m.second;
  }
  return acc;
}

struct EnergyReport {
  long n = 0;
  double t = 0.0;
  double total_energy = 0.0;
  double total_mass = 0.0;
  double discrete_mass = 0.0;
  double energy_bound = 0.0;
  double slack = 0.0;  // energy_bound - total_energy
  long clamp_count = 0;
  long vacuum_count = 0;
  double removed_mass = 0.0;
  double max_rh_residual = 0.0;
  double max_envelope_violation = 0.0;  // after projection
  double max_pre_violation = 0.0;       // before projection
  double jump_sum = 0.0;                // accumulated time-jump integral
  double jump_ceiling = 0.0;            // 0 until calibrated at step 5
  bool jump_bounded = true;
  double recurrence_violation = 0.0;  // worst max(0, lhs - rhs - c dx^1.5)
  double recurrence_excess = 0.0;     // worst max(0, lhs - rhs), no slack
};

/// Collects one EnergyReport per step. Attach with as_observer().
class Monitor {
public:
  Monitor(const SchemeContext& ctx, double energy0, bool audit = true, double slack_coefficient = 1.0,
          double ceiling_factor = 10.0)
      : ctx_(ctx), energy0_(energy0), audit_(audit), slack_coefficient_(slack_coefficient), ceiling_factor_(ceiling_factor) {}

  /// Report for the initial state.
  EnergyReport initial(const StaggeredState& s) {
    EnergyReport r;
    r.n = s.n;
    r.total_energy = total_energy(s, *ctx_.geom, ctx_.gas);
    r.total_mass = total_mass(s, *ctx_.geom);
    r.discrete_mass = discrete_mass(s);
    r.energy_bound = energy0_;
    r.slack = energy0_ - r.total_energy;
    const auto env = ctx_.envelope();
    for (std::size_t i = 0; i < s.size(); ++i)
      r.max_envelope_violation = std::max(r.max_envelope_violation, envelope_violation(s.nodes[i], s.x(i), env, ctx_.gas));
    reports_.push_back(r);
    return r;
  }

  EnergyReport observe(const StepView& v) {
    const auto& step = v.result;
    EnergyReport r;
    r.n = step.state.n;
    r.t = static_cast<double>(r.n) * ctx_.params.dt;
    r.total_energy = total_energy(step.state, *ctx_.geom, ctx_.gas);
    r.total_mass = total_mass(step.state, *ctx_.geom);
    r.discrete_mass = discrete_mass(step.state);
    r.energy_bound = energy0_;
    r.slack = energy0_ - r.total_energy;
    const long prev_clamps = reports_.empty() ? 0 : reports_.back().clamp_count;
    const long prev_vac = reports_.empty() ? 0 : reports_.back().vacuum_count;
    const double prev_removed = reports_.empty() ? 0.0 : reports_.back().removed_mass;
    r.clamp_count = prev_clamps + step.stats.clamp_count;
    r.vacuum_count = prev_vac + step.stats.vacuum_count;
    r.removed_mass = prev_removed + step.stats.removed_mass;
    r.max_rh_residual = step.stats.max_rh_residual;
    r.max_envelope_violation = step.stats.max_post_violation;
    r.max_pre_violation = step.stats.max_pre_violation;
    jump_sum_ += time_jump(step, ctx_);
    r.jump_sum = jump_sum_;
    if (r.n == 5) jump_at5_ = jump_sum_;
    if (r.n >= 5) {
      r.jump_ceiling = ceiling_factor_ * jump_at5_ * static_cast<double>(r.n) / 5.0;
      r.jump_bounded = jump_sum_ <= r.jump_ceiling || jump_sum_ == 0.0;
    }
    if (audit_) {
      const auto a = audit_recurrence(v.before, step, ctx_, slack_coefficient_);
      r.recurrence_violation = a.worst_violation;
      r.recurrence_excess = std::max(0.0, worst_excess(a));
      audits_.push_back(a.worst_violation);
      excess_.push_back(r.recurrence_excess);
    }
    reports_.push_back(r);
    return r;
  }

  Observer as_observer() {
    return [this](const StepView& v) { observe(v); };
  }

  const std::vector<EnergyReport>& reports() const { return reports_; }
  /// Worst recurrence violation per step.
  const std::vector<double>& audit_violations() const { return audits_; }

  double min_slack() const {
    double s = std::numeric_limits<double>::infinity();
    for (const auto& r : reports_) s = std::min(s, r.slack);
    return s;
  }
  double max_pre_violation() const {
    double s = 0.0;
    for (const auto& r : reports_) s = std::max(s, r.max_pre_violation);
    return s;
  }
  double max_post_violation() const {
    double s = 0.0;
    for (const auto& r : reports_) s = std::max(s, r.max_envelope_violation);
    return s;
  }
  double max_rh_residual() const {
    double s = 0.0;
    for (const auto& r : reports_) s = std::max(s, r.max_rh_residual);
    return s;
  }
  double worst_recurrence_excess() const {
    double s = 0.0;
    for (double a : excess_) s = std::max(s, a);
    return s;
  }
  double worst_recurrence_violation() const {
    double s = 0.0;
    for (double a : audits_) s = std::max(s, a);
    return s;
  }

private:
  SchemeContext ctx_;
  double energy0_;
  bool audit_;
  double slack_coefficient_;
  double ceiling_factor_;
  double jump_sum_ = 0.0;
  double jump_at5_ = 0.0;
  std::vector<EnergyReport> reports_;
  std::vector<double> audits_;
  std::vector<double> excess_;
};

}  // namespace nozzle_lf
