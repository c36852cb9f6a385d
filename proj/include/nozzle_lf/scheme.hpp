#pragma once

// Modified staggered Lax-Friedrichs scheme: parameters, the per-cell
// approximate solution (fans of rarefaction shocks, steady profiles, implicit
// front solves, near-vacuum construction), averaging, projection and stepping.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include "errors.hpp"
#include "gas.hpp"
#include "nozzle.hpp"
#include "quadrature.hpp"
#include "riemann.hpp"

namespace nozzle_lf {

// ---------------------------------------------------------------------------
// Parameters

struct SchemeParameters {
  double dx = 0.0;
  double dt = 0.0;
  double alpha = 0.8;
  double beta = 0.05;
  double delta = 1.5;
  double M = 0.0;
  double T = 0.0;

  double fan_step() const { return std::pow(dx, alpha); }
  double vacuum_proximity() const { return std::pow(dx, beta); }
  double averaging_threshold() const { return std::pow(dx, delta); }
  double mesh_ratio() const { return dx / dt; }
};

inline double default_delta(const GasConstants& c) { return std::min(1.5, 0.5 * (1.0 + 1.0 / (2.0 * c.theta))); }

/// Throws ConfigError naming the first violated constraint.
inline void validate_parameters(const SchemeParameters& p, const GasConstants& c) {
  if (!(p.dx > 0.0) || !std::isfinite(p.dx)) throw ConfigError("dx", "mesh width must be positive");
  if (!(p.dt > 0.0) || !std::isfinite(p.dt)) throw ConfigError("dt", "time step must be positive");
  if (!(p.M >= 0.0) || !std::isfinite(p.M)) throw ConfigError("M", "data bound must be nonnegative");
  if (!(p.T >= 0.0) || !std::isfinite(p.T)) throw ConfigError("T", "final time must be nonnegative");
  const double a = p.alpha, b = p.beta, g = c.gamma;
  if (!(a > 0.5 && a < 1.0)) throw ConfigError("alpha", "must satisfy 1/2 < alpha < 1");
  if (!(b > 0.0)) throw ConfigError("beta", "must be positive");
  if (!(b < a)) throw ConfigError("beta", "must satisfy beta < alpha");
  if (!(0.5 + b / 2.0 < a)) throw ConfigError("alpha", "must satisfy 1/2 + beta/2 < alpha");
  if (!(a < 1.0 - 2.0 * b)) throw ConfigError("alpha", "must satisfy alpha < 1 - 2 beta");
  if (!(b < 2.0 / (g + 5.0))) throw ConfigError("beta", "must satisfy beta < 2/(gamma+5)");
  if (!((9.0 - 3.0 * g) * b / 2.0 < a)) throw ConfigError("alpha", "must satisfy (9 - 3 gamma) beta / 2 < alpha");
  if (!(p.delta > 1.0 && p.delta < 1.0 / (2.0 * c.theta)))
    throw ConfigError("delta", "must satisfy 1 < delta < 1/(2 theta)");
}

struct ExponentOverrides {
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> delta;
};

/// Resolves defaults, fixes dt from the mesh ratio dx/dt = 2 M e^{max(I+, I-)} and validates.
/// With M == 0 (vacuum data) nothing moves and the ratio is taken with M = 1.
inline SchemeParameters make_parameters(double dx, double M, double T, const BoundFunction& b,
                                        const GasConstants& c, const ExponentOverrides& ov = {}) {
  SchemeParameters p;
  p.dx = dx;
  p.M = M;
  p.T = T;
  p.alpha = ov.alpha.value_or(0.8);
  p.beta = ov.beta.value_or(0.05);
  p.delta = ov.delta.value_or(default_delta(c));
  const double speed = 2.0 * (M > 0.0 ? M : 1.0) * std::exp(b.max_integral());
  p.dt = dx / speed;
  validate_parameters(p, c);
  return p;
}

/// Everything a cell construction reads. Geometry and bound are borrowed.
struct SchemeContext {
  SchemeParameters params;
  const NozzleGeometry* geom = nullptr;
  const BoundFunction* b = nullptr;
  GasConstants gas;

  double a(double x) const { return geom->a(x); }
  double bx(double x) const { return (*b)(x); }
  double B(double x) const { return b->cumulative(x); }
  InvariantEnvelope envelope() const { return {params.M, *b}; }

  /// True when both a and b vanish identically on [x0, x1].
  bool flat(double x0, double x1) const {
    const double X = geom->cutoff();
    const bool a_zero = geom->straight() || x1 <= -X || x0 >= X;
    const bool b_zero = b->is_zero() || x1 <= b->lo() || x0 >= b->hi();
    return a_zero && b_zero;
  }
};

// ---------------------------------------------------------------------------
// Fans

inline int fan_count(double span, double h) {
  if (!(span >= 0.0)) throw DomainError("fan span must be nonnegative");
  const double q = std::floor(span / h);
  if (q > 1e7) throw DomainError("fan would need more than 1e7 states");
  return std::max(static_cast<int>(q) + 1, 2);
}

/// One discretization jump of a fan: the left state, its inverse-shock partner
/// and the jump speed.
struct FanJump {
  GasState left;
  GasState right;
  double speed = 0.0;
};

/// Piecewise constant 1-rarefaction fan with invariant steps (dx)^alpha.
struct FanDescriptor {
  int p = 0;
  std::vector<double> z_stars;
  double w_L = 0.0;
  std::vector<double> speeds;  // p - 1 entries
  GasConstants gas;

  GasState state(int i) const { return from_invariants({z_stars.at(i), w_L}, gas); }

  /// Jump i -> i+1 realized on the 1-Hugoniot locus through state i, at the density of state i+1.
  FanJump jump(int i) const {
    const GasState l = state(i);
    const double rho_r = density_from_invariants(z_stars.at(i + 1), w_L, gas);
    return {l, hugoniot_state(1, l, rho_r, gas), speeds.at(i)};
  }
};

/// lambda_1(z_i, z_{i+1}, w) = v(z_i, w) - S(rho(z_{i+1}, w), rho(z_i, w)).
inline double fan_speed(double zi, double zj, double w, const GasConstants& c) {
  const double ri = density_from_invariants(zi, w, c);
  const double rj = density_from_invariants(zj, w, c);
  return 0.5 * (zi + w) - lax_speed(rj, ri, c);
}

inline FanDescriptor build_fan(const GasState& u_L, double z_M, const SchemeParameters& params, const GasConstants& c) {
  const auto pl = to_invariants(u_L, c);
  if (is_vacuum(u_L, c)) throw DomainError("build_fan: vacuum left state");
  if (z_M < pl.z) throw DomainError("build_fan: z_M < z_L is not a 1-rarefaction");
  const double h = params.fan_step();
  FanDescriptor f;
  f.gas = c;
  f.w_L = pl.w;
  f.p = fan_count(z_M - pl.z, h);
  f.z_stars.resize(static_cast<std::size_t>(f.p));
  for (int i = 0; i < f.p - 1; ++i) f.z_stars[static_cast<std::size_t>(i)] = pl.z + i * h;
  f.z_stars.back() = z_M;
  for (int i = 0; i + 1 < f.p; ++i)
    f.speeds.push_back(fan_speed(f.z_stars[static_cast<std::size_t>(i)], f.z_stars[static_cast<std::size_t>(i) + 1], f.w_L, c));
  return f;
}

// ---------------------------------------------------------------------------
// Cell solution

enum class PieceKind { steady, riemann };

/// A region of the cell: a time-corrected steady profile or a self-similar Riemann solution
/// centred at the cell midpoint.
struct Piece {
  PieceKind kind = PieceKind::steady;
  ProfileData profile;
  RiemannSolution riemann;
};

/// `jump` fronts are discontinuities fixed by the Rankine-Hugoniot relation at mid-time;
/// `seam` fronts glue a near-vacuum side construction to the central Riemann piece.
enum class FrontKind { jump, seam };

struct Front {
  double speed = 0.0;
  FrontKind kind = FrontKind::jump;
};

enum class CellRoute { uniform, interior, near_vacuum };

/// How one side of the cell was treated.
enum class SideKind {
  none,           // shock side or uniform cell
  fan,            // full fan (interior route)
  truncated_fan,  // fan stopped at density 2 dx^beta, near vacuum
  plain,          // raw Riemann data, near vacuum
  scaled_profile  // both invariants scaled down towards the envelope, near vacuum
};

inline const char* to_string(SideKind k) {
  switch (k) {
    case SideKind::none: return "none";
    case SideKind::fan: return "fan";
    case SideKind::truncated_fan: return "truncated_fan";
    case SideKind::plain: return "plain";
    case SideKind::scaled_profile: return "scaled_profile";
  }
  return "?";
}

struct CellSolution {
  long j = 0;
  long n = 0;
  double x_center = 0.0;
  CellRoute route = CellRoute::uniform;
  Region region = Region::I;
  SideKind left_side = SideKind::none;
  SideKind right_side = SideKind::none;
  int left_fan_states = 0;
  int right_fan_states = 0;
  double left_edge_x = std::numeric_limits<double>::quiet_NaN();   // x4 of the scaled profile, left side
  double right_edge_x = std::numeric_limits<double>::quiet_NaN();  // same, right side
  int newton_iterations = 0;
  std::vector<Piece> pieces;
  std::vector<Front> fronts;  // fronts[k] separates pieces[k] and pieces[k+1]
};

/// Near-vacuum case label: "1.1", "1.2(i)", "1.2(ii)", "2", "3", "4", or "" off that route.
inline std::string vacuum_case(const CellSolution& cell) {
  if (cell.route != CellRoute::near_vacuum) return "";
  auto sub = [](SideKind k) -> std::string {
    switch (k) {
      case SideKind::truncated_fan: return "1.1";
      case SideKind::scaled_profile: return "1.2(ii)";
      default: return "1.2(i)";
    }
  };
  switch (cell.region) {
    case Region::IV: return sub(cell.left_side);
    case Region::II: return "2";
    case Region::I: return "3";
    case Region::III: return "4";
  }
  return "";
}

/// State of piece k at (x, n dt + tau).
inline CorrectedState piece_state(const CellSolution& cell, std::size_t k, double x, double tau,
                                  const SchemeContext& ctx) {
  const Piece& pc = cell.pieces.at(k);
  if (pc.kind == PieceKind::steady)
    return time_correct(pc.profile, x, tau, *ctx.geom, *ctx.b, ctx.gas);
  GasState u;
  const double dxc = x - cell.x_center;
  if (tau > 0.0)
    u = sample(pc.riemann, dxc / tau);
  else
    u = dxc < 0.0 ? pc.riemann.left : pc.riemann.right;
  return {to_invariants(u, ctx.gas), u, false};
}

/// Index of the piece containing x at offset tau (a point on a front belongs to the right piece).
inline std::size_t locate(const CellSolution& cell, double x, double tau) {
  std::size_t k = 0;
  while (k < cell.fronts.size() && x >= cell.x_center + cell.fronts[k].speed * tau) ++k;
  return k;
}

inline CorrectedState evaluate(const CellSolution& cell, double x, double tau, const SchemeContext& ctx) {
  return piece_state(cell, locate(cell, x, tau), x, tau, ctx);
}

/// Sub-interval of the cell at a fixed time on which the solution is given by one smooth formula.
struct TraceSegment {
  std::size_t piece = 0;
  double x0 = 0.0;
  double x1 = 0.0;
  bool fan = false;  // inside a rarefaction of a Riemann piece
};

/// Splits [x0, x1] at the front positions and, for Riemann pieces, at wave edges.
inline std::vector<TraceSegment> trace_segments(const CellSolution& cell, double tau, double x0, double x1) {
  std::vector<TraceSegment> out;
  const double xc = cell.x_center;
  for (std::size_t k = 0; k < cell.pieces.size(); ++k) {
    double lo = k == 0 ? -std::numeric_limits<double>::infinity() : xc + cell.fronts[k - 1].speed * tau;
    double hi = k + 1 == cell.pieces.size() ? std::numeric_limits<double>::infinity() : xc + cell.fronts[k].speed * tau;
    lo = std::max(lo, x0);
    hi = std::min(hi, x1);
    if (!(hi > lo)) continue;
    const Piece& pc = cell.pieces[k];
    if (pc.kind == PieceKind::steady || tau == 0.0) {
      out.push_back({k, lo, hi, false});
      continue;
    }
    // Riemann piece: break at the rarefaction edges.
    const auto& w1 = pc.riemann.wave1;
    const auto& w2 = pc.riemann.wave2;
    std::vector<double> edges;
    std::vector<std::pair<double, double>> fans;
    if (!w1.is_shock() && w1.speed_hi > w1.speed_lo) fans.emplace_back(xc + w1.speed_lo * tau, xc + w1.speed_hi * tau);
    if (!w2.is_shock() && w2.speed_hi > w2.speed_lo) fans.emplace_back(xc + w2.speed_lo * tau, xc + w2.speed_hi * tau);
    edges.push_back(lo);
    for (const auto& f : fans) {
      edges.push_back(f.first);
      edges.push_back(f.second);
    }
    edges.push_back(xc + w1.speed_lo * tau);
    edges.push_back(xc + w2.speed_lo * tau);
    edges.push_back(hi);
    std::sort(edges.begin(), edges.end());
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
      const double a = std::max(edges[e], lo);
      const double b = std::min(edges[e + 1], hi);
      if (!(b > a)) continue;
      const double mid = 0.5 * (a + b);
      bool in_fan = false;
      for (const auto& f : fans)
        if (mid > f.first && mid < f.second) in_fan = true;
      out.push_back({k, a, b, in_fan});
    }
  }
  return out;
}

/// int_{x0}^{x1} F(x, u(x, n dt + tau)) dx with F returning Moments. Smooth pieces use
/// 5-point Gauss-Legendre; rarefaction fans, whose profile may end in vacuum with a
/// power-law edge, use a composite 10-point rule.
template <class F>
Moments integrate_trace(const CellSolution& cell, double tau, double x0, double x1, const F& f,
                        const SchemeContext& ctx) {
  Moments acc;
  for (const auto& seg : trace_segments(cell, tau, x0, x1)) {
    auto g = [&](double x) { return f(x, piece_state(cell, seg.piece, x, tau, ctx).u); };
    if (seg.fan) {
      constexpr int panels = 8;
      const double h = (seg.x1 - seg.x0) / panels;
      for (int k = 0; k < panels; ++k)
        acc = acc + gauss_legendre<10>(g, seg.x0 + k * h, seg.x0 + (k + 1) * h, Moments{});
    } else {
      acc = acc + gauss_legendre<5>(g, seg.x0, seg.x1, Moments{});
    }
  }
  return acc;
}

/// E_j = (1 / 2dx) int over the cell of the trace at the end of the step. Constant regions and
/// rarefaction fans are integrated in closed form, steady pieces by 5-point Gauss-Legendre.
inline GasState cell_average(const CellSolution& cell, const SchemeContext& ctx, double tau = -1.0) {
  const double dx = ctx.params.dx;
  if (tau < 0.0) tau = ctx.params.dt;
  if (cell.pieces.size() == 1 && cell.pieces[0].kind == PieceKind::riemann &&
      cell.pieces[0].riemann.left == cell.pieces[0].riemann.right)
    return cell.pieces[0].riemann.left;
  Moments acc;
  for (const auto& seg : trace_segments(cell, tau, cell.x_center - dx, cell.x_center + dx)) {
    const Piece& pc = cell.pieces[seg.piece];
    if (pc.kind == PieceKind::steady) {
      acc = acc + gauss_legendre<5>(
                      [&](double x) {
                        const GasState u = piece_state(cell, seg.piece, x, tau, ctx).u;
                        return Moments{u.rho, u.m};
                      },
                      seg.x0, seg.x1, Moments{});
    } else if (seg.fan) {
      const double xi0 = (seg.x0 - cell.x_center) / tau;
      const double xi1 = (seg.x1 - cell.x_center) / tau;
      const double mid = 0.5 * (xi0 + xi1);
      const auto& w1 = pc.riemann.wave1;
      const int family = (mid > w1.speed_lo && mid < w1.speed_hi && !w1.is_shock()) ? 1 : 2;
      const auto [mass, mom] = rarefaction_moments(pc.riemann, family, xi0, xi1);
      acc = acc + Moments{tau * mass, tau * mom};
    } else {
      const GasState u = piece_state(cell, seg.piece, 0.5 * (seg.x0 + seg.x1), tau, ctx).u;
      acc = acc + (seg.x1 - seg.x0) * Moments{u.rho, u.m};
    }
  }
  return {acc.first / (2.0 * dx), acc.second / (2.0 * dx)};
}

/// States on both sides of front k at mid-time.
inline std::pair<GasState, GasState> front_states(const CellSolution& cell, std::size_t k, const SchemeContext& ctx) {
  const double tau = 0.5 * ctx.params.dt;
  const double x = cell.x_center + cell.fronts.at(k).speed * tau;
  return {piece_state(cell, k, x, tau, ctx).u, piece_state(cell, k + 1, x, tau, ctx).u};
}

/// Largest mid-time Rankine-Hugoniot residual over the jump fronts of a cell.
inline double max_rh_residual(const CellSolution& cell, const SchemeContext& ctx) {
  double r = 0.0;
  for (std::size_t k = 0; k < cell.fronts.size(); ++k) {
    if (cell.fronts[k].kind != FrontKind::jump) continue;
    const auto [ul, ur] = front_states(cell, k, ctx);
    r = std::max(r, rh_residual(ul, ur, cell.fronts[k].speed, ctx.gas));
  }
  return r;
}

/// Throws CellError when fronts are not strictly increasing or leave the cell.
inline void check_fronts(const CellSolution& cell, const SchemeContext& ctx) {
  const double cap = ctx.params.mesh_ratio();
  for (std::size_t k = 0; k < cell.fronts.size(); ++k) {
    const double s = cell.fronts[k].speed;
    if (!std::isfinite(s) || std::abs(s) >= cap)
      throw CellError("front speed " + std::to_string(s) + " exceeds dx/dt = " + std::to_string(cap), cell.j, cell.n);
    if (k > 0 && !(s > cell.fronts[k - 1].speed))
      throw CellError("front speeds not strictly increasing at front " + std::to_string(k), cell.j, cell.n);
  }
  if (cell.pieces.size() != cell.fronts.size() + 1) throw CellError("piece/front count mismatch", cell.j, cell.n);
}

// ---------------------------------------------------------------------------
// Front solves

struct FrontSolution {
  double sigma = 0.0;
  InvariantPair anchor;  // invariants of the new piece at its foot x = x_c + sigma dt/2
  GasState u;
  int iterations = 0;
  double residual = 0.0;  // mid-time Rankine-Hugoniot residual
};

namespace detail {

inline double varying(const InvariantPair& p, int family) { return family == 1 ? p.z : p.w; }
inline double preserved(const InvariantPair& p, int family) { return family == 1 ? p.w : p.z; }
inline InvariantPair compose(int family, double var, double pres) {
  return family == 1 ? InvariantPair{var, pres} : InvariantPair{pres, var};
}

inline InvariantPair locus_invariants(int family, const GasState& anchor, double speed, const GasConstants& c) {
  return to_invariants(hugoniot_state_with_speed(family, anchor, speed, c), c);
}

/// Damped Newton with forward-difference Jacobian; returns iterations used or -1.
template <int N, class Residual>
int newton(Eigen::Matrix<double, N, 1>& x, const Residual& r, double step_tol, double res_tol, int max_iter = 100) {
  using Vec = Eigen::Matrix<double, N, 1>;
  using Mat = Eigen::Matrix<double, N, N>;
  Vec f = r(x);
  if (!f.allFinite()) return -1;
  for (int it = 1; it <= max_iter; ++it) {
    Mat J;
    for (int k = 0; k < N; ++k) {
      Vec xp = x;
      const double h = 1e-7 * std::max(1.0, std::abs(x[k]));
      xp[k] += h;
      J.col(k) = (r(xp) - f) / h;
    }
    Vec dx = J.fullPivLu().solve(-f);
    if (!dx.allFinite()) return -1;
    double lam = 1.0;
    Vec xn = x + dx;
    Vec fn = r(xn);
    for (int k = 0; k < 40 && (!fn.allFinite() || fn.norm() > f.norm()) && lam > 1e-12; ++k) {
      lam *= 0.5;
      xn = x + lam * dx;
      fn = r(xn);
    }
    if (!fn.allFinite()) return -1;
    const double step = (lam * dx).template lpNorm<Eigen::Infinity>();
    x = xn;
    f = fn;
    if (step < step_tol && f.template lpNorm<Eigen::Infinity>() < res_tol) return it;
    if (f.template lpNorm<Eigen::Infinity>() == 0.0) return it;
  }
  return f.template lpNorm<Eigen::Infinity>() < res_tol ? max_iter : -1;
}

}  // namespace detail

/// Finds the next state of a fan. `known` is the piece on the outer side; the new piece is a
/// steady profile anchored at its foot x = x_c + sigma dt/2 whose varying invariant equals
/// `target` (z for family 1, w for family 2). At mid-time the Hugoniot state through the
/// time-corrected known value must equal the time-corrected new value.
inline FrontSolution solve_front(const ProfileData& known, int family, double target, double sigma_prev,
                                 double x_center, const SchemeContext& ctx, long j = 0, long n = 0) {
  const auto& c = ctx.gas;
  const double tau = 0.5 * ctx.params.dt;
  const double cap = ctx.params.mesh_ratio();
  auto known_at = [&](double x) { return time_correct(known, x, tau, *ctx.geom, *ctx.b, c).u; };

  // Initial guess from the unmodified locus at the cell centre.
  const GasState k0 = known_at(x_center);
  if (is_vacuum(k0, c)) throw CellError("front solve from a vacuum state", j, n);
  const GasState h0 = hugoniot_state_with_invariant(family, k0, target, c);
  Eigen::Vector2d x(hugoniot_speed(family, k0, h0.rho, c), detail::preserved(to_invariants(h0, c), family));

  auto residual = [&](const Eigen::Vector2d& s) -> Eigen::Vector2d {
    const double xf = x_center + s[0] * tau;
    const GasState K = known_at(xf);
    if (is_vacuum(K, c)) return Eigen::Vector2d::Constant(std::numeric_limits<double>::quiet_NaN());
    const auto H = detail::locus_invariants(family, K, s[0], c);
    const auto anchor = detail::compose(family, target, s[1]);
    if (anchor.w < anchor.z) return Eigen::Vector2d::Constant(std::numeric_limits<double>::quiet_NaN());
    const auto R = time_correct_invariants(anchor, ctx.a(xf), ctx.bx(xf), -1, 1, tau, c);
    return {H.z - R.p.z, H.w - R.p.w};
  };

  const double scale = 1.0 + std::abs(target) + std::abs(x[1]);
  const int it = detail::newton<2>(x, residual, 1e-11, 1e-13 * scale);
  if (it < 0) throw CellError("front solve did not converge (residual " + std::to_string(residual(x).norm()) + ")", j, n);

  FrontSolution out;
  out.sigma = x[0];
  out.anchor = detail::compose(family, target, x[1]);
  out.u = from_invariants(out.anchor, c);
  out.iterations = it;
  const double xf = x_center + out.sigma * tau;
  const auto R = time_correct_invariants(out.anchor, ctx.a(xf), ctx.bx(xf), -1, 1, tau, c);
  out.residual = rh_residual(known_at(xf), R.u, out.sigma, c);
  const bool ordered = family == 1 ? out.sigma > sigma_prev : out.sigma < sigma_prev;
  if (!ordered)
    throw CellError("front ordering violated: sigma " + std::to_string(out.sigma) + " vs previous " +
                        std::to_string(sigma_prev), j, n);
  if (std::abs(out.sigma) >= cap) throw CellError("front leaves the cell", j, n);
  return out;
}

namespace detail {

/// Fan on one side of a cell, listed from the outer cell edge inward.
struct SideFan {
  std::vector<Piece> pieces;
  std::vector<double> speeds;
  int p = 0;
  int iterations = 0;
};

inline Piece steady_piece(double x_anchor, const InvariantPair& inv, int z_exp = -1, int w_exp = 1) {
  Piece pc;
  pc.kind = PieceKind::steady;
  pc.profile = ProfileData{x_anchor, inv, z_exp, w_exp};
  return pc;
}

/// Fan of `family` from the outer state towards the varying-invariant value `end`.
/// With `solve_last` the final front (onto `end` itself) is solved too; otherwise it is left
/// to the gap fill.
inline SideFan side_fan(int family, const GasState& u_outer, double end, bool solve_last, double x_center,
                        const SchemeContext& ctx, long j, long n) {
  const auto& c = ctx.gas;
  const double dx = ctx.params.dx;
  const double h = ctx.params.fan_step();
  // Local orientation: the varying invariant increases inward on the left (z) and
  // decreases inward on the right (w); `s` maps both to an increasing coordinate.
  const double s = family == 1 ? 1.0 : -1.0;
  const double x_outer = x_center - s * dx;
  const auto p_out = to_invariants(u_outer, c);
  const double v_out = s * varying(p_out, family);
  const double v_end = s * end;
  SideFan fan;
  fan.p = fan_count(std::max(0.0, v_end - v_out), h);
  fan.pieces.push_back(steady_piece(x_outer, p_out));
  const int last = solve_last ? fan.p : fan.p - 1;
  double prev = family == 1 ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  for (int i = 2; i <= last; ++i) {
    const double v = i == fan.p ? v_end : v_out + (i - 1) * h;
    const auto fs = solve_front(fan.pieces.back().profile, family, s * v, prev, x_center, ctx, j, n);
    fan.iterations = std::max(fan.iterations, fs.iterations);
    fan.speeds.push_back(fs.sigma);
    fan.pieces.push_back(steady_piece(x_center + fs.sigma * 0.5 * ctx.params.dt, fs.anchor));
    prev = fs.sigma;
  }
  return fan;
}

/// Drops zero-strength jumps between two representations of the same steady profile.
inline void merge_trivial_fronts(CellSolution& cell, const BoundFunction& b) {
  std::size_t k = 0;
  while (k < cell.fronts.size()) {
    const Piece& l = cell.pieces[k];
    const Piece& r = cell.pieces[k + 1];
    bool same = false;
    if (cell.fronts[k].kind == FrontKind::jump && l.kind == PieceKind::steady && r.kind == PieceKind::steady &&
        l.profile.z_exp == r.profile.z_exp && l.profile.w_exp == r.profile.w_exp) {
      const auto pl = profile_invariants(l.profile, r.profile.x_anchor, b);
      const auto& pr = r.profile.anchor;
      const double tol = 1e-13 * (1.0 + std::max(std::abs(pr.z), std::abs(pr.w)));
      same = std::abs(pl.z - pr.z) <= tol && std::abs(pl.w - pr.w) <= tol;
    }
    if (same) {
      cell.pieces.erase(cell.pieces.begin() + static_cast<long>(k) + 1);
      cell.fronts.erase(cell.fronts.begin() + static_cast<long>(k));
    } else {
      ++k;
    }
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Cell construction

namespace detail {

inline CellSolution make_cell(long j, long n, const SchemeContext& ctx) {
  CellSolution cell;
  cell.j = j;
  cell.n = n;
  cell.x_center = static_cast<double>(j) * ctx.params.dx;
  return cell;
}

/// Construction away from vacuum: fans of steady pieces on rarefaction sides, single
/// profiles on shock sides, and a central steady profile fixed by two implicit fronts.
inline CellSolution build_cell_interior(const GasState& uL, const GasState& uR, const RiemannSolution& rs, long j,
                                        long n, const SchemeContext& ctx) {
  const auto& c = ctx.gas;
  const double tau = 0.5 * ctx.params.dt;
  CellSolution cell = make_cell(j, n, ctx);
  cell.route = CellRoute::interior;
  cell.region = rs.region;
  const double xc = cell.x_center;
  const auto pm = to_invariants(rs.middle, c);

  SideFan left, right;
  if (!rs.wave1.is_shock()) {
    left = side_fan(1, uL, pm.z, false, xc, ctx, j, n);
    cell.left_side = SideKind::fan;
    cell.left_fan_states = left.p;
  } else {
    left.pieces.push_back(steady_piece(xc - ctx.params.dx, to_invariants(uL, c)));
  }
  if (!rs.wave2.is_shock()) {
    right = side_fan(2, uR, pm.w, false, xc, ctx, j, n);
    cell.right_side = SideKind::fan;
    cell.right_fan_states = right.p;
  } else {
    right.pieces.push_back(steady_piece(xc + ctx.params.dx, to_invariants(uR, c)));
  }

  const ProfileData& lp = left.pieces.back().profile;
  const ProfileData& rp = right.pieces.back().profile;
  auto corrected = [&](const ProfileData& p, double x) { return time_correct(p, x, tau, *ctx.geom, *ctx.b, c).u; };

  // Initial guess: speed along the unmodified locus onto the Riemann middle invariant.
  auto guess_speed = [&](int family, const ProfileData& p, double target) {
    const GasState k0 = corrected(p, xc);
    const GasState h0 = hugoniot_state_with_invariant(family, k0, target, c);
    return hugoniot_speed(family, k0, h0.rho, c);
  };
  Eigen::Vector4d x(guess_speed(1, lp, pm.z), guess_speed(2, rp, pm.w), pm.z, pm.w);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto residual = [&](const Eigen::Vector4d& s) -> Eigen::Vector4d {
    const InvariantPair anchor{s[2], s[3]};
    if (anchor.w < anchor.z) return Eigen::Vector4d::Constant(nan);
    const ProfileData mid{xc, anchor, -1, 1};
    const double xa = xc + s[0] * tau;
    const double xb = xc + s[1] * tau;
    const GasState L = corrected(lp, xa);
    const GasState R = corrected(rp, xb);
    if (is_vacuum(L, c) || is_vacuum(R, c)) return Eigen::Vector4d::Constant(nan);
    const auto H1 = locus_invariants(1, L, s[0], c);
    const auto H2 = locus_invariants(2, R, s[1], c);
    const auto Ma = time_correct(mid, xa, tau, *ctx.geom, *ctx.b, c).p;
    const auto Mb = time_correct(mid, xb, tau, *ctx.geom, *ctx.b, c).p;
    return {H1.z - Ma.z, H1.w - Ma.w, H2.z - Mb.z, H2.w - Mb.w};
  };
  const double scale = 1.0 + std::abs(pm.z) + std::abs(pm.w);
  const int it = newton<4>(x, residual, 1e-11, 1e-13 * scale);
  if (it < 0) throw CellError("gap fill did not converge", j, n);
  cell.newton_iterations = std::max({left.iterations, right.iterations, it});

  // Assemble: left fan, middle, right fan (its speeds were collected inward, i.e. decreasing).
  for (std::size_t k = 0; k < left.pieces.size(); ++k) {
    cell.pieces.push_back(left.pieces[k]);
    if (k < left.speeds.size()) cell.fronts.push_back({left.speeds[k], FrontKind::jump});
  }
  cell.fronts.push_back({x[0], FrontKind::jump});
  cell.pieces.push_back(steady_piece(xc, {x[2], x[3]}));
  cell.fronts.push_back({x[1], FrontKind::jump});
  for (std::size_t k = right.pieces.size(); k-- > 0;) {
    cell.pieces.push_back(right.pieces[k]);
    if (k > 0) cell.fronts.push_back({right.speeds[k - 1], FrontKind::jump});
  }
  merge_trivial_fronts(cell, *ctx.b);
  check_fronts(cell, ctx);
  return cell;
}

/// Near-vacuum treatment of one rarefaction side.
struct VacuumSide {
  SideKind kind = SideKind::none;
  std::vector<Piece> pieces;   // outer edge inward
  std::vector<Front> fronts;   // between consecutive pieces, plus the closing seam last
  GasState u_star;             // left/right datum of the central Riemann piece
  double edge_x = std::numeric_limits<double>::quiet_NaN();
  int fan_states = 0;
  int iterations = 0;
};

inline VacuumSide vacuum_side(int family, const GasState& u_outer, bool shock_side, double x_center,
                              const SchemeContext& ctx, long j, long n) {
  const auto& c = ctx.gas;
  const double dx = ctx.params.dx;
  const double s = family == 1 ? 1.0 : -1.0;
  const double x_outer = x_center - s * dx;
  const double x_far = x_center + s * dx;
  VacuumSide side;
  side.u_star = u_outer;
  if (shock_side || is_vacuum(u_outer, c)) {
    side.kind = shock_side ? SideKind::none : SideKind::plain;
    return side;
  }
  const auto env = ctx.envelope();
  // Envelope bound at the far edge in the local orientation: z >= lower(x_far) on the
  // left, -w >= -upper(x_far) on the right.
  const double bound = family == 1 ? env.lower(x_far) : -env.upper(x_far);
  const auto po = to_invariants(u_outer, c);
  const double v_out = s * varying(po, family);
  const double rho2 = 2.0 * ctx.params.vacuum_proximity();
  auto speed_of = [&](const InvariantPair& p) { return family == 1 ? lambda1_of(p, c) : lambda2_of(p, c); };

  if (u_outer.rho > rho2) {
    side.kind = SideKind::truncated_fan;
    // Varying invariant at density 2 dx^beta with the preserved invariant unchanged.
    const double end = preserved(po, family) + (family == 1 ? -1.0 : 1.0) * 2.0 * sound_speed(rho2, c) / c.theta;
    SideFan fan = side_fan(family, u_outer, end, true, x_center, ctx, j, n);
    side.fan_states = fan.p;
    side.iterations = fan.iterations;
    const InvariantPair p2 = fan.pieces.back().profile.anchor;
    const double lam = speed_of(p2);
    // u3: varying invariant floored at the envelope, preserved invariant from the outer state.
    const double v3 = std::max(s * varying(p2, family), bound);
    const InvariantPair p3 = compose(family, s * v3, preserved(po, family));
    side.u_star = from_invariants(p3, c);
    side.pieces = fan.pieces;
    for (double sp : fan.speeds) side.fronts.push_back({sp, FrontKind::jump});
    const double last = fan.speeds.back();
    if (s * lam > s * last) {
      side.fronts.push_back({lam, FrontKind::seam});
    } else {
      // The closing state has no room before the seam; the last jump becomes the seam.
      side.pieces.pop_back();
      side.fronts.back().kind = FrontKind::seam;
    }
    return side;
  }

  if (v_out >= bound) {
    side.kind = SideKind::plain;
    return side;
  }

  // Both invariants scaled by e^{-D}, D = s (B(x) - B(x_outer)) >= 0, until the varying one
  // reaches the envelope bound.
  side.kind = SideKind::scaled_profile;
  const double need = std::log(v_out / bound);
  const double B0 = ctx.B(x_outer);
  auto g = [&](double xx) { return s * (ctx.B(xx) - B0) - need; };
  double x4 = x_far;
  const double gfar = g(x_far);
  if (gfar > 0.0) {
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(g, std::min(x_outer, x_far), std::max(x_outer, x_far),
                                               detail::root_tolerance(), iters);
    x4 = 0.5 * (r.first + r.second);
  }
  side.edge_x = x4;
  const double D = s * (ctx.B(x4) - B0);
  const InvariantPair p4{po.z * std::exp(-D), po.w * std::exp(-D)};
  side.u_star = from_invariants(p4, c);
  side.pieces.push_back(steady_piece(x_outer, po, family == 1 ? -1 : 1, family == 1 ? -1 : 1));
  side.fronts.push_back({speed_of(p4), FrontKind::seam});
  return side;
}

/// Construction when the Riemann middle density is at most dx^beta.
inline CellSolution build_cell_near_vacuum(const GasState& uL, const GasState& uR, const RiemannSolution& rs, long j,
                                           long n, const SchemeContext& ctx) {
  CellSolution cell = make_cell(j, n, ctx);
  cell.route = CellRoute::near_vacuum;
  cell.region = rs.region;
  const double xc = cell.x_center;
  VacuumSide left = vacuum_side(1, uL, rs.wave1.is_shock(), xc, ctx, j, n);
  VacuumSide right = vacuum_side(2, uR, rs.wave2.is_shock(), xc, ctx, j, n);
  cell.left_side = left.kind;
  cell.right_side = right.kind;
  cell.left_fan_states = left.fan_states;
  cell.right_fan_states = right.fan_states;
  cell.left_edge_x = left.edge_x;
  cell.right_edge_x = right.edge_x;
  cell.newton_iterations = std::max(left.iterations, right.iterations);

  Piece centre;
  centre.kind = PieceKind::riemann;
  const bool untouched = left.u_star == uL && right.u_star == uR;
  centre.riemann = untouched ? rs : solve_riemann(left.u_star, right.u_star, ctx.gas);

  cell.pieces = left.pieces;
  cell.fronts = left.fronts;
  cell.pieces.push_back(centre);
  for (std::size_t k = right.pieces.size(); k-- > 0;) {
    cell.fronts.push_back(right.fronts[k]);
    cell.pieces.push_back(right.pieces[k]);
  }
  check_fronts(cell, ctx);
  return cell;
}

}  // namespace detail

/// Near-vacuum construction; requires rho_M <= dx^beta for the Riemann data (uL, uR).
inline CellSolution build_cell_vacuum(const GasState& u_left, const GasState& u_right, long j, long n,
                                      const SchemeContext& ctx) {
  const GasState uL = normalize(u_left, ctx.gas);
  const GasState uR = normalize(u_right, ctx.gas);
  const auto rs = solve_riemann(uL, uR, ctx.gas);
  if (rs.middle.rho > ctx.params.vacuum_proximity())
    throw DomainError("build_cell_vacuum: middle density above dx^beta");
  return detail::build_cell_near_vacuum(uL, uR, rs, j, n, ctx);
}

/// Approximate solution in the staggered cell [(j-1)dx, (j+1)dx] x [n dt, (n+1) dt].
inline CellSolution build_cell(const GasState& u_left, const GasState& u_right, long j, long n,
                               const SchemeContext& ctx) {
  const auto& c = ctx.gas;
  const GasState uL = normalize(u_left, c);
  const GasState uR = normalize(u_right, c);
  const double dx = ctx.params.dx;
  const double xc = static_cast<double>(j) * dx;
  if (uL == uR && (is_vacuum(uL, c) || ctx.flat(xc - dx, xc + dx))) {
    // A trivial Riemann piece reproduces the state exactly (no invariant round trip).
    CellSolution cell = detail::make_cell(j, n, ctx);
    Piece pc;
    pc.kind = PieceKind::riemann;
    pc.riemann = solve_riemann(uL, uR, c);
    cell.pieces.push_back(pc);
    return cell;
  }
  const auto rs = solve_riemann(uL, uR, c);
  if (rs.middle.rho <= ctx.params.vacuum_proximity()) return detail::build_cell_near_vacuum(uL, uR, rs, j, n, ctx);
  return detail::build_cell_interior(uL, uR, rs, j, n, ctx);
}

// ---------------------------------------------------------------------------
// Staggered state, projection and stepping

/// Nodes j in a fixed window [j_lo, j_hi] with j + n even; constant ambient states outside.
struct StaggeredState {
  long n = 0;
  long j_lo = 0;
  long j_hi = 0;
  double dx = 0.0;
  std::vector<GasState> nodes;
  GasState ambient_left;
  GasState ambient_right;

  long first() const { return ((j_lo + n) & 1L) == 0 ? j_lo : j_lo + 1; }
  long last() const { return ((j_hi + n) & 1L) == 0 ? j_hi : j_hi - 1; }
  std::size_t size() const { return nodes.size(); }
  long index(std::size_t i) const { return first() + 2 * static_cast<long>(i); }
  double x(std::size_t i) const { return static_cast<double>(index(i)) * dx; }

  const GasState& at(long j) const {
    if (((j + n) & 1L) != 0) throw DomainError("node index has the wrong parity for this step");
    if (j < first()) return ambient_left;
    if (j > last()) return ambient_right;
    return nodes[static_cast<std::size_t>((j - first()) / 2)];
  }
};

struct ProjectionOutcome {
  GasState u;
  bool vacuum_event = false;  // positive mass removed by the threshold rule
  bool clamp_event = false;   // an envelope bound was active
  double violation = 0.0;     // envelope violation of the average before projection
  double removed_mass = 0.0;  // density removed (per unit length)
};

/// Vacuum below dx^delta, otherwise clamp z up to lower(x) and w down to upper(x).
namespace detail {

inline double envelope_violation_of(const GasState& u, double lo, double hi, const GasConstants& c) {
  if (is_vacuum(u, c)) return 0.0;
  const auto p = to_invariants(u, c);
  return std::max({0.0, lo - p.z, p.w - hi});
}

}  // namespace detail

inline ProjectionOutcome project_node(const GasState& E, double x, const SchemeParameters& params,
                                      const InvariantEnvelope& env, const GasConstants& c) {
  if (!std::isfinite(E.rho) || !std::isfinite(E.m)) throw DomainError("project_node: non-finite average");
  ProjectionOutcome out;
  if (E.rho < params.averaging_threshold() || is_vacuum(E, c)) {
    out.u = {};
    out.vacuum_event = E.rho > 0.0;
    out.removed_mass = std::max(E.rho, 0.0);
    return out;
  }
  const auto p = to_invariants(E, c);
  const double lo = env.lower(x);
  const double hi = env.upper(x);
  out.violation = std::max({0.0, lo - p.z, p.w - hi});
  InvariantPair q = p;
  if (q.z < lo) {
    q.z = lo;
    out.clamp_event = true;
  }
  if (q.w > hi) {
    q.w = hi;
    out.clamp_event = true;
  }
  if (!out.clamp_event) {
    out.u = E;
    return out;
  }
  if (q.w < q.z) q.w = q.z;
  out.u = from_invariants(q, c);
  // The invariant round trip can land an ulp outside; step inwards until it does not.
  for (int k = 0; k < 64 && detail::envelope_violation_of(out.u, lo, hi, c) > 0.0; ++k) {
    const double nudge = std::ldexp(1.0, k) * std::numeric_limits<double>::epsilon();
    q.z = std::max(q.z, lo) + nudge * std::abs(lo);
    q.w = std::min(q.w, hi) - nudge * std::abs(hi);
    if (q.w < q.z) q.w = q.z = 0.5 * (q.z + q.w);
    out.u = from_invariants(q, c);
  }
  return out;
}

/// Envelope violation of a node after projection (0 when inside).
inline double envelope_violation(const GasState& u, double x, const InvariantEnvelope& env, const GasConstants& c) {
  if (is_vacuum(u, c)) return 0.0;
  const auto p = to_invariants(u, c);
  return std::max({0.0, env.lower(x) - p.z, p.w - env.upper(x)});
}

struct StepStats {
  long n = 0;  // index of the new time level
  long clamp_count = 0;
  long vacuum_count = 0;
  double removed_mass = 0.0;
  double max_pre_violation = 0.0;
  double max_post_violation = 0.0;
  double max_rh_residual = 0.0;
  int max_newton_iterations = 0;
  long near_vacuum_cells = 0;
  long interior_cells = 0;
};

struct AdvanceResult {
  StaggeredState state;
  std::vector<CellSolution> cells;
  std::vector<GasState> averages;  // before projection, aligned with state.nodes
  StepStats stats;
};

/// One step: build every cell of the next level, average its trace, project.
inline AdvanceResult advance(const StaggeredState& s, const SchemeContext& ctx) {
  AdvanceResult r;
  r.state = s;
  r.state.n = s.n + 1;
  r.state.nodes.clear();
  r.stats.n = r.state.n;
  const auto env = ctx.envelope();
  const double dx = ctx.params.dx;
  for (long j = r.state.first(); j <= r.state.last(); j += 2) {
    CellSolution cell = build_cell(s.at(j - 1), s.at(j + 1), j, s.n, ctx);
    const GasState E = cell_average(cell, ctx);
    const auto pr = project_node(E, static_cast<double>(j) * dx, ctx.params, env, ctx.gas);
    r.stats.clamp_count += pr.clamp_event ? 1 : 0;
    r.stats.vacuum_count += pr.vacuum_event ? 1 : 0;
    r.stats.removed_mass += 2.0 * dx * pr.removed_mass;
    r.stats.max_pre_violation = std::max(r.stats.max_pre_violation, pr.violation);
    r.stats.max_post_violation =
        std::max(r.stats.max_post_violation, envelope_violation(pr.u, static_cast<double>(j) * dx, env, ctx.gas));
    r.stats.max_rh_residual = std::max(r.stats.max_rh_residual, max_rh_residual(cell, ctx));
    r.stats.max_newton_iterations = std::max(r.stats.max_newton_iterations, cell.newton_iterations);
    r.stats.near_vacuum_cells += cell.route == CellRoute::near_vacuum ? 1 : 0;
    r.stats.interior_cells += cell.route == CellRoute::interior ? 1 : 0;
    r.averages.push_back(E);
    r.state.nodes.push_back(pr.u);
    r.cells.push_back(std::move(cell));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Initialization and driver

/// Initial data u0(x) with optional discontinuity locations (used to split quadrature).
struct InitialData {
  std::function<GasState(double)> u;
  std::vector<double> breakpoints;
};

inline long step_count(const SchemeParameters& p) {
  if (p.T <= 0.0) return 0;
  return static_cast<long>(std::ceil(p.T / p.dt - 1e-9));
}

/// Index window large enough that nothing reaches its ends within `steps` steps.
inline std::pair<long, long> index_window(const SchemeContext& ctx, long steps, double extra_radius = 0.0) {
  const double R = std::max(ctx.geom->cutoff(), extra_radius);
  const long J = static_cast<long>(std::ceil(R / ctx.params.dx)) + steps + 4;
  // An even node count keeps both parities the same size.
  return {-J, J + 1};
}

namespace detail {

/// chi_X u0 averaged over [x0, x1], split at the cutoff and the breakpoints.
inline GasState average_initial(const InitialData& u0, double x0, double x1, double X) {
  std::vector<double> cuts{x0, x1};
  for (double b : u0.breakpoints)
    if (b > x0 && b < x1) cuts.push_back(b);
  if (X > x0 && X < x1) cuts.push_back(X);
  std::sort(cuts.begin(), cuts.end());
  Moments acc;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (a >= X) continue;
    acc = acc + gauss_legendre<5>(
                    [&](double x) {
                      const GasState u = u0.u(x);
                      return Moments{u.rho, u.m};
                    },
                    a, b, Moments{});
  }
  return {acc.first / (x1 - x0), acc.second / (x1 - x0)};
}

}  // namespace detail

/// Largest bound required by the data, max over x of max(-z e^{B}, w e^{-B}), and where it occurs.
inline std::pair<double, double> data_bound(const InitialData& u0, const SchemeContext& ctx, double x0, double x1,
                                            double spacing) {
  const auto n = static_cast<long>(std::ceil((x1 - x0) / spacing));
  double M = 0.0, worst = x0;
  for (long i = 0; i <= n; ++i) {
    const double x = x0 + (x1 - x0) * static_cast<double>(i) / static_cast<double>(n);
    if (x >= ctx.geom->cutoff()) break;
    const auto p = to_invariants(normalize(u0.u(x), ctx.gas), ctx.gas);
    const double B = ctx.B(x);
    const double need = std::max(-p.z * std::exp(B), p.w * std::exp(-B));
    if (need > M) {
      M = need;
      worst = x;
    }
  }
  return {M, worst};
}

/// Level-0 averages of chi_X u0 with projection. Throws ConfigError when the data need a
/// larger bound than params.M.
inline StaggeredState initialize(const InitialData& u0, const SchemeContext& ctx, long steps) {
  const double dx = ctx.params.dx;
  const double X = ctx.geom->cutoff();
  const auto [j_lo, j_hi] = index_window(ctx, steps);
  const auto [need, worst] = data_bound(u0, ctx, static_cast<double>(j_lo - 1) * dx, X, dx / 4.0);
  if (need > ctx.params.M * (1.0 + 1e-9) + 1e-300)
    throw ConfigError("M", "initial data need M >= " + std::to_string(need) + " (worst at x = " +
                               std::to_string(worst) + "), configured " + std::to_string(ctx.params.M));
  StaggeredState s;
  s.n = 0;
  s.j_lo = j_lo;
  s.j_hi = j_hi;
  s.dx = dx;
  const auto env = ctx.envelope();
  auto average = [&](long j) {
    const double x = static_cast<double>(j) * dx;
    const GasState E = detail::average_initial(u0, x - dx, x + dx, X);
    return project_node(E, x, ctx.params, env, ctx.gas).u;
  };
  for (long j = s.first(); j <= s.last(); j += 2) s.nodes.push_back(average(j));
  s.ambient_left = average(j_lo - 2);
  s.ambient_right = {};
  return s;
}

/// Read-only view handed to observers after each step.
struct StepView {
  const StaggeredState& before;
  const AdvanceResult& result;
  const SchemeContext& ctx;
};

using Observer = std::function<void(const StepView&)>;

struct RunResult {
  StaggeredState initial;
  StaggeredState final_state;
  long steps = 0;
  std::vector<StepStats> stats;
};

inline RunResult run(const InitialData& u0, const SchemeContext& ctx, const std::vector<Observer>& observers = {}) {
  RunResult out;
  out.steps = step_count(ctx.params);
  out.initial = initialize(u0, ctx, out.steps);
  out.final_state = out.initial;
  for (long k = 0; k < out.steps; ++k) {
    AdvanceResult r = advance(out.final_state, ctx);
    for (const auto& obs : observers) obs(StepView{out.final_state, r, ctx});
    out.stats.push_back(r.stats);
    out.final_state = std::move(r.state);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Baseline comparison scheme

/// Plain staggered Lax-Friedrichs with pointwise source averaging. No profiles, fans or projection.
inline StaggeredState baseline_lf_step(const StaggeredState& s, const SchemeContext& ctx) {
  const auto& c = ctx.gas;
  const double dx = ctx.params.dx;
  const double dt = ctx.params.dt;
  StaggeredState r = s;
  r.n = s.n + 1;
  r.nodes.clear();
  for (long j = r.first(); j <= r.last(); j += 2) {
    const GasState& ul = s.at(j - 1);
    const GasState& ur = s.at(j + 1);
    const auto fl = flux(ul, c);
    const auto fr = flux(ur, c);
    const auto gl = source(static_cast<double>(j - 1) * dx, ul, [&](double x) { return ctx.a(x); }, c);
    const auto gr = source(static_cast<double>(j + 1) * dx, ur, [&](double x) { return ctx.a(x); }, c);
    GasState u{0.5 * (ul.rho + ur.rho) - dt / (2.0 * dx) * (fr[0] - fl[0]) + 0.5 * dt * (gl[0] + gr[0]),
               0.5 * (ul.m + ur.m) - dt / (2.0 * dx) * (fr[1] - fl[1]) + 0.5 * dt * (gl[1] + gr[1])};
    if (!(u.rho > 1e-14)) u = {};
    r.nodes.push_back(u);
  }
  return r;
}

}  // namespace nozzle_lf
