#pragma once

// Exact Riemann solver for the homogeneous isentropic system, together with
// the Hugoniot-locus helpers that the cell construction builds on.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

#include <boost/math/tools/roots.hpp>

#include "errors.hpp"
#include "gas.hpp"

namespace nozzle_lf {

enum class WaveKind { rarefaction, shock, rarefaction_shock };

struct WaveCurveKind {
  int family = 1;
  WaveKind kind = WaveKind::rarefaction;
};

/// One elementary wave; `upstream` is the state on its left, `downstream` on its right.
struct WaveDescriptor {
  WaveCurveKind kind;
  double speed_lo = 0.0;
  double speed_hi = 0.0;
  GasState upstream;
  GasState downstream;

  bool is_shock() const { return kind.kind == WaveKind::shock; }
};

/// Regions: I = 1-rarefaction + 2-rarefaction, II = 1-shock + 2-rarefaction,
/// III = 1-shock + 2-shock, IV = 1-rarefaction + 2-shock.
enum class Region { I, II, III, IV };

inline const char* to_string(Region r) {
  switch (r) {
    case Region::I: return "I";
    case Region::II: return "II";
    case Region::III: return "III";
    case Region::IV: return "IV";
  }
  return "?";
}

struct RiemannSolution {
  GasState left;
  GasState right;
  GasState middle;
  Region region = Region::I;
  WaveDescriptor wave1;
  WaveDescriptor wave2;
  GasConstants gas;
  int iterations = 0;

  bool vacuum_middle() const { return is_vacuum(middle, gas); }
};

namespace detail {

/// (p(rho) - p(rho0)) / (rho - rho0) without cancellation; p'(rho0) at rho == rho0.
inline double pressure_divided_difference(double rho, double rho0, const GasConstants& c) {
  if (rho0 <= 0.0) {
    if (rho <= 0.0) return 0.0;
    return pow_guarded(rho, c.gamma - 1.0) / c.gamma;
  }
  if (rho <= 0.0) return pow_guarded(rho0, c.gamma - 1.0) / c.gamma;
  const double l = std::log(rho / rho0);
  const double base = pow_guarded(rho0, c.gamma - 1.0);
  if (l == 0.0) return base;
  return base * std::expm1(c.gamma * l) / (c.gamma * std::expm1(l));
}

inline double family_sign(int family) { return family == 1 ? -1.0 : 1.0; }

inline auto root_tolerance() { return boost::math::tools::eps_tolerance<double>(std::numeric_limits<double>::digits - 3); }

}  // namespace detail

/// (rho - rho0) sqrt((p(rho) - p(rho0)) / (rho rho0 (rho - rho0))); the family sign is applied by the caller.
inline double shock_velocity_jump(double rho, double rho0, const GasConstants& c) {
  if (rho < 0.0 || rho0 < 0.0) throw DomainError("shock_velocity_jump: negative density");
  if (rho == 0.0 && rho0 == 0.0) throw DomainError("shock_velocity_jump: both densities vanish");
  if (rho == rho0) return 0.0;
  if (rho == 0.0) return -std::numeric_limits<double>::infinity();
  if (rho0 == 0.0) return std::numeric_limits<double>::infinity();
  const double dd = detail::pressure_divided_difference(rho, rho0, c);
  return (rho - rho0) * std::sqrt(dd / (rho * rho0));
}

/// S(rho, rho0) = sqrt(rho (p(rho) - p(rho0)) / (rho0 (rho - rho0))), continuous at rho == rho0.
inline double lax_speed(double rho, double rho0, const GasConstants& c) {
  if (!(rho0 > 0.0)) throw DomainError("lax_speed: rho0 must be positive");
  if (rho < 0.0) throw DomainError("lax_speed: negative density");
  return std::sqrt(rho * detail::pressure_divided_difference(rho, rho0, c) / rho0);
}

/// State with density `rho` on the `family` Hugoniot locus through `anchor`.
/// The relation is symmetric, so it does not matter on which side the anchor sits.
inline GasState hugoniot_state(int family, const GasState& anchor, double rho, const GasConstants& c) {
  const double v0 = anchor.m / anchor.rho;
  if (rho <= 0.0) return {};
  const double v = v0 + detail::family_sign(family) * shock_velocity_jump(rho, anchor.rho, c);
  return {rho, rho * v};
}

/// Propagation speed of the jump between `anchor` and the locus state of density `rho`.
inline double hugoniot_speed(int family, const GasState& anchor, double rho, const GasConstants& c) {
  return anchor.m / anchor.rho + detail::family_sign(family) * lax_speed(rho, anchor.rho, c);
}

/// Locus state whose jump from `anchor` travels at `speed`. Speed is a monotone
/// parameter of the whole locus (shock and inverse-shock branches alike).
inline GasState hugoniot_state_with_speed(int family, const GasState& anchor, double speed, const GasConstants& c) {
  const double rk = anchor.rho;
  if (!(rk > 0.0)) throw DomainError("hugoniot_state_with_speed: vacuum anchor");
  const double target = detail::family_sign(family) * (speed - anchor.m / rk);
  if (!(target > 0.0)) return {};
  const double t2 = target * target;
  const double scale = t2 * pow_guarded(rk, 2.0 - c.gamma);
  double lo = std::min(rk, scale);
  double hi = std::max(rk, c.gamma * scale);
  auto g = [&](double r) { return r * detail::pressure_divided_difference(r, rk, c) / rk - t2; };
  double glo = g(lo);
  double ghi = g(hi);
  if (glo >= 0.0) return hugoniot_state(family, anchor, lo, c);
  if (ghi <= 0.0) return hugoniot_state(family, anchor, hi, c);
  std::uintmax_t iters = 100;
  auto r = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, detail::root_tolerance(), iters);
  return hugoniot_state(family, anchor, 0.5 * (r.first + r.second), c);
}

/// Locus state for which the invariant that varies across the family takes `target`
/// (z for family 1, w for family 2).
inline GasState hugoniot_state_with_invariant(int family, const GasState& anchor, double target, const GasConstants& c) {
  const double rk = anchor.rho;
  if (!(rk > 0.0)) throw DomainError("hugoniot_state_with_invariant: vacuum anchor");
  auto inv = [&](double r) {
    const auto p = to_invariants(hugoniot_state(family, anchor, r, c), c);
    return family == 1 ? p.z : p.w;
  };
  // z decreases along the 1-locus as rho grows; w increases along the 2-locus.
  const double dir = family == 1 ? -1.0 : 1.0;
  auto g = [&](double r) { return dir * (inv(r) - target); };
  const double g0 = g(rk);
  if (g0 == 0.0) return anchor;
  double lo = rk, hi = rk;
  double glo = g0, ghi = g0;
  if (g0 > 0.0) {
    for (int i = 0; i < 200 && glo > 0.0; ++i) {
      hi = lo;
      ghi = glo;
      lo *= 0.5;
      glo = g(lo);
    }
  } else {
    for (int i = 0; i < 200 && ghi < 0.0; ++i) {
      lo = hi;
      glo = ghi;
      hi *= 2.0;
      ghi = g(hi);
    }
  }
  if (glo > 0.0 || ghi < 0.0) throw DomainError("hugoniot_state_with_invariant: target not reachable");
  std::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, detail::root_tolerance(), iters);
  return hugoniot_state(family, anchor, 0.5 * (r.first + r.second), c);
}

/// Common ratio lambda of f(ur) - f(ul) = lambda (ur - ul).
inline double rh_speed(const GasState& ul, const GasState& ur, const GasConstants& c) {
  const double d0 = ur.rho - ul.rho;
  const double d1 = ur.m - ul.m;
  if (d0 == 0.0 && d1 == 0.0) throw DomainError("rh_speed: identical states");
  const Vec2 fl = flux(ul, c);
  const Vec2 fr = flux(ur, c);
  const double df0 = fr[0] - fl[0];
  const double df1 = fr[1] - fl[1];
  const double lambda = (d0 * df0 + d1 * df1) / (d0 * d0 + d1 * d1);
  const double res = std::max(std::abs(df0 - lambda * d0), std::abs(df1 - lambda * d1));
  const double scale = 1.0 + std::max({std::abs(fl[0]), std::abs(fl[1]), std::abs(fr[0]), std::abs(fr[1])});
  if (res > 1e-10 * scale) throw InconsistencyError("rh_speed: states are not on a Hugoniot locus", res);
  return lambda;
}

/// Rankine-Hugoniot residual || f(ur) - f(ul) - s (ur - ul) ||_inf.
inline double rh_residual(const GasState& ul, const GasState& ur, double s, const GasConstants& c) {
  const Vec2 fl = flux(ul, c);
  const Vec2 fr = flux(ur, c);
  return std::max(std::abs(fr[0] - fl[0] - s * (ur.rho - ul.rho)), std::abs(fr[1] - fl[1] - s * (ur.m - ul.m)));
}

/// Entropy condition for the mechanical pair, with roundoff slack relative to the size of the terms.
inline bool entropy_admissible(const GasState& ul, const GasState& ur, double lambda, const GasConstants& c) {
  if (ul == ur) return true;
  const Vec2 fl = flux(ul, c);
  const Vec2 fr = flux(ur, c);
  const double res = rh_residual(ul, ur, lambda, c);
  const double scale = 1.0 + std::max({std::abs(fl[0]), std::abs(fl[1]), std::abs(fr[0]), std::abs(fr[1])});
  if (res > 1e-10 * scale) throw InconsistencyError("entropy_admissible: states are not on a Hugoniot locus", res);
  const auto el = mechanical_pair(ul, c);
  const auto er = mechanical_pair(ur, c);
  const double size = std::abs(lambda) * (std::abs(er.eta) + std::abs(el.eta)) + std::abs(er.q) + std::abs(el.q);
  return lambda * (er.eta - el.eta) - (er.q - el.q) >= -1e-12 * size;
}

namespace detail {

/// Velocity change v - v_K along the outgoing wave curve of `family` at density rho
/// (rarefaction branch below rho_K, shock branch above).
inline double wave_curve_increment(double rho, double rho_k, const GasConstants& c) {
  if (rho <= rho_k) return (sound_speed(rho, c) - sound_speed(rho_k, c)) / c.theta;
  return shock_velocity_jump(rho, rho_k, c);
}

inline WaveDescriptor make_rarefaction(int family, const GasState& left, const GasState& right, double lo,
                                       double hi) {
  return {{family, WaveKind::rarefaction}, lo, hi, left, right};
}

}  // namespace detail

/// Unique entropy solution of the Riemann problem (ul, ur) for the homogeneous system.
inline RiemannSolution solve_riemann(const GasState& ul_in, const GasState& ur_in, const GasConstants& c) {
  if (!std::isfinite(ul_in.rho) || !std::isfinite(ul_in.m) || !std::isfinite(ur_in.rho) ||
      !std::isfinite(ur_in.m))
    throw DomainError("solve_riemann: non-finite input");
  if (ul_in.rho < 0.0 || ur_in.rho < 0.0) throw DomainError("solve_riemann: negative density");
  const GasState ul = normalize(ul_in, c);
  const GasState ur = normalize(ur_in, c);

  RiemannSolution sol;
  sol.left = ul;
  sol.right = ur;
  sol.gas = c;
  sol.region = Region::I;

  const bool lvac = is_vacuum(ul, c);
  const bool rvac = is_vacuum(ur, c);
  if (lvac && rvac) {
    sol.wave1 = detail::make_rarefaction(1, ul, ul, 0.0, 0.0);
    sol.wave2 = detail::make_rarefaction(2, ur, ur, 0.0, 0.0);
    return sol;
  }
  if (lvac) {
    const auto pr = to_invariants(ur, c);
    sol.wave1 = detail::make_rarefaction(1, ul, ul, pr.z, pr.z);
    sol.wave2 = detail::make_rarefaction(2, ul, ur, pr.z, lambda2_of(pr, c));
    return sol;
  }
  if (rvac) {
    const auto pl = to_invariants(ul, c);
    sol.wave1 = detail::make_rarefaction(1, ul, ur, lambda1_of(pl, c), pl.w);
    sol.wave2 = detail::make_rarefaction(2, ur, ur, pl.w, pl.w);
    return sol;
  }

  const auto pl = to_invariants(ul, c);
  const auto pr = to_invariants(ur, c);
  if (ul == ur) {
    sol.middle = ul;
    sol.wave1 = detail::make_rarefaction(1, ul, ul, lambda1_of(pl, c), lambda1_of(pl, c));
    sol.wave2 = detail::make_rarefaction(2, ur, ur, lambda2_of(pr, c), lambda2_of(pr, c));
    return sol;
  }
  const double vl = ul.m / ul.rho;
  const double vr = ur.m / ur.rho;
  auto F = [&](double r) {
    return detail::wave_curve_increment(r, ul.rho, c) + detail::wave_curve_increment(r, ur.rho, c) + vr - vl;
  };

  // Both rarefactions: the curves are w = w_L and z = z_R, so the crossing is explicit.
  const double rmin = std::min(ul.rho, ur.rho);
  if (F(rmin) >= 0.0) {
    sol.region = Region::I;
    if (pl.w <= pr.z) {
      sol.middle = {};
      sol.wave1 = detail::make_rarefaction(1, ul, sol.middle, lambda1_of(pl, c), pl.w);
      sol.wave2 = detail::make_rarefaction(2, sol.middle, ur, pr.z, lambda2_of(pr, c));
      return sol;
    }
    const InvariantPair pm{pr.z, pl.w};
    sol.middle = from_invariants(pm, c);
    sol.wave1 = detail::make_rarefaction(1, ul, sol.middle, lambda1_of(pl, c), lambda1_of(pm, c));
    sol.wave2 = detail::make_rarefaction(2, sol.middle, ur, lambda2_of(pm, c), lambda2_of(pr, c));
    return sol;
  }

  double lo = rmin;
  double hi = std::max(ul.rho, ur.rho);
  while (F(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw DomainError("solve_riemann: no bracket for the middle density");
  }
  std::uintmax_t iters = 200;
  auto tol = [](double a, double b) { return std::abs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(a, b); };
  const auto bracket = boost::math::tools::bisect(F, lo, hi, tol, iters);
  sol.iterations = static_cast<int>(iters);
  const double rm = 0.5 * (bracket.first + bracket.second);

  const bool shock1 = rm > ul.rho;
  const bool shock2 = rm > ur.rho;
  double vm;
  if (!shock2)
    vm = vr + detail::wave_curve_increment(rm, ur.rho, c);  // on the 2-rarefaction: z_M = z_R
  else if (!shock1)
    vm = vl - detail::wave_curve_increment(rm, ul.rho, c);  // on the 1-rarefaction: w_M = w_L
  else
    vm = 0.5 * (vl - detail::wave_curve_increment(rm, ul.rho, c) + vr + detail::wave_curve_increment(rm, ur.rho, c));
  sol.middle = {rm, rm * vm};
  const auto pm = to_invariants(sol.middle, c);

  if (shock1) {
    const double s1 = hugoniot_speed(1, ul, rm, c);
    sol.wave1 = {{1, WaveKind::shock}, s1, s1, ul, sol.middle};
  } else {
    sol.wave1 = detail::make_rarefaction(1, ul, sol.middle, lambda1_of(pl, c), lambda1_of(pm, c));
  }
  if (shock2) {
    const double s2 = hugoniot_speed(2, ur, rm, c);
    sol.wave2 = {{2, WaveKind::shock}, s2, s2, sol.middle, ur};
  } else {
    sol.wave2 = detail::make_rarefaction(2, sol.middle, ur, lambda2_of(pm, c), lambda2_of(pr, c));
  }
  sol.region = shock1 ? (shock2 ? Region::III : Region::II) : (shock2 ? Region::IV : Region::I);
  return sol;
}

/// Self-similar solution at xi = x / t. At a shock speed the right state is returned.
inline GasState sample(const RiemannSolution& sol, double xi) {
  const auto& c = sol.gas;
  const auto& w1 = sol.wave1;
  const auto& w2 = sol.wave2;
  if (w1.is_shock()) {
    if (xi < w1.speed_lo) return sol.left;
  } else {
    if (xi < w1.speed_lo) return sol.left;
    if (xi < w1.speed_hi) {
      const double wl = to_invariants(sol.left, c).w;
      const double z = std::min((2.0 * xi - (1.0 - c.theta) * wl) / (1.0 + c.theta), wl);
      return from_invariants({z, wl}, c);
    }
  }
  if (w2.is_shock()) {
    if (xi < w2.speed_lo) return sol.middle;
    return sol.right;
  }
  if (xi < w2.speed_lo) return sol.middle;
  if (xi < w2.speed_hi) {
    const double zr = to_invariants(sol.right, c).z;
    const double w = std::max((2.0 * xi - (1.0 - c.theta) * zr) / (1.0 + c.theta), zr);
    return from_invariants({zr, w}, c);
  }
  return sol.right;
}

/// Closed-form integrals of (rho, m) over xi in [xi0, xi1] inside the rarefaction of `family`.
/// In a 1-fan rho = (k (w - xi))^{1/theta}, v = w - (w - xi)/(1 + theta) with k = theta/(1 + theta);
/// a 2-fan is the mirror image with z.
inline std::pair<double, double> rarefaction_moments(const RiemannSolution& sol, int family, double xi0, double xi1) {
  const auto& c = sol.gas;
  const double th = c.theta;
  const double k = th / (1.0 + th);
  const double e = 1.0 / th;
  const double kp = pow_guarded(k, e);
  // Antiderivatives in s of (k s)^e and (k s)^e s.
  auto m0 = [&](double s) { return s <= 0.0 ? 0.0 : kp * pow_guarded(s, e + 1.0) / (e + 1.0); };
  auto m1 = [&](double s) { return s <= 0.0 ? 0.0 : kp * pow_guarded(s, e + 2.0) / (e + 2.0); };
  if (family == 1) {
    const double w = to_invariants(sol.left, c).w;
    const double s0 = w - xi0, s1 = w - xi1;  // s decreases as xi grows
    const double mass = m0(s0) - m0(s1);
    const double mom = w * mass - (m1(s0) - m1(s1)) / (1.0 + th);
    return {mass, mom};
  }
  const double z = to_invariants(sol.right, c).z;
  const double s0 = xi0 - z, s1 = xi1 - z;
  const double mass = m0(s1) - m0(s0);
  const double mom = z * mass + (m1(s1) - m1(s0)) / (1.0 + th);
  return {mass, mom};
}

/// Mirror image of a Riemann solution under x -> -x (left and right swap, momenta flip).
inline RiemannSolution reflect(const RiemannSolution& s) {
  RiemannSolution r;
  r.gas = s.gas;
  r.left = reflect(s.right);
  r.right = reflect(s.left);
  r.middle = reflect(s.middle);
  r.iterations = s.iterations;
  auto flip = [](const WaveDescriptor& w, int family) {
    return WaveDescriptor{{family, w.kind.kind}, -w.speed_hi, -w.speed_lo, reflect(w.downstream), reflect(w.upstream)};
  };
  r.wave1 = flip(s.wave2, 1);
  r.wave2 = flip(s.wave1, 2);
  switch (s.region) {
    case Region::II: r.region = Region::IV; break;
    case Region::IV: r.region = Region::II; break;
    default: r.region = s.region;
  }
  return r;
}

}  // namespace nozzle_lf
