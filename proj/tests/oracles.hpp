#pragma once

// Independent reference computations used only by the tests. They are written
// from the textbook formulas with plain loops so they share no code with the library.

#include <cmath>

#include <nozzle_lf/gas.hpp>
#include <nozzle_lf/riemann.hpp>

namespace oracle {

using nozzle_lf::GasConstants;
using nozzle_lf::GasState;

/// Velocity reached from (rho_k, v_k) along the forward wave curve of `family`
/// (1 from the left state, 2 from the right state) at density r.
inline double wave_velocity(int family, double r, double rho_k, double v_k, const GasConstants& c) {
  const double sgn = family == 1 ? -1.0 : 1.0;
  double dv;
  if (r <= rho_k) {
    dv = (std::pow(r, c.theta) - std::pow(rho_k, c.theta)) / c.theta;
  } else {
    const double pr = std::pow(r, c.gamma) / c.gamma, pk = std::pow(rho_k, c.gamma) / c.gamma;
    dv = std::sqrt((pr - pk) * (r - rho_k) / (r * rho_k));
  }
  return v_k + sgn * dv;
}

/// Middle state by plain bisection on v_1(r) - v_2(r) over r in [lo, hi]; vacuum when
/// the curves do not meet at positive density.
inline GasState riemann_middle(const GasState& ul, const GasState& ur, const GasConstants& c, double lo, double hi) {
  const double vl = ul.m / ul.rho, vr = ur.m / ur.rho;
  // Vacuum test on the rarefaction curves themselves.
  const double wl = vl + std::pow(ul.rho, c.theta) / c.theta;
  const double zr = vr - std::pow(ur.rho, c.theta) / c.theta;
  if (wl <= zr) return {};
  auto g = [&](double r) { return wave_velocity(1, r, ul.rho, vl, c) - wave_velocity(2, r, ur.rho, vr, c); };
  while (g(hi) > 0.0) hi *= 2.0;
  if (g(lo) <= 0.0) return {lo, lo * wave_velocity(1, lo, ul.rho, vl, c)};
  for (int i = 0; i < 400 && hi - lo > 1e-16 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  const double r = 0.5 * (lo + hi);
  const double v = 0.5 * (wave_velocity(1, r, ul.rho, vl, c) + wave_velocity(2, r, ur.rho, vr, c));
  return {r, r * v};
}

/// Region from the sign analysis: a wave is a shock iff the middle is denser than its outer state.
inline nozzle_lf::Region region_of(const GasState& ul, const GasState& ur, double rho_m) {
  const bool s1 = rho_m > ul.rho, s2 = rho_m > ur.rho;
  using nozzle_lf::Region;
  return s1 ? (s2 ? Region::III : Region::II) : (s2 ? Region::IV : Region::I);
}

}  // namespace oracle
