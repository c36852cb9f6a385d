#pragma once

// Isentropic gamma-law gas: state algebra, flux and geometric source, the
// Riemann invariants and the mechanical energy pair.

#include <array>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace nozzle_lf {

struct GasConstants {
  double gamma = 1.4;
  double theta = 0.2;  // (gamma - 1) / 2
  /// Densities below this are normalized to exact vacuum.
  double vacuum_floor = 1e-14;
};

/// Builds the constants for an adiabatic exponent in (1, 5/3].
inline GasConstants make_gas(double gamma, double vacuum_floor = 1e-14) {
  if (!(gamma > 1.0) || gamma > 5.0 / 3.0 + 1e-15)
    throw DomainError("adiabatic exponent must satisfy 1 < gamma <= 5/3, got " + std::to_string(gamma));
  if (!(vacuum_floor >= 0.0))
    throw DomainError("vacuum floor must be nonnegative");
  return GasConstants{gamma, (gamma - 1.0) / 2.0, vacuum_floor};
}

/// Conserved pair (density, momentum).
struct GasState {
  double rho = 0.0;
  double m = 0.0;

  friend bool operator==(const GasState&, const GasState&) = default;
};

/// Riemann invariants; z = v - rho^theta/theta, w = v + rho^theta/theta.
struct InvariantPair {
  double z = 0.0;
  double w = 0.0;

  friend bool operator==(const InvariantPair&, const InvariantPair&) = default;
};

struct EntropyPairValue {
  double eta = 0.0;
  double q = 0.0;
};

using Vec2 = std::array<double, 2>;

inline bool is_vacuum(const GasState& u, const GasConstants& c) { return u.rho <= c.vacuum_floor; }

/// Maps sub-floor densities to exact (0, 0).
inline GasState normalize(const GasState& u, const GasConstants& c) {
  return is_vacuum(u, c) ? GasState{} : u;
}

/// x^e for x >= 0 through exp/log, exact zero at x == 0.
inline double pow_guarded(double x, double e) {
  if (x <= 0.0) return 0.0;
  return std::exp(e * std::log(x));
}

inline double pressure(double rho, const GasConstants& c) {
  if (rho < 0.0) throw DomainError("pressure: negative density");
  return pow_guarded(rho, c.gamma) / c.gamma;
}

/// rho^theta, which is also the sound speed sqrt(p'(rho)).
inline double sound_speed(double rho, const GasConstants& c) { return pow_guarded(rho, c.theta); }

inline double velocity(const GasState& u, const GasConstants& c) { return is_vacuum(u, c) ? 0.0 : u.m / u.rho; }

inline InvariantPair to_invariants(const GasState& u, const GasConstants& c) {
  if (u.rho < 0.0) throw DomainError("to_invariants: negative density");
  if (is_vacuum(u, c)) return {};
  const double v = u.m / u.rho;
  const double s = sound_speed(u.rho, c) / c.theta;
  return {v - s, v + s};
}

/// rho = (theta (w - z) / 2)^(1/theta).
inline double density_from_invariants(double z, double w, const GasConstants& c) {
  return pow_guarded(c.theta * (w - z) / 2.0, 1.0 / c.theta);
}

inline GasState from_invariants(const InvariantPair& p, const GasConstants& c) {
  if (!std::isfinite(p.z) || !std::isfinite(p.w)) throw DomainError("from_invariants: non-finite invariants");
  if (p.w < p.z) throw DomainError("from_invariants: w < z");
  const double rho = density_from_invariants(p.z, p.w, c);
  if (rho <= c.vacuum_floor) return {};
  return {rho, rho * (p.w + p.z) / 2.0};
}

inline Vec2 flux(const GasState& u, const GasConstants& c) {
  if (is_vacuum(u, c)) return {0.0, 0.0};
  return {u.m, u.m * u.m / u.rho + pressure(u.rho, c)};
}

/// Geometric source (a m, a m^2 / rho) for a given coefficient a(x).
template <class Coefficient>
Vec2 source(double x, const GasState& u, const Coefficient& a, const GasConstants& c) {
  if (is_vacuum(u, c)) return {0.0, 0.0};
  const double ax = a(x);
  return {ax * u.m, ax * u.m * u.m / u.rho};
}

/// Mechanical energy and energy flux; both vanish on vacuum.
inline EntropyPairValue mechanical_pair(const GasState& u, const GasConstants& c) {
  if (u.rho < 0.0) throw DomainError("mechanical_pair: negative density");
  if (is_vacuum(u, c)) return {};
  const double g = c.gamma;
  const double v = u.m / u.rho;
  const double rg1 = pow_guarded(u.rho, g - 1.0);
  return {0.5 * u.m * v + u.rho * rg1 / (g * (g - 1.0)), u.m * (0.5 * v * v + rg1 / (g - 1.0))};
}

struct CharacteristicSpeeds {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

inline CharacteristicSpeeds characteristic_speeds(const GasState& u, const GasConstants& c) {
  if (is_vacuum(u, c)) return {};
  const double v = u.m / u.rho;
  const double s = sound_speed(u.rho, c);
  return {v - s, v + s};
}

/// lambda_1 expressed through the invariants: v - rho^theta.
inline double lambda1_of(const InvariantPair& p, const GasConstants& c) {
  return ((1.0 + c.theta) * p.z + (1.0 - c.theta) * p.w) / 2.0;
}

inline double lambda2_of(const InvariantPair& p, const GasConstants& c) {
  return ((1.0 - c.theta) * p.z + (1.0 + c.theta) * p.w) / 2.0;
}

/// Reflection x -> -x maps (rho, m) to (rho, -m) and (z, w) to (-w, -z).
inline GasState reflect(const GasState& u) { return {u.rho, -u.m}; }
inline InvariantPair reflect(const InvariantPair& p) { return {-p.w, -p.z}; }

}  // namespace nozzle_lf
