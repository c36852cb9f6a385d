#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <nozzle_lf/riemann.hpp>

#include "oracles.hpp"

using namespace nozzle_lf;

TEST(Riemann, ShockVelocityJump) {
  const auto c = make_gas(1.4);
  EXPECT_EQ(shock_velocity_jump(1.0, 1.0, c), 0.0);
  EXPECT_THROW(shock_velocity_jump(0.0, 0.0, c), DomainError);
  // Direct transcription of the formula as a second evaluation.
  const double p2 = std::pow(2.0, 1.4) / 1.4, p1 = 1.0 / 1.4;
  EXPECT_NEAR(shock_velocity_jump(2.0, 1.0, c), std::sqrt((p2 - p1) / (2.0 * 1.0 * (2.0 - 1.0))) * 1.0, 1e-14);
  // At coincidence the slope in rho is c(rho0) / rho0.
  const double r0 = 1.7, e = 1e-8 * r0;
  const double slope = (shock_velocity_jump(r0 + e, r0, c) - shock_velocity_jump(r0 - e, r0, c)) / (2 * e);
  EXPECT_NEAR(slope * r0, sound_speed(r0, c), 1e-6);
}

TEST(Riemann, LaxSpeed) {
  EXPECT_NEAR(lax_speed(1.0, 1.0, make_gas(1.4)), 1.0, 1e-15);
  EXPECT_NEAR(lax_speed(1.0, 1.0, make_gas(5.0 / 3.0)), 1.0, 1e-15);
  const double p2 = std::pow(2.0, 1.4) / 1.4, p1 = 1.0 / 1.4;
  EXPECT_NEAR(lax_speed(2.0, 1.0, make_gas(1.4)), std::sqrt(2.0 * (p2 - p1) / 1.0), 1e-14);
  EXPECT_THROW(lax_speed(1.0, 0.0, make_gas(1.4)), DomainError);
}

TEST(Riemann, RhSpeedOnLocus) {
  const auto c = make_gas(1.4);
  const GasState ul{1.0, 0.0};
  // Right state on the 2-locus with rho = 2; speed from the mass equation.
  const double vr = shock_velocity_jump(2.0, 1.0, c);
  const GasState ur{2.0, 2.0 * vr};
  const double lam = rh_speed(ul, ur, c);
  EXPECT_NEAR(lam, (ur.m - ul.m) / (ur.rho - ul.rho), 1e-12);
  EXPECT_LT(rh_residual(ul, ur, lam, c), 1e-12);
  EXPECT_THROW(rh_speed(ul, GasState{2.0, 5.0}, c), InconsistencyError);
  EXPECT_THROW(rh_speed(ul, ul, c), DomainError);
  // Reflection antisymmetry.
  EXPECT_NEAR(rh_speed(reflect(ur), reflect(ul), c), -lam, 1e-12);
}

TEST(Riemann, WeakShockSpeedTendsToCharacteristic) {
  const auto c = make_gas(1.4);
  const GasState u{1.3, 0.4};
  const double l2 = characteristic_speeds(u, c).lambda2;
  double prev = 1.0;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    const GasState ur = hugoniot_state(2, u, u.rho * (1 + eps), c);
    const double err = std::abs(rh_speed(u, ur, c) - l2);
    EXPECT_LT(err, prev);
    EXPECT_LT(err, 2.0 * eps);
    prev = err;
  }
}

TEST(Riemann, RegionOneExample) {
  const auto c = make_gas(1.4);
  const auto sol = solve_riemann({1.0, 0.0}, {1.0, 2.0}, c);
  EXPECT_EQ(sol.region, Region::I);
  const auto pm = to_invariants(sol.middle, c);
  EXPECT_NEAR(pm.z, -3.0, 1e-12);
  EXPECT_NEAR(pm.w, 5.0, 1e-12);
  EXPECT_NEAR(sol.middle.rho, 0.32768, 1e-12);
  EXPECT_NEAR(sol.middle.m / sol.middle.rho, 1.0, 1e-12);
}

TEST(Riemann, EqualStates) {
  const auto c = make_gas(1.4);
  const GasState u{2.0, 1.0};
  const auto sol = solve_riemann(u, u, c);
  EXPECT_NEAR(sol.middle.rho, u.rho, 1e-14);
  EXPECT_NEAR(sol.middle.m, u.m, 1e-14);
  EXPECT_NEAR(sample(sol, -100.0).rho, 2.0, 0);
  EXPECT_NEAR(sample(sol, 0.1).rho, 2.0, 1e-14);
}

TEST(Riemann, RegionThreeAgainstBisection) {
  const auto c = make_gas(1.4);
  const GasState ul{1.0, 1.0}, ur{1.0, -1.0};
  const auto sol = solve_riemann(ul, ur, c);
  EXPECT_EQ(sol.region, Region::III);
  EXPECT_GT(sol.middle.rho, 1.0);
  const auto o1 = oracle::riemann_middle(ul, ur, c, 0.5, 50.0);
  const auto o2 = oracle::riemann_middle(ul, ur, c, 1e-9, 1e3);  // different bracket
  EXPECT_NEAR(sol.middle.rho, o1.rho, 1e-12);
  EXPECT_NEAR(sol.middle.rho, o2.rho, 1e-12);
  EXPECT_NEAR(sol.middle.m, 0.0, 1e-12);
  EXPECT_TRUE(entropy_admissible(sol.wave1.upstream, sol.wave1.downstream, sol.wave1.speed_lo, c));
  EXPECT_TRUE(entropy_admissible(sol.wave2.upstream, sol.wave2.downstream, sol.wave2.speed_lo, c));
}

TEST(Riemann, OracleEquivalenceRandom) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> rho(0.01, 10.0), v(-5.0, 5.0);
  for (double g : {1.2, 1.4, 5.0 / 3.0}) {
    const auto c = make_gas(g);
    for (int i = 0; i < 400; ++i) {
      const double rl = rho(rng), rr = rho(rng);
      const GasState ul{rl, rl * v(rng)}, ur{rr, rr * v(rng)};
      const auto sol = solve_riemann(ul, ur, c);
      const auto o = oracle::riemann_middle(ul, ur, c, 1e-12, 1e4);
      ASSERT_NEAR(sol.middle.rho, o.rho, 1e-9 * (1 + o.rho));
      ASSERT_NEAR(sol.middle.m, o.m, 1e-9 * (1 + std::abs(o.m)));
      EXPECT_EQ(sol.region, oracle::region_of(ul, ur, o.rho));
      if (sol.middle.rho > 0) {
        EXPECT_LE(sol.wave1.speed_hi, sol.wave2.speed_lo + 1e-12);
        // Middle state lies on both selected curves.
        const auto pm = to_invariants(sol.middle, c);
        if (!sol.wave1.is_shock()) EXPECT_NEAR(pm.w, to_invariants(ul, c).w, 1e-10 * (1 + std::abs(pm.w)));
        else EXPECT_LT(rh_residual(ul, sol.middle, sol.wave1.speed_lo, c), 1e-10 * (1 + sol.middle.rho));
        if (!sol.wave2.is_shock()) EXPECT_NEAR(pm.z, to_invariants(ur, c).z, 1e-10 * (1 + std::abs(pm.z)));
        else EXPECT_LT(rh_residual(sol.middle, ur, sol.wave2.speed_lo, c), 1e-10 * (1 + sol.middle.rho));
      }
    }
  }
}

TEST(Riemann, VacuumMiddleAndVacuumSides) {
  const auto c = make_gas(1.4);
  // w_L = -1 <= z_R = 1 opens a vacuum.
  const GasState ul{1.0, -6.0}, ur{1.0, 6.0};
  const auto sol = solve_riemann(ul, ur, c);
  EXPECT_TRUE(sol.vacuum_middle());
  EXPECT_EQ(sol.region, Region::I);
  EXPECT_EQ(sample(sol, 0.0), (GasState{}));
  const auto left_vac = solve_riemann({}, {2.0, 1.0}, c);
  EXPECT_EQ(left_vac.middle, (GasState{}));
  EXPECT_EQ(sample(left_vac, -1e3), (GasState{}));
  EXPECT_NEAR(sample(left_vac, 1e3).rho, 2.0, 0);
  const auto both = solve_riemann({}, {}, c);
  EXPECT_EQ(sample(both, 0.3), (GasState{}));
  EXPECT_THROW(solve_riemann({std::nan(""), 0.0}, {1.0, 0.0}, c), DomainError);
}

TEST(Riemann, SampleInsideRarefaction) {
  const auto c = make_gas(1.4);
  const auto sol = solve_riemann({1.0, 0.0}, {1.0, 2.0}, c);
  ASSERT_FALSE(sol.wave1.is_shock());
  for (double t : {0.1, 0.5, 0.9}) {
    const double xi = sol.wave1.speed_lo + t * (sol.wave1.speed_hi - sol.wave1.speed_lo);
    const GasState u = sample(sol, xi);
    EXPECT_NEAR(characteristic_speeds(u, c).lambda1, xi, 1e-10);
    EXPECT_NEAR(to_invariants(u, c).w, 5.0, 1e-10);
  }
  EXPECT_EQ(sample(sol, -1e6), sol.left);
  EXPECT_EQ(sample(sol, 1e6), sol.right);
}

TEST(Riemann, SampleAtShockSpeedReturnsRight) {
  const auto c = make_gas(1.4);
  const auto sol = solve_riemann({1.0, 1.0}, {1.0, -1.0}, c);
  EXPECT_EQ(sample(sol, sol.wave2.speed_lo), sol.right);
  EXPECT_EQ(sample(sol, sol.wave1.speed_lo), sol.middle);
}

TEST(Riemann, ReflectionSymmetry) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> rho(0.1, 5.0), v(-3.0, 3.0);
  const auto c = make_gas(5.0 / 3.0);
  for (int i = 0; i < 100; ++i) {
    const double rl = rho(rng), rr = rho(rng);
    const GasState ul{rl, rl * v(rng)}, ur{rr, rr * v(rng)};
    const auto a = reflect(solve_riemann(ul, ur, c));
    const auto b = solve_riemann(reflect(ur), reflect(ul), c);
    EXPECT_EQ(a.region, b.region);
    EXPECT_NEAR(a.middle.rho, b.middle.rho, 1e-10 * (1 + b.middle.rho));
    EXPECT_NEAR(a.middle.m, b.middle.m, 1e-10 * (1 + std::abs(b.middle.m)));
  }
}

TEST(Riemann, EntropyAdmissibility) {
  const auto c = make_gas(1.4);
  const GasState u0{1.0, 0.5};
  // Compressive 1-shock: density increases from left to right.
  const GasState dense = hugoniot_state(1, u0, 2.0, c);
  EXPECT_TRUE(entropy_admissible(u0, dense, hugoniot_speed(1, u0, 2.0, c), c));
  // Inverse 1-shock: density decreases.
  const GasState thin = hugoniot_state(1, u0, 0.5, c);
  EXPECT_FALSE(entropy_admissible(u0, thin, hugoniot_speed(1, u0, 0.5, c), c));
  // 2-family: the compressive jump has the denser state on the left.
  const GasState ur = hugoniot_state(2, u0, 0.5, c);
  EXPECT_TRUE(entropy_admissible(u0, ur, hugoniot_speed(2, u0, 0.5, c), c));
  EXPECT_FALSE(entropy_admissible(u0, hugoniot_state(2, u0, 2.0, c), hugoniot_speed(2, u0, 2.0, c), c));
  EXPECT_TRUE(entropy_admissible(u0, u0, 0.3, c));
  EXPECT_THROW(entropy_admissible(u0, GasState{3.0, 9.0}, 0.0, c), InconsistencyError);
}

TEST(Riemann, HugoniotSpeedParametrization) {
  const auto c = make_gas(1.4);
  const GasState k{1.5, -0.7};
  for (int family : {1, 2}) {
    for (double rho : {0.2, 0.9, 1.5, 2.5, 8.0}) {
      const double s = hugoniot_speed(family, k, rho, c);
      const GasState h = hugoniot_state_with_speed(family, k, s, c);
      EXPECT_NEAR(h.rho, rho, 1e-10 * rho);
      const GasState hz = hugoniot_state_with_invariant(family, k, family == 1 ? to_invariants(h, c).z : to_invariants(h, c).w, c);
      EXPECT_NEAR(hz.rho, rho, 1e-9 * rho);
    }
    // Zero strength: the speed is the characteristic speed.
    const auto sp = characteristic_speeds(k, c);
    EXPECT_NEAR(hugoniot_speed(family, k, k.rho, c), family == 1 ? sp.lambda1 : sp.lambda2, 1e-14);
  }
}
