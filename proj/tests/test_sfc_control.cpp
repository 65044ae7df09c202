#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sfcsim/sfc_control.hpp"

using namespace sfcsim;

TEST(InverterOutput, ClampsMagnitude) {
  ControlGains g;
  SfcState x;
  x.lag_e = 1.3;
  x.lag_d = 0.2;
  EXPECT_EQ(inverter_output(x, g).e_mag, 1.15);
  EXPECT_EQ(inverter_output(x, g).delta, 0.2);
  x.lag_e = -0.1;
  EXPECT_EQ(inverter_output(x, g).e_mag, 0.0);
  x.lag_e = 0.97;
  EXPECT_EQ(inverter_output(x, g, true).e_mag, 0.97);
  EXPECT_TRUE(inverter_output(x, g, true).limiting);
}

TEST(Current, FromPhasorsExample) {
  // frozen from tests/oracles/scalar_oracles.py
  const Phasor i = current_from_phasors(std::polar(1.1, 0.1), {1.0, 0.0}, 0.1, 0.1189);
  EXPECT_NEAR(i.real(), 0.501675460536825, 1e-13);
  EXPECT_NEAR(i.imag(), -0.43172490546289877, 1e-13);
  EXPECT_NEAR(std::abs(i), 0.6618645342528819, 1e-13);
}

TEST(Current, ZeroWhenPhasorsEqual) {
  const Phasor e = std::polar(1.03, -0.4);
  EXPECT_EQ(current_from_phasors(e, e, 0.1, 0.1), Phasor(0.0, 0.0));
  EXPECT_THROW(current_from_phasors(e, e, 0.0, 0.0), InputError);
}

TEST(Current, RealPartExpressionMatchesComplexDivision) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> mag(0.5, 1.3), ang(-1.0, 1.0), x(0.05, 0.5);
  for (int k = 0; k < 1000; ++k) {
    const double e = mag(rng), d = ang(rng), u = mag(rng), th = ang(rng), xt = x(rng), xf = x(rng);
    const Phasor i = current_from_phasors(std::polar(e, d), std::polar(u, th), xt, xf);
    if (std::abs(i) < 1e-6) continue;
    const double via_real = current_magnitude_real_part(e, d, u, th, std::arg(i), xt + xf);
    EXPECT_NEAR(via_real, std::abs(i), 1e-12 * std::max(1.0, std::abs(i)));
  }
}

TEST(CurrentLimit, InactiveAtOrBelowThreshold) {
  ControlGains g;
  SfcState x;
  x.int_cl = -0.3;
  Measurements m;
  m.i_mag = 2.0;
  const InverterOutput out{1.0, 0.3, false};
  const CurrentLimitUpdate upd = current_limit_update(x, m, out, g);
  EXPECT_FALSE(upd.limiting);
  EXPECT_EQ(upd.d_int_cl, 0.0);
  EXPECT_EQ(upd.target_de, 0.0);
  EXPECT_EQ(upd.target_dd, 0.0);
}

TEST(CurrentLimit, OvercurrentLowersMagnitudeAndAngle) {
  ControlGains g;
  SfcState x;
  Measurements m;
  m.i_mag = 2.5;
  m.gamma = -0.5;
  const InverterOutput out{1.1, 0.2, true};
  const CurrentLimitUpdate upd = current_limit_update(x, m, out, g);
  EXPECT_TRUE(upd.limiting);
  EXPECT_DOUBLE_EQ(upd.d_int_cl, -0.5);
  EXPECT_DOUBLE_EQ(upd.target_de, 12.0 * -0.5 * std::sin(0.7));
  EXPECT_DOUBLE_EQ(upd.target_dd, 12.0 * -0.5 * 1.1 * std::cos(0.7));
  EXPECT_LT(upd.target_de, 0.0);
  EXPECT_LT(upd.target_dd, 0.0);
}

TEST(CurrentLimit, ResetClearsOnlyIntegrator) {
  SfcState x{0.5, 0.1, -0.2, 1.0, 0.1, -0.01, -0.02};
  SfcState r = reset_current_limit(x);
  EXPECT_EQ(r.int_cl, 0.0);
  x.int_cl = 0.0;
  EXPECT_EQ(r, x);
}

namespace {

// State whose PI outputs equal the lag contents, with zero errors.
SfcState equilibrium(const ControlGains& g, double e, double d) {
  SfcState x;
  x.lag_e = e;
  x.lag_d = d;
  x.int_v = e / g.ki_v;
  x.int_a = d / g.ki_a;
  return x;
}

}  // namespace

TEST(ControlDerivatives, ZeroAtEquilibrium) {
  ControlGains g;
  const SfcState x = equilibrium(g, 1.01, -0.13);
  Measurements m{0.99, -0.2, 0.3, 0.05, 0.4, -0.3};
  const References r{-0.2, 0.99};
  const SfcState d = control_derivatives(x, m, r, g, false);
  for (double v : d.as_array()) EXPECT_NEAR(v, 0.0, 1e-14);
}

TEST(ControlDerivatives, LagTracksPiOutput) {
  ControlGains g;
  SfcState x = equilibrium(g, 1.0, 0.0);
  Measurements m{0.95, 0.0, 0.0, 0.0, 0.1, 0.0};
  const References r{0.1, 1.0};
  const SfcState d = control_derivatives(x, m, r, g, false);
  EXPECT_NEAR(d.int_v, 0.05, 1e-15);
  EXPECT_NEAR(d.int_a, 0.1, 1e-15);
  EXPECT_NEAR(d.lag_e, g.kp_v * 0.05 / g.t_c, 1e-13);
  EXPECT_NEAR(d.lag_d, g.kp_a * 0.1 / g.t_c, 1e-13);
  EXPECT_EQ(d.int_cl, 0.0);
}

TEST(ControlDerivatives, ClampAppliedBeforeLag) {
  ControlGains g;
  SfcState x = equilibrium(g, 1.15, 0.0);
  x.int_v = 2.0;  // PI output far above e_max
  Measurements m{1.0, 0.0, 0.0, 0.0, 0.1, 0.0};
  const SfcState d = control_derivatives(x, m, {0.0, 1.0}, g, false);
  EXPECT_EQ(d.lag_e, 0.0);
}

TEST(ControlDerivatives, AntiWindupHoldsWhenLimiting) {
  ControlGains g;
  g.anti_windup_voltage = true;
  g.anti_windup_angle = true;
  const SfcState x = equilibrium(g, 1.0, 0.0);
  Measurements m{0.5, -0.3, 0.0, 0.0, 2.5, -0.5};
  const References r{0.0, 1.0};
  const SfcState held = control_derivatives(x, m, r, g, true);
  EXPECT_EQ(held.int_v, 0.0);
  EXPECT_EQ(held.int_a, 0.0);
  EXPECT_LT(held.int_cl, 0.0);

  g.anti_windup_voltage = false;
  g.anti_windup_angle = false;
  const SfcState free = control_derivatives(x, m, r, g, true);
  EXPECT_DOUBLE_EQ(free.int_v, 0.5);
  EXPECT_DOUBLE_EQ(free.int_a, 0.3);
}

TEST(ControlDerivatives, AntiWindupOnlyHoldsPushingDirection) {
  ControlGains g;
  g.anti_windup_voltage = true;
  SfcState x = equilibrium(g, 1.15, 0.0);
  x.int_v = 1.0;  // e_cmd = 2.0 > e_max
  Measurements m{0.9, 0.0, 0.0, 0.0, 0.1, 0.0};
  EXPECT_EQ(control_derivatives(x, m, {0.0, 1.0}, g, false).int_v, 0.0);
  m.u_g = 1.1;  // error now drives the integrator back down
  EXPECT_NEAR(control_derivatives(x, m, {0.0, 1.0}, g, false).int_v, -0.1, 1e-15);
}

TEST(ControlDerivatives, RejectsNonFinite) {
  ControlGains g;
  SfcState x;
  Measurements m;
  m.u_g = std::nan("");
  EXPECT_THROW(control_derivatives(x, m, {}, g, false), IntegrationFault);
  Measurements ok;
  x.lag_e = INFINITY;
  EXPECT_THROW(control_derivatives(x, ok, {}, g, false), IntegrationFault);
}

TEST(ControlGains, Validation) {
  EXPECT_NO_THROW(ControlGains{}.validate());
  ControlGains g;
  g.t_i = 0.0;
  EXPECT_THROW(g.validate(), InputError);
  g = {};
  g.i_max = -1.0;
  EXPECT_THROW(g.validate(), InputError);
  g = {};
  g.kp_v = INFINITY;
  EXPECT_THROW(g.validate(), InputError);
}

TEST(SfcState, ArrayRoundTrip) {
  const SfcState x{1, 2, 3, 4, 5, 6, 7};
  EXPECT_EQ(SfcState::from_array(x.as_array()), x);
}
