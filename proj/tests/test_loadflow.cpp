#include <gtest/gtest.h>

#include <cmath>

#include "sfcsim/loadflow.hpp"
#include "sfcsim/plant.hpp"
#include "sfcsim/scenario.hpp"

using namespace sfcsim;

namespace {

struct Expected {
  int id;
  double e_mag;
  double u_poc;
  double i_mag;
};

// Pre-fault points from tests/oracles/loadflow_oracle.py (Newton on the raw equations).
const Expected kCases[] = {
    {1, 1.0019060088985616, 0.9999206739766165, 0.2426151575083097},
    {3, 1.0056054857200643, 0.9998131250530907, 0.43098630397845},
    {4, 1.0007129816177707, 0.999973214442048, 0.1508648409206941},
};

}  // namespace

TEST(LoadFlow, Case1FullOperatingPoint) {
  const ResolvedScenario r = resolve(builtin_case(1));
  const LoadFlowResult& lf = r.loadflow;
  EXPECT_NEAR(std::abs(lf.e_inv0), 1.0019060088985616, 1e-9);
  EXPECT_NEAR(std::arg(lf.e_inv0), -0.13000364386223404, 1e-9);
  EXPECT_NEAR(std::abs(lf.u_poc0), 0.9999206739766165, 1e-9);
  EXPECT_NEAR(std::arg(lf.u_poc0), -0.18300276043827743, 1e-9);
  EXPECT_NEAR(std::abs(lf.u_load0), 0.9892209640355217, 1e-9);
  EXPECT_NEAR(std::abs(lf.i_inv0), 0.2426151575083097, 1e-9);
  EXPECT_NEAR(lf.p_g0, 0.2425815010062598, 1e-9);
  EXPECT_NEAR(lf.q_g0, 0.0026442007794436756, 1e-9);
  EXPECT_GT(lf.iterations, 1);
}

TEST(LoadFlow, OtherBuiltinCases) {
  for (const Expected& c : kCases) {
    const LoadFlowResult lf = resolve(builtin_case(c.id)).loadflow;
    EXPECT_NEAR(std::abs(lf.e_inv0), c.e_mag, 1e-9) << c.id;
    EXPECT_NEAR(std::abs(lf.u_poc0), c.u_poc, 1e-9) << c.id;
    EXPECT_NEAR(std::abs(lf.i_inv0), c.i_mag, 1e-9) << c.id;
  }
  EXPECT_NEAR(std::abs(resolve(builtin_case(2)).loadflow.e_inv0), 1.002509902603429, 1e-9);
}

TEST(LoadFlow, ControlLawsHoldAtSolution) {
  for (int id = 1; id <= 4; ++id) {
    const ResolvedScenario r = resolve(builtin_case(id));
    const LoadFlowResult& lf = r.loadflow;
    const double u = std::abs(lf.u_poc0);
    EXPECT_NEAR(u, voltage_reference(r.model.rfc, lf.q_g0), 1e-10);
    EXPECT_NEAR(std::arg(lf.u_poc0), angle_reference(r.model.rfc, r.model.theta_50, lf.p_g0, lf.q_g0, u), 1e-10);
    // constant-power load honoured
    const Complex s_load = lf.u_load0 * std::conj(lf.u_load0 * r.model.feeder.y_load);
    EXPECT_NEAR(s_load.real(), builtin_case(id).p_load_mw / 10.0, 1e-9);
    EXPECT_NEAR(s_load.imag(), 0.0, 1e-9);
  }
}

TEST(LoadFlow, ControllerPreloadIsAnEquilibrium) {
  for (int id = 1; id <= 4; ++id) {
    const ResolvedScenario r = resolve(builtin_case(id));
    FeederModel healthy = r.model.feeder;
    const PreparedNetwork net(healthy);
    const Evaluation ev = evaluate(r.model, net, r.loadflow.controller_init, false);
    for (double v : ev.deriv.as_array()) EXPECT_NEAR(v, 0.0, 1e-8) << id;
    EXPECT_EQ(r.loadflow.controller_init.int_cl, 0.0);
  }
}

TEST(LoadFlow, LightLoadSitsNearNoLoadVoltage) {
  Scenario s = default_scenario();
  s.p_load_mw = 0.01;
  const LoadFlowResult lf = resolve(s).loadflow;
  EXPECT_NEAR(std::abs(lf.u_poc0), 1.0, 1e-5);
  EXPECT_NEAR(std::abs(lf.i_inv0), 1e-3, 1e-5);
}

TEST(LoadFlow, NoLoadGivesNoLoadVoltage) {
  const LoadFlowResult lf = resolve(default_scenario()).loadflow;
  EXPECT_NEAR(std::abs(lf.u_poc0), 1.0, 1e-14);
  EXPECT_NEAR(std::arg(lf.u_poc0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(lf.i_inv0), 0.0, 1e-14);
}

TEST(LoadFlow, ThetaFiftyShiftsAngleByAThird) {
  Scenario s = builtin_case(1);
  const double a0 = std::arg(resolve(s).loadflow.u_poc0);
  s.theta_50_rad = 0.3;
  const double a1 = std::arg(resolve(s).loadflow.u_poc0);
  EXPECT_NEAR(a1 - a0, 0.1, 1e-9);
}

TEST(LoadFlow, InfeasibleLoadIsReported) {
  Scenario s = builtin_case(1);
  s.p_load_mw = 400.0;
  EXPECT_THROW(resolve(s), InfeasibleLoad);
}

TEST(LoadFlow, ExcessiveMagnitudeIsReported) {
  Scenario s = builtin_case(3);
  s.gains.e_max = 1.001;
  EXPECT_THROW(resolve(s), InfeasibleLoad);
}

TEST(LoadFlow, IterationBudget) {
  const ResolvedScenario r = resolve(builtin_case(3));
  LoadFlowOptions opt;
  opt.max_iter = 1;
  EXPECT_THROW(solve_loadflow(r.model.feeder, {0.425, 0.0}, r.model.rfc, 0.0, r.model.gains, opt), NonConvergence);
}

TEST(LoadFlow, RejectsZeroIntegralGain) {
  const ResolvedScenario r = resolve(builtin_case(1));
  ControlGains g = r.model.gains;
  g.ki_v = 0.0;
  EXPECT_THROW(solve_loadflow(r.model.feeder, {0.24, 0.0}, r.model.rfc, 0.0, g), InputError);
}

TEST(LoadFlow, IgnoresAppliedFault) {
  const ResolvedScenario r = resolve(builtin_case(1));
  const FeederModel faulted = set_fault(r.model.feeder, {0.47, 0.15}, 25.0);
  const LoadFlowResult a = solve_loadflow(faulted, {0.24, 0.0}, r.model.rfc, 0.0, r.model.gains);
  EXPECT_LE(std::abs(a.e_inv0 - r.loadflow.e_inv0), 1e-12);
}
