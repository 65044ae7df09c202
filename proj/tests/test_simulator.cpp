#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "sfcsim/scenario.hpp"
#include "sfcsim/simulator.hpp"

using namespace sfcsim;

namespace {

double max_of(const std::vector<double>& v, std::size_t from = 0, std::size_t to = SIZE_MAX) {
  to = std::min(to, v.size());
  return *std::max_element(v.begin() + static_cast<long>(from), v.begin() + static_cast<long>(to));
}

std::size_t index_of(const TraceSet& tr, double t) {
  return static_cast<std::size_t>(std::lower_bound(tr.time.begin(), tr.time.end(), t - 1e-12) - tr.time.begin());
}

}  // namespace

TEST(LocateModeSwitch, FindsRoot) {
  auto f = [](double t) { return t - 0.3; };
  const double ts = locate_mode_switch(f, 0.0, 1.0, 1e-10);
  EXPECT_GE(ts, 0.3);
  EXPECT_LE(ts - 0.3, 1e-10);
  EXPECT_GT(f(ts), 0.0);
}

TEST(LocateModeSwitch, DecreasingFunction) {
  auto f = [](double t) { return 0.7 - t; };
  const double ts = locate_mode_switch(f, 0.0, 1.0, 1e-12);
  EXPECT_LE(f(ts), 0.0);
  EXPECT_NEAR(ts, 0.7, 1e-12);
}

TEST(LocateModeSwitch, EdgeCases) {
  EXPECT_EQ(locate_mode_switch([](double t) { return t; }, 0.0, 1.0), 0.0);
  EXPECT_THROW(locate_mode_switch([](double t) { return t + 1.0; }, 0.0, 1.0), NumericalError);
}

TEST(SampleTimes, RegularGridIncludingEnd) {
  const auto ts = detail::sample_times(1.0, 0.1);
  ASSERT_EQ(ts.size(), 11u);
  EXPECT_EQ(ts.front(), 0.0);
  EXPECT_EQ(ts.back(), 1.0);
  EXPECT_DOUBLE_EQ(ts[3], 0.30000000000000004);
  const auto odd = detail::sample_times(0.25, 0.1);
  ASSERT_EQ(odd.size(), 4u);
  EXPECT_EQ(odd.back(), 0.25);
}

TEST(SimConfig, Validation) {
  EXPECT_NO_THROW(SimConfig{}.validate());
  SimConfig c;
  c.switch_tol = 1e-5;
  EXPECT_THROW(c.validate(), InputError);
  c = {};
  c.rel_tol = 0.0;
  EXPECT_THROW(c.validate(), InputError);
  c = {};
  c.output_dt = -1.0;
  EXPECT_THROW(c.validate(), InputError);
}

TEST(Simulate, EquilibriumHoldsWithoutEvents) {
  Scenario s = builtin_case(1);
  s.faults.clear();
  s.t_end_s = 2.0;
  const ResolvedScenario r = resolve(s);
  const SimResult res = run(r);
  ASSERT_EQ(res.trace.size(), 2001u);
  const double u0 = std::abs(r.loadflow.u_poc0);
  for (double u : res.trace.u_mag) EXPECT_NEAR(u, u0, 1e-6);
  EXPECT_EQ(res.stats.mode_switches, 0);
  EXPECT_FALSE(res.final_limiting);
}

TEST(Simulate, FaultDipsVoltageThenRecovers) {
  const ResolvedScenario r = resolve(builtin_case(1));
  const SimResult res = run(r);
  const TraceSet& tr = res.trace;
  const std::size_t k_on = index_of(tr, 1.0), k_off = index_of(tr, 1.06);
  EXPECT_NEAR(tr.time[k_on], 1.0, 1e-12);
  // sample at the fault instant already sees the faulted network
  EXPECT_LT(tr.u_mag[k_on], 0.9 * tr.u_mag[k_on - 1]);
  EXPECT_GT(tr.i_mag[k_on], 2.0 * tr.i_mag[k_on - 1]);
  EXPECT_GT(tr.u_mag[k_off], tr.u_mag[k_off - 1]);
  EXPECT_NEAR(tr.u_mag.back(), tr.u_mag.front(), 1e-3);
  EXPECT_EQ(*std::max_element(tr.limiting.begin(), tr.limiting.end()), 0);
}

TEST(Simulate, CurrentLimitingEngagesForBoltedReactiveFault) {
  const SimResult res = run(resolve(builtin_case(3)));
  const TraceSet& tr = res.trace;
  EXPECT_GE(res.stats.mode_switches, 2);
  const std::size_t a = index_of(tr, 1.08), b = index_of(tr, 1.12);
  for (std::size_t k = a; k < b; ++k) {
    EXPECT_EQ(tr.limiting[k], 1);
    EXPECT_NEAR(tr.i_mag[k], 2.0, 0.1);
  }
  EXPECT_LE(max_of(tr.e_mag), 1.15);
  // limiter integrator is cleared once limiting ends
  EXPECT_EQ(tr.int_cl.back(), 0.0);
  EXPECT_FALSE(res.final_limiting);
}

TEST(Simulate, Deterministic) {
  const ResolvedScenario r = resolve(builtin_case(4));
  const SimResult a = run(r);
  const SimResult b = run(r);
  EXPECT_TRUE(a.trace == b.trace);
  EXPECT_EQ(a.final_state, b.final_state);
}

TEST(Simulate, ChatterGuard) {
  ResolvedScenario r = resolve(builtin_case(3));
  r.config.max_mode_switches = 0;
  EXPECT_THROW(run(r), IntegrationFault);
}

TEST(Simulate, EventOutsideHorizonRejected) {
  ResolvedScenario r = resolve(builtin_case(1));
  r.config.t_end = 0.5;
  EXPECT_THROW(run(r), InputError);
}

TEST(Simulate, EventsAreSortedInternally) {
  ResolvedScenario r = resolve(builtin_case(2));
  r.config.t_end = 1.5;
  const SimResult sorted = run(r);
  std::reverse(r.events.begin(), r.events.end());
  EXPECT_TRUE(run(r).trace == sorted.trace);
}

TEST(Simulate, EventAtEndAffectsLastSample) {
  ResolvedScenario r = resolve(builtin_case(1));
  r.config.t_end = 1.0;
  r.events.pop_back();
  const SimResult res = run(r);
  EXPECT_LT(res.trace.u_mag.back(), 0.9 * res.trace.u_mag.front());
}

TEST(Simulate, RejectsNonFiniteInitialState) {
  const ResolvedScenario r = resolve(builtin_case(1));
  SfcState x = r.loadflow.controller_init;
  x.int_a = NAN;
  EXPECT_THROW(simulate(r.model, x, r.events, r.config), IntegrationFault);
}

TEST(Simulate, TighterToleranceConverges) {
  ResolvedScenario r = resolve(builtin_case(2));
  r.config.t_end = 1.5;
  const SimResult coarse = run(r);
  r.config.rel_tol = 1e-9;
  r.config.abs_tol = 1e-11;
  const SimResult fine = run(r);
  ASSERT_EQ(coarse.trace.size(), fine.trace.size());
  for (std::size_t k = 0; k < coarse.trace.size(); ++k) {
    EXPECT_NEAR(coarse.trace.u_mag[k], fine.trace.u_mag[k], 1e-4);
  }
}
