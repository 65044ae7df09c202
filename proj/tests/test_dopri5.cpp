#include <gtest/gtest.h>

#include <cmath>

#include "sfcsim/dopri5.hpp"

using namespace sfcsim;

namespace {

using S1 = Dopri5<1>;
using S2 = Dopri5<2>;

auto decay = [](double, const S1::State& y) { return S1::State{-2.0 * y[0]}; };

// harmonic oscillator y'' = -y
auto osc = [](double, const S2::State& y) { return S2::State{y[1], -y[0]}; };

double single_step_error(double h) {
  const S1::State y0{1.0};
  const S1::Step st = S1::attempt(decay, 0.0, y0, decay(0.0, y0), h, {});
  return std::abs(st.y1[0] - std::exp(-2.0 * h));
}

}  // namespace

TEST(Dopri5, LocalErrorIsFifthOrder) {
  // local error ~ C h^6 for a fifth-order method
  const double r = single_step_error(0.1) / single_step_error(0.05);
  EXPECT_GT(r, 40.0);
  EXPECT_LT(r, 90.0);
}

TEST(Dopri5, IntegratesOscillatorOverAPeriod) {
  S2::State y{1.0, 0.0};
  S2::State k = osc(0.0, y);
  double t = 0.0, h = 1e-3;
  const S2::Tolerances tol{1e-10, 1e-12};
  const double t_end = 2.0 * M_PI;
  while (t < t_end) {
    h = std::min(h, t_end - t);
    const S2::Step st = S2::attempt(osc, t, y, k, h, tol);
    if (st.error > 1.0) {
      h *= 0.5;
      continue;
    }
    t += h;
    y = st.y1;
    k = st.k7;
    h = S2::next_step(h, st.error);
  }
  EXPECT_NEAR(y[0], 1.0, 1e-8);
  EXPECT_NEAR(y[1], 0.0, 1e-8);
}

TEST(Dopri5, DenseOutputMatchesEndpointsAndInterior) {
  const S2::State y0{1.0, 0.0};
  const double h = 0.2;
  const S2::Step st = S2::attempt(osc, 0.0, y0, osc(0.0, y0), h, {});
  EXPECT_EQ(st.at(0.0)[0], 1.0);
  EXPECT_NEAR(st.at(h)[0], st.y1[0], 1e-15);
  EXPECT_NEAR(st.at(h)[1], st.y1[1], 1e-15);
  for (double s : {0.1, 0.37, 0.5, 0.81}) {
    EXPECT_NEAR(st.at(s * h)[0], std::cos(s * h), 1e-7);
    EXPECT_NEAR(st.at(s * h)[1], -std::sin(s * h), 1e-7);
  }
}

TEST(Dopri5, ErrorEstimateScalesWithTolerance) {
  const S1::State y0{1.0};
  const S1::Step loose = S1::attempt(decay, 0.0, y0, decay(0.0, y0), 0.1, {1e-3, 1e-6});
  const S1::Step tight = S1::attempt(decay, 0.0, y0, decay(0.0, y0), 0.1, {1e-9, 1e-12});
  EXPECT_LT(loose.error, 1.0);
  EXPECT_GT(tight.error, 1.0);
  EXPECT_EQ(loose.y1, tight.y1);
}

TEST(Dopri5, FsalStageIsDerivativeAtEnd) {
  const S1::State y0{1.0};
  const S1::Step st = S1::attempt(decay, 0.0, y0, decay(0.0, y0), 0.1, {});
  EXPECT_EQ(st.k7[0], -2.0 * st.y1[0]);
}

TEST(Dopri5, NonFiniteErrorBecomesInfinity) {
  auto blow = [](double, const S1::State& y) { return S1::State{y[0] > 1.5 ? NAN : 1e3}; };
  const S1::State y0{1.0};
  const S1::Step st = S1::attempt(blow, 0.0, y0, blow(0.0, y0), 0.1, {});
  EXPECT_EQ(st.error, INFINITY);
}

TEST(Dopri5, StepController) {
  EXPECT_DOUBLE_EQ(S1::next_step(1.0, 0.0), 5.0);
  EXPECT_DOUBLE_EQ(S1::next_step(1.0, 1e-12), 5.0);
  EXPECT_DOUBLE_EQ(S1::next_step(1.0, 1e12), 0.2);
  EXPECT_DOUBLE_EQ(S1::next_step(1.0, 1.0), 0.9);
}
