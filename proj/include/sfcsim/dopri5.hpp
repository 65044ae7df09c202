#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace sfcsim {

// Dormand-Prince 5(4) embedded pair with its 4th-order continuous extension
// (coefficients as in Hairer, Norsett & Wanner, Solving ODEs I, code DOPRI5).
// One call = one attempted step; step-size policy and event handling live in
// the caller.
template <std::size_t N>
class Dopri5 {
 public:
  using State = std::array<double, N>;

  struct Tolerances {
    double rel = 1e-6;
    double abs = 1e-8;
  };

  // Result of one attempted step. `error` is the max over components of
  // |err_i| / (abs + rel * max(|y0_i|, |y1_i|)); the step is acceptable when <= 1.
  struct Step {
    double t0 = 0.0;
    double h = 0.0;
    State y0{};
    State y1{};
    State k1{};
    State k7{};  // f(t0 + h, y1), reusable as k1 of the next step
    double error = 0.0;
    std::array<State, 5> dense{};

    // Interpolated state at t in [t0, t0 + h].
    State at(double t) const {
      const double s = (t - t0) / h;
      const double s1 = 1.0 - s;
      State y{};
      for (std::size_t i = 0; i < N; ++i) {
        y[i] = dense[0][i] + s * (dense[1][i] + s1 * (dense[2][i] + s * (dense[3][i] + s1 * dense[4][i])));
      }
      return y;
    }
  };

  template <class Rhs>
  static Step attempt(Rhs&& f, double t0, const State& y0, const State& k1, double h, const Tolerances& tol) {
    constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
    constexpr double a21 = 1.0 / 5.0;
    constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
    constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                     a65 = -5103.0 / 18656.0;
    constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                     a76 = 11.0 / 84.0;
    constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                     e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
    constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                     d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                     d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

    Step st;
    st.t0 = t0;
    st.h = h;
    st.y0 = y0;
    st.k1 = k1;
    State y{};
    auto stage = [&](auto&& combine) {
      for (std::size_t i = 0; i < N; ++i) y[i] = y0[i] + h * combine(i);
    };

    stage([&](std::size_t i) { return a21 * k1[i]; });
    const State k2 = f(t0 + c2 * h, y);
    stage([&](std::size_t i) { return a31 * k1[i] + a32 * k2[i]; });
    const State k3 = f(t0 + c3 * h, y);
    stage([&](std::size_t i) { return a41 * k1[i] + a42 * k2[i] + a43 * k3[i]; });
    const State k4 = f(t0 + c4 * h, y);
    stage([&](std::size_t i) { return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]; });
    const State k5 = f(t0 + c5 * h, y);
    stage([&](std::size_t i) { return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]; });
    const State k6 = f(t0 + h, y);
    stage([&](std::size_t i) { return a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]; });
    st.y1 = y;
    st.k7 = f(t0 + h, st.y1);

    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * st.k7[i]);
      const double sc = tol.abs + tol.rel * std::max(std::abs(y0[i]), std::abs(st.y1[i]));
      const double r = std::abs(e) / sc;
      if (!(r <= err)) err = r;  // lets NaN through
    }
    st.error = std::isfinite(err) ? err : INFINITY;

    for (std::size_t i = 0; i < N; ++i) {
      const double ydiff = st.y1[i] - y0[i];
      const double bspl = h * k1[i] - ydiff;
      st.dense[0][i] = y0[i];
      st.dense[1][i] = ydiff;
      st.dense[2][i] = bspl;
      st.dense[3][i] = ydiff - h * st.k7[i] - bspl;
      st.dense[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * st.k7[i]);
    }
    return st;
  }

  // Standard controller: 0.9 * err^(-1/5), growth limited to [0.2, 5].
  static double next_step(double h, double error) {
    if (error == 0.0) return 5.0 * h;
    const double fac = 0.9 * std::pow(error, -0.2);
    return h * std::clamp(fac, 0.2, 5.0);
  }
};

}  // namespace sfcsim
