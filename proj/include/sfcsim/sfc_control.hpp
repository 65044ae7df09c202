#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

#include "sfcsim/errors.hpp"
#include "sfcsim/network.hpp"

namespace sfcsim {

struct ControlGains {
  double kp_v = 0.02;
  double ki_v = 2.0;   // 1/s
  double kp_a = 0.02;
  double ki_a = 2.0;   // 1/s
  double kp_cl = 12.0;
  double ki_cl = 75.0;  // 1/s
  double t_c = 0.050;   // s
  double t_i = 0.02e-3;  // s
  double e_max = 1.15;  // p.u.
  double i_max = 2.0;   // p.u.
  bool anti_windup_voltage = false;
  bool anti_windup_angle = false;

  void validate() const {
    if (!(t_c > 0.0) || !(t_i > 0.0)) throw InputError("control: time constants must be > 0");
    if (!(e_max > 0.0)) throw InputError("control: e_max must be > 0");
    if (!(i_max > 0.0)) throw InputError("control: i_max must be > 0");
    for (double g : {kp_v, ki_v, kp_a, ki_a, kp_cl, ki_cl}) {
      if (!std::isfinite(g)) throw InputError("control: gains must be finite");
    }
  }

  friend bool operator==(const ControlGains&, const ControlGains&) = default;
};

// Continuous controller state. Layout of as_array() is the integrator's state
// vector; keep the two in sync.
struct SfcState {
  double int_v = 0.0;    // voltage PI integrator
  double int_a = 0.0;    // angle PI integrator
  double int_cl = 0.0;   // current-limit PI integrator
  double lag_e = 0.0;    // converter lag, |E| channel
  double lag_d = 0.0;    // converter lag, delta channel
  double filt_de = 0.0;  // current-limit correction filter, |E| channel
  double filt_dd = 0.0;  // current-limit correction filter, delta channel

  static constexpr std::size_t kSize = 7;

  std::array<double, kSize> as_array() const { return {int_v, int_a, int_cl, lag_e, lag_d, filt_de, filt_dd}; }

  static SfcState from_array(const std::array<double, kSize>& x) { return {x[0], x[1], x[2], x[3], x[4], x[5], x[6]}; }

  bool finite() const {
    for (double v : as_array()) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  friend bool operator==(const SfcState&, const SfcState&) = default;
};

struct Measurements {
  double u_g = 0.0;
  double theta_g = 0.0;
  double p_g = 0.0;
  double q_g = 0.0;
  double i_mag = 0.0;
  double gamma = 0.0;
};

struct InverterOutput {
  double e_mag = 0.0;
  double delta = 0.0;
  bool limiting = false;

  Phasor phasor() const { return std::polar(e_mag, delta); }
};

struct References {
  double theta_ref = 0.0;
  double u_ref = 0.0;
};

struct CurrentLimitUpdate {
  double d_int_cl = 0.0;
  double target_de = 0.0;
  double target_dd = 0.0;
  bool limiting = false;
};

inline InverterOutput inverter_output(const SfcState& state, const ControlGains& gains, bool limiting = false) {
  return {std::clamp(state.lag_e, 0.0, gains.e_max), state.lag_d, limiting};
}

// Current-limit PI acting in the given mode. Error is (i_max - |I|), so an
// overcurrent gives a negative PI output; weighting with the positive
// sensitivities d|I|/d|E| ~ sin(delta - gamma) and d|I|/d delta ~ |E| cos(delta - gamma)
// then lowers both |E| and delta. Reactances sit inside the gains.
inline CurrentLimitUpdate current_limit_targets(const SfcState& state, const Measurements& meas,
                                                const InverterOutput& out, const ControlGains& gains, bool active) {
  CurrentLimitUpdate upd;
  upd.limiting = active;
  if (!active) return upd;
  const double err = gains.i_max - meas.i_mag;
  const double pi_out = gains.kp_cl * err + gains.ki_cl * state.int_cl;
  const double phi = out.delta - meas.gamma;
  upd.d_int_cl = err;
  upd.target_de = pi_out * std::sin(phi);
  upd.target_dd = pi_out * out.e_mag * std::cos(phi);
  return upd;
}

// Mode decided by the threshold alone: active iff |I| > |I|max.
inline CurrentLimitUpdate current_limit_update(const SfcState& state, const Measurements& meas,
                                               const InverterOutput& out, const ControlGains& gains) {
  return current_limit_targets(state, meas, out, gains, meas.i_mag > gains.i_max);
}

inline SfcState reset_current_limit(SfcState state) {
  state.int_cl = 0.0;
  return state;
}

// Time derivatives of the controller state. `limiting` is the current-limit
// mode held by the caller; in the hybrid simulation it only changes at located
// threshold crossings and events.
inline SfcState control_derivatives(const SfcState& state, const Measurements& meas, const References& refs,
                                    const ControlGains& gains, bool limiting) {
  for (double v : {meas.u_g, meas.theta_g, meas.p_g, meas.q_g, meas.i_mag, meas.gamma, refs.theta_ref, refs.u_ref}) {
    if (!std::isfinite(v)) throw IntegrationFault("non-finite measurement or reference in controller");
  }
  if (!state.finite()) throw IntegrationFault("non-finite controller state");

  const InverterOutput out = inverter_output(state, gains, limiting);
  const CurrentLimitUpdate cl = current_limit_targets(state, meas, out, gains, limiting);

  const double err_v = refs.u_ref - meas.u_g;
  const double err_a = refs.theta_ref - meas.theta_g;
  const double e_ref = gains.kp_v * err_v + gains.ki_v * state.int_v;
  const double delta_ref = gains.kp_a * err_a + gains.ki_a * state.int_a;

  const double e_cmd = e_ref + state.filt_de;
  const double e_target = std::clamp(e_cmd, 0.0, gains.e_max);

  // Conditional integration: the integrator holds while its output is being
  // limited downstream (|E| clamp in the pushing direction, or current limiting).
  const bool v_saturated = limiting || (e_cmd >= gains.e_max && err_v > 0.0) || (e_cmd <= 0.0 && err_v < 0.0);

  SfcState d;
  d.int_v = (gains.anti_windup_voltage && v_saturated) ? 0.0 : err_v;
  d.int_a = (gains.anti_windup_angle && limiting) ? 0.0 : err_a;
  d.int_cl = cl.d_int_cl;
  d.lag_e = (e_target - state.lag_e) / gains.t_c;
  d.lag_d = (delta_ref + state.filt_dd - state.lag_d) / gains.t_c;
  d.filt_de = (cl.target_de - state.filt_de) / gains.t_i;
  d.filt_dd = (cl.target_dd - state.filt_dd) / gains.t_i;
  return d;
}

// Inverter current through X_T + X_f.
inline Phasor current_from_phasors(Phasor e, Phasor u, double x_t, double x_f) {
  const double x = x_t + x_f;
  if (!(x > 0.0)) throw InputError("total coupling reactance must be > 0");
  return (e - u) / (kJ * x);
}

// |I| from the real-part expression, given the current angle gamma.
inline double current_magnitude_real_part(double e_mag, double delta, double u_mag, double theta, double gamma,
                                          double x_total) {
  return (e_mag * std::sin(delta - gamma) - u_mag * std::sin(theta - gamma)) / x_total;
}

}  // namespace sfcsim
