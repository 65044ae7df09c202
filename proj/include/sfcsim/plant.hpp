#pragma once

#include <cmath>
#include <complex>

#include "sfcsim/network.hpp"
#include "sfcsim/rfc_reference.hpp"
#include "sfcsim/sfc_control.hpp"

namespace sfcsim {

// Everything needed to evaluate the closed loop, in p.u.
struct SystemModel {
  FeederModel feeder;
  RfcParams rfc;
  ControlGains gains;
  double theta_50 = 0.0;

  void validate() const {
    feeder.validate();
    rfc.validate();
    gains.validate();
  }
};

struct Evaluation {
  InverterOutput out;
  NetworkSolution net;
  Measurements meas;
  References refs;
  SfcState deriv;
};

// Measured quantities at PoC16 for a given inverter phasor. Angles are taken
// relative to delta so they stay continuous when delta drifts past +-pi.
inline Measurements measure(const InverterOutput& out, const NetworkSolution& net) {
  Measurements m;
  m.u_g = std::abs(net.u_poc);
  m.p_g = net.p_g;
  m.q_g = net.q_g;
  m.i_mag = std::abs(net.i_inv);
  const Phasor rot = std::polar(1.0, -out.delta);
  m.theta_g = out.delta + (m.u_g > 0.0 ? std::arg(net.u_poc * rot) : 0.0);
  m.gamma = out.delta + (m.i_mag > 0.0 ? std::arg(net.i_inv * rot) : 0.0);
  return m;
}

inline References references(const SystemModel& model, const Measurements& meas) {
  return {angle_reference(model.rfc, model.theta_50, meas.p_g, meas.q_g, meas.u_g),
          voltage_reference(model.rfc, meas.q_g)};
}

// One right-hand-side evaluation: inverter output -> network -> measurements
// -> references -> controller derivatives.
inline Evaluation evaluate(const SystemModel& model, const PreparedNetwork& network, const SfcState& state,
                           bool limiting) {
  Evaluation ev;
  ev.out = inverter_output(state, model.gains, limiting);
  ev.net = network.solve(ev.out.phasor());
  ev.meas = measure(ev.out, ev.net);
  ev.refs = references(model, ev.meas);
  ev.deriv = control_derivatives(state, ev.meas, ev.refs, model.gains, limiting);
  return ev;
}

}  // namespace sfcsim
