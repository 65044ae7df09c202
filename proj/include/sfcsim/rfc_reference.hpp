#pragma once

#include <cmath>
#include <string>

#include "sfcsim/errors.hpp"

namespace sfcsim {

// Steady-state characteristic of a synchronous-synchronous rotary converter,
// which the SFC inverter is controlled to mimic at its railway-side terminal.
//
// Reactances are the effective values: step-down transformer folded into the
// motor, step-up transformer folded into the generator, both on system base.
struct RfcParams {
  double xq_m = 0.0;  // motor quadrature reactance, p.u.
  double xq_g = 0.0;  // generator quadrature reactance, p.u.
  double k_u = 0.0;   // droop, p.u. voltage per p.u. reactive power
  double u0 = 1.0;    // no-load voltage, p.u.

  void validate() const {
    if (!(xq_m > 0.0) || !(xq_g > 0.0)) throw InputError("rfc: quadrature reactances must be > 0");
    if (!(k_u >= 0.0)) throw InputError("rfc: droop coefficient must be >= 0");
    if (!(u0 > 0.0)) throw InputError("rfc: no-load voltage must be > 0");
  }

  friend bool operator==(const RfcParams&, const RfcParams&) = default;
};

inline constexpr double kDegenerateDenominator = 1e-9;

namespace detail {

// Load angle of one machine: arctan(X_q P / (|U|^2 + X_q Q)).
inline double load_angle(double xq, double p, double q, double u, const char* which) {
  const double den = u * u + xq * q;
  if (!(std::abs(den) >= kDegenerateDenominator)) {
    throw DegenerateDenominator(std::string("load angle denominator |U|^2 + Xq*Q vanishes (") + which + ")");
  }
  return std::atan(xq * p / den);
}

}  // namespace detail

// Phase shift across the converter: motor load angle (in 50 Hz radians, hence
// the 1/3) plus generator load angle.
inline double phase_shift(const RfcParams& rfc, double p_m, double q_m, double u_m, double p_g, double q_g,
                          double u_g) {
  return detail::load_angle(rfc.xq_m, p_m, q_m, u_m, "motor") / 3.0 +
         detail::load_angle(rfc.xq_g, p_g, q_g, u_g, "generator");
}

// Terminal angle the converter should show at PoC16. The motor side sees an
// infinite bus (unit denominator) and, the converter being lossless, carries
// the same active power as the railway side.
inline double angle_reference(const RfcParams& rfc, double theta_50, double p_g, double q_g, double u_g) {
  return theta_50 / 3.0 - std::atan(rfc.xq_m * p_g) / 3.0 - detail::load_angle(rfc.xq_g, p_g, q_g, u_g, "generator");
}

inline double voltage_reference(const RfcParams& rfc, double q_g) { return rfc.u0 - rfc.k_u * q_g; }

}  // namespace sfcsim
