#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "sfcsim/errors.hpp"

namespace sfcsim {

using Complex = std::complex<double>;

// Railway grid frequency, kept as the exact rational 50/3.
inline constexpr double kRailFrequencyHz = 50.0 / 3.0;

// Single-phase per-unit base. z_base is derived, never stored independently.
class BaseSystem {
 public:
  BaseSystem(double s_base_mva, double v_base_kv, double f_base_hz = kRailFrequencyHz)
      : s_base_(s_base_mva), v_base_(v_base_kv), f_base_(f_base_hz) {
    if (!(s_base_ > 0.0) || !(v_base_ > 0.0) || !(f_base_ > 0.0)) {
      throw InputError("base system requires s_base, v_base and f_base > 0");
    }
  }

  double s_base() const { return s_base_; }  // MVA
  double v_base() const { return v_base_; }  // kV
  double f_base() const { return f_base_; }  // Hz
  double z_base() const { return v_base_ * v_base_ / s_base_; }  // ohm

  friend bool operator==(const BaseSystem&, const BaseSystem&) = default;

 private:
  double s_base_;
  double v_base_;
  double f_base_;
};

inline Complex impedance_to_pu(Complex z_ohm, const BaseSystem& base) { return z_ohm / base.z_base(); }

inline Complex pu_to_impedance(Complex z_pu, const BaseSystem& base) { return z_pu * base.z_base(); }

// Reactance of an inductance at the base frequency, in p.u.
inline double inductance_to_pu(double henry, const BaseSystem& base) {
  if (henry < 0.0) throw InputError("inductance must be non-negative");
  return 2.0 * std::numbers::pi * base.f_base() * henry / base.z_base();
}

inline double pu_to_inductance(double x_pu, const BaseSystem& base) {
  return x_pu * base.z_base() / (2.0 * std::numbers::pi * base.f_base());
}

// Moves a reactance given on a machine/transformer rating to the system base
// (same voltage base assumed).
inline double rebase_reactance(double x_pu, double s_rated_mva, double s_base_mva) {
  if (!(s_rated_mva > 0.0)) throw InputError("rated power must be > 0 for rebasing");
  return x_pu * s_base_mva / s_rated_mva;
}

inline double power_to_pu(double mw_or_mvar, const BaseSystem& base) { return mw_or_mvar / base.s_base(); }

inline double pu_to_power(double pu, const BaseSystem& base) { return pu * base.s_base(); }

}  // namespace sfcsim
