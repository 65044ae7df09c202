#pragma once

#include <cmath>
#include <complex>
#include <sstream>

#include "sfcsim/errors.hpp"
#include "sfcsim/network.hpp"
#include "sfcsim/rfc_reference.hpp"
#include "sfcsim/sfc_control.hpp"

namespace sfcsim {

struct LoadFlowOptions {
  double tol = 1e-10;
  int max_iter = 100;
  double u_load_guess = 1.0;  // starting |U| at the train for the admittance update
};

struct LoadFlowResult {
  Phasor e_inv0{};
  Phasor u_poc0{};
  Phasor u_load0{};
  Phasor i_inv0{};
  double p_g0 = 0.0;
  double q_g0 = 0.0;
  Complex y_load{};
  SfcState controller_init;
  int iterations = 0;
};

// Pre-fault operating point. The load is a constant power S_D = p_d + j q_d (p.u.)
// turned into the admittance conj(S_D)/|U_load|^2, iterated to a fixed point.
//
// Within one iteration the network is linear in the inverter phasor c, so with
// unit excitation giving U1 and S1 at PoC16, |c| follows from the droop law
//   |c||U1| = u0 - k_u |c|^2 Q1
// and arg(c) from the angle law evaluated at the scaled powers.
inline LoadFlowResult solve_loadflow(FeederModel feeder, Complex s_load, const RfcParams& rfc, double theta_50,
                                     const ControlGains& gains, const LoadFlowOptions& opt = {}) {
  rfc.validate();
  gains.validate();
  feeder = clear_fault(feeder);
  if (!(opt.u_load_guess > 0.0)) throw InputError("load flow: initial voltage guess must be > 0");
  if (gains.ki_v == 0.0 || gains.ki_a == 0.0) {
    throw InputError("load flow: integral gains must be non-zero to preload the controller");
  }

  double u_load_mag = opt.u_load_guess;
  Phasor c{};
  Phasor prev_u_poc{std::nan(""), 0.0};
  NetworkSolution sol;
  double last_change = INFINITY;

  for (int it = 1; it <= opt.max_iter; ++it) {
    feeder.y_load = std::conj(s_load) / (u_load_mag * u_load_mag);
    const PreparedNetwork net(feeder);
    const NetworkSolution unit = net.solve(Phasor{1.0, 0.0});
    const double u1 = std::abs(unit.u_poc);
    const double a = rfc.k_u * unit.q_g;
    const double disc = u1 * u1 + 4.0 * a * rfc.u0;
    if (!(u1 > 0.0) || disc < 0.0) {
      throw InfeasibleLoad("load flow: no voltage magnitude satisfies the droop law at this load");
    }
    const double m = 2.0 * rfc.u0 / (u1 + std::sqrt(disc));
    if (!(m > 0.0) || !std::isfinite(m)) throw InfeasibleLoad("load flow: droop solution is not positive");

    const double theta_ref = angle_reference(rfc, theta_50, m * m * unit.p_g, m * m * unit.q_g, m * u1);
    c = std::polar(m, theta_ref - std::arg(unit.u_poc));
    sol = net.solve(c);

    const double new_u_load = std::abs(sol.u_load);
    if (!(new_u_load > 1e-6) || !std::isfinite(new_u_load)) {
      throw InfeasibleLoad("load flow: train voltage collapsed; load exceeds feeder transfer capability");
    }
    last_change = std::abs(sol.u_poc - prev_u_poc);
    const double load_change = std::abs(new_u_load - u_load_mag);
    prev_u_poc = sol.u_poc;
    u_load_mag = new_u_load;

    if (last_change < opt.tol && load_change < opt.tol) {
      LoadFlowResult res;
      res.e_inv0 = c;
      res.u_poc0 = sol.u_poc;
      res.u_load0 = sol.u_load;
      res.i_inv0 = sol.i_inv;
      res.p_g0 = sol.p_g;
      res.q_g0 = sol.q_g;
      res.y_load = feeder.y_load;
      res.iterations = it;

      // Zero error at equilibrium: the integrators alone carry the commands.
      SfcState& x = res.controller_init;
      x.lag_e = std::abs(c);
      x.lag_d = std::arg(c);
      x.int_v = x.lag_e / gains.ki_v;
      x.int_a = x.lag_d / gains.ki_a;
      if (x.lag_e > gains.e_max) {
        throw InfeasibleLoad("load flow: operating point needs |E| above e_max");
      }
      return res;
    }
  }
  std::ostringstream msg;
  msg << "load flow did not converge in " << opt.max_iter << " iterations (last PoC change " << last_change << ")";
  throw NonConvergence(msg.str());
}

}  // namespace sfcsim
