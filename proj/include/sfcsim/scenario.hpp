#pragma once

#include <algorithm>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "sfcsim/errors.hpp"
#include "sfcsim/loadflow.hpp"
#include "sfcsim/perunit.hpp"
#include "sfcsim/plant.hpp"
#include "sfcsim/simulator.hpp"

namespace sfcsim {

// An impedance as written in a scenario: either ohm or p.u. on system base.
struct ImpedanceValue {
  Complex value{};
  bool per_unit = false;

  Complex to_pu(const BaseSystem& base) const { return per_unit ? value : impedance_to_pu(value, base); }

  friend bool operator==(const ImpedanceValue&, const ImpedanceValue&) = default;
};

struct FaultCase {
  std::string label;  // "" for the unnamed [fault] section
  ImpedanceValue impedance{{}, true};
  double position_km = 0.0;
  double onset_s = 1.0;
  double duration_s = 0.0;

  friend bool operator==(const FaultCase&, const FaultCase&) = default;
};

// Full experiment description in the units it is written in. resolve() turns
// it into p.u. models, runs the load flow and builds the event list.
struct Scenario {
  std::string name = "custom";

  // system base
  double s_base_mva = 10.0;
  double v_base_kv = 16.5;
  double f_base_hz = kRailFrequencyHz;

  // SFC coupling
  double transformer_rating_mva = 17.4;
  double transformer_leakage_pu = 0.1665;  // on transformer rating
  double filter_inductance_h = 0.032;

  // RFC characteristic being mimicked
  double xq_motor_pu = 0.49;
  double motor_transformer_leakage_pu = 0.079;
  double motor_transformer_rating_mva = 10.7;
  double xq_generator_pu = 0.53;
  double generator_transformer_leakage_pu = 0.042;
  double generator_transformer_rating_mva = 10.0;
  bool raw_reactances = false;  // true: use 0.49/0.53 as-is, no transformer added
  double droop_pu = 0.03;
  double u0_pu = 1.0;
  double theta_50_rad = 0.0;

  ControlGains gains;

  // feeder
  ImpedanceValue z_init{{0.189, 0.293}, false};
  ImpedanceValue z_per_km{{0.0335, 0.031}, false};
  std::optional<double> load_position_km;  // unset: first fault position + 5 km

  // train
  double p_load_mw = 0.0;
  double q_load_mvar = 0.0;

  std::vector<FaultCase> faults;

  // solver; t_end unset means last clearing + 3 s
  std::optional<double> t_end_s;
  SimConfig solver;

  std::optional<std::string> measured_path;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

inline constexpr double kDefaultFaultOnset = 1.0;
inline constexpr double kPostFaultSpan = 3.0;
inline constexpr double kLoadBehindFaultKm = 5.0;

inline Scenario default_scenario() { return Scenario{}; }

// The four validation disturbances: single-end feeding over an AT catenary,
// one fault to ground, pre-fault train load fitted per case.
inline Scenario builtin_case(int n) {
  struct Row {
    double duration;
    Complex z;
    double km;
    double p_mw;
  };
  static constexpr Row rows[] = {
      {0.060, {0.47, 0.15}, 25.0, 2.40},
      {0.080, {0.50, 0.20}, 25.0, 2.75},
      {0.120, {0.00, 0.13}, 15.0, 4.25},
      {0.270, {0.00, 0.15}, 20.0, 1.50},
  };
  if (n < 1 || n > 4) throw InputError("builtin case id must be 1..4, got " + std::to_string(n));
  const Row& r = rows[n - 1];
  Scenario s = default_scenario();
  s.name = "case" + std::to_string(n);
  s.p_load_mw = r.p_mw;
  s.faults.push_back({"", {r.z, true}, r.km, kDefaultFaultOnset, r.duration});
  return s;
}

struct ResolvedScenario {
  BaseSystem base{10.0, 16.5};
  SystemModel model;  // pre-fault, load admittance from the load flow
  LoadFlowResult loadflow;
  std::vector<Event> events;
  SimConfig config;
};

inline RfcParams resolve_rfc(const Scenario& s) {
  RfcParams rfc;
  rfc.xq_m = s.xq_motor_pu;
  rfc.xq_g = s.xq_generator_pu;
  if (!s.raw_reactances) {
    rfc.xq_m += rebase_reactance(s.motor_transformer_leakage_pu, s.motor_transformer_rating_mva, s.s_base_mva);
    rfc.xq_g += rebase_reactance(s.generator_transformer_leakage_pu, s.generator_transformer_rating_mva, s.s_base_mva);
  }
  rfc.k_u = s.droop_pu;
  rfc.u0 = s.u0_pu;
  rfc.validate();
  return rfc;
}

inline FeederModel resolve_feeder(const Scenario& s, const BaseSystem& base) {
  FeederModel f;
  f.x_t = rebase_reactance(s.transformer_leakage_pu, s.transformer_rating_mva, s.s_base_mva);
  f.x_f = inductance_to_pu(s.filter_inductance_h, base);
  f.z_init = s.z_init.to_pu(base);
  f.z_per_km = s.z_per_km.to_pu(base);
  if (s.load_position_km) {
    f.load_pos_km = *s.load_position_km;
  } else {
    f.load_pos_km = (s.faults.empty() ? 0.0 : s.faults.front().position_km) + kLoadBehindFaultKm;
  }
  f.validate();
  return f;
}

inline std::vector<Event> resolve_events(const Scenario& s, const BaseSystem& base) {
  std::vector<Event> ev;
  for (const FaultCase& fc : s.faults) {
    if (!(fc.duration_s >= 0.0) || !(fc.onset_s >= 0.0)) {
      throw InputError("fault '" + fc.label + "': onset and duration must be >= 0");
    }
    const Complex z = fc.impedance.to_pu(base);
    if (!(std::abs(z) > 0.0)) throw InputError("fault '" + fc.label + "': impedance must be non-zero");
    if (!(fc.position_km >= 0.0)) throw InputError("fault '" + fc.label + "': position must be >= 0 km");
    ev.push_back({EventKind::apply_fault, fc.onset_s, {z, fc.position_km}});
    ev.push_back({EventKind::clear_fault, fc.onset_s + fc.duration_s, {}});
  }
  std::stable_sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) { return a.time < b.time; });
  return ev;
}

inline double resolve_t_end(const Scenario& s) {
  if (s.t_end_s) return *s.t_end_s;
  double last = kDefaultFaultOnset;
  for (const FaultCase& fc : s.faults) last = std::max(last, fc.onset_s + fc.duration_s);
  return last + kPostFaultSpan;
}

inline ResolvedScenario resolve(const Scenario& s, const LoadFlowOptions& lf_opt = {}) {
  ResolvedScenario r;
  r.base = BaseSystem(s.s_base_mva, s.v_base_kv, s.f_base_hz);
  r.model.rfc = resolve_rfc(s);
  r.model.gains = s.gains;
  r.model.gains.validate();
  r.model.theta_50 = s.theta_50_rad;
  r.model.feeder = resolve_feeder(s, r.base);
  r.events = resolve_events(s, r.base);
  r.config = s.solver;
  r.config.t_end = resolve_t_end(s);
  r.config.validate();
  for (const Event& e : r.events) {
    if (e.time > r.config.t_end) throw InputError("fault event after t_end");
  }

  const Complex s_load{power_to_pu(s.p_load_mw, r.base), power_to_pu(s.q_load_mvar, r.base)};
  r.loadflow = solve_loadflow(r.model.feeder, s_load, r.model.rfc, r.model.theta_50, r.model.gains, lf_opt);
  r.model.feeder.y_load = r.loadflow.y_load;
  return r;
}

inline SimResult run(const ResolvedScenario& r) {
  return simulate(r.model, r.loadflow.controller_init, r.events, r.config);
}

inline SimResult run(const Scenario& s) { return run(resolve(s)); }

}  // namespace sfcsim
