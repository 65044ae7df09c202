#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "sfcsim/dopri5.hpp"
#include "sfcsim/errors.hpp"
#include "sfcsim/network.hpp"
#include "sfcsim/plant.hpp"

namespace sfcsim {

struct SimConfig {
  double t_end = 4.0;
  double rel_tol = 1e-6;
  double abs_tol = 1e-8;
  double max_step = 10e-3;
  double output_dt = 1e-3;
  double switch_tol = 1e-10;  // width of the bracket left by mode-switch bisection, s
  long max_mode_switches = 100000;

  void validate() const {
    if (!(t_end > 0.0)) throw InputError("solver: t_end must be > 0");
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw InputError("solver: tolerances must be > 0");
    if (!(max_step > 0.0)) throw InputError("solver: max_step must be > 0");
    if (!(output_dt > 0.0)) throw InputError("solver: output_dt must be > 0");
    if (!(switch_tol > 0.0) || switch_tol > 1e-6) throw InputError("solver: switch_tol must be in (0, 1e-6] s");
  }

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct FaultSpec {
  Complex z_fault{};  // p.u.
  double pos_km = 0.0;

  friend bool operator==(const FaultSpec&, const FaultSpec&) = default;
};

enum class EventKind { apply_fault, clear_fault };

struct Event {
  EventKind kind = EventKind::apply_fault;
  double time = 0.0;
  FaultSpec fault;  // ignored for clear_fault

  friend bool operator==(const Event&, const Event&) = default;
};

// Aligned time series at PoC16 plus the inverter-side quantities.
struct TraceSet {
  std::vector<double> time;
  std::vector<double> u_mag;
  std::vector<double> i_mag;
  std::vector<double> p_g;
  std::vector<double> q_g;
  std::vector<double> e_mag;
  std::vector<double> delta;
  std::vector<int> limiting;
  std::vector<double> int_v;
  std::vector<double> int_cl;

  std::size_t size() const { return time.size(); }

  void push(double t, const Evaluation& ev, const SfcState& x) {
    time.push_back(t);
    u_mag.push_back(ev.meas.u_g);
    i_mag.push_back(ev.meas.i_mag);
    p_g.push_back(ev.meas.p_g);
    q_g.push_back(ev.meas.q_g);
    e_mag.push_back(ev.out.e_mag);
    delta.push_back(ev.out.delta);
    limiting.push_back(ev.out.limiting ? 1 : 0);
    int_v.push_back(x.int_v);
    int_cl.push_back(x.int_cl);
  }

  friend bool operator==(const TraceSet&, const TraceSet&) = default;
};

struct SimStats {
  long accepted_steps = 0;
  long rejected_steps = 0;
  long mode_switches = 0;
  long rhs_evaluations = 0;
};

struct SimResult {
  TraceSet trace;
  SfcState final_state;
  bool final_limiting = false;
  SimStats stats;
};

// Bisection for a sign change of f on [t1, t2]. Returns the right end of the
// final bracket, i.e. a time at which f already has the sign of f(t2), within
// `tol` of the crossing. f(t1) == 0 returns t1.
inline double locate_mode_switch(const std::function<double(double)>& f, double t1, double t2, double tol = 1e-6) {
  const double f1 = f(t1);
  if (f1 == 0.0) return t1;
  const double f2 = f(t2);
  if (f1 * f2 > 0.0) throw NumericalError("locate_mode_switch: no sign change in bracket");
  const bool target_positive = f2 > 0.0;
  double lo = t1;
  double hi = t2;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if ((fm > 0.0) == target_positive) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

namespace detail {

inline std::string describe(double t, const SfcState& x) {
  std::ostringstream os;
  os.precision(10);
  os << "t=" << t << " s, state{int_v=" << x.int_v << ", int_a=" << x.int_a << ", int_cl=" << x.int_cl
     << ", lag_e=" << x.lag_e << ", lag_d=" << x.lag_d << ", filt_de=" << x.filt_de << ", filt_dd=" << x.filt_dd
     << "}";
  return os.str();
}

inline std::vector<double> sample_times(double t_end, double dt) {
  std::vector<double> ts;
  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    if (t >= t_end - 1e-9 * dt) break;
    ts.push_back(t);
  }
  ts.push_back(t_end);
  return ts;
}

}  // namespace detail

// Hybrid simulation of the SFC control loop against the algebraic network.
//
// Between discrete changes the controller ODE is integrated with adaptive
// Dormand-Prince steps. Timed events are hit exactly; current-limit threshold
// crossings are bisected on the dense output. Every discrete change restarts
// the integrator. Leaving current limiting clears the limiter integrator.
inline SimResult simulate(const SystemModel& model, const SfcState& init, std::vector<Event> events,
                          const SimConfig& cfg) {
  using Solver = Dopri5<SfcState::kSize>;
  using Vec = Solver::State;

  model.validate();
  cfg.validate();
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.time < b.time; });
  for (const Event& ev : events) {
    if (!(ev.time >= 0.0) || ev.time > cfg.t_end) throw InputError("event time outside [0, t_end]");
  }

  SimResult res;
  SystemModel current = model;
  auto network = std::make_unique<PreparedNetwork>(current.feeder);
  bool limiting = false;

  auto rhs = [&](double, const Vec& y) -> Vec {
    ++res.stats.rhs_evaluations;
    return evaluate(current, *network, SfcState::from_array(y), limiting).deriv.as_array();
  };
  auto over_limit = [&](const Vec& y) {
    const InverterOutput out = inverter_output(SfcState::from_array(y), current.gains);
    return std::abs(network->solve(out.phasor()).i_inv) - current.gains.i_max;
  };

  double t = 0.0;
  Vec x = init.as_array();
  if (!init.finite()) throw IntegrationFault("non-finite initial state");

  auto settle_mode = [&]() {
    limiting = over_limit(x) > 0.0;
    if (!limiting) x[2] = 0.0;
  };

  std::size_t next_event = 0;
  auto apply_events_at = [&](double te) {
    while (next_event < events.size() && events[next_event].time <= te) {
      const Event& ev = events[next_event++];
      current.feeder = ev.kind == EventKind::apply_fault
                           ? set_fault(current.feeder, ev.fault.z_fault, ev.fault.pos_km)
                           : clear_fault(current.feeder);
      network = std::make_unique<PreparedNetwork>(current.feeder);
    }
    settle_mode();
  };

  apply_events_at(0.0);

  const std::vector<double> samples = detail::sample_times(cfg.t_end, cfg.output_dt);
  std::size_t next_sample = 0;
  auto emit = [&](double ts, const Vec& y) {
    const SfcState s = SfcState::from_array(y);
    res.trace.push(ts, evaluate(current, *network, s, limiting), s);
  };

  const Solver::Tolerances tol{cfg.rel_tol, cfg.abs_tol};
  const double h_restart = std::min(1e-5, cfg.max_step);
  double h = h_restart;
  Vec k1 = rhs(t, x);

  while (t < cfg.t_end) {
    const double t_stop = next_event < events.size() ? std::min(events[next_event].time, cfg.t_end) : cfg.t_end;
    h = std::min(h, cfg.max_step);
    bool hits_stop = false;
    if (t + h >= t_stop - 1e-12 * std::max(1.0, std::abs(t_stop))) {
      h = t_stop - t;
      hits_stop = true;
    }
    if (h <= 1e-14 * std::max(1.0, std::abs(t))) {
      throw IntegrationFault("step size underflow at " + detail::describe(t, SfcState::from_array(x)));
    }

    Solver::Step step;
    try {
      step = Solver::attempt(rhs, t, x, k1, h, tol);
    } catch (const NumericalError&) {
      step.error = INFINITY;
    }
    if (!(step.error <= 1.0)) {
      ++res.stats.rejected_steps;
      h *= std::isfinite(step.error) ? std::clamp(0.9 * std::pow(step.error, -0.2), 0.2, 1.0) : 0.2;
      continue;
    }
    ++res.stats.accepted_steps;
    const double t_new = hits_stop ? t_stop : t + h;

    for (double v : step.y1) {
      if (!std::isfinite(v)) throw IntegrationFault("non-finite state at " + detail::describe(t_new, SfcState::from_array(step.y1)));
    }

    const double g_end = over_limit(step.y1);
    const bool crossed = limiting ? g_end <= 0.0 : g_end > 0.0;
    if (crossed) {
      auto g = [&](double tq) { return tq >= t_new ? g_end : over_limit(step.at(tq)); };
      const double t_switch = locate_mode_switch(g, t, t_new, cfg.switch_tol);
      const Vec x_switch = t_switch >= t_new ? step.y1 : step.at(t_switch);
      while (next_sample < samples.size() && samples[next_sample] < t_switch) {
        emit(samples[next_sample], step.at(samples[next_sample]));
        ++next_sample;
      }
      t = t_switch;
      x = x_switch;
      limiting = !limiting;
      if (!limiting) x[2] = 0.0;
      if (++res.stats.mode_switches > cfg.max_mode_switches) {
        throw IntegrationFault("current-limit mode chattering (too many switches) at " +
                               detail::describe(t, SfcState::from_array(x)));
      }
      if (hits_stop && t >= t_stop && t_stop < cfg.t_end) apply_events_at(t_stop);
      k1 = rhs(t, x);
      h = h_restart;
      continue;
    }

    while (next_sample < samples.size() && samples[next_sample] < t_new) {
      emit(samples[next_sample], step.at(samples[next_sample]));
      ++next_sample;
    }
    t = t_new;
    x = step.y1;
    k1 = step.k7;
    h = Solver::next_step(h, step.error);

    if (hits_stop && t_stop < cfg.t_end) {
      apply_events_at(t_stop);
      k1 = rhs(t, x);
      h = h_restart;
    }
  }

  // Events scheduled exactly at t_end still take effect for the last sample.
  apply_events_at(cfg.t_end);
  while (next_sample < samples.size()) {
    emit(samples[next_sample], x);
    ++next_sample;
  }
  res.final_state = SfcState::from_array(x);
  res.final_limiting = limiting;
  return res;
}

}  // namespace sfcsim
