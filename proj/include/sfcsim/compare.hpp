#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sfcsim/errors.hpp"
#include "sfcsim/trace_io.hpp"

namespace sfcsim {

struct AlignedPair {
  std::vector<double> time;  // simulation time axis
  std::vector<double> sim_u, sim_i;
  std::vector<double> meas_u, meas_i;
  double offset = 0.0;  // measured(t + offset) is compared against sim(t)
  double step = 0.0;
};

struct WindowMetrics {
  double t_start = 0.0;
  double t_end = 0.0;
  std::size_t samples = 0;
  double rmse_u = 0.0, rmse_i = 0.0;
  double max_err_u = 0.0, max_err_i = 0.0;
};

struct ComparisonReport {
  double rmse_u = 0.0, rmse_i = 0.0;
  double max_err_u = 0.0, max_err_i = 0.0;
  WindowMetrics pre_fault, during_fault, post_fault;
  double offset = 0.0;
  std::size_t samples = 0;
};

namespace compare_detail {

inline double interp(const std::vector<double>& t, const std::vector<double>& y, double tq) {
  if (tq <= t.front()) return y.front();
  if (tq >= t.back()) return y.back();
  const auto it = std::upper_bound(t.begin(), t.end(), tq);
  const std::size_t k = static_cast<std::size_t>(it - t.begin());
  const double w = (tq - t[k - 1]) / (t[k] - t[k - 1]);
  return y[k - 1] + w * (y[k] - y[k - 1]);
}

inline double median_step(const std::vector<double>& t) {
  std::vector<double> d;
  for (std::size_t k = 1; k < t.size(); ++k) d.push_back(t[k] - t[k - 1]);
  std::nth_element(d.begin(), d.begin() + static_cast<long>(d.size() / 2), d.end());
  return d[d.size() / 2];
}

inline std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> g;
  const long n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long k = 0; k <= n; ++k) g.push_back(lo + static_cast<double>(k) * step);
  return g;
}

inline std::optional<AlignedPair> align_at(const RmsSeries& sim, const RmsSeries& meas, double offset, double step) {
  const double lo = std::max(sim.time.front(), meas.time.front() - offset);
  const double hi = std::min(sim.time.back(), meas.time.back() - offset);
  if (!(hi >= lo)) return std::nullopt;
  AlignedPair a;
  a.offset = offset;
  a.step = step;
  a.time = grid(lo, hi, step);
  for (double t : a.time) {
    a.sim_u.push_back(interp(sim.time, sim.u, t));
    a.sim_i.push_back(interp(sim.time, sim.i, t));
    a.meas_u.push_back(interp(meas.time, meas.u, t + offset));
    a.meas_i.push_back(interp(meas.time, meas.i, t + offset));
  }
  return a;
}

inline double rmse(const std::vector<double>& a, const std::vector<double>& b, std::size_t from, std::size_t to) {
  if (to <= from) return 0.0;
  double s = 0.0;
  for (std::size_t k = from; k < to; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s / static_cast<double>(to - from));
}

inline double max_abs(const std::vector<double>& a, const std::vector<double>& b, std::size_t from, std::size_t to) {
  double m = 0.0;
  for (std::size_t k = from; k < to; ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace compare_detail

// Interpolates both series onto a common grid (the finer of the two median
// sampling intervals) and picks the time offset within +-max_offset that
// minimises the voltage RMSE. Ties go to the smaller |offset|.
inline AlignedPair resample_align(const RmsSeries& sim, const RmsSeries& meas, double max_offset = 0.0) {
  using namespace compare_detail;
  if (sim.size() < 2 || meas.size() < 2) throw InputError("compare: each series needs at least two samples");
  if (!(max_offset >= 0.0)) throw InputError("compare: max_offset must be >= 0");
  const double step = std::min(median_step(sim.time), median_step(meas.time));
  const long kmax = static_cast<long>(std::floor(max_offset / step + 1e-9));

  std::optional<AlignedPair> best;
  double best_rmse = INFINITY;
  for (long m = 0; m <= kmax; ++m) {
    for (long sign : {1L, -1L}) {
      if (m == 0 && sign < 0) continue;
      auto cand = align_at(sim, meas, static_cast<double>(sign * m) * step, step);
      if (!cand) continue;
      const double r = rmse(cand->sim_u, cand->meas_u, 0, cand->time.size());
      if (r < best_rmse) {
        best_rmse = r;
        best = std::move(cand);
      }
    }
  }
  if (!best) throw InputError("compare: simulated and measured series do not overlap in time");
  return *best;
}

// First and last sample where the simulated voltage is below 80 % of its
// initial value; used when the caller does not give the fault window.
inline std::optional<std::pair<double, double>> detect_fault_window(const RmsSeries& sim) {
  const double threshold = 0.8 * sim.u.front();
  std::optional<double> start;
  double end = 0.0;
  for (std::size_t k = 0; k < sim.size(); ++k) {
    if (sim.u[k] < threshold) {
      if (!start) start = sim.time[k];
      end = k + 1 < sim.size() ? sim.time[k + 1] : sim.time[k];
    }
  }
  if (!start) return std::nullopt;
  return std::make_pair(*start, end);
}

inline ComparisonReport compare_series(const RmsSeries& sim, const RmsSeries& meas, double max_offset = 0.0,
                                       std::optional<std::pair<double, double>> fault_window = std::nullopt) {
  using namespace compare_detail;
  const AlignedPair a = resample_align(sim, meas, max_offset);
  if (!fault_window) fault_window = detect_fault_window(sim);

  const std::size_t n = a.time.size();
  std::size_t i_start = n;
  std::size_t i_end = n;
  if (fault_window) {
    i_start = static_cast<std::size_t>(std::lower_bound(a.time.begin(), a.time.end(), fault_window->first) - a.time.begin());
    i_end = static_cast<std::size_t>(std::lower_bound(a.time.begin(), a.time.end(), fault_window->second) - a.time.begin());
    i_end = std::max(i_end, i_start);
  }

  auto window = [&](std::size_t from, std::size_t to) {
    WindowMetrics w;
    w.samples = to - from;
    if (w.samples > 0) {
      w.t_start = a.time[from];
      w.t_end = a.time[to - 1];
    }
    w.rmse_u = rmse(a.sim_u, a.meas_u, from, to);
    w.rmse_i = rmse(a.sim_i, a.meas_i, from, to);
    w.max_err_u = max_abs(a.sim_u, a.meas_u, from, to);
    w.max_err_i = max_abs(a.sim_i, a.meas_i, from, to);
    return w;
  };

  ComparisonReport r;
  r.offset = a.offset;
  r.samples = n;
  r.rmse_u = rmse(a.sim_u, a.meas_u, 0, n);
  r.rmse_i = rmse(a.sim_i, a.meas_i, 0, n);
  r.max_err_u = max_abs(a.sim_u, a.meas_u, 0, n);
  r.max_err_i = max_abs(a.sim_i, a.meas_i, 0, n);
  r.pre_fault = window(0, i_start);
  r.during_fault = window(i_start, i_end);
  r.post_fault = window(i_end, n);
  return r;
}

// Flat key/value document mirroring ComparisonReport.
inline nlohmann::json to_json(const ComparisonReport& r) {
  nlohmann::json j;
  j["rmse_u"] = r.rmse_u;
  j["rmse_i"] = r.rmse_i;
  j["max_err_u"] = r.max_err_u;
  j["max_err_i"] = r.max_err_i;
  j["offset_s"] = r.offset;
  j["samples"] = r.samples;
  auto put = [&](const std::string& prefix, const WindowMetrics& w) {
    j[prefix + "_t_start"] = w.t_start;
    j[prefix + "_t_end"] = w.t_end;
    j[prefix + "_samples"] = w.samples;
    j[prefix + "_rmse_u"] = w.rmse_u;
    j[prefix + "_rmse_i"] = w.rmse_i;
    j[prefix + "_max_err_u"] = w.max_err_u;
    j[prefix + "_max_err_i"] = w.max_err_i;
  };
  put("pre_fault", r.pre_fault);
  put("during_fault", r.during_fault);
  put("post_fault", r.post_fault);
  return j;
}

inline void print_table(std::ostream& os, const ComparisonReport& r) {
  const auto flags = os.flags();
  os << "alignment offset: " << r.offset << " s over " << r.samples << " samples\n";
  os << std::left << std::setw(14) << "window" << std::right << std::setw(10) << "samples" << std::setw(14) << "rmse_u"
     << std::setw(14) << "rmse_i" << std::setw(14) << "max_err_u" << std::setw(14) << "max_err_i" << '\n';
  auto row = [&](const char* name, std::size_t n, double ru, double ri, double mu, double mi) {
    os << std::left << std::setw(14) << name << std::right << std::setw(10) << n << std::scientific
       << std::setprecision(4) << std::setw(14) << ru << std::setw(14) << ri << std::setw(14) << mu << std::setw(14)
       << mi << '\n';
    os.flags(flags);
  };
  row("pre-fault", r.pre_fault.samples, r.pre_fault.rmse_u, r.pre_fault.rmse_i, r.pre_fault.max_err_u,
      r.pre_fault.max_err_i);
  row("during-fault", r.during_fault.samples, r.during_fault.rmse_u, r.during_fault.rmse_i, r.during_fault.max_err_u,
      r.during_fault.max_err_i);
  row("post-fault", r.post_fault.samples, r.post_fault.rmse_u, r.post_fault.rmse_i, r.post_fault.max_err_u,
      r.post_fault.max_err_i);
  row("total", r.samples, r.rmse_u, r.rmse_i, r.max_err_u, r.max_err_i);
}

}  // namespace sfcsim
