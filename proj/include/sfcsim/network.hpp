#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "sfcsim/errors.hpp"
#include "sfcsim/perunit.hpp"

namespace sfcsim {

// Rectangular complex p.u. quantity; std::abs / std::arg give magnitude and angle.
using Phasor = std::complex<double>;

inline constexpr Complex kJ{0.0, 1.0};

// Single-end-fed feeder seen from the SFC: inverter behind X_T + X_f, an
// initial impedance at PoC16, then a uniform catenary with the train and an
// optional fault somewhere along it. All values in p.u.
struct FeederModel {
  double x_t = 0.0;
  double x_f = 0.0;
  Complex z_init{};
  Complex z_per_km{};
  double fault_pos_km = 0.0;
  double load_pos_km = 0.0;
  Complex y_load{};
  Complex y_fault{};  // zero when no fault is applied

  double x_total() const { return x_t + x_f; }
  bool has_fault() const { return y_fault != Complex{}; }

  void validate() const {
    if (!(x_total() > 0.0)) throw InputError("feeder: x_t + x_f must be > 0");
    if (!(fault_pos_km >= 0.0) || !(load_pos_km >= 0.0)) throw InputError("feeder: positions must be >= 0 km");
    if (y_load.real() < 0.0 || y_fault.real() < 0.0) throw InputError("feeder: shunt conductances must be >= 0");
    if (!std::isfinite(std::abs(y_load)) || !std::isfinite(std::abs(y_fault)) || !std::isfinite(std::abs(z_init)) ||
        !std::isfinite(std::abs(z_per_km))) {
      throw InputError("feeder: non-finite impedance or admittance");
    }
  }

  friend bool operator==(const FeederModel&, const FeederModel&) = default;
};

inline FeederModel set_fault(FeederModel feeder, Complex z_fault, double pos_km) {
  if (!(std::abs(z_fault) > 0.0)) throw InputError("fault impedance must be non-zero (bolted faults are not modelled)");
  if (!(pos_km >= 0.0)) throw InputError("fault position must be >= 0 km");
  feeder.y_fault = 1.0 / z_fault;
  feeder.fault_pos_km = pos_km;
  return feeder;
}

inline FeederModel clear_fault(FeederModel feeder) {
  feeder.y_fault = Complex{};
  return feeder;
}

struct Branch {
  int from = 0;
  int to = 0;
  Complex z{};
};

// Nodal description: node 0 is always PoC16.
struct NodalNetwork {
  Eigen::MatrixXcd y;
  std::vector<Branch> branches;
  std::vector<Complex> shunts;  // per node, excluding the Norton shunt
  int load_node = 0;
  int fault_node = -1;  // -1 when no fault applied
  Complex norton_shunt{};

  int size() const { return static_cast<int>(y.rows()); }
};

inline NodalNetwork build_admittance(const FeederModel& feeder) {
  feeder.validate();

  struct TrackPoint {
    double km;
    bool load;
    bool fault;
  };
  std::vector<TrackPoint> points{{feeder.load_pos_km, true, false}};
  if (feeder.has_fault()) {
    if (feeder.fault_pos_km == feeder.load_pos_km) {
      points.front().fault = true;
    } else {
      points.push_back({feeder.fault_pos_km, false, true});
    }
  }
  std::sort(points.begin(), points.end(), [](const TrackPoint& a, const TrackPoint& b) { return a.km < b.km; });

  NodalNetwork net;
  std::vector<int> node_of(points.size());
  int n = 1;
  int prev = 0;
  double prev_km = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const Complex z = (k == 0 ? feeder.z_init : Complex{}) + feeder.z_per_km * (points[k].km - prev_km);
    if (z == Complex{}) {
      node_of[k] = prev;
    } else {
      node_of[k] = n;
      net.branches.push_back({prev, n, z});
      prev = n++;
    }
    prev_km = points[k].km;
  }

  net.shunts.assign(static_cast<std::size_t>(n), Complex{});
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (points[k].load) {
      net.load_node = node_of[k];
      net.shunts[static_cast<std::size_t>(node_of[k])] += feeder.y_load;
    }
    if (points[k].fault) {
      net.fault_node = node_of[k];
      net.shunts[static_cast<std::size_t>(node_of[k])] += feeder.y_fault;
    }
  }

  net.norton_shunt = 1.0 / (kJ * feeder.x_total());
  net.y = Eigen::MatrixXcd::Zero(n, n);
  net.y(0, 0) += net.norton_shunt;
  for (int i = 0; i < n; ++i) net.y(i, i) += net.shunts[static_cast<std::size_t>(i)];
  for (const Branch& b : net.branches) {
    const Complex yb = 1.0 / b.z;
    net.y(b.from, b.from) += yb;
    net.y(b.to, b.to) += yb;
    net.y(b.from, b.to) -= yb;
    net.y(b.to, b.from) -= yb;
  }
  return net;
}

struct NetworkSolution {
  Phasor u_poc{};
  Phasor i_inv{};
  Phasor u_load{};
  double p_g = 0.0;
  double q_g = 0.0;
  Eigen::VectorXcd node_voltages;
};

// Factorised network for repeated solves with a changing inverter phasor.
class PreparedNetwork {
 public:
  explicit PreparedNetwork(const FeederModel& feeder) : feeder_(feeder), net_(build_admittance(feeder)) {
    Eigen::FullPivLU<Eigen::MatrixXcd> check(net_.y);
    check.setThreshold(1e-14);
    if (!check.isInvertible()) {
      throw SingularNetwork("nodal admittance matrix is singular (no path to ground for the Norton source)");
    }
    lu_.compute(net_.y);
    rhs_ = Eigen::VectorXcd::Zero(net_.size());
  }

  const FeederModel& feeder() const { return feeder_; }
  const NodalNetwork& nodal() const { return net_; }

  NetworkSolution solve(Phasor e_inv) const {
    NetworkSolution sol;
    Eigen::VectorXcd rhs = rhs_;
    rhs(0) = e_inv * net_.norton_shunt;
    sol.node_voltages = lu_.solve(rhs);
    sol.u_poc = sol.node_voltages(0);
    sol.u_load = sol.node_voltages(net_.load_node);
    sol.i_inv = (e_inv - sol.u_poc) * net_.norton_shunt;
    const Complex s = sol.u_poc * std::conj(sol.i_inv);
    sol.p_g = s.real();
    sol.q_g = s.imag();
    return sol;
  }

 private:
  FeederModel feeder_;
  NodalNetwork net_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
  Eigen::VectorXcd rhs_;
};

inline NetworkSolution solve(const FeederModel& feeder, Phasor e_inv) { return PreparedNetwork(feeder).solve(e_inv); }

}  // namespace sfcsim
