#pragma once

// Exact stepping of all units over one coordination interval.
//
// Inside an interval every unit obeys the thermal model with its local
// proportional loop closed continuously. The delivered loads are an affine
// function of the desired loads, P = L P~ + l0. The shape of that map (the
// "law") changes only when a unit's desired load clamps or the deficit
// switches on or off; the engine locates those switches inside an interval.
//
//   free          P = P~                                   (no deficit)
//   coupled       P_i = P~_i - v_i (sum_{j in S} P~_j - P_max), 0 outside S
//   held share    P_i = P~_i - s_i                         (s_i from the round)
//   held load     P_i = const                              (sampled feedback)
//
// Outdoor temperature is linear across the interval. The resulting linear
// system is augmented with its inputs and integrated with one matrix
// exponential, which is cached while the law and step size are unchanged.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "fairheat/thermal.hpp"

namespace fairheat {

// Delivered-load law for one interval: P = L * P~ + offset.
struct LoadLaw {
  std::vector<bool> feedback;  // unit's desired load is unclamped
  Eigen::MatrixXd L;           // N x N
  Eigen::VectorXd offset;      // N, kW

  bool same_shape(const LoadLaw& o) const {
    return feedback == o.feedback && L.rows() == o.L.rows() && L == o.L;
  }
};

class NetworkStepper {
 public:
  explicit NetworkStepper(std::vector<UnitParams> units) : units_(std::move(units)) {}

  std::size_t size() const { return units_.size(); }
  const std::vector<UnitParams>& units() const { return units_; }

  // Step length whose propagator is kept between calls (the coordination
  // interval). Other lengths, used to land on regime switches, are computed
  // on demand.
  void set_interval(double dt) {
    interval_ = dt;
    cached_.reset();
  }

  // Advance `states` by dt seconds with T_ext(tau) = T_ext_start + slope * tau
  // (slope in degC/s).
  void advance(std::span<UnitState> states, const LoadLaw& law, double T_ext_start,
               double slope, double dt) {
    const Eigen::MatrixXd& phi = propagator_for(law, dt);
    const std::size_t n = units_.size();
    const Eigen::Index nx = static_cast<Eigen::Index>(2 * n);
    Eigen::VectorXd z(nx + static_cast<Eigen::Index>(n) + 4);
    for (std::size_t i = 0; i < n; ++i) {
      z(2 * i) = states[i].T_in;
      z(2 * i + 1) = states[i].T_hs;
    }
    z.segment(nx, static_cast<Eigen::Index>(n)) = law.offset;
    const Eigen::Index c = nx + static_cast<Eigen::Index>(n);
    z(c) = 1.0;
    z(c + 1) = T_ext_start;
    z(c + 2) = 0.0;  // slope * elapsed time
    z(c + 3) = slope;
    const Eigen::VectorXd x = phi.topRows(nx) * z;
    for (std::size_t i = 0; i < n; ++i) {
      states[i].T_in = x(2 * i);
      states[i].T_hs = x(2 * i + 1);
    }
  }

 private:
  struct Cache {
    LoadLaw law;
    Eigen::MatrixXd phi;
  };

  const Eigen::MatrixXd& propagator_for(const LoadLaw& law, double dt) {
    if (dt != interval_) {
      scratch_ = propagator(law, dt);
      return scratch_;
    }
    if (!cached_ || !cached_->law.same_shape(law)) cached_ = Cache{law, propagator(law, dt)};
    return cached_->phi;
  }

  // Augmented state z = [x (2N); offset (N); 1; T0; slope*tau; slope].
  Eigen::MatrixXd propagator(const LoadLaw& law, double dt) const {
    const std::size_t n = units_.size();
    const Eigen::Index N = static_cast<Eigen::Index>(n);
    const Eigen::Index nx = 2 * N;

    // Desired loads P~ = K x + kT * T_ext + kc.
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(N, nx);
    Eigen::VectorXd kT = Eigen::VectorXd::Zero(N);
    Eigen::VectorXd kc = Eigen::VectorXd::Zero(N);
    // Plant: dx = A x + aT * T_ext + inj * P.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nx, nx);
    Eigen::VectorXd aT = Eigen::VectorXd::Zero(nx);
    Eigen::MatrixXd inj = Eigen::MatrixXd::Zero(nx, N);
    for (Eigen::Index i = 0; i < N; ++i) {
      const UnitParams& p = units_[static_cast<std::size_t>(i)];
      const double g_e = 1.0 / p.R_ext;
      const double g_h = 1.0 / p.R_hs;
      const Eigen::Index in = 2 * i;
      const Eigen::Index hs = 2 * i + 1;
      A(in, in) = -(g_h + g_e) / p.C_in;
      A(in, hs) = g_h / p.C_in;
      A(hs, in) = g_h / p.C_hs;
      A(hs, hs) = -g_h / p.C_hs;
      aT(in) = g_e / p.C_in;
      inj(hs, i) = p.eta / p.C_hs;
      if (law.feedback[static_cast<std::size_t>(i)]) {
        K(i, hs) = -p.k_p;
        kT(i) = p.k_p * p.a1;
        kc(i) = p.k_p * p.a0;
      }
    }
    const Eigen::MatrixXd injL = inj * law.L;
    const Eigen::VectorXd cT = aT + injL * kT;

    const Eigen::Index dim = nx + N + 4;
    const Eigen::Index c = nx + N;
    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(dim, dim);
    Z.topLeftCorner(nx, nx) = A + injL * K;
    Z.block(0, nx, nx, N) = inj;
    Z.block(0, c, nx, 1) = injL * kc;
    Z.block(0, c + 1, nx, 1) = cT;
    Z.block(0, c + 2, nx, 1) = cT;
    Z(c + 2, c + 3) = 1.0;
    return (Z * dt).exp();
  }

  std::vector<UnitParams> units_;
  double interval_ = 0.0;
  std::optional<Cache> cached_;
  Eigen::MatrixXd scratch_;
};

}  // namespace fairheat
