#pragma once

// Cascaded three-stage flight controller (position -> attitude -> rate)
// with anti-windup integrator, per-rotor ground-effect compensation and
// dispensed-mass estimation feeding the thrust feedforward.

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <optional>

#include "pvcoat/dynamics.hpp"
#include "pvcoat/errors.hpp"
#include "pvcoat/ground_effect.hpp"
#include "pvcoat/surface.hpp"

namespace pvcoat {

struct ControllerGains {
  // Position loop acts on error in m; output is desired acceleration.
  Eigen::Vector3d pos_p{4.0, 4.0, 4.0};    // s^-2
  Eigen::Vector3d pos_i{2.0, 2.0, 2.0};    // s^-3
  Eigen::Vector3d pos_d{3.6, 3.6, 3.6};    // s^-1, on velocity error
  Eigen::Vector3d att_p{10.0, 10.0, 6.0};  // s^-1, on rotation error vector
  Eigen::Vector3d rate_p{0.44, 0.44, 0.36}; // N m s rad^-1
  double integrator_limit = 1.0;            // m s, per-axis anti-windup clamp

  void validate() const {
    if (pos_p.minCoeff() < 0.0 || pos_i.minCoeff() < 0.0 ||
        pos_d.minCoeff() < 0.0 || att_p.minCoeff() < 0.0 ||
        rate_p.minCoeff() < 0.0) {
      throw ConfigError("controller gains must be non-negative");
    }
    if (pos_i.maxCoeff() > 0.0 && integrator_limit <= 0.0) {
      throw ConfigError("integrator limit must be positive when I gain is set");
    }
  }
};

struct TrajectorySample {
  double time = 0.0;                        // s
  Eigen::Vector3d position{0.0, 0.0, 0.0};  // m, world
  Eigen::Vector3d velocity{0.0, 0.0, 0.0};  // m/s, world
  double yaw = 0.0;                         // rad
};

// Dispensed-liquid bookkeeping: flow rate integrated while the valve is
// open, converted to mass via density and subtracted from the initial mass.
struct MassEstimator {
  double mass_initial = 1.56;       // kg, take-off mass
  double dispensed_volume = 0.0;    // m^3
  double flow_rate = 2.5e-6;        // m^3/s while valve open
  double liquid_density = 1000.0;   // kg/m^3
  bool valve_open = false;
  double volume_capacity = 1.5e-4;  // m^3 (150 ml)

  double current_mass() const {
    return mass_initial - dispensed_volume * liquid_density;
  }

  void validate() const {
    if (mass_initial <= 0.0 || flow_rate < 0.0 || liquid_density <= 0.0 ||
        volume_capacity < 0.0) {
      throw ConfigError("mass estimator parameters must be positive");
    }
    if (mass_initial - volume_capacity * liquid_density <= 0.0) {
      throw ConfigError("tank capacity exceeds vehicle mass");
    }
  }
};

inline MassEstimator mass_update(MassEstimator est, bool valve_open, double dt) {
  if (!(dt > 0.0)) throw ConfigError("mass_update dt must be positive");
  est.valve_open = valve_open;
  if (valve_open) {
    est.dispensed_volume =
        std::min(est.dispensed_volume + est.flow_rate * dt, est.volume_capacity);
  }
  return est;
}

struct PositionControlResult {
  Eigen::Vector3d thrust_vector;  // N, world
  Eigen::Vector3d integrator;     // m s, updated state
};

// PID on position/velocity error plus gravity feedforward, scaled by the
// estimated mass: f = m_est (Kp e + Ki \int e + Kd e_v + g z_hat).
inline PositionControlResult position_control(
    const RigidBodyState& state, const TrajectorySample& sample,
    const ControllerGains& gains, double mass_est,
    const Eigen::Vector3d& integrator_in, double dt, bool integrator_enabled,
    double gravity = 9.81) {
  if (mass_est <= 0.0) throw ConfigError("mass estimate must be positive");
  const Eigen::Vector3d e_pos = sample.position - state.position;
  const Eigen::Vector3d e_vel = sample.velocity - state.velocity;

  Eigen::Vector3d integ = Eigen::Vector3d::Zero();
  if (integrator_enabled) {
    integ = integrator_in + e_pos * dt;
    const double lim = gains.integrator_limit;
    integ = integ.cwiseMax(-lim).cwiseMin(lim);
  }

  const Eigen::Vector3d a_des = gains.pos_p.cwiseProduct(e_pos) +
                                gains.pos_i.cwiseProduct(integ) +
                                gains.pos_d.cwiseProduct(e_vel) +
                                Eigen::Vector3d(0.0, 0.0, gravity);
  return {mass_est * a_des, integ};
}

struct AttitudeSetpoint {
  Eigen::Quaterniond attitude;  // body -> world
  double thrust = 0.0;          // N, scalar along body z
};

// Tilt decomposition: desired body z aligns with the thrust vector, heading
// follows the yaw setpoint.
inline AttitudeSetpoint attitude_from_thrust(const Eigen::Vector3d& thrust_vec,
                                             double yaw_sp) {
  const double norm = thrust_vec.norm();
  if (norm < 1e-6) throw DegenerateThrust("thrust vector norm below 1e-6 N");
  const Eigen::Vector3d z_b = thrust_vec / norm;
  Eigen::Vector3d x_c(std::cos(yaw_sp), std::sin(yaw_sp), 0.0);
  Eigen::Vector3d y_b = z_b.cross(x_c);
  if (y_b.norm() < 1e-6) {
    // thrust nearly parallel to the heading vector; fall back to world y
    x_c = Eigen::Vector3d(-std::sin(yaw_sp), std::cos(yaw_sp), 0.0);
    y_b = z_b.cross(x_c);
  }
  y_b.normalize();
  const Eigen::Vector3d x_b = y_b.cross(z_b);
  Eigen::Matrix3d r;
  r.col(0) = x_b;
  r.col(1) = y_b;
  r.col(2) = z_b;
  return {Eigen::Quaterniond(r), norm};
}

// Rate setpoint proportional to the log-map of the attitude error, expressed
// in the body frame. AngleAxis keeps the angle in [0, pi], so antipodal
// errors stay bounded.
inline Eigen::Vector3d attitude_control(const RigidBodyState& state,
                                        const Eigen::Quaterniond& desired,
                                        const ControllerGains& gains) {
  const Eigen::Quaterniond err =
      state.attitude.normalized().conjugate() * desired.normalized();
  const Eigen::AngleAxisd aa(err);
  const Eigen::Vector3d rotvec = aa.angle() * aa.axis();
  return gains.att_p.cwiseProduct(rotvec);
}

inline Eigen::Vector3d rate_control(const RigidBodyState& state,
                                    const Eigen::Vector3d& rate_sp,
                                    const ControllerGains& gains) {
  return gains.rate_p.cwiseProduct(rate_sp - state.body_rates);
}

// Scales each commanded rotor force by the clipped compensation ratio for
// the surface patch under it. No-op (bit-identical) where alpha == 0.
inline std::array<double, 4> compensate_per_rotor(
    const std::array<double, 4>& forces,
    const std::array<Eigen::Vector3d, 4>& rotor_positions_world,
    const SurfaceModel& surface, const GroundEffectModel& ge,
    const std::array<double, 4>& h_des) {
  const auto q = rotor_heights(rotor_positions_world, ge.rotor_radius, surface);
  std::array<double, 4> out;
  for (int i = 0; i < 4; ++i) {
    out[i] = forces[i] *
             compensated_force_ratio(q.overlap[i], q.height[i], ge, h_des[i]);
  }
  return out;
}

inline std::array<double, 4> compensate_per_rotor(
    const std::array<double, 4>& forces,
    const std::array<Eigen::Vector3d, 4>& rotor_positions_world,
    const SurfaceModel& surface, const GroundEffectModel& ge, double h_des) {
  return compensate_per_rotor(forces, rotor_positions_world, surface, ge,
                              std::array<double, 4>{h_des, h_des, h_des, h_des});
}

struct ControlToggles {
  bool ge_comp = true;
  bool mass_comp = true;
  bool integrator = false;
  double h_des = 0.27;  // m, standoff used as the compensation clip height
};

// Stateful cascade: one instance per simulation, advanced by update().
class CascadedController {
 public:
  struct Output {
    RotorSpeeds speeds;
    std::array<double, 4> rotor_forces{};  // N, commanded after compensation
    double thrust_cmd = 0.0;               // N, pre-allocation
    Eigen::Vector3d torque_cmd{0.0, 0.0, 0.0};
    double mass_estimate = 0.0;  // kg, as used in the thrust feedforward
  };

  CascadedController(ControllerGains gains, VehicleParams vehicle,
                     GroundEffectModel ge, MassEstimator mass_est,
                     ControlToggles toggles)
      : gains_(std::move(gains)),
        vehicle_(std::move(vehicle)),
        ge_(ge),
        mass_est_(mass_est),
        toggles_(toggles) {
    gains_.validate();
    vehicle_.validate();
    ge_.validate();
    mass_est_.validate();
  }

  Output update(const RigidBodyState& est, const TrajectorySample& sample,
                const std::optional<SurfaceModel>& surface, bool valve_open,
                double dt) {
    mass_est_ = mass_update(mass_est_, valve_open, dt);
    const double mass_for_thrust = toggles_.mass_comp
                                       ? mass_est_.current_mass()
                                       : mass_est_.mass_initial;

    auto pos = position_control(est, sample, gains_, mass_for_thrust,
                                integrator_, dt, toggles_.integrator,
                                vehicle_.gravity);
    integrator_ = pos.integrator;

    const auto att_sp = attitude_from_thrust(pos.thrust_vector, sample.yaw);
    const auto rate_sp = attitude_control(est, att_sp.attitude, gains_);
    const auto torque = rate_control(est, rate_sp, gains_);

    Output out;
    out.thrust_cmd = att_sp.thrust;
    out.torque_cmd = torque;
    out.mass_estimate = mass_for_thrust;

    const auto u =
        wrench_to_squared_speeds(WrenchCommand{att_sp.thrust, torque}, vehicle_);
    for (int i = 0; i < 4; ++i) {
      out.rotor_forces[i] = vehicle_.k_f * std::max(u[i], 0.0);
    }

    if (toggles_.ge_comp && surface.has_value()) {
      const auto offsets = vehicle_.rotor_offsets();
      const Eigen::Matrix3d r = est.rotation();
      std::array<Eigen::Vector3d, 4> rotor_pos;
      for (int i = 0; i < 4; ++i) rotor_pos[i] = est.position + r * offsets[i];
      out.rotor_forces = compensate_per_rotor(out.rotor_forces, rotor_pos,
                                              *surface, ge_, toggles_.h_des);
    }

    for (int i = 0; i < 4; ++i) {
      out.speeds.omega[i] =
          std::min(std::sqrt(out.rotor_forces[i] / vehicle_.k_f),
                   vehicle_.max_rotor_speed);
    }
    return out;
  }

  const MassEstimator& mass_estimator() const { return mass_est_; }
  const Eigen::Vector3d& integrator() const { return integrator_; }
  const ControlToggles& toggles() const { return toggles_; }

 private:
  ControllerGains gains_;
  VehicleParams vehicle_;
  GroundEffectModel ge_;
  MassEstimator mass_est_;
  ControlToggles toggles_;
  Eigen::Vector3d integrator_{0.0, 0.0, 0.0};
};

}  // namespace pvcoat
