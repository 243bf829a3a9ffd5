#pragma once

// Rigid-body quadrotor plant: rotor force/torque generation, motor
// allocation and its inverse, equations of motion and RK4 integration.
//
// Rotor layout is the "x" configuration: rotor i sits at body position
//   r0 = l/sqrt(2) * (+1, -1, 0)    r1 = l/sqrt(2) * (-1, -1, 0)
//   r2 = l/sqrt(2) * (-1, +1, 0)    r3 = l/sqrt(2) * (+1, +1, 0)
// with rotors 0,2 producing +z reaction torque and 1,3 producing -z.

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <string>

#include "pvcoat/errors.hpp"

namespace pvcoat {

struct VehicleParams {
  double mass_empty = 1.41;           // kg, airframe incl. empty dispersion system
  double liquid_mass_initial = 0.15;  // kg (150 ml at ~1.0 g/cm^3)
  Eigen::Matrix3d inertia =
      Eigen::Vector3d(0.011, 0.011, 0.018).asDiagonal();  // kg m^2
  double arm_length = 0.17;        // m, center to rotor (34 cm motor diagonal)
  double k_f = 1.23e-6;            // N s^2 rad^-2, thrust = k_f w^2
  double k_m = 2.0e-8;             // N m s^2 rad^-2, drag torque = k_m w^2
  double rotor_radius = 0.10;      // m
  double gravity = 9.81;           // m s^-2
  double max_rotor_speed = 2400.0; // rad s^-1; hover sits near 54% max thrust
  double motor_time_constant = 0.0;  // s, first-order rotor lag; 0 = instant

  double takeoff_mass() const { return mass_empty + liquid_mass_initial; }
  double hover_thrust() const { return takeoff_mass() * gravity; }
  double max_thrust() const {
    return 4.0 * k_f * max_rotor_speed * max_rotor_speed;
  }

  std::array<Eigen::Vector3d, 4> rotor_offsets() const {
    const double a = arm_length / std::sqrt(2.0);
    return {Eigen::Vector3d(a, -a, 0.0), Eigen::Vector3d(-a, -a, 0.0),
            Eigen::Vector3d(-a, a, 0.0), Eigen::Vector3d(a, a, 0.0)};
  }

  void validate() const {
    if (mass_empty <= 0.0 || liquid_mass_initial < 0.0 || arm_length <= 0.0 ||
        k_f <= 0.0 || k_m <= 0.0 || rotor_radius <= 0.0 || gravity <= 0.0 ||
        max_rotor_speed <= 0.0 || motor_time_constant < 0.0) {
      throw ConfigError("vehicle parameters must be positive");
    }
    if (!inertia.isApprox(inertia.transpose(), 1e-12)) {
      throw ConfigError("inertia matrix must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(inertia);
    if (es.eigenvalues().minCoeff() <= 0.0) {
      throw ConfigError("inertia matrix must be positive-definite");
    }
    const double hover_omega = std::sqrt(hover_thrust() / (4.0 * k_f));
    if (hover_omega > max_rotor_speed) {
      throw ConfigError("hover rotor speed exceeds max_rotor_speed");
    }
  }
};

struct RigidBodyState {
  Eigen::Vector3d position{0.0, 0.0, 0.0};   // m, world
  Eigen::Vector3d velocity{0.0, 0.0, 0.0};   // m/s, world
  Eigen::Quaterniond attitude{1.0, 0.0, 0.0, 0.0};  // body -> world
  Eigen::Vector3d body_rates{0.0, 0.0, 0.0};  // rad/s, body

  Eigen::Matrix3d rotation() const { return attitude.toRotationMatrix(); }

  bool finite() const {
    return position.allFinite() && velocity.allFinite() &&
           attitude.coeffs().allFinite() && body_rates.allFinite();
  }
};

struct RotorSpeeds {
  std::array<double, 4> omega{0.0, 0.0, 0.0, 0.0};  // rad/s
};

struct WrenchCommand {
  double thrust = 0.0;                  // N, along body z
  Eigen::Vector3d torque{0.0, 0.0, 0.0};  // N m, body frame
};

inline WrenchCommand rotor_speeds_to_wrench(const RotorSpeeds& speeds,
                                            const VehicleParams& p) {
  std::array<double, 4> u;  // squared speeds
  for (int i = 0; i < 4; ++i) u[i] = speeds.omega[i] * speeds.omega[i];
  const double lever = p.k_f * p.arm_length / std::sqrt(2.0);
  WrenchCommand w;
  w.thrust = p.k_f * (u[0] + u[1] + u[2] + u[3]);
  w.torque.x() = lever * (-u[0] - u[1] + u[2] + u[3]);
  w.torque.y() = lever * (-u[0] + u[1] + u[2] - u[3]);
  w.torque.z() = p.k_m * (u[0] - u[1] + u[2] - u[3]);
  return w;
}

// Analytic inverse of rotor_speeds_to_wrench on squared speeds. Negative
// squares within -1e-9 are numerical noise and clamp to zero.
inline std::array<double, 4> wrench_to_squared_speeds(const WrenchCommand& cmd,
                                                      const VehicleParams& p) {
  const double lever = p.k_f * p.arm_length / std::sqrt(2.0);
  const double s = cmd.thrust / p.k_f;
  const double a = cmd.torque.x() / lever;
  const double b = cmd.torque.y() / lever;
  const double c = cmd.torque.z() / p.k_m;
  return {0.25 * (s - a - b + c), 0.25 * (s - a + b - c),
          0.25 * (s + a + b + c), 0.25 * (s + a - b - c)};
}

inline RotorSpeeds wrench_to_rotor_speeds(const WrenchCommand& cmd,
                                          const VehicleParams& p) {
  auto u = wrench_to_squared_speeds(cmd, p);
  RotorSpeeds out;
  for (int i = 0; i < 4; ++i) {
    if (u[i] < -1e-9) {
      throw UnrealizableWrench(
          "wrench demands negative squared speed on rotor " + std::to_string(i),
          /*saturated=*/false);
    }
    const double w = std::sqrt(std::max(u[i], 0.0));
    if (w > p.max_rotor_speed) {
      throw UnrealizableWrench(
          "rotor " + std::to_string(i) + " saturates: " + std::to_string(w) +
              " > " + std::to_string(p.max_rotor_speed) + " rad/s",
          /*saturated=*/true);
    }
    out.omega[i] = w;
  }
  return out;
}

inline Eigen::Vector3d translational_accel(const RigidBodyState& state,
                                           double thrust_actual,
                                           double mass_current,
                                           double gravity = 9.81) {
  const Eigen::Quaterniond q = state.attitude.normalized();
  return Eigen::Vector3d(0.0, 0.0, -gravity) +
         q * Eigen::Vector3d(0.0, 0.0, thrust_actual / mass_current);
}

inline Eigen::Vector3d rotational_accel(const RigidBodyState& state,
                                        const Eigen::Vector3d& torque,
                                        const VehicleParams& p) {
  const Eigen::Vector3d coriolis =
      state.body_rates.cross(p.inertia * state.body_rates);
  return p.inertia.ldlt().solve(torque - coriolis);
}

// Per-rotor actual/commanded thrust factors supplied by the ground-effect
// module; identity when no surface is near.
struct RotorThrustMultipliers {
  std::array<double, 4> factor{1.0, 1.0, 1.0, 1.0};
};

namespace detail {

struct StateDeriv {
  Eigen::Vector3d dp, dv, dw;
  Eigen::Vector4d dq;  // quaternion coeffs in Eigen (x,y,z,w) storage order
};

inline StateDeriv plant_deriv(const RigidBodyState& s, double thrust,
                              const Eigen::Vector3d& torque, double mass,
                              double gravity,
                              const Eigen::Vector3d& external_force,
                              const VehicleParams& p) {
  StateDeriv d;
  d.dp = s.velocity;
  d.dv = translational_accel(s, thrust, mass, gravity) + external_force / mass;
  const Eigen::Quaterniond omega_q(0.0, s.body_rates.x(), s.body_rates.y(),
                                   s.body_rates.z());
  d.dq = 0.5 * (s.attitude * omega_q).coeffs();
  d.dw = rotational_accel(s, torque, p);
  return d;
}

inline RigidBodyState advance(const RigidBodyState& s, const StateDeriv& d,
                              double h) {
  RigidBodyState out = s;
  out.position += h * d.dp;
  out.velocity += h * d.dv;
  out.attitude.coeffs() += h * d.dq;
  out.body_rates += h * d.dw;
  return out;
}

}  // namespace detail

// One RK4 plant step. Rotor thrusts are k_f w^2 scaled per rotor by
// `effects` (ground-effect amplification); x/y torques follow from the
// scaled per-rotor forces, yaw drag torque from the commanded speeds.
// `external_force` is a world-frame disturbance (wind), N.
inline RigidBodyState step(
    const RigidBodyState& state, const RotorSpeeds& speeds,
    const VehicleParams& p, const RotorThrustMultipliers& effects,
    double mass_current, double dt,
    const Eigen::Vector3d& external_force = Eigen::Vector3d::Zero()) {
  if (!(dt > 0.0) || dt > 0.01) {
    throw ConfigError("plant step dt must be in (0, 0.01] s");
  }
  if (mass_current <= 0.0) throw ConfigError("mass_current must be positive");

  const auto offsets = p.rotor_offsets();
  double thrust = 0.0;
  Eigen::Vector3d torque = Eigen::Vector3d::Zero();
  static constexpr double kYawSign[4] = {1.0, -1.0, 1.0, -1.0};
  for (int i = 0; i < 4; ++i) {
    const double u = speeds.omega[i] * speeds.omega[i];
    const double f = effects.factor[i] * p.k_f * u;
    thrust += f;
    torque += offsets[i].cross(Eigen::Vector3d(0.0, 0.0, f));
    torque.z() += kYawSign[i] * p.k_m * u;
  }

  const auto f1 = detail::plant_deriv(state, thrust, torque, mass_current,
                                      p.gravity, external_force, p);
  const auto s2 = detail::advance(state, f1, 0.5 * dt);
  const auto f2 = detail::plant_deriv(s2, thrust, torque, mass_current,
                                      p.gravity, external_force, p);
  const auto s3 = detail::advance(state, f2, 0.5 * dt);
  const auto f3 = detail::plant_deriv(s3, thrust, torque, mass_current,
                                      p.gravity, external_force, p);
  const auto s4 = detail::advance(state, f3, dt);
  const auto f4 = detail::plant_deriv(s4, thrust, torque, mass_current,
                                      p.gravity, external_force, p);

  RigidBodyState out = state;
  out.position += dt / 6.0 * (f1.dp + 2.0 * f2.dp + 2.0 * f3.dp + f4.dp);
  out.velocity += dt / 6.0 * (f1.dv + 2.0 * f2.dv + 2.0 * f3.dv + f4.dv);
  out.attitude.coeffs() += dt / 6.0 * (f1.dq + 2.0 * f2.dq + 2.0 * f3.dq + f4.dq);
  out.body_rates += dt / 6.0 * (f1.dw + 2.0 * f2.dw + 2.0 * f3.dw + f4.dw);

  if (!out.finite()) throw NumericalDivergence("plant state became non-finite");
  out.attitude.normalize();
  return out;
}

}  // namespace pvcoat
