#pragma once

// Cheeseman-style ground-effect model: thrust ratio, per-rotor plant
// amplification, clipped compensation ratio and least-squares rho
// identification from hover data.
//
// Convention: thrust_ratio = T_in / T_out = 1 - rho (r / 4h)^2, so a rotor
// near the surface produces MORE thrust than commanded and the plant-side
// multiplier is 1/ratio.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "pvcoat/errors.hpp"

namespace pvcoat {

struct GroundEffectModel {
  double rho = 5.71;          // fitted coefficient, dimensionless
  double rotor_radius = 0.10; // m
  double h_floor = 0.08;      // m, plant-side clamp; model diverges below

  void validate() const {
    if (rho <= 0.0) throw ConfigError("ground-effect rho must be positive");
    if (rotor_radius <= 0.0) throw ConfigError("rotor radius must be positive");
    if (h_floor <= 0.0) throw ConfigError("h_floor must be positive");
    const double x = rotor_radius / (4.0 * h_floor);
    if (1.0 - rho * x * x <= 0.0) {
      throw InvalidModel("ground-effect ratio non-positive at h_floor");
    }
  }
};

// T_in / T_out at height h. May return <= 0 below the validity floor
// h = (r/4) sqrt(rho); callers guard.
inline double thrust_ratio(double h, const GroundEffectModel& m) {
  if (!(h > 0.0)) throw ConfigError("height must be positive");
  const double x = m.rotor_radius / (4.0 * h);
  return 1.0 - m.rho * x * x;
}

// Compensation factor applied to a commanded rotor force: height clipped to
// max(h, h_des) so compensation stays constant below the desired height.
inline double compensated_force_ratio(double alpha, double h,
                                      const GroundEffectModel& m,
                                      double h_des) {
  if (!(h_des > 0.0)) throw ConfigError("h_des must be positive");
  if (alpha < 0.0 || alpha > 1.0) throw ConfigError("alpha must be in [0, 1]");
  const double x = m.rotor_radius / (4.0 * std::max(h, h_des));
  const double ratio = 1.0 - alpha * m.rho * x * x;
  if (ratio <= 0.0) {
    throw InvalidModel("compensation ratio non-positive at clipped height");
  }
  return ratio;
}

// Plant-side per-rotor amplification factors 1 / (1 - alpha rho (r/4h)^2)
// with h clamped at h_floor to stay inside the model's validity range.
inline std::array<double, 4> plant_thrust_multipliers(
    const std::array<double, 4>& heights, const std::array<double, 4>& overlaps,
    const GroundEffectModel& m) {
  std::array<double, 4> factors;
  for (int i = 0; i < 4; ++i) {
    const double h = std::max(heights[i], m.h_floor);
    const double x = m.rotor_radius / (4.0 * h);
    const double ratio = 1.0 - overlaps[i] * m.rho * x * x;
    factors[i] = 1.0 / ratio;  // validate() guarantees ratio > 0 at h_floor
  }
  return factors;
}

// Actual thrust produced per rotor for given commanded forces.
inline std::array<double, 4> apply_plant_ground_effect(
    const std::array<double, 4>& commanded_force,
    const std::array<double, 4>& heights, const std::array<double, 4>& overlaps,
    const GroundEffectModel& m) {
  const auto factors = plant_thrust_multipliers(heights, overlaps, m);
  std::array<double, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = commanded_force[i] * factors[i];
  return out;
}

struct HoverSample {
  double height = 0.0;     // m
  double thrust_in = 0.0;  // N, commanded thrust needed to hold hover
  double mass = 0.0;       // kg
};

// Least-squares rho from hover data: at hover T_out = m g, so
// y = 1 - T_in/(m g) = rho x with x = (r / 4h)^2 and rho = sum(xy)/sum(x^2).
inline double fit_rho(std::span<const HoverSample> samples, double rotor_radius,
                      double gravity) {
  if (rotor_radius <= 0.0 || gravity <= 0.0) {
    throw ConfigError("fit_rho needs positive radius and gravity");
  }
  double sxy = 0.0, sxx = 0.0;
  for (const auto& s : samples) {
    if (!(s.height > 0.0) || !(s.thrust_in > 0.0) || !(s.mass > 0.0)) {
      throw ConfigError("hover samples need positive h, T_in and mass");
    }
    const double x = std::pow(rotor_radius / (4.0 * s.height), 2);
    const double y = 1.0 - s.thrust_in / (s.mass * gravity);
    sxy += x * y;
    sxx += x * x;
  }
  if (sxx == 0.0) throw DegenerateFit("hover samples carry no height information");
  return sxy / sxx;
}

}  // namespace pvcoat
