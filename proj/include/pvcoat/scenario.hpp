#pragma once

// Declarative experiment description (versioned JSON schema) consumed by
// the simulation harness. See docs/formats.md for the schema.

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "pvcoat/controller.hpp"
#include "pvcoat/dynamics.hpp"
#include "pvcoat/errors.hpp"
#include "pvcoat/ground_effect.hpp"
#include "pvcoat/noise.hpp"
#include "pvcoat/panel_geometry.hpp"
#include "pvcoat/surface.hpp"

namespace pvcoat {

inline constexpr int kScenarioSchemaVersion = 1;

enum class TrajectoryType { kHover, kStraight, kCoverage };

struct TrajectorySpec {
  TrajectoryType type = TrajectoryType::kHover;
  Eigen::Vector3d hover_position{0.0, 0.0, 1.0};
  Eigen::Vector3d start{0.0, 0.0, 0.0};
  Eigen::Vector3d end{0.0, 0.0, 0.0};
  double speed = 0.5;      // m/s (straight, coverage)
  double settle_s = 3.0;   // hover-in-place lead-in
  double yaw = 0.0;        // rad
  // coverage only
  double standoff = 0.27;
  double spacing = 0.07;
  double margin = 0.0;
  double turn_time = 1.0;
};

enum class DispensingMode { kOff, kIntervals, kPlan };

struct DispensingSpec {
  DispensingMode mode = DispensingMode::kOff;
  std::vector<std::pair<double, double>> intervals;  // s, [open, close)
  double flow_rate = 2.5e-6;      // m^3/s
  double liquid_density = 1000.0; // kg/m^3
  double capacity = 1.5e-4;       // m^3
  double pressure_kpa = 240.0;    // metadata only; pressure decay not modeled
};

enum class EvalWindow { kFull, kInterval, kOverPanel, kFinal };

struct EvaluationSpec {
  EvalWindow window = EvalWindow::kFull;
  double t0 = 0.0;
  double t1 = 0.0;
  double final_duration = 2.0;  // s, for kFinal and the final-error metric
};

// Synthetic detection pipeline config: when present, the controller-side
// surface comes from RANSAC + corner extraction on a generated cloud rather
// than ground truth.
struct DetectionSpec {
  double grid_spacing = 0.01;
  double noise_sigma = 0.002;
  double outlier_fraction = 0.0;
  double outlier_box = 2.0;
  double epsilon = 0.01;
  int iterations = 500;
};

struct Scenario {
  std::string name;
  std::string description;
  double duration = 0.0;  // s
  std::uint64_t seed = 1;

  VehicleParams vehicle;
  std::optional<SurfaceModel> surface;
  std::optional<DetectionSpec> detection;
  TrajectorySpec trajectory;

  ControllerGains gains;
  ControlToggles toggles;
  bool plant_ground_effect = true;
  GroundEffectModel ground_effect;
  // battery-voltage decay: plant thrust efficiency ramps down at this rate,
  // left to the position integrator to absorb; 0 disables it
  double thrust_efficiency_rate = 0.0;  // 1/s
  double thrust_efficiency_floor = 0.8;

  SensorNoiseModel noise;
  WindModel wind;
  DispensingSpec dispensing;
  EvaluationSpec evaluation;

  int log_decimation = 10;  // plant steps per log row
  std::string output_path;  // optional default output directory

  void validate() const {
    if (!(duration > 0.0)) throw ConfigError("duration_s must be positive");
    if (log_decimation < 1) throw ConfigError("log decimation must be >= 1");
    vehicle.validate();
    gains.validate();
    ground_effect.validate();
    noise.validate();
    wind.validate();
    if (surface) surface->validate();
    if (trajectory.type == TrajectoryType::kCoverage && !surface) {
      throw ConfigError("coverage trajectory requires a surface");
    }
    if (detection && !surface) {
      throw ConfigError("detection requires a surface to observe");
    }
    if (evaluation.window == EvalWindow::kOverPanel && !surface) {
      throw ConfigError("over_panel evaluation requires a surface");
    }
    if (dispensing.mode == DispensingMode::kPlan &&
        trajectory.type != TrajectoryType::kCoverage) {
      throw ConfigError("plan-driven dispensing requires a coverage trajectory");
    }
    for (const auto& [a, b] : dispensing.intervals) {
      if (!(b > a) || a < 0.0) throw ConfigError("bad dispensing interval");
    }
    if (!(toggles.h_des > 0.0)) throw ConfigError("h_des_m must be positive");
    if (thrust_efficiency_rate < 0.0 || thrust_efficiency_floor <= 0.0 ||
        thrust_efficiency_floor > 1.0) {
      throw ConfigError("thrust efficiency decay parameters out of range");
    }
  }

  static Scenario from_json(const nlohmann::json& j);
  static Scenario load(const std::string& path);
};

namespace detail {

inline Eigen::Vector3d vec3(const nlohmann::json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError(key + " must be an array of 3 numbers");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline Eigen::Vector3d vec3_or_scalar(const nlohmann::json& j,
                                      const std::string& key) {
  if (j.is_number()) {
    const double v = j.get<double>();
    return {v, v, v};
  }
  return vec3(j, key);
}

template <typename T>
T get_or(const nlohmann::json& j, const std::string& key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

}  // namespace detail

inline Scenario Scenario::from_json(const nlohmann::json& j) {
  using detail::get_or;
  using detail::vec3;
  using detail::vec3_or_scalar;
  constexpr double kDeg = M_PI / 180.0;

  if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
  if (get_or<int>(j, "version", -1) != kScenarioSchemaVersion) {
    throw ConfigError("scenario schema version must be " +
                      std::to_string(kScenarioSchemaVersion));
  }

  Scenario s;
  s.name = get_or<std::string>(j, "name", "unnamed");
  s.description = get_or<std::string>(j, "description", "");
  if (!j.contains("duration_s")) throw ConfigError("duration_s is required");
  s.duration = j.at("duration_s").get<double>();
  s.seed = get_or<std::uint64_t>(j, "seed", 1);

  if (j.contains("vehicle") && !j.at("vehicle").is_null()) {
    const auto& v = j.at("vehicle");
    s.vehicle.mass_empty = get_or(v, "mass_empty_kg", s.vehicle.mass_empty);
    s.vehicle.liquid_mass_initial =
        get_or(v, "liquid_mass_initial_kg", s.vehicle.liquid_mass_initial);
    if (v.contains("inertia_diag")) {
      s.vehicle.inertia =
          vec3(v.at("inertia_diag"), "vehicle.inertia_diag").asDiagonal();
    }
    s.vehicle.arm_length = get_or(v, "arm_length_m", s.vehicle.arm_length);
    s.vehicle.k_f = get_or(v, "k_f", s.vehicle.k_f);
    s.vehicle.k_m = get_or(v, "k_m", s.vehicle.k_m);
    s.vehicle.rotor_radius = get_or(v, "rotor_radius_m", s.vehicle.rotor_radius);
    s.vehicle.gravity = get_or(v, "gravity", s.vehicle.gravity);
    s.vehicle.max_rotor_speed =
        get_or(v, "max_rotor_speed_rad_s", s.vehicle.max_rotor_speed);
    s.vehicle.motor_time_constant =
        get_or(v, "motor_time_constant_s", s.vehicle.motor_time_constant);
  }

  if (j.contains("surface") && !j.at("surface").is_null()) {
    const auto& sj = j.at("surface");
    const std::string type = get_or<std::string>(sj, "type", "rect");
    if (type == "rect") {
      if (!sj.contains("center") || !sj.contains("size")) {
        throw ConfigError("rect surface needs center and size");
      }
      const auto& size = sj.at("size");
      if (!size.is_array() || size.size() != 2) {
        throw ConfigError("surface.size must be [size_x, size_y]");
      }
      s.surface = SurfaceModel::make_rect(
          vec3(sj.at("center"), "surface.center"), size[0].get<double>(),
          size[1].get<double>(), get_or(sj, "tilt_deg", 0.0) * kDeg);
    } else if (type == "corners") {
      if (!sj.contains("corners") || sj.at("corners").size() != 4) {
        throw ConfigError("corners surface needs 4 corner points");
      }
      PanelCorners corners;
      for (int i = 0; i < 4; ++i) {
        corners.corners[i] = vec3(sj.at("corners")[i], "surface.corners");
      }
      s.surface = surface_from_corners(corners);
    } else {
      throw ConfigError("unknown surface type '" + type + "'");
    }
  }

  if (j.contains("detection") && !j.at("detection").is_null()) {
    const auto& dj = j.at("detection");
    DetectionSpec d;
    d.grid_spacing = get_or(dj, "grid_spacing_m", d.grid_spacing);
    d.noise_sigma = get_or(dj, "noise_sigma_m", d.noise_sigma);
    d.outlier_fraction = get_or(dj, "outlier_fraction", d.outlier_fraction);
    d.outlier_box = get_or(dj, "outlier_box_m", d.outlier_box);
    d.epsilon = get_or(dj, "epsilon_m", d.epsilon);
    d.iterations = get_or(dj, "iterations", d.iterations);
    s.detection = d;
  }

  if (!j.contains("trajectory")) throw ConfigError("trajectory is required");
  {
    const auto& tj = j.at("trajectory");
    const std::string type = get_or<std::string>(tj, "type", "hover");
    s.trajectory.yaw = get_or(tj, "yaw_deg", 0.0) * kDeg;
    s.trajectory.settle_s = get_or(tj, "settle_s", s.trajectory.settle_s);
    if (type == "hover") {
      s.trajectory.type = TrajectoryType::kHover;
      if (tj.contains("position")) {
        s.trajectory.hover_position = vec3(tj.at("position"), "trajectory.position");
      }
    } else if (type == "straight") {
      s.trajectory.type = TrajectoryType::kStraight;
      if (!tj.contains("start") || !tj.contains("end")) {
        throw ConfigError("straight trajectory needs start and end");
      }
      s.trajectory.start = vec3(tj.at("start"), "trajectory.start");
      s.trajectory.end = vec3(tj.at("end"), "trajectory.end");
      s.trajectory.speed = get_or(tj, "speed_mps", s.trajectory.speed);
      if (!(s.trajectory.speed > 0.0)) throw ConfigError("speed must be positive");
    } else if (type == "coverage") {
      s.trajectory.type = TrajectoryType::kCoverage;
      s.trajectory.speed = get_or(tj, "speed_mps", s.trajectory.speed);
      s.trajectory.standoff = get_or(tj, "standoff_m", s.trajectory.standoff);
      s.trajectory.spacing = get_or(tj, "spacing_m", s.trajectory.spacing);
      s.trajectory.margin = get_or(tj, "margin_m", s.trajectory.margin);
      s.trajectory.turn_time = get_or(tj, "turn_time_s", s.trajectory.turn_time);
    } else {
      throw ConfigError("unknown trajectory type '" + type + "'");
    }
  }

  if (j.contains("control") && !j.at("control").is_null()) {
    const auto& c = j.at("control");
    s.toggles.ge_comp = get_or(c, "ge_comp", s.toggles.ge_comp);
    s.toggles.mass_comp = get_or(c, "mass_comp", s.toggles.mass_comp);
    s.toggles.integrator = get_or(c, "integrator", s.toggles.integrator);
    s.toggles.h_des = get_or(c, "h_des_m", s.toggles.h_des);
    if (c.contains("gains") && !c.at("gains").is_null()) {
      const auto& g = c.at("gains");
      if (g.contains("pos_p")) s.gains.pos_p = vec3_or_scalar(g.at("pos_p"), "gains.pos_p");
      if (g.contains("pos_i")) s.gains.pos_i = vec3_or_scalar(g.at("pos_i"), "gains.pos_i");
      if (g.contains("pos_d")) s.gains.pos_d = vec3_or_scalar(g.at("pos_d"), "gains.pos_d");
      if (g.contains("att_p")) s.gains.att_p = vec3_or_scalar(g.at("att_p"), "gains.att_p");
      if (g.contains("rate_p")) s.gains.rate_p = vec3_or_scalar(g.at("rate_p"), "gains.rate_p");
      s.gains.integrator_limit =
          get_or(g, "integrator_limit", s.gains.integrator_limit);
    }
  }

  if (j.contains("plant") && !j.at("plant").is_null()) {
    const auto& p = j.at("plant");
    s.plant_ground_effect = get_or(p, "ground_effect", s.plant_ground_effect);
    s.ground_effect.rho = get_or(p, "rho", s.ground_effect.rho);
    s.ground_effect.h_floor = get_or(p, "h_floor_m", s.ground_effect.h_floor);
    s.thrust_efficiency_rate =
        get_or(p, "thrust_efficiency_rate_per_s", s.thrust_efficiency_rate);
    s.thrust_efficiency_floor =
        get_or(p, "thrust_efficiency_floor", s.thrust_efficiency_floor);
  }
  s.ground_effect.rotor_radius = s.vehicle.rotor_radius;

  if (j.contains("noise") && !j.at("noise").is_null()) {
    const auto& n = j.at("noise");
    s.noise.enabled = get_or(n, "enabled", false);
    if (n.contains("position_sigma_m")) {
      s.noise.position_sigma =
          vec3_or_scalar(n.at("position_sigma_m"), "noise.position_sigma_m");
    }
    s.noise.attitude_sigma = get_or(n, "attitude_sigma_rad", 0.0);
    s.noise.correlation_time =
        get_or(n, "correlation_time_s", s.noise.correlation_time);
  }

  if (j.contains("wind") && !j.at("wind").is_null()) {
    const auto& w = j.at("wind");
    s.wind.enabled = get_or(w, "enabled", false);
    if (w.contains("mean_force_n")) {
      s.wind.mean_force = vec3(w.at("mean_force_n"), "wind.mean_force_n");
    }
    s.wind.sigma_force = get_or(w, "sigma_force_n", 0.0);
    s.wind.correlation_time =
        get_or(w, "correlation_time_s", s.wind.correlation_time);
  }

  if (j.contains("dispensing") && !j.at("dispensing").is_null()) {
    const auto& d = j.at("dispensing");
    const std::string mode = get_or<std::string>(d, "mode", "off");
    if (mode == "off") {
      s.dispensing.mode = DispensingMode::kOff;
    } else if (mode == "intervals") {
      s.dispensing.mode = DispensingMode::kIntervals;
      if (d.contains("intervals_s")) {
        for (const auto& iv : d.at("intervals_s")) {
          if (!iv.is_array() || iv.size() != 2) {
            throw ConfigError("intervals_s entries must be [open, close]");
          }
          s.dispensing.intervals.emplace_back(iv[0].get<double>(),
                                              iv[1].get<double>());
        }
      }
    } else if (mode == "plan") {
      s.dispensing.mode = DispensingMode::kPlan;
    } else {
      throw ConfigError("unknown dispensing mode '" + mode + "'");
    }
    s.dispensing.flow_rate = get_or(d, "flow_rate_ml_per_s", 2.5) * 1e-6;
    s.dispensing.liquid_density = get_or(d, "density_kg_per_m3", 1000.0);
    s.dispensing.capacity = get_or(d, "capacity_ml", 150.0) * 1e-6;
    s.dispensing.pressure_kpa = get_or(d, "pressure_kpa", 240.0);
  }

  if (j.contains("evaluation") && !j.at("evaluation").is_null()) {
    const auto& e = j.at("evaluation");
    const std::string w = get_or<std::string>(e, "window", "full");
    if (w == "full") {
      s.evaluation.window = EvalWindow::kFull;
    } else if (w == "interval") {
      s.evaluation.window = EvalWindow::kInterval;
      s.evaluation.t0 = get_or(e, "t0_s", 0.0);
      s.evaluation.t1 = get_or(e, "t1_s", s.duration);
    } else if (w == "over_panel") {
      s.evaluation.window = EvalWindow::kOverPanel;
    } else if (w == "final") {
      s.evaluation.window = EvalWindow::kFinal;
    } else {
      throw ConfigError("unknown evaluation window '" + w + "'");
    }
    s.evaluation.final_duration =
        get_or(e, "final_duration_s", s.evaluation.final_duration);
  }

  if (j.contains("log") && !j.at("log").is_null()) {
    s.log_decimation = get_or(j.at("log"), "decimation", s.log_decimation);
  }
  if (j.contains("output") && !j.at("output").is_null()) {
    s.output_path = get_or<std::string>(j.at("output"), "path", "");
  }

  s.validate();
  return s;
}

inline Scenario Scenario::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("scenario JSON parse error in " + path + ": " + e.what());
  }
  try {
    return from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("scenario field error in " + path + ": " + e.what());
  }
}

}  // namespace pvcoat
