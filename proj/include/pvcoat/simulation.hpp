#pragma once

// Scenario runner: wires plant, controller, geometry and trajectory,
// injects noise/wind, streams the CSV log and accumulates tracking metrics.
// Deterministic for a fixed scenario + seed.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "pvcoat/controller.hpp"
#include "pvcoat/coverage.hpp"
#include "pvcoat/csv.hpp"
#include "pvcoat/dynamics.hpp"
#include "pvcoat/errors.hpp"
#include "pvcoat/ground_effect.hpp"
#include "pvcoat/noise.hpp"
#include "pvcoat/panel_geometry.hpp"
#include "pvcoat/scenario.hpp"
#include "pvcoat/surface.hpp"

namespace pvcoat {

struct RunMetrics {
  Eigen::Vector3d rmse{0.0, 0.0, 0.0};  // m, per axis over the eval window
  double rmse_3d = 0.0;                 // m
  double mean_abs_alt_error = 0.0;      // m, over the eval window
  double final_mean_alt_error = 0.0;    // m, over the run's final window
  double max_deviation = 0.0;           // m, max 3D error over eval window
  std::size_t samples = 0;
  // estimator-vs-truth errors; NaN when noise is disabled
  double est_position_rmse = std::numeric_limits<double>::quiet_NaN();
  double est_attitude_rmse_deg = std::numeric_limits<double>::quiet_NaN();

  nlohmann::json to_json() const {
    nlohmann::json j{{"rmse_x_m", rmse.x()},
                     {"rmse_y_m", rmse.y()},
                     {"rmse_z_m", rmse.z()},
                     {"rmse_3d_m", rmse_3d},
                     {"mean_abs_alt_error_m", mean_abs_alt_error},
                     {"final_mean_alt_error_m", final_mean_alt_error},
                     {"max_deviation_m", max_deviation},
                     {"samples", samples}};
    if (std::isfinite(est_position_rmse)) {
      j["est_position_rmse_m"] = est_position_rmse;
      j["est_attitude_rmse_deg"] = est_attitude_rmse_deg;
    }
    return j;
  }
};

namespace detail {

struct RmseAccumulator {
  Eigen::Vector3d sum_sq{0.0, 0.0, 0.0};
  double sum_abs_z = 0.0;
  double max_dev = 0.0;
  std::size_t n = 0;

  void add(const Eigen::Vector3d& err) {
    sum_sq += err.cwiseProduct(err);
    sum_abs_z += std::abs(err.z());
    max_dev = std::max(max_dev, err.norm());
    ++n;
  }

  void fill(RunMetrics& m) const {
    if (n == 0) return;
    const double inv = 1.0 / static_cast<double>(n);
    m.rmse = (sum_sq * inv).cwiseSqrt();
    m.rmse_3d = std::sqrt(sum_sq.sum() * inv);
    m.mean_abs_alt_error = sum_abs_z * inv;
    m.max_deviation = max_dev;
    m.samples = n;
  }
};

}  // namespace detail

struct TimedError {
  double t = 0.0;
  Eigen::Vector3d error{0.0, 0.0, 0.0};  // m
};

// Per-axis RMSE (and companions) of error samples inside [t0, t1].
inline RunMetrics compute_rmse(std::span<const TimedError> errors, double t0,
                               double t1) {
  detail::RmseAccumulator acc;
  for (const auto& e : errors) {
    if (e.t >= t0 && e.t <= t1) acc.add(e.error);
  }
  if (acc.n == 0) throw EmptyWindow("no samples in evaluation window");
  RunMetrics m;
  acc.fill(m);
  m.final_mean_alt_error = m.mean_abs_alt_error;
  return m;
}

inline const char* kLogHeader =
    "t,px,py,pz,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz,"
    "est_px,est_py,est_pz,est_vx,est_vy,est_vz,"
    "est_qw,est_qx,est_qy,est_qz,est_wx,est_wy,est_wz,"
    "sp_x,sp_y,sp_z,sp_yaw,f0,f1,f2,f3,mass_est,valve";

class ScenarioRunner {
 public:
  explicit ScenarioRunner(Scenario scenario) : sc_(std::move(scenario)) {
    sc_.validate();
    if (sc_.trajectory.type == TrajectoryType::kCoverage) {
      CoverageParams cp;
      cp.speed = sc_.trajectory.speed;
      cp.sweep_spacing = sc_.trajectory.spacing;
      cp.standoff = sc_.trajectory.standoff;
      cp.margin = sc_.trajectory.margin;
      cp.turn_time = sc_.trajectory.turn_time;
      PanelCorners corners;
      for (int i = 0; i < 4; ++i) corners.corners[i] = sc_.surface->boundary[i];
      plan_ = generate_plan(corners, cp);
    }
  }

  const CoveragePlan* plan() const { return plan_ ? &*plan_ : nullptr; }

  TrajectorySample setpoint_at(double t) const {
    TrajectorySample s;
    s.time = t;
    s.yaw = sc_.trajectory.yaw;
    switch (sc_.trajectory.type) {
      case TrajectoryType::kHover:
        s.position = sc_.trajectory.hover_position;
        break;
      case TrajectoryType::kStraight: {
        const Eigen::Vector3d delta = sc_.trajectory.end - sc_.trajectory.start;
        const double dist = delta.norm();
        const double t_move = dist / sc_.trajectory.speed;
        const double local =
            std::clamp(t - sc_.trajectory.settle_s, 0.0, t_move);
        s.position = sc_.trajectory.start + (dist > 0.0 ? local / t_move : 0.0) * delta;
        if (t > sc_.trajectory.settle_s && t < sc_.trajectory.settle_s + t_move) {
          s.velocity = delta / t_move;
        }
        break;
      }
      case TrajectoryType::kCoverage: {
        const double local = t - sc_.trajectory.settle_s;
        TrajectorySample p = sample_plan(*plan_, std::max(local, 0.0));
        s.position = p.position;
        s.velocity = local > 0.0 ? p.velocity : Eigen::Vector3d::Zero();
        s.yaw = p.yaw;
        break;
      }
    }
    return s;
  }

  bool valve_open_at(double t) const {
    switch (sc_.dispensing.mode) {
      case DispensingMode::kOff:
        return false;
      case DispensingMode::kIntervals:
        for (const auto& [a, b] : sc_.dispensing.intervals) {
          if (t >= a && t < b) return true;
        }
        return false;
      case DispensingMode::kPlan:
        return plan_valve_open(*plan_, t - sc_.trajectory.settle_s);
    }
    return false;
  }

  // Builds the surface the controller compensates against: ground truth, or
  // the output of the synthetic detection pipeline when configured.
  std::optional<SurfaceModel> controller_surface() const {
    if (!sc_.surface) return std::nullopt;
    if (!sc_.detection) return sc_.surface;
    const auto& d = *sc_.detection;
    RigidBodyState pose;
    pose.position = setpoint_at(0.0).position;
    PanelCloudSpec spec;
    spec.grid_spacing = d.grid_spacing;
    spec.noise_sigma = d.noise_sigma;
    spec.outlier_fraction = d.outlier_fraction;
    spec.outlier_box = d.outlier_box;
    spec.seed = sc_.seed ^ 0x6d5f3b1cULL;
    const PointCloud cloud = make_panel_cloud(*sc_.surface, pose, spec);
    const auto fit = ransac_plane_fit(cloud, d.epsilon, d.iterations,
                                      sc_.seed ^ 0x1f83d9abULL);
    PointCloud inliers;
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
      if (fit.inlier_mask[i]) inliers.points.push_back(cloud.points[i]);
    }
    const PanelCorners corners = extract_corners(inliers, fit.plane);
    return surface_from_corners(to_world(corners, pose));
  }

  RunMetrics run(std::ostream* log = nullptr) {
    constexpr double kPlantDt = 1e-3;  // 1 kHz plant
    constexpr int kCtrlEvery = 2;      // 500 Hz controller
    const double ctrl_dt = kPlantDt * kCtrlEvery;

    MassEstimator mass_est;
    mass_est.mass_initial = sc_.vehicle.takeoff_mass();
    mass_est.flow_rate = sc_.dispensing.flow_rate;
    mass_est.liquid_density = sc_.dispensing.liquid_density;
    mass_est.volume_capacity = sc_.dispensing.capacity;

    CascadedController controller(sc_.gains, sc_.vehicle, sc_.ground_effect,
                                  mass_est, sc_.toggles);
    SensorNoise noise(sc_.noise, sc_.seed ^ 0x9e3779b97f4a7c15ULL);
    WindDisturbance wind(sc_.wind, sc_.seed ^ 0xd1b54a32d192ed03ULL);
    const std::optional<SurfaceModel> comp_surface = controller_surface();

    const auto offsets = sc_.vehicle.rotor_offsets();
    const double hover_omega =
        std::sqrt(sc_.vehicle.hover_thrust() / (4.0 * sc_.vehicle.k_f));

    RigidBodyState state;
    {
      const TrajectorySample sp0 = setpoint_at(0.0);
      state.position = sp0.position;
      state.attitude = Eigen::Quaterniond(
          Eigen::AngleAxisd(sp0.yaw, Eigen::Vector3d::UnitZ()));
    }
    RotorSpeeds actual_speeds;
    actual_speeds.omega.fill(hover_omega);

    double liquid_mass = sc_.vehicle.liquid_mass_initial;
    CascadedController::Output ctrl{};
    ctrl.speeds = actual_speeds;
    ctrl.mass_estimate = mass_est.mass_initial;
    RigidBodyState est = state;
    TrajectorySample sp = setpoint_at(0.0);
    bool valve = false;

    detail::RmseAccumulator window_acc, final_acc;
    double est_pos_sq = 0.0, est_att_sq = 0.0;
    std::size_t est_n = 0;

    if (log) *log << kLogHeader << "\n";
    const auto write_row = [&](double t) {
      if (!log) return;
      const auto g = csv::format_g9;
      auto& out = *log;
      out << g(t);
      const auto dump_state = [&](const RigidBodyState& s) {
        out << ',' << g(s.position.x()) << ',' << g(s.position.y()) << ','
            << g(s.position.z()) << ',' << g(s.velocity.x()) << ','
            << g(s.velocity.y()) << ',' << g(s.velocity.z()) << ','
            << g(s.attitude.w()) << ',' << g(s.attitude.x()) << ','
            << g(s.attitude.y()) << ',' << g(s.attitude.z()) << ','
            << g(s.body_rates.x()) << ',' << g(s.body_rates.y()) << ','
            << g(s.body_rates.z());
      };
      dump_state(state);
      dump_state(est);
      out << ',' << g(sp.position.x()) << ',' << g(sp.position.y()) << ','
          << g(sp.position.z()) << ',' << g(sp.yaw);
      for (int i = 0; i < 4; ++i) out << ',' << g(ctrl.rotor_forces[i]);
      out << ',' << g(ctrl.mass_estimate) << ',' << (valve ? 1 : 0) << "\n";
    };

    const auto n_steps =
        static_cast<std::size_t>(std::llround(sc_.duration / kPlantDt));
    const double final_t0 = sc_.duration - sc_.evaluation.final_duration;

    for (std::size_t k = 0; k < n_steps; ++k) {
      const double t = static_cast<double>(k) * kPlantDt;

      if (k % kCtrlEvery == 0) {
        valve = valve_open_at(t);
        est = noise.apply(state, ctrl_dt);
        sp = setpoint_at(t);
        ctrl = controller.update(est, sp, comp_surface, valve, ctrl_dt);
        if (sc_.noise.enabled) {
          est_pos_sq += (est.position - state.position).squaredNorm();
          const Eigen::AngleAxisd aa(state.attitude.conjugate() * est.attitude);
          est_att_sq += aa.angle() * aa.angle();
          ++est_n;
        }
      }

      // motor lag (config extension; default instantaneous)
      if (sc_.vehicle.motor_time_constant > 0.0) {
        const double a = kPlantDt / sc_.vehicle.motor_time_constant;
        for (int i = 0; i < 4; ++i) {
          actual_speeds.omega[i] +=
              a * (ctrl.speeds.omega[i] - actual_speeds.omega[i]);
        }
      } else {
        actual_speeds = ctrl.speeds;
      }

      RotorThrustMultipliers effects;
      if (sc_.plant_ground_effect && sc_.surface) {
        const Eigen::Matrix3d r = state.rotation();
        std::array<Eigen::Vector3d, 4> rotor_pos;
        for (int i = 0; i < 4; ++i) rotor_pos[i] = state.position + r * offsets[i];
        const auto q =
            rotor_heights(rotor_pos, sc_.vehicle.rotor_radius, *sc_.surface);
        effects.factor =
            plant_thrust_multipliers(q.height, q.overlap, sc_.ground_effect);
      }
      if (sc_.thrust_efficiency_rate > 0.0) {
        const double eff = std::max(1.0 - sc_.thrust_efficiency_rate * t,
                                    sc_.thrust_efficiency_floor);
        for (auto& f : effects.factor) f *= eff;
      }

      const Eigen::Vector3d wind_force = wind.step(kPlantDt);
      const double mass_true = sc_.vehicle.mass_empty + liquid_mass;
      state = step(state, actual_speeds, sc_.vehicle, effects, mass_true,
                   kPlantDt, wind_force);
      if (valve && liquid_mass > 0.0) {
        liquid_mass = std::max(
            0.0, liquid_mass - sc_.dispensing.flow_rate *
                                   sc_.dispensing.liquid_density * kPlantDt);
      }

      const double t_next = static_cast<double>(k + 1) * kPlantDt;
      const TrajectorySample sp_next = setpoint_at(t_next);
      const Eigen::Vector3d err = state.position - sp_next.position;
      if (in_eval_window(t_next, sp_next)) window_acc.add(err);
      if (t_next >= final_t0) final_acc.add(err);
      if ((k + 1) % static_cast<std::size_t>(sc_.log_decimation) == 0) {
        write_row(t_next);
      }
    }

    RunMetrics metrics;
    window_acc.fill(metrics);
    if (window_acc.n == 0) throw EmptyWindow("evaluation window is empty");
    metrics.final_mean_alt_error =
        final_acc.n > 0 ? final_acc.sum_abs_z / static_cast<double>(final_acc.n)
                        : 0.0;
    if (est_n > 0) {
      metrics.est_position_rmse =
          std::sqrt(est_pos_sq / static_cast<double>(est_n));
      metrics.est_attitude_rmse_deg =
          std::sqrt(est_att_sq / static_cast<double>(est_n)) * 180.0 / M_PI;
    }
    return metrics;
  }

 private:
  bool in_eval_window(double t, const TrajectorySample& sp) const {
    switch (sc_.evaluation.window) {
      case EvalWindow::kFull:
        return true;
      case EvalWindow::kInterval:
        return t >= sc_.evaluation.t0 && t <= sc_.evaluation.t1;
      case EvalWindow::kOverPanel:
        return geom::point_in_convex({sp.position.x(), sp.position.y()},
                                     sc_.surface->footprint());
      case EvalWindow::kFinal:
        return t >= sc_.duration - sc_.evaluation.final_duration;
    }
    return true;
  }

  Scenario sc_;
  std::optional<CoveragePlan> plan_;
};

inline RunMetrics run_scenario(const Scenario& scenario,
                               std::ostream* log = nullptr) {
  ScenarioRunner runner(scenario);
  return runner.run(log);
}

}  // namespace pvcoat
