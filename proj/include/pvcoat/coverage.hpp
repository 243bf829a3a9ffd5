#pragma once

// Boustrophedon coverage plans over a panel quadrilateral: constant-speed
// sweeps parallel to the panel's short side, advancing along the long side,
// standoff measured along world z above the panel plane.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "pvcoat/controller.hpp"
#include "pvcoat/errors.hpp"
#include "pvcoat/geometry.hpp"
#include "pvcoat/panel_geometry.hpp"
#include "pvcoat/surface.hpp"

namespace pvcoat {

struct CoverageParams {
  double speed = 0.5;          // m/s along sweeps
  double sweep_spacing = 0.07; // m between consecutive sweep lines
  double standoff = 0.27;      // m above the panel plane, along world z
  double margin = 0.0;         // m inset from the panel edges
  double turn_time = 1.0;      // s to shift between sweeps, valve closed
  double sample_dt = 0.02;     // s between emitted trajectory samples

  void validate() const {
    if (speed <= 0.0 || sweep_spacing <= 0.0 || standoff <= 0.0 ||
        margin < 0.0 || turn_time <= 0.0 || sample_dt <= 0.0) {
      throw ConfigError("coverage parameters out of range");
    }
  }
};

struct ValveInterval {
  double open = 0.0;   // s
  double close = 0.0;  // s
};

struct CoveragePlan {
  std::vector<TrajectorySample> samples;      // strictly increasing in time
  std::vector<ValveInterval> valve_schedule;  // one interval per sweep
  std::vector<Eigen::Vector3d> sweep_starts;  // m, world (at standoff height)
  std::vector<Eigen::Vector3d> sweep_ends;
  int sweep_count = 0;
  double sweep_length = 0.0;  // m
};

namespace detail {

// Distance advanced along a trapezoidal speed profile (accel/cruise/decel =
// T/4, T/2, T/4) normalized to total distance 1 at t = T.
inline double trapezoid_progress(double t, double total_time) {
  const double ta = 0.25 * total_time;
  const double vp = 1.0 / (0.75 * total_time);  // peak rate, 1/s
  t = std::clamp(t, 0.0, total_time);
  if (t <= ta) return 0.5 * vp / ta * t * t;
  if (t <= total_time - ta) return 0.5 * vp * ta + vp * (t - ta);
  const double tr = total_time - t;
  return 1.0 - 0.5 * vp / ta * tr * tr;
}

inline double trapezoid_rate(double t, double total_time) {
  const double ta = 0.25 * total_time;
  const double vp = 1.0 / (0.75 * total_time);
  if (t < 0.0 || t > total_time) return 0.0;
  if (t <= ta) return vp * t / ta;
  if (t <= total_time - ta) return vp;
  return vp * (total_time - t) / ta;
}

}  // namespace detail

// Builds the sweep plan from the four panel corners. Sweep lines use exact
// spacing, centered inside the margin-inset span so no interior point is
// farther than spacing/2 from a line; line count is floor(span/spacing)+1.
inline CoveragePlan generate_plan(const PanelCorners& corners,
                                  const CoverageParams& params) {
  params.validate();
  const SurfaceModel panel = surface_from_corners(corners);

  std::vector<geom::Vec2> fp2(panel.boundary.size());
  for (std::size_t i = 0; i < panel.boundary.size(); ++i) {
    fp2[i] = {panel.boundary[i].x(), panel.boundary[i].y()};
  }
  geom::OrientedRect rect = geom::min_area_rect(fp2);

  // sweep axis = shorter extent; advance axis = longer extent
  geom::Vec2 sweep_axis = rect.axis_u, advance_axis = rect.axis_v;
  double half_sweep = rect.half_u, half_advance = rect.half_v;
  if (half_sweep > half_advance) {
    std::swap(sweep_axis, advance_axis);
    std::swap(half_sweep, half_advance);
  }
  // advance along +y (per the recoating rule), sweep axis toward +x
  if (advance_axis.y() < 0.0 ||
      (advance_axis.y() == 0.0 && advance_axis.x() < 0.0)) {
    advance_axis = -advance_axis;
  }
  if (sweep_axis.x() < 0.0 || (sweep_axis.x() == 0.0 && sweep_axis.y() < 0.0)) {
    sweep_axis = -sweep_axis;
  }

  const double sweep_len = 2.0 * half_sweep - 2.0 * params.margin;
  const double span = 2.0 * half_advance - 2.0 * params.margin;
  if (sweep_len <= 0.0) throw ConfigError("margin exceeds panel half extent");
  if (span < params.sweep_spacing) {
    throw SpacingTooLarge("fewer than 2 sweep lines fit the panel span");
  }
  const int lines =
      static_cast<int>(std::floor(span / params.sweep_spacing + 1e-9)) + 1;
  const double used = (lines - 1) * params.sweep_spacing;

  const auto lift = [&](const geom::Vec2& p) {
    return Eigen::Vector3d(p.x(), p.y(),
                           panel.plane_z_at(p.x(), p.y()) + params.standoff);
  };

  CoveragePlan plan;
  plan.sweep_count = lines;
  plan.sweep_length = sweep_len;

  const double sweep_time = sweep_len / params.speed;

  struct Segment {
    Eigen::Vector3d a, b;
    double t0, duration;
    bool sweep;
  };
  std::vector<Segment> segments;
  double t = 0.0;
  for (int k = 0; k < lines; ++k) {
    const double w = -0.5 * used + k * params.sweep_spacing;
    const geom::Vec2 line_center = rect.center + w * advance_axis;
    const geom::Vec2 lo = line_center - half_sweep * sweep_axis +
                          params.margin * sweep_axis;
    const geom::Vec2 hi = line_center + half_sweep * sweep_axis -
                          params.margin * sweep_axis;
    const Eigen::Vector3d a = lift(k % 2 == 0 ? lo : hi);
    const Eigen::Vector3d b = lift(k % 2 == 0 ? hi : lo);
    segments.push_back({a, b, t, sweep_time, true});
    plan.sweep_starts.push_back(a);
    plan.sweep_ends.push_back(b);
    plan.valve_schedule.push_back({t, t + sweep_time});
    t += sweep_time;
    if (k + 1 < lines) {
      const geom::Vec2 next_center =
          rect.center + (w + params.sweep_spacing) * advance_axis;
      const geom::Vec2 next_end = k % 2 == 0
                                      ? geom::Vec2(next_center +
                                                   (half_sweep - params.margin) *
                                                       sweep_axis)
                                      : geom::Vec2(next_center -
                                                   (half_sweep - params.margin) *
                                                       sweep_axis);
      segments.push_back({b, lift(next_end), t, params.turn_time, false});
      t += params.turn_time;
    }
  }

  for (const auto& seg : segments) {
    const Eigen::Vector3d delta = seg.b - seg.a;
    const double dist = delta.norm();
    const Eigen::Vector3d dir = dist > 0.0 ? Eigen::Vector3d(delta / dist)
                                           : Eigen::Vector3d::Zero();
    const auto emit = [&](double local) {
      TrajectorySample s;
      s.time = seg.t0 + local;
      if (seg.sweep) {
        const double frac = local / seg.duration;
        s.position = seg.a + frac * delta;
        s.velocity = dir * params.speed;
      } else {
        s.position = seg.a + detail::trapezoid_progress(local, seg.duration) * delta;
        s.velocity = dir * dist * detail::trapezoid_rate(local, seg.duration);
      }
      s.yaw = 0.0;
      if (!plan.samples.empty() && s.time <= plan.samples.back().time + 1e-12) {
        return;
      }
      plan.samples.push_back(s);
    };
    if (plan.samples.empty()) emit(0.0);
    for (double local = params.sample_dt; local < seg.duration - 1e-12;
         local += params.sample_dt) {
      emit(local);
    }
    emit(seg.duration);
  }
  return plan;
}

inline double plan_duration(const CoveragePlan& plan) {
  if (plan.samples.empty()) throw ConfigError("plan is empty");
  return plan.samples.back().time;
}

inline bool plan_valve_open(const CoveragePlan& plan, double t) {
  for (const auto& iv : plan.valve_schedule) {
    if (t >= iv.open && t < iv.close) return true;
    if (iv.open > t) break;
  }
  return false;
}

// Linear interpolation between plan samples; clamps outside the plan with
// zero velocity.
inline TrajectorySample sample_plan(const CoveragePlan& plan, double t) {
  if (plan.samples.empty()) throw ConfigError("plan is empty");
  if (t <= plan.samples.front().time) {
    TrajectorySample s = plan.samples.front();
    s.time = t;
    s.velocity.setZero();
    return s;
  }
  if (t >= plan.samples.back().time) {
    TrajectorySample s = plan.samples.back();
    s.time = t;
    s.velocity.setZero();
    return s;
  }
  const auto it = std::lower_bound(
      plan.samples.begin(), plan.samples.end(), t,
      [](const TrajectorySample& s, double tt) { return s.time < tt; });
  const TrajectorySample& hi = *it;
  const TrajectorySample& lo = *(it - 1);
  const double f = (t - lo.time) / (hi.time - lo.time);
  TrajectorySample s;
  s.time = t;
  s.position = lo.position + f * (hi.position - lo.position);
  s.velocity = lo.velocity + f * (hi.velocity - lo.velocity);
  s.yaw = lo.yaw + f * (hi.yaw - lo.yaw);
  return s;
}

}  // namespace pvcoat
