#pragma once

// Oriented plane with a convex polygon boundary (the PV panel) and the
// per-rotor height/overlap queries the ground-effect model consumes.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <vector>

#include "pvcoat/errors.hpp"
#include "pvcoat/geometry.hpp"

namespace pvcoat {

struct SurfaceModel {
  Eigen::Vector3d point{0.0, 0.0, 0.0};   // any point on the plane, world
  Eigen::Vector3d normal{0.0, 0.0, 1.0};  // unit, oriented with normal.z > 0
  std::vector<Eigen::Vector3d> boundary;  // convex polygon on plane, CCW from above

  // Height of the plane (extended) at world (x, y). Requires a non-vertical
  // plane; callers treat vertical planes as "no surface below".
  double plane_z_at(double x, double y) const {
    return point.z() -
           (normal.x() * (x - point.x()) + normal.y() * (y - point.y())) /
               normal.z();
  }

  bool vertical(double tol = 1e-9) const { return std::abs(normal.z()) < tol; }

  // Vertical (world z) distance from p down to the plane extension;
  // positive when the plane lies below p.
  double height_below(const Eigen::Vector3d& p) const {
    return p.z() - plane_z_at(p.x(), p.y());
  }

  geom::Polygon2 footprint() const {
    geom::Polygon2 poly;
    poly.reserve(boundary.size());
    for (const auto& v : boundary) poly.emplace_back(v.x(), v.y());
    return poly;
  }

  void validate() const {
    if (std::abs(normal.norm() - 1.0) > 1e-9) {
      throw ConfigError("surface normal must be unit length");
    }
    if (boundary.size() < 3) {
      throw ConfigError("surface boundary needs at least 3 vertices");
    }
    for (const auto& v : boundary) {
      if (std::abs(normal.dot(v - point)) > 1e-9) {
        throw ConfigError("surface boundary vertex off the plane");
      }
    }
    auto fp = footprint();
    if (!geom::is_convex_ccw(fp)) {
      throw ConfigError("surface boundary must be convex and CCW from above");
    }
  }

  // Axis-aligned rectangle of size (size_x, size_y) centered on `center`,
  // tilted about the world x-axis so height increases along +y.
  static SurfaceModel make_rect(const Eigen::Vector3d& center, double size_x,
                                double size_y, double tilt_rad = 0.0) {
    SurfaceModel s;
    s.point = center;
    const Eigen::Vector3d u(1.0, 0.0, 0.0);
    const Eigen::Vector3d v(0.0, std::cos(tilt_rad), std::sin(tilt_rad));
    s.normal = u.cross(v).normalized();
    if (s.normal.z() < 0.0) s.normal = -s.normal;
    const Eigen::Vector3d du = 0.5 * size_x * u;
    const Eigen::Vector3d dv = 0.5 * size_y * v;
    s.boundary = {center - du - dv, center + du - dv, center + du + dv,
                  center - du + dv};
    return s;
  }
};

// Fraction of the rotor disk whose vertical projection lands inside the
// surface polygon; 0 when the surface is not below the rotor.
inline double overlap_fraction(const Eigen::Vector3d& rotor_center,
                               double rotor_radius,
                               const SurfaceModel& surface) {
  if (rotor_radius <= 0.0) throw ConfigError("rotor radius must be positive");
  if (surface.vertical()) return 0.0;
  if (surface.height_below(rotor_center) <= 0.0) return 0.0;
  return geom::disk_polygon_overlap(
      geom::Vec2(rotor_center.x(), rotor_center.y()), rotor_radius,
      surface.footprint());
}

struct RotorSurfaceQuery {
  std::array<double, 4> height{};   // m, vertical to plane extension, >= 0
  std::array<double, 4> overlap{};  // alpha_i in [0, 1]
};

// Per-rotor vertical height above the plane extension (clamped to >= 0)
// and disk overlap fraction.
inline RotorSurfaceQuery rotor_heights(
    const std::array<Eigen::Vector3d, 4>& rotor_centers, double rotor_radius,
    const SurfaceModel& surface) {
  RotorSurfaceQuery q;
  for (int i = 0; i < 4; ++i) {
    const double h =
        surface.vertical() ? 0.0 : surface.height_below(rotor_centers[i]);
    q.height[i] = std::max(h, 0.0);
    q.overlap[i] = overlap_fraction(rotor_centers[i], rotor_radius, surface);
  }
  return q;
}

}  // namespace pvcoat
